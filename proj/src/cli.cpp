#include "imb/cli.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "imb/data.hpp"
#include "imb/errors.hpp"
#include "imb/metrics.hpp"
#include "imb/parallel.hpp"
#include "imb/report.hpp"
#include "imb/serialize.hpp"
#include "imb/trainer.hpp"

namespace imb::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory '" + dir.string() + "': " + ec.message());
}

void check_split_name(const std::string& split) {
  if (split != "train" && split != "val" && split != "test")
    throw ContractError("split must be train, val or test (got '" + split + "')");
}

data::Dataset load_split(const RunConfig& c, const std::string& split) {
  const fs::path path = c.splits_path() / (split + ".csv");
  if (!fs::exists(path)) throw IoError("missing prepared split '" + path.string() + "' (run prepare first)");
  return data::load_csv(path, c.label_col);
}

json weights_json(const resample::ClassWeights& w) {
  return {{"minority_label", w.minority_label},
          {"w_minority", w.w_minority},
          {"w_majority", w.w_majority},
          {"n_major", w.n_major},
          {"n_minor", w.n_minor}};
}

void write_effective_config(const RunConfig& c, const std::string& command) {
  write_text(fs::path(c.out_dir) / ("effective_config_" + command + ".json"),
             json::parse(run_config_to_json(c)).dump(2) + "\n");
}

std::string checkpoint_extra(const dpgm::FitResult& fit) {
  json extra{{"iterations", fit.iterations}, {"class_weights", weights_json(fit.weights)}};
  if (fit.adversary) extra["adversary"] = json::parse(adversary::adversary_to_json(*fit.adversary, fit.adv_config));
  return extra.dump();
}

void save_training_outputs(const RunConfig& c, const dpgm::FitResult& fit, const data::Dataset& val) {
  const fs::path out(c.out_dir);
  write_text(out / "checkpoint.json", dpgm::to_json(fit.model, checkpoint_extra(fit)));
  if (!fit.trace.records.empty()) report::export_loss_csv(fit.trace, out / "trace.csv");
  const auto scores = dpgm::predict_proba(fit.model, val.features);
  const auto m = metrics::evaluate(scores, val.labels, 0.5);
  write_text(out / "metrics_val.json", metrics::to_json(m, json{{"split", "val"}, {"rows", val.size()}}.dump()));
}

dpgm::VariationalClassifier load_checkpoint(const RunConfig& c) {
  return dpgm::model_from_json(read_text(c.checkpoint_path()));
}

void require_dim(const dpgm::VariationalClassifier& model, const data::Dataset& ds, const std::string& split) {
  if (ds.dim() != model.input_dim)
    throw DimensionError("checkpoint expects d = " + std::to_string(model.input_dim) + " features but split '" +
                         split + "' has " + std::to_string(ds.dim()));
}

}  // namespace

fs::path RunConfig::checkpoint_path() const {
  return checkpoint.empty() ? fs::path(out_dir) / "checkpoint.json" : fs::path(checkpoint);
}

RunConfig run_config_from_json(const std::string& text) {
  RunConfig c;
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ContractError(std::string("config: ") + e.what());
  }
  if (!j.is_object()) throw ContractError("config: top level must be an object");
  serialize::reject_unknown_keys(j,
                                 {"seed", "data", "data_dir", "out_dir", "label_col", "split", "checkpoint", "model",
                                  "adversary", "baseline", "report"},
                                 "config");
  try {
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("data")) c.data = j["data"].get<std::string>();
    if (j.contains("data_dir")) c.data_dir = j["data_dir"].get<std::string>();
    if (j.contains("out_dir")) c.out_dir = j["out_dir"].get<std::string>();
    if (j.contains("label_col")) c.label_col = j["label_col"].get<std::string>();
    if (j.contains("split")) c.split = j["split"].get<std::string>();
    if (j.contains("checkpoint")) c.checkpoint = j["checkpoint"].get<std::string>();
    if (j.contains("model")) c.model = dpgm::config_from_json(j["model"].dump());
    if (j.contains("adversary")) c.adversary = adversary::adv_config_from_json(j["adversary"].dump());
    if (j.contains("baseline")) c.baseline = baseline::baseline_config_from_json(j["baseline"].dump());
    if (j.contains("report")) {
      const json& r = j["report"];
      serialize::reject_unknown_keys(r, {"method", "representation", "subsample", "perplexity", "iterations"},
                                     "report config");
      if (r.contains("method")) c.report.method = r["method"].get<std::string>();
      if (r.contains("representation")) c.report.representation = r["representation"].get<std::string>();
      if (r.contains("subsample")) c.report.subsample = r["subsample"].get<std::size_t>();
      if (r.contains("perplexity")) c.report.perplexity = r["perplexity"].get<double>();
      if (r.contains("iterations")) c.report.iterations = r["iterations"].get<std::size_t>();
    }
  } catch (const json::exception& e) {
    throw ContractError(std::string("config: ") + e.what());
  }
  c.model.seed = c.seed;
  return c;
}

RunConfig load_run_config(const fs::path& path) { return run_config_from_json(read_text(path)); }

std::string run_config_to_json(const RunConfig& c) {
  dpgm::ModelConfig model = c.model;
  model.seed = c.seed;
  json j{{"seed", c.seed},
         {"data", c.data},
         {"data_dir", c.data_dir},
         {"out_dir", c.out_dir},
         {"label_col", c.label_col},
         {"split", c.split},
         {"checkpoint", c.checkpoint},
         {"model", json::parse(dpgm::config_to_json(model))},
         {"adversary", json::parse(adversary::adv_config_to_json(c.adversary))},
         {"baseline", json::parse(baseline::baseline_config_to_json(c.baseline))},
         {"report",
          {{"method", c.report.method},
           {"representation", c.report.representation},
           {"subsample", c.report.subsample},
           {"perplexity", c.report.perplexity},
           {"iterations", c.report.iterations}}}};
  return j.dump();
}

int cmd_prepare(const RunConfig& c) {
  if (c.data.empty()) throw ContractError("prepare: no input CSV given (use --data)");
  const data::Dataset raw = data::load_csv(c.data, c.label_col);
  const data::SplitIndices split = data::stratified_split(raw, {0.70, 0.15, 0.15}, c.seed);
  const data::Dataset train = raw.subset(split.train);
  const data::NormStats stats = data::fit_normalize(train);

  const fs::path out(c.out_dir);
  ensure_dir(out);
  data::write_csv(data::apply_normalize(train, stats), out / "train.csv");
  data::write_csv(data::apply_normalize(raw.subset(split.val), stats), out / "val.csv");
  data::write_csv(data::apply_normalize(raw.subset(split.test), stats), out / "test.csv");
  write_text(out / "norm_stats.json", json::parse(data::norm_stats_to_json(stats)).dump(2) + "\n");

  json manifest{{"seed", c.seed},
                {"source_rows", raw.size()},
                {"fractions", {0.70, 0.15, 0.15}},
                {"counts", {{"train", split.train.size()}, {"val", split.val.size()}, {"test", split.test.size()}}},
                {"indices", {{"train", split.train}, {"val", split.val}, {"test", split.test}}}};
  write_text(out / "split_manifest.json", manifest.dump(2) + "\n");
  write_effective_config(c, "prepare");
  std::cout << "prepare: " << split.train.size() << "/" << split.val.size() << "/" << split.test.size()
            << " rows written to " << out.string() << "\n";
  return kExitOk;
}

int cmd_train(const RunConfig& c) {
  const data::Dataset train = load_split(c, "train");
  const data::Dataset val = load_split(c, "val");
  dpgm::ModelConfig model_config = c.model;
  model_config.seed = c.seed;
  ensure_dir(c.out_dir);
  write_effective_config(c, "train");
  try {
    const dpgm::FitResult fit = dpgm::fit(train, val, model_config, c.adversary);
    save_training_outputs(c, fit, val);
    std::cout << "train: " << fit.iterations << " iterations; checkpoint written to "
              << (fs::path(c.out_dir) / "checkpoint.json").string() << "\n";
    return kExitOk;
  } catch (const dpgm::DivergenceError& e) {
    const fs::path out(c.out_dir);
    write_text(out / "checkpoint.json", dpgm::to_json(e.last_good().model, checkpoint_extra(e.last_good())));
    if (!e.last_good().trace.records.empty()) report::export_loss_csv(e.last_good().trace, out / "trace.csv");
    std::cerr << "error: " << e.what() << "\nlast good checkpoint saved to " << (out / "checkpoint.json").string()
              << "\n";
    return kExitDivergence;
  }
}

int cmd_evaluate(const RunConfig& c) {
  check_split_name(c.split);
  const dpgm::VariationalClassifier model = load_checkpoint(c);
  const data::Dataset ds = load_split(c, c.split);
  require_dim(model, ds, c.split);
  const auto scores = dpgm::predict_proba(model, ds.features);
  const auto m = metrics::evaluate(scores, ds.labels, 0.5);

  const fs::path out(c.out_dir);
  ensure_dir(out);
  write_text(out / ("metrics_" + c.split + ".json"),
             metrics::to_json(m, json{{"split", c.split}, {"rows", ds.size()}}.dump()));
  report::write_sweep_csv(report::threshold_sweep(scores, ds.labels, report::uniform_grid(100)),
                          out / ("sweep_" + c.split + ".csv"));
  write_effective_config(c, "evaluate");
  std::cout << "evaluate[" << c.split << "]: auc=" << m.auc << " precision=" << m.precision << " recall=" << m.recall
            << " f1=" << m.f1 << "\n";
  return kExitOk;
}

int cmd_baseline(const RunConfig& c) {
  check_split_name(c.split);
  c.baseline.validate();
  const data::Dataset train = load_split(c, "train");
  const data::Dataset eval = load_split(c, c.split);
  if (eval.dim() != train.dim()) throw DimensionError("baseline: train and " + c.split + " feature counts differ");
  const fs::path out(c.out_dir);
  ensure_dir(out);
  write_effective_config(c, "baseline");

  std::vector<std::string> documents(baseline::kAllResamplers.size());
  std::vector<std::size_t> sizes(documents.size());
  parallel_for(documents.size(), [&](std::size_t i) {
    const baseline::Resampler r = baseline::kAllResamplers[i];
    const auto result = baseline::run_baseline(train, r, c.baseline, c.seed + i);
    const auto m = metrics::evaluate(baseline::predict_proba(result.model, eval.features), eval.labels, 0.5);
    sizes[i] = result.train_size;
    documents[i] = metrics::to_json(m, json{{"resampler", std::string(baseline::resampler_name(r))},
                                            {"seed", c.seed + i},
                                            {"split", c.split},
                                            {"train_size", result.train_size},
                                            {"class_weights", weights_json(result.weights)}}
                                           .dump());
  });
  for (std::size_t i = 0; i < documents.size(); ++i) {
    const std::string name(baseline::resampler_name(baseline::kAllResamplers[i]));
    write_text(out / ("baseline_" + name + ".json"), documents[i]);
    std::cout << "baseline " << name << ": train_size=" << sizes[i] << "\n";
  }
  return kExitOk;
}

int cmd_report(const RunConfig& c) {
  check_split_name(c.split);
  const auto& rc = c.report;
  if (rc.method != "pca" && rc.method != "tsne") throw ContractError("report: method must be pca or tsne");
  if (rc.representation != "input" && rc.representation != "latent")
    throw ContractError("report: representation must be input or latent");

  const dpgm::VariationalClassifier model = load_checkpoint(c);
  data::Dataset ds = load_split(c, c.split);
  require_dim(model, ds, c.split);
  if (rc.subsample > 0) {
    ds = ds.subset(report::stratified_subsample(ds.labels, rc.subsample, c.seed));
  } else if (rc.method == "tsne" && ds.size() > 5000) {
    throw ContractError("report: exact t-SNE is limited to 5000 rows but split '" + c.split + "' has " +
                        std::to_string(ds.size()) + "; pass --subsample N (N <= 5000)");
  }
  const Matrix points = rc.representation == "latent" ? dpgm::encode(model, ds.features).mu : ds.features;

  report::Embedding2D embedding;
  if (rc.method == "pca") {
    embedding = report::pca2d(points, ds.labels).embedding;
  } else {
    report::TsneOptions opts;
    opts.perplexity = rc.perplexity;
    opts.iterations = rc.iterations;
    opts.seed = c.seed;
    embedding = report::tsne_exact(points, ds.labels, opts).embedding;
  }
  const fs::path out(c.out_dir);
  ensure_dir(out);
  const fs::path file = out / ("embedding_" + rc.method + "_" + rc.representation + "_" + c.split + ".csv");
  report::write_embedding_csv(embedding, file);
  write_effective_config(c, "report");
  std::cout << "report: " << ds.size() << " points written to " << file.string() << "\n";
  return kExitOk;
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const NumericError*>(&e)) return kExitDivergence;
  if (dynamic_cast<const IoError*>(&e) || dynamic_cast<const ParseError*>(&e)) return kExitIo;
  return kExitUsage;
}

int run(int argc, const char* const* argv) {
  CLI::App app{"Class-weighted variational classifier with latent adversarial augmentation"};
  app.require_subcommand(1);

  std::string config_path, data, label_col, out_dir, split, method, representation, checkpoint;
  std::uint64_t seed = 0;
  std::size_t subsample = 0;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "random seed");
    sub->add_option("--data", data, "raw CSV for prepare; prepared split directory otherwise");
    sub->add_option("--label-col", label_col, "label column name");
    sub->add_option("--out", out_dir, "output directory");
  };
  auto* prepare = app.add_subcommand("prepare", "split and normalise a labelled CSV");
  auto* train = app.add_subcommand("train", "train the classifier on prepared splits");
  auto* evaluate = app.add_subcommand("evaluate", "score a checkpoint on one split");
  auto* base = app.add_subcommand("baseline", "train resampled logistic baselines");
  auto* rep = app.add_subcommand("report", "write a 2-D embedding CSV");
  for (auto* sub : {prepare, train, evaluate, base, rep}) add_common(sub);
  for (auto* sub : {evaluate, base, rep})
    sub->add_option("--split", split, "train, val or test")->check(CLI::IsMember({"train", "val", "test"}));
  for (auto* sub : {evaluate, rep}) sub->add_option("--checkpoint", checkpoint, "checkpoint JSON");
  rep->add_option("--method", method, "pca or tsne")->check(CLI::IsMember({"pca", "tsne"}));
  rep->add_option("--representation", representation, "input or latent")
      ->check(CLI::IsMember({"input", "latent"}));
  rep->add_option("--subsample", subsample, "stratified row cap before embedding");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    CLI::App* active = app.get_subcommands().front();
    RunConfig c = config_path.empty() ? RunConfig{} : load_run_config(config_path);
    auto given = [&](const char* flag) { return active->count(flag) > 0; };
    if (given("--seed")) c.seed = seed;
    c.model.seed = c.seed;
    if (given("--data")) (active == prepare ? c.data : c.data_dir) = data;
    if (given("--label-col")) c.label_col = label_col;
    if (given("--out")) c.out_dir = out_dir;
    if (active != prepare && active != train) {
      if (given("--split")) c.split = split;
    }
    if (active == evaluate || active == rep) {
      if (given("--checkpoint")) c.checkpoint = checkpoint;
    }
    if (active == rep) {
      if (given("--method")) c.report.method = method;
      if (given("--representation")) c.report.representation = representation;
      if (given("--subsample")) c.report.subsample = subsample;
    }
    if (active == prepare) return cmd_prepare(c);
    if (active == train) return cmd_train(c);
    if (active == evaluate) return cmd_evaluate(c);
    if (active == base) return cmd_baseline(c);
    return cmd_report(c);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  }
}

}  // namespace imb::cli
