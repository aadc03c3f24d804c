#include "imb/baseline.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <json.hpp>

#include "imb/errors.hpp"
#include "imb/model.hpp"
#include "imb/optim.hpp"
#include "imb/serialize.hpp"

namespace imb::baseline {

using nlohmann::json;

std::string_view resampler_name(Resampler r) {
  switch (r) {
    case Resampler::none: return "none";
    case Resampler::undersample: return "undersample";
    case Resampler::oversample: return "oversample";
    case Resampler::smote: return "smote";
    case Resampler::adasyn: return "adasyn";
  }
  return "none";
}

Resampler parse_resampler(std::string_view name) {
  for (Resampler r : kAllResamplers)
    if (resampler_name(r) == name) return r;
  throw ContractError("unknown resampler '" + std::string(name) +
                      "' (expected none, undersample, oversample, smote or adasyn)");
}

void BaselineConfig::validate() const {
  if (batch_size == 0) throw ContractError("baseline config: batch_size must be positive");
  if (!(lr > 0.0) || !std::isfinite(lr)) throw ContractError("baseline config: lr must be positive");
  if (smote_k == 0) throw ContractError("baseline config: smote_k must be positive");
}

data::Dataset resample_train(const data::Dataset& train, Resampler r, std::size_t smote_k, std::uint64_t seed) {
  switch (r) {
    case Resampler::none: return train;
    case Resampler::undersample: return resample::random_undersample(train, seed);
    case Resampler::oversample: return resample::random_oversample(train, seed);
    case Resampler::smote: {
      resample::SmoteOptions o;
      o.k = smote_k;
      o.seed = seed;
      return resample::smote(train, o).data;
    }
    case Resampler::adasyn: {
      resample::SmoteOptions o;
      o.k = smote_k;
      o.seed = seed;
      return resample::adasyn(train, o).data;
    }
  }
  return train;
}

LogisticModel fit_logistic(const data::Dataset& train, const resample::ClassWeights& weights,
                           const BaselineConfig& config, std::uint64_t seed) {
  config.validate();
  if (train.size() == 0) throw ContractError("fit_logistic: empty training set");
  std::mt19937_64 rng(seed);
  LogisticModel model{ad::make_dense(train.dim(), 1, ad::Activation::identity, rng)};
  std::vector<Matrix*> params{&model.layer.weights, &model.layer.bias};
  ad::AdamState opt = ad::make_adam(params, config.lr);

  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      const std::size_t b = end - start;
      Matrix x(b, train.dim()), y(b, 1), w(b, 1);
      for (std::size_t r = 0; r < b; ++r) {
        const std::size_t src = order[start + r];
        std::copy_n(train.features.row(src).begin(), train.dim(), x.row(r).begin());
        y(r, 0) = train.labels[src];
        w(r, 0) = weights.weight_for(train.labels[src]);
      }
      ad::Tape tape;
      const ad::BoundLayer bound = ad::bind(tape, model.layer);
      const ad::Value logits = ad::forward(bound, tape.leaf(std::move(x)));
      const ad::Value loss = ad::mean(tape.leaf(std::move(w)) * dpgm::bce_with_logits(logits, tape.leaf(std::move(y))));
      if (!std::isfinite(loss.item())) throw NumericError("fit_logistic: non-finite loss");
      tape.backward(loss);
      std::vector<Matrix> grads;
      ad::collect_gradients(bound, grads);
      ad::adam_step(opt, params, grads);
    }
  }
  return model;
}

std::vector<double> predict_proba(const LogisticModel& model, const Matrix& x) {
  if (x.cols != model.layer.in_dim())
    throw DimensionError("baseline: expected " + std::to_string(model.layer.in_dim()) + " features, got " +
                         std::to_string(x.cols));
  std::vector<double> p(x.rows);
  for (std::size_t i = 0; i < x.rows; ++i) {
    double a = model.layer.bias(0, 0);
    for (std::size_t j = 0; j < x.cols; ++j) a += model.layer.weights(0, j) * x(i, j);
    p[i] = ad::stable_sigmoid(a);
  }
  return p;
}

BaselineResult run_baseline(const data::Dataset& train, Resampler r, const BaselineConfig& config, std::uint64_t seed) {
  BaselineResult out;
  out.resampler = r;
  const data::Dataset resampled = resample_train(train, r, config.smote_k, seed);
  out.train_size = resampled.size();
  out.weights = resample::class_weights(resampled.labels);
  if (!config.class_weighted) out.weights.w_minority = 1.0;
  out.model = fit_logistic(resampled, out.weights, config, seed);
  return out;
}

std::string baseline_config_to_json(const BaselineConfig& c) {
  return json{{"epochs", c.epochs},
              {"batch_size", c.batch_size},
              {"lr", c.lr},
              {"smote_k", c.smote_k},
              {"class_weighted", c.class_weighted}}
      .dump();
}

BaselineConfig baseline_config_from_json(const std::string& text) {
  BaselineConfig c;
  try {
    const json j = json::parse(text);
    serialize::reject_unknown_keys(j, {"epochs", "batch_size", "lr", "smote_k", "class_weighted"}, "baseline config");
    if (j.contains("epochs")) c.epochs = j["epochs"].get<std::size_t>();
    if (j.contains("batch_size")) c.batch_size = j["batch_size"].get<std::size_t>();
    if (j.contains("lr")) c.lr = j["lr"].get<double>();
    if (j.contains("smote_k")) c.smote_k = j["smote_k"].get<std::size_t>();
    if (j.contains("class_weighted")) c.class_weighted = j["class_weighted"].get<bool>();
  } catch (const json::exception& e) {
    throw ContractError(std::string("baseline config: ") + e.what());
  }
  c.validate();
  return c;
}

}  // namespace imb::baseline
