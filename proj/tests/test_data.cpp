#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>

#include "imb/data.hpp"
#include "imb/errors.hpp"
#include "imb/metrics.hpp"

using namespace imb;
using namespace imb::data;
namespace fs = std::filesystem;

namespace {

fs::path write_file(const std::string& name, const std::string& text) {
  const fs::path dir = fs::temp_directory_path() / "imb_dpgm_test_data";
  fs::create_directories(dir);
  const fs::path p = dir / name;
  std::ofstream(p, std::ios::binary) << text;
  return p;
}

std::size_t parse_error_line(const fs::path& p, const std::string& label = "Class") {
  try {
    load_csv(p, label);
  } catch (const ParseError& e) {
    return e.line();
  }
  return 0;
}

}  // namespace

TEST_CASE("load_csv reads a header-bearing numeric CSV") {
  const auto p = write_file("ok.csv", "Time,V1,Class,Amount\n0,1.5,0,10\n1,-2.25,1,20\n");
  const Dataset ds = load_csv(p, "Class");
  CHECK(ds.size() == 2);
  CHECK(ds.dim() == 3);
  CHECK(ds.feature_names == std::vector<std::string>{"Time", "V1", "Amount"});
  CHECK(ds.labels == std::vector<int>{0, 1});
  CHECK(ds.features(1, 1) == -2.25);
  CHECK(ds.label_position == 2);
}

TEST_CASE("Kaggle-shaped header yields 30 features") {
  std::string header = "Time";
  for (int i = 1; i <= 28; ++i) header += ",V" + std::to_string(i);
  header += ",Amount,Class\n";
  std::string row = "0";
  for (int i = 0; i < 29; ++i) row += ",0.5";
  const auto p = write_file("kaggle.csv", header + row + ",1\n");
  const Dataset ds = load_csv(p, "Class");
  CHECK(ds.dim() == 30);
  CHECK(ds.size() == 1);
}

TEST_CASE("load_csv errors name the row") {
  CHECK(parse_error_line(write_file("text.csv", "a,b,Class\n1,2,0\n3,oops,1\n")) == 3);
  CHECK(parse_error_line(write_file("ragged.csv", "a,b,Class\n1,2,0\n3,1\n")) == 3);
  CHECK(parse_error_line(write_file("label.csv", "a,b,Class\n1,2,2\n")) == 2);
  CHECK_THROWS_AS(load_csv("/nonexistent/file.csv", "Class"), ParseError);
  try {
    load_csv(write_file("nolabel.csv", "a,b,c\n1,2,0\n"), "Class");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("available columns") != std::string::npos);
    CHECK(msg.find("a, b, c") != std::string::npos);
  }
}

TEST_CASE("write then reload round-trips every double") {
  Dataset ds = synth_imbalanced(50, 5, 3, 2.0, 7);
  ds.features(0, 0) = 0.1 + 0.2;
  ds.features(1, 1) = 1e-300;
  const fs::path p = write_file("round.csv", "");
  write_csv(ds, p);
  const Dataset back = load_csv(p, "Class");
  CHECK(back.features == ds.features);
  CHECK(back.labels == ds.labels);
}

TEST_CASE("normalisation statistics and clipping") {
  Dataset ds;
  ds.features = Matrix::from_rows({{1.0, 5.0}, {3.0, 5.0}, {5.0, 5.0}, {7.0, 5.0}});
  ds.labels = {0, 0, 1, 1};
  ds.feature_names = {"a", "b"};
  ds.label_position = 2;
  const NormStats s = fit_normalize(ds);
  CHECK(s.mean[0] == 4.0);
  CHECK(s.std[0] == doctest::Approx(std::sqrt(5.0)));  // population std
  CHECK(s.zero_variance == std::vector<bool>{false, true});
  CHECK(s.std[1] == 1.0);
  const Dataset z = apply_normalize(ds, s);
  double mean = 0.0;
  for (std::size_t i = 0; i < 4; ++i) {
    mean += z.features(i, 0);
    CHECK(z.features(i, 1) == 0.0);
  }
  CHECK(std::abs(mean) < 1e-12);

  Dataset far = ds;
  far.features(0, 0) = 4.0 + 7.0 * std::sqrt(5.0);
  CHECK(apply_normalize(far, s).features(0, 0) == 5.0);

  const NormStats back = norm_stats_from_json(norm_stats_to_json(s));
  CHECK(back.mean == s.mean);
  CHECK(back.std == s.std);
  CHECK(back.zero_variance == s.zero_variance);
  CHECK_THROWS_AS(fit_normalize(ds.subset(std::vector<std::size_t>{})), ContractError);
}

TEST_CASE("stratified split proportions, determinism and partition") {
  const Dataset ds = synth_imbalanced(990, 10, 2, 1.0, 3);
  const SplitIndices s = stratified_split(ds, {0.70, 0.15, 0.15}, 11);
  std::size_t train_minor = 0;
  for (std::size_t i : s.train) train_minor += static_cast<std::size_t>(ds.labels[i]);
  CHECK(s.train.size() - train_minor == 693);
  CHECK(train_minor == 7);
  CHECK(s.val.size() + s.test.size() == 300);

  std::set<std::size_t> all;
  for (const auto* part : {&s.train, &s.val, &s.test}) {
    CHECK(std::is_sorted(part->begin(), part->end()));
    all.insert(part->begin(), part->end());
  }
  CHECK(all.size() == 1000);
  CHECK(s.train.size() + s.val.size() + s.test.size() == 1000);

  const SplitIndices again = stratified_split(ds, {0.70, 0.15, 0.15}, 11);
  CHECK(again.train == s.train);
  CHECK(again.test == s.test);
  CHECK(stratified_split(ds, {0.70, 0.15, 0.15}, 12).train != s.train);

  for (const auto* part : {&s.val, &s.test}) {
    std::size_t minor = 0;
    for (std::size_t i : *part) minor += static_cast<std::size_t>(ds.labels[i]);
    CHECK(std::abs(static_cast<double>(minor) - 0.01 * static_cast<double>(part->size())) <= 1.0);
  }
}

TEST_CASE("split refuses classes with fewer than three members") {
  const Dataset ds = synth_imbalanced(100, 2, 2, 1.0, 3);
  try {
    stratified_split(ds);
    FAIL("expected an error");
  } catch (const ContractError& e) {
    CHECK(std::string(e.what()).find("synthetic") != std::string::npos);
  }
}

TEST_CASE("no leakage: statistics come from the train slice only") {
  const Dataset ds = synth_imbalanced(300, 30, 3, 2.0, 5);
  const SplitIndices s = stratified_split(ds, {0.70, 0.15, 0.15}, 1);
  const NormStats a = fit_normalize(ds.subset(s.train));
  Dataset train = ds.subset(s.train);
  std::vector<double> mean(3, 0.0);
  for (std::size_t i = 0; i < train.size(); ++i)
    for (std::size_t j = 0; j < 3; ++j) mean[j] += train.features(i, j);
  for (std::size_t j = 0; j < 3; ++j) CHECK(a.mean[j] == doctest::Approx(mean[j] / train.size()).epsilon(1e-14));
}

TEST_CASE("synthetic generator counts and overlap") {
  const Dataset ds = synth_imbalanced(5000, 100, 2, 4.0, 1);
  CHECK(ds.count(0) == 5000);
  CHECK(ds.count(1) == 100);
  // The Bayes-optimal score for this mixture is monotone in x0; AUC → Φ(4/√2) ≈ 0.9977.
  std::vector<double> aucs;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Dataset d = synth_imbalanced(5000, 100, 2, 4.0, seed);
    std::vector<double> score(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) score[i] = d.features(i, 0);
    aucs.push_back(metrics::roc_auc(score, d.labels));
  }
  double mean_auc = 0.0;
  for (double a : aucs) mean_auc += a / aucs.size();
  CHECK(mean_auc == doctest::Approx(0.5 * std::erfc(-4.0 / 2.0)).epsilon(0.003));

  // With 100 positives a single draw has AUC sd ≈ 0.03, so average the seeds.
  double null_auc = 0.0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Dataset d = synth_imbalanced(5000, 100, 2, 0.0, seed);
    std::vector<double> score(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) score[i] = d.features(i, 0) + d.features(i, 1);
    null_auc += metrics::roc_auc(score, d.labels) / 5.0;
  }
  CHECK(std::abs(null_auc - 0.5) <= 0.05);
  CHECK(synth_imbalanced(20, 4, 2, 1.0, 9).features == synth_imbalanced(20, 4, 2, 1.0, 9).features);
}
