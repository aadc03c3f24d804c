#pragma once
// Class-weighted logistic regression trained on resampled copies of the training split.

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "imb/data.hpp"
#include "imb/layers.hpp"
#include "imb/resampling.hpp"

namespace imb::baseline {

enum class Resampler { none, undersample, oversample, smote, adasyn };

inline constexpr std::array<Resampler, 5> kAllResamplers{Resampler::none, Resampler::undersample,
                                                         Resampler::oversample, Resampler::smote,
                                                         Resampler::adasyn};

std::string_view resampler_name(Resampler r);
Resampler parse_resampler(std::string_view name);

struct BaselineConfig {
  std::size_t epochs = 30;
  std::size_t batch_size = 128;
  double lr = 1e-2;
  std::size_t smote_k = 5;
  bool class_weighted = true;  // w(y) recomputed on each resampled set

  void validate() const;
};

struct LogisticModel {
  ad::DenseLayer layer;  // d → 1 logit
};

struct BaselineResult {
  Resampler resampler = Resampler::none;
  LogisticModel model;
  resample::ClassWeights weights;
  std::size_t train_size = 0;  // rows after resampling
};

data::Dataset resample_train(const data::Dataset& train, Resampler r, std::size_t smote_k, std::uint64_t seed);

// Seeded init and shuffles; weighted mean BCE minimised by Adam.
LogisticModel fit_logistic(const data::Dataset& train, const resample::ClassWeights& weights,
                           const BaselineConfig& config, std::uint64_t seed);

std::vector<double> predict_proba(const LogisticModel& model, const Matrix& x);

BaselineResult run_baseline(const data::Dataset& train, Resampler r, const BaselineConfig& config, std::uint64_t seed);

std::string baseline_config_to_json(const BaselineConfig& c);
BaselineConfig baseline_config_from_json(const std::string& text);

}  // namespace imb::baseline
