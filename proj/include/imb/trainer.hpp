#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "imb/adversary.hpp"
#include "imb/data.hpp"
#include "imb/errors.hpp"
#include "imb/model.hpp"
#include "imb/resampling.hpp"

namespace imb::dpgm {

struct TraceRecord {
  std::size_t iteration;
  double train_loss;
  double test_loss;
};

struct TrainTrace {
  std::vector<TraceRecord> records;  // strictly increasing iterations
};

struct FitResult {
  VariationalClassifier model;
  TrainTrace trace;
  resample::ClassWeights weights;
  std::optional<adversary::LatentAdversary> adversary;
  adversary::AdvConfig adv_config;
  std::size_t iterations = 0;
};

// Thrown when a training loss turns NaN/Inf. `last_good` holds the parameters from before
// the failing step.
class DivergenceError : public NumericError {
 public:
  DivergenceError(const std::string& what, FitResult last_good)
      : NumericError(what), last_good_(std::move(last_good)) {}
  const FitResult& last_good() const noexcept { return last_good_; }

 private:
  FitResult last_good_;
};

// Weighted negative ELBO over a whole dataset with a fixed seeded ε draw, so repeated
// evaluations of the same parameters agree exactly.
double evaluate_loss(const VariationalClassifier& model, const data::Dataset& ds,
                     const resample::ClassWeights& weights, std::uint64_t eps_seed);

// Seeded-shuffle minibatch Adam on the weighted ELBO (plus the latent adversary when
// adv.enabled). The trace records the loss on `train` and `val` at iteration 0, every
// config.trace_every iterations (or each epoch end when 0) and after the last step.
// epochs = 0 returns the seeded initialisation and an empty trace.
FitResult fit(const data::Dataset& train, const data::Dataset& val, const ModelConfig& config,
              const adversary::AdvConfig& adv = {});

}  // namespace imb::dpgm
