#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "imb/matrix.hpp"

namespace imb::ad {

struct AdamState {
  std::vector<Matrix> first_moment;
  std::vector<Matrix> second_moment;
  std::uint64_t step_count = 0;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

AdamState make_adam(std::span<Matrix* const> params, double lr = 1e-3);

// Bias-corrected Adam update in place. Moments are lazily sized on the first call.
// Throws NumericError (and leaves params and state untouched) if any gradient is NaN/Inf,
// DimensionError if shapes disagree.
void adam_step(AdamState& state, std::span<Matrix* const> params, std::span<const Matrix> grads);

}  // namespace imb::ad
