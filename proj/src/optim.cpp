#include "imb/optim.hpp"

#include <cmath>
#include <string>

#include "imb/errors.hpp"

namespace imb::ad {

AdamState make_adam(std::span<Matrix* const> params, double lr) {
  AdamState s;
  s.lr = lr;
  for (const Matrix* p : params) {
    s.first_moment.emplace_back(p->rows, p->cols);
    s.second_moment.emplace_back(p->rows, p->cols);
  }
  return s;
}

void adam_step(AdamState& state, std::span<Matrix* const> params, std::span<const Matrix> grads) {
  if (params.size() != grads.size())
    throw DimensionError("adam_step: " + std::to_string(params.size()) + " parameters but " +
                         std::to_string(grads.size()) + " gradients");
  for (std::size_t p = 0; p < params.size(); ++p) {
    if (!params[p]->same_shape(grads[p]))
      throw DimensionError("adam_step: gradient " + grads[p].shape_string() +
                           " does not match parameter " + params[p]->shape_string());
    if (!grads[p].all_finite()) throw NumericError("adam_step: non-finite gradient rejected");
  }
  if (state.first_moment.empty()) {
    for (const Matrix* p : params) {
      state.first_moment.emplace_back(p->rows, p->cols);
      state.second_moment.emplace_back(p->rows, p->cols);
    }
  }
  if (state.first_moment.size() != params.size())
    throw DimensionError("adam_step: optimizer state tracks a different parameter set");

  state.step_count += 1;
  const double t = static_cast<double>(state.step_count);
  const double correction1 = 1.0 - std::pow(state.beta1, t);
  const double correction2 = 1.0 - std::pow(state.beta2, t);
  for (std::size_t p = 0; p < params.size(); ++p) {
    Matrix& theta = *params[p];
    Matrix& m = state.first_moment[p];
    Matrix& v = state.second_moment[p];
    const Matrix& g = grads[p];
    for (std::size_t i = 0; i < theta.size(); ++i) {
      m.data[i] = state.beta1 * m.data[i] + (1.0 - state.beta1) * g.data[i];
      v.data[i] = state.beta2 * v.data[i] + (1.0 - state.beta2) * g.data[i] * g.data[i];
      const double m_hat = m.data[i] / correction1;
      const double v_hat = v.data[i] / correction2;
      theta.data[i] -= state.lr * m_hat / (std::sqrt(v_hat) + state.eps);
    }
  }
}

}  // namespace imb::ad
