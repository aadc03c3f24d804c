#pragma once

// Tape-based reverse-mode automatic differentiation over dense double matrices.
//
// A Tape owns every node created while evaluating an expression. Values are cheap
// handles (tape pointer + node index). Nodes are appended in evaluation order, so the
// tape is topologically sorted by construction and backward() is a single reverse sweep.
//
// backward() may be called once per tape. A second call throws ContractError rather
// than silently accumulating into the existing adjoints.

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "imb/matrix.hpp"

namespace imb::ad {

class Tape;

struct Value {
  Tape* tape = nullptr;
  std::size_t node_id = 0;

  const Matrix& data() const;
  const Matrix& grad() const;
  std::size_t rows() const { return data().rows; }
  std::size_t cols() const { return data().cols; }
  // Convenience for 1×1 values.
  double item() const;
};

enum class Op {
  leaf,
  matmul,
  linear,
  add,
  sub,
  mul,
  scale,
  add_scalar,
  neg,
  exp,
  log,
  sigmoid,
  tanh,
  relu,
  softplus,
  clamp,
  sum,
  mean,
  row_sum,
};

class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;
  Tape(Tape&&) = default;
  Tape& operator=(Tape&&) = default;

  // Inputs, parameters and constants are all leaves; every leaf receives an adjoint.
  Value leaf(Matrix data);
  Value scalar(double v) { return leaf(Matrix::scalar(v)); }

  const Matrix& data(Value v) const;
  // Zero-filled until backward() has run.
  const Matrix& grad(Value v) const;

  void backward(Value loss);
  bool backward_done() const noexcept { return backward_done_; }
  std::size_t size() const noexcept { return nodes_.size(); }

 private:
  struct Node {
    Op op = Op::leaf;
    Matrix value;
    Matrix grad;
    std::size_t a = 0, b = 0, c = 0;
    double p0 = 0.0, p1 = 0.0;
  };

  Value push(Op op, Matrix value, std::size_t a = 0, std::size_t b = 0, std::size_t c = 0,
             double p0 = 0.0, double p1 = 0.0);
  void propagate(const Node& n);

  std::vector<Node> nodes_;
  bool backward_done_ = false;

  friend Value matmul(Value, Value);
  friend Value linear(Value, Value, Value);
  friend Value add(Value, Value);
  friend Value sub(Value, Value);
  friend Value mul(Value, Value);
  friend Value scale(Value, double);
  friend Value add_scalar(Value, double);
  friend Value neg(Value);
  friend Value exp(Value);
  friend Value log(Value);
  friend Value sigmoid(Value);
  friend Value tanh(Value);
  friend Value relu(Value);
  friend Value softplus(Value);
  friend Value clamp(Value, double, double);
  friend Value sum(Value);
  friend Value mean(Value);
  friend Value row_sum(Value);
};

// a (r×k) · b (k×c)
Value matmul(Value a, Value b);
// Dense layer pre-activation: x (n×in) · wᵀ + bias, with w (out×in) and bias (1×out)
// added to every row.
Value linear(Value x, Value w, Value bias);
// Elementwise; either operand may be 1×1 and is then broadcast.
Value add(Value a, Value b);
Value sub(Value a, Value b);
Value mul(Value a, Value b);
Value scale(Value a, double s);
Value add_scalar(Value a, double s);
Value neg(Value a);
Value exp(Value a);
// Throws DomainError when any element is ≤ 0.
Value log(Value a);
Value sigmoid(Value a);
Value tanh(Value a);
// Subgradient at 0 is 0.
Value relu(Value a);
// log(1 + eˣ), evaluated as max(x,0) + log1p(e^{-|x|}).
Value softplus(Value a);
// Gradient is passed through strictly inside (lo, hi) and blocked at or beyond the bounds.
Value clamp(Value a, double lo, double hi);
Value sum(Value a);
Value mean(Value a);
// n×m → n×1
Value row_sum(Value a);

inline Value operator+(Value a, Value b) { return add(a, b); }
inline Value operator-(Value a, Value b) { return sub(a, b); }
inline Value operator*(Value a, Value b) { return mul(a, b); }
inline Value operator*(double s, Value a) { return scale(a, s); }
inline Value operator-(Value a) { return neg(a); }

// Numerically stable scalar helpers shared with non-tape code.
double stable_sigmoid(double x);
double stable_softplus(double x);

// f builds a scalar loss on the given tape from leaves bound to `params` (same order).
using ScalarFn = std::function<Value(Tape&, std::span<const Value>)>;

// Max over all parameter entries of
//   |analytic − central_difference| / max(1, |analytic|, |central_difference|).
// h must lie in [1e-7, 1e-3]. Throws NumericError if f is non-finite at a perturbed point.
double grad_check(const ScalarFn& f, std::span<const Matrix> params, double h = 1e-5);

}  // namespace imb::ad
