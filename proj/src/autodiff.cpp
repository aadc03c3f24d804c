#include "imb/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "imb/errors.hpp"
#include "imb/kernels.hpp"

namespace imb::ad {
namespace {

Tape& common_tape(Value a, Value b) {
  if (a.tape == nullptr || a.tape != b.tape)
    throw ContractError("autodiff: operands live on different tapes");
  return *a.tape;
}

Tape& tape_of(Value a) {
  if (a.tape == nullptr) throw ContractError("autodiff: value is not bound to a tape");
  return *a.tape;
}

bool is_scalar(const Matrix& m) { return m.rows == 1 && m.cols == 1; }

void require_broadcastable(const Matrix& a, const Matrix& b, const char* op) {
  if (a.same_shape(b) || is_scalar(a) || is_scalar(b)) return;
  throw DimensionError(std::string(op) + ": shape mismatch " + a.shape_string() + " vs " +
                       b.shape_string());
}

template <typename F>
Matrix broadcast_binary(const Matrix& a, const Matrix& b, F f) {
  if (a.same_shape(b)) {
    Matrix out(a.rows, a.cols);
    for (std::size_t i = 0; i < a.size(); ++i) out.data[i] = f(a.data[i], b.data[i]);
    return out;
  }
  if (is_scalar(b)) {
    Matrix out(a.rows, a.cols);
    const double s = b.data[0];
    for (std::size_t i = 0; i < a.size(); ++i) out.data[i] = f(a.data[i], s);
    return out;
  }
  Matrix out(b.rows, b.cols);
  const double s = a.data[0];
  for (std::size_t i = 0; i < b.size(); ++i) out.data[i] = f(s, b.data[i]);
  return out;
}

template <typename F>
Matrix map(const Matrix& a, F f) {
  Matrix out(a.rows, a.cols);
  for (std::size_t i = 0; i < a.size(); ++i) out.data[i] = f(a.data[i]);
  return out;
}

// Accumulates `contrib` (shape of the op output) into `target`, reducing when target is
// a broadcast scalar.
void accumulate(Matrix& target, const Matrix& contrib) {
  if (target.same_shape(contrib)) {
    for (std::size_t i = 0; i < target.size(); ++i) target.data[i] += contrib.data[i];
    return;
  }
  double total = 0.0;
  for (double v : contrib.data) total += v;
  target.data[0] += total;
}

}  // namespace

double stable_sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double stable_softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

const Matrix& Value::data() const { return tape_of(*this).data(*this); }
const Matrix& Value::grad() const { return tape_of(*this).grad(*this); }

double Value::item() const {
  const Matrix& m = data();
  if (!is_scalar(m)) throw DimensionError("Value::item on non-scalar " + m.shape_string());
  return m.data[0];
}

Value Tape::push(Op op, Matrix value, std::size_t a, std::size_t b, std::size_t c, double p0,
                 double p1) {
  if (backward_done_) throw ContractError("autodiff: tape already differentiated");
  Node n;
  n.op = op;
  n.grad = Matrix(value.rows, value.cols);
  n.value = std::move(value);
  n.a = a;
  n.b = b;
  n.c = c;
  n.p0 = p0;
  n.p1 = p1;
  nodes_.push_back(std::move(n));
  return Value{this, nodes_.size() - 1};
}

Value Tape::leaf(Matrix data) { return push(Op::leaf, std::move(data)); }

const Matrix& Tape::data(Value v) const {
  if (v.tape != this || v.node_id >= nodes_.size())
    throw ContractError("autodiff: value does not belong to this tape");
  return nodes_[v.node_id].value;
}

const Matrix& Tape::grad(Value v) const {
  if (v.tape != this || v.node_id >= nodes_.size())
    throw ContractError("autodiff: value does not belong to this tape");
  return nodes_[v.node_id].grad;
}

void Tape::backward(Value loss) {
  if (backward_done_) throw ContractError("autodiff: backward called twice on the same tape");
  const Matrix& out = data(loss);
  if (!is_scalar(out))
    throw ContractError("autodiff: backward requires a scalar loss, got " + out.shape_string());
  backward_done_ = true;
  nodes_[loss.node_id].grad.data[0] = 1.0;
  for (std::size_t i = loss.node_id + 1; i-- > 0;) propagate(nodes_[i]);
}

void Tape::propagate(const Node& n) {
  const Matrix& g = n.grad;
  switch (n.op) {
    case Op::leaf:
      return;
    case Op::matmul: {
      const Matrix& a = nodes_[n.a].value;
      const Matrix& b = nodes_[n.b].value;
      Matrix& ga = nodes_[n.a].grad;
      Matrix& gb = nodes_[n.b].grad;
      // dA = G·Bᵀ, dB = Aᵀ·G
      for (std::size_t i = 0; i < a.rows; ++i)
        for (std::size_t k = 0; k < a.cols; ++k) ga(i, k) += kernels::dot(g.row(i), b.row(k));
      for (std::size_t i = 0; i < a.rows; ++i)
        for (std::size_t k = 0; k < a.cols; ++k) kernels::axpy(a(i, k), g.row(i), gb.row(k));
      return;
    }
    case Op::linear: {
      const Matrix& x = nodes_[n.a].value;
      const Matrix& w = nodes_[n.b].value;
      Matrix& gx = nodes_[n.a].grad;
      Matrix& gw = nodes_[n.b].grad;
      Matrix& gbias = nodes_[n.c].grad;
      for (std::size_t i = 0; i < x.rows; ++i) {
        for (std::size_t j = 0; j < w.rows; ++j) {
          const double gij = g(i, j);
          kernels::axpy(gij, w.row(j), gx.row(i));
          kernels::axpy(gij, x.row(i), gw.row(j));
          gbias.data[j] += gij;
        }
      }
      return;
    }
    case Op::add:
      accumulate(nodes_[n.a].grad, g);
      accumulate(nodes_[n.b].grad, g);
      return;
    case Op::sub: {
      accumulate(nodes_[n.a].grad, g);
      accumulate(nodes_[n.b].grad, map(g, [](double v) { return -v; }));
      return;
    }
    case Op::mul: {
      const Matrix& a = nodes_[n.a].value;
      const Matrix& b = nodes_[n.b].value;
      accumulate(nodes_[n.a].grad, broadcast_binary(g, b, [](double x, double y) { return x * y; }));
      accumulate(nodes_[n.b].grad, broadcast_binary(g, a, [](double x, double y) { return x * y; }));
      return;
    }
    case Op::scale: {
      Matrix& ga = nodes_[n.a].grad;
      for (std::size_t i = 0; i < g.size(); ++i) ga.data[i] += n.p0 * g.data[i];
      return;
    }
    case Op::add_scalar: {
      Matrix& ga = nodes_[n.a].grad;
      for (std::size_t i = 0; i < g.size(); ++i) ga.data[i] += g.data[i];
      return;
    }
    case Op::neg: {
      Matrix& ga = nodes_[n.a].grad;
      for (std::size_t i = 0; i < g.size(); ++i) ga.data[i] -= g.data[i];
      return;
    }
    case Op::exp: {
      Matrix& ga = nodes_[n.a].grad;
      for (std::size_t i = 0; i < g.size(); ++i) ga.data[i] += g.data[i] * n.value.data[i];
      return;
    }
    case Op::log: {
      const Matrix& a = nodes_[n.a].value;
      Matrix& ga = nodes_[n.a].grad;
      for (std::size_t i = 0; i < g.size(); ++i) ga.data[i] += g.data[i] / a.data[i];
      return;
    }
    case Op::sigmoid: {
      Matrix& ga = nodes_[n.a].grad;
      for (std::size_t i = 0; i < g.size(); ++i) {
        const double s = n.value.data[i];
        ga.data[i] += g.data[i] * s * (1.0 - s);
      }
      return;
    }
    case Op::tanh: {
      Matrix& ga = nodes_[n.a].grad;
      for (std::size_t i = 0; i < g.size(); ++i) {
        const double t = n.value.data[i];
        ga.data[i] += g.data[i] * (1.0 - t * t);
      }
      return;
    }
    case Op::relu: {
      const Matrix& a = nodes_[n.a].value;
      Matrix& ga = nodes_[n.a].grad;
      for (std::size_t i = 0; i < g.size(); ++i)
        if (a.data[i] > 0.0) ga.data[i] += g.data[i];
      return;
    }
    case Op::softplus: {
      const Matrix& a = nodes_[n.a].value;
      Matrix& ga = nodes_[n.a].grad;
      for (std::size_t i = 0; i < g.size(); ++i) ga.data[i] += g.data[i] * stable_sigmoid(a.data[i]);
      return;
    }
    case Op::clamp: {
      const Matrix& a = nodes_[n.a].value;
      Matrix& ga = nodes_[n.a].grad;
      for (std::size_t i = 0; i < g.size(); ++i)
        if (a.data[i] > n.p0 && a.data[i] < n.p1) ga.data[i] += g.data[i];
      return;
    }
    case Op::sum: {
      Matrix& ga = nodes_[n.a].grad;
      for (double& v : ga.data) v += g.data[0];
      return;
    }
    case Op::mean: {
      Matrix& ga = nodes_[n.a].grad;
      const double share = g.data[0] / static_cast<double>(ga.size());
      for (double& v : ga.data) v += share;
      return;
    }
    case Op::row_sum: {
      Matrix& ga = nodes_[n.a].grad;
      for (std::size_t i = 0; i < ga.rows; ++i)
        for (std::size_t j = 0; j < ga.cols; ++j) ga(i, j) += g.data[i];
      return;
    }
  }
}

Value matmul(Value a, Value b) {
  Tape& t = common_tape(a, b);
  const Matrix& A = a.data();
  const Matrix& B = b.data();
  if (A.cols != B.rows)
    throw DimensionError("matmul: inner dimensions differ " + A.shape_string() + " · " +
                         B.shape_string());
  Matrix out(A.rows, B.cols);
  for (std::size_t i = 0; i < A.rows; ++i)
    for (std::size_t k = 0; k < A.cols; ++k) kernels::axpy(A(i, k), B.row(k), out.row(i));
  return t.push(Op::matmul, std::move(out), a.node_id, b.node_id);
}

Value linear(Value x, Value w, Value bias) {
  Tape& t = common_tape(x, w);
  common_tape(x, bias);
  const Matrix& X = x.data();
  const Matrix& W = w.data();
  const Matrix& B = bias.data();
  if (X.cols != W.cols)
    throw DimensionError("linear: input width " + std::to_string(X.cols) +
                         " does not match weights " + W.shape_string());
  if (B.rows != 1 || B.cols != W.rows)
    throw DimensionError("linear: bias " + B.shape_string() + " does not match weights " +
                         W.shape_string());
  Matrix out(X.rows, W.rows);
  for (std::size_t i = 0; i < X.rows; ++i)
    for (std::size_t j = 0; j < W.rows; ++j) out(i, j) = kernels::dot(X.row(i), W.row(j)) + B.data[j];
  return t.push(Op::linear, std::move(out), x.node_id, w.node_id, bias.node_id);
}

Value add(Value a, Value b) {
  Tape& t = common_tape(a, b);
  require_broadcastable(a.data(), b.data(), "add");
  Matrix out = broadcast_binary(a.data(), b.data(), [](double x, double y) { return x + y; });
  return t.push(Op::add, std::move(out), a.node_id, b.node_id);
}

Value sub(Value a, Value b) {
  Tape& t = common_tape(a, b);
  require_broadcastable(a.data(), b.data(), "sub");
  Matrix out = broadcast_binary(a.data(), b.data(), [](double x, double y) { return x - y; });
  return t.push(Op::sub, std::move(out), a.node_id, b.node_id);
}

Value mul(Value a, Value b) {
  Tape& t = common_tape(a, b);
  require_broadcastable(a.data(), b.data(), "mul");
  Matrix out = broadcast_binary(a.data(), b.data(), [](double x, double y) { return x * y; });
  return t.push(Op::mul, std::move(out), a.node_id, b.node_id);
}

Value scale(Value a, double s) {
  Tape& t = tape_of(a);
  return t.push(Op::scale, map(a.data(), [s](double x) { return s * x; }), a.node_id, 0, 0, s);
}

Value add_scalar(Value a, double s) {
  Tape& t = tape_of(a);
  return t.push(Op::add_scalar, map(a.data(), [s](double x) { return x + s; }), a.node_id, 0, 0, s);
}

Value neg(Value a) {
  Tape& t = tape_of(a);
  return t.push(Op::neg, map(a.data(), [](double x) { return -x; }), a.node_id);
}

Value exp(Value a) {
  Tape& t = tape_of(a);
  return t.push(Op::exp, map(a.data(), [](double x) { return std::exp(x); }), a.node_id);
}

Value log(Value a) {
  Tape& t = tape_of(a);
  for (double v : a.data().data)
    if (!(v > 0.0)) throw DomainError("log: argument " + std::to_string(v) + " is not positive");
  return t.push(Op::log, map(a.data(), [](double x) { return std::log(x); }), a.node_id);
}

Value sigmoid(Value a) {
  Tape& t = tape_of(a);
  return t.push(Op::sigmoid, map(a.data(), stable_sigmoid), a.node_id);
}

Value tanh(Value a) {
  Tape& t = tape_of(a);
  return t.push(Op::tanh, map(a.data(), [](double x) { return std::tanh(x); }), a.node_id);
}

Value relu(Value a) {
  Tape& t = tape_of(a);
  return t.push(Op::relu, map(a.data(), [](double x) { return x > 0.0 ? x : 0.0; }), a.node_id);
}

Value softplus(Value a) {
  Tape& t = tape_of(a);
  return t.push(Op::softplus, map(a.data(), stable_softplus), a.node_id);
}

Value clamp(Value a, double lo, double hi) {
  if (!(lo < hi)) throw ContractError("clamp: lower bound must be below upper bound");
  Tape& t = tape_of(a);
  return t.push(Op::clamp, map(a.data(), [lo, hi](double x) { return std::clamp(x, lo, hi); }),
                a.node_id, 0, 0, lo, hi);
}

Value sum(Value a) {
  Tape& t = tape_of(a);
  double total = 0.0;
  for (double v : a.data().data) total += v;
  return t.push(Op::sum, Matrix::scalar(total), a.node_id);
}

Value mean(Value a) {
  Tape& t = tape_of(a);
  const Matrix& A = a.data();
  if (A.size() == 0) throw ContractError("mean: empty input");
  double total = 0.0;
  for (double v : A.data) total += v;
  return t.push(Op::mean, Matrix::scalar(total / static_cast<double>(A.size())), a.node_id);
}

Value row_sum(Value a) {
  Tape& t = tape_of(a);
  const Matrix& A = a.data();
  Matrix out(A.rows, 1);
  for (std::size_t i = 0; i < A.rows; ++i) {
    double total = 0.0;
    for (double v : A.row(i)) total += v;
    out.data[i] = total;
  }
  return t.push(Op::row_sum, std::move(out), a.node_id);
}

double grad_check(const ScalarFn& f, std::span<const Matrix> params, double h) {
  if (!(h >= 1e-7 && h <= 1e-3))
    throw ContractError("grad_check: step h must lie in [1e-7, 1e-3]");

  std::vector<Matrix> analytic;
  {
    Tape tape;
    std::vector<Value> leaves;
    leaves.reserve(params.size());
    for (const Matrix& p : params) leaves.push_back(tape.leaf(p));
    Value loss = f(tape, leaves);
    tape.backward(loss);
    for (const Value& v : leaves) analytic.push_back(v.grad());
  }

  auto evaluate = [&](const std::vector<Matrix>& point) {
    Tape tape;
    std::vector<Value> leaves;
    leaves.reserve(point.size());
    for (const Matrix& p : point) leaves.push_back(tape.leaf(p));
    const double v = f(tape, leaves).item();
    if (!std::isfinite(v)) throw NumericError("grad_check: non-finite objective at perturbed point");
    return v;
  };

  std::vector<Matrix> point(params.begin(), params.end());
  double worst = 0.0;
  for (std::size_t p = 0; p < point.size(); ++p) {
    for (std::size_t i = 0; i < point[p].size(); ++i) {
      const double orig = point[p].data[i];
      point[p].data[i] = orig + h;
      const double up = evaluate(point);
      point[p].data[i] = orig - h;
      const double down = evaluate(point);
      point[p].data[i] = orig;
      const double numeric = (up - down) / (2.0 * h);
      const double a = analytic[p].data[i];
      const double denom = std::max({1.0, std::abs(a), std::abs(numeric)});
      worst = std::max(worst, std::abs(a - numeric) / denom);
    }
  }
  return worst;
}

}  // namespace imb::ad
