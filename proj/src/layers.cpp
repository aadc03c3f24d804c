#include "imb/layers.hpp"

#include <cmath>

#include "imb/errors.hpp"

namespace imb::ad {

std::string_view activation_name(Activation a) {
  switch (a) {
    case Activation::identity: return "identity";
    case Activation::relu: return "relu";
    case Activation::tanh: return "tanh";
    case Activation::sigmoid: return "sigmoid";
    case Activation::softplus: return "softplus";
  }
  return "identity";
}

Activation parse_activation(std::string_view name) {
  if (name == "identity") return Activation::identity;
  if (name == "relu") return Activation::relu;
  if (name == "tanh") return Activation::tanh;
  if (name == "sigmoid") return Activation::sigmoid;
  if (name == "softplus") return Activation::softplus;
  throw ContractError("unknown activation '" + std::string(name) + "'");
}

DenseLayer make_dense(std::size_t in, std::size_t out, Activation act, std::mt19937_64& rng) {
  DenseLayer layer = make_zero_dense(in, out, act);
  const double fan = act == Activation::relu ? static_cast<double>(in)
                                             : static_cast<double>(in + out) / 2.0;
  const double limit = std::sqrt(3.0 / fan) * (act == Activation::relu ? std::sqrt(2.0) : 1.0);
  std::uniform_real_distribution<double> dist(-limit, limit);
  for (double& w : layer.weights.data) w = dist(rng);
  return layer;
}

DenseLayer make_zero_dense(std::size_t in, std::size_t out, Activation act) {
  if (in == 0 || out == 0) throw ContractError("dense layer dimensions must be positive");
  return DenseLayer{Matrix(out, in), Matrix(1, out), act};
}

std::vector<DenseLayer> make_mlp(std::size_t in, const std::vector<std::size_t>& hidden,
                                 std::size_t out, Activation hidden_act, Activation out_act,
                                 std::mt19937_64& rng) {
  std::vector<DenseLayer> layers;
  std::size_t width = in;
  for (std::size_t h : hidden) {
    layers.push_back(make_dense(width, h, hidden_act, rng));
    width = h;
  }
  layers.push_back(make_dense(width, out, out_act, rng));
  return layers;
}

BoundLayer bind(Tape& tape, const DenseLayer& layer) {
  return BoundLayer{tape.leaf(layer.weights), tape.leaf(layer.bias), layer.activation};
}

std::vector<BoundLayer> bind(Tape& tape, const std::vector<DenseLayer>& layers) {
  std::vector<BoundLayer> out;
  out.reserve(layers.size());
  for (const auto& l : layers) out.push_back(bind(tape, l));
  return out;
}

Value activate(Activation a, Value x) {
  switch (a) {
    case Activation::identity: return x;
    case Activation::relu: return relu(x);
    case Activation::tanh: return tanh(x);
    case Activation::sigmoid: return sigmoid(x);
    case Activation::softplus: return softplus(x);
  }
  return x;
}

Value forward(const BoundLayer& layer, Value x) {
  return activate(layer.activation, linear(x, layer.weights, layer.bias));
}

Value forward(const std::vector<BoundLayer>& layers, Value x) {
  for (const auto& l : layers) x = forward(l, x);
  return x;
}

void collect_parameters(DenseLayer& layer, std::vector<Matrix*>& out) {
  out.push_back(&layer.weights);
  out.push_back(&layer.bias);
}

void collect_parameters(std::vector<DenseLayer>& layers, std::vector<Matrix*>& out) {
  for (auto& l : layers) collect_parameters(l, out);
}

void collect_gradients(const BoundLayer& layer, std::vector<Matrix>& out) {
  out.push_back(layer.weights.grad());
  out.push_back(layer.bias.grad());
}

void collect_gradients(const std::vector<BoundLayer>& layers, std::vector<Matrix>& out) {
  for (const auto& l : layers) collect_gradients(l, out);
}

}  // namespace imb::ad
