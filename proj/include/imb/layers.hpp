#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "imb/autodiff.hpp"
#include "imb/matrix.hpp"

namespace imb::ad {

enum class Activation { identity, relu, tanh, sigmoid, softplus };

std::string_view activation_name(Activation a);
Activation parse_activation(std::string_view name);

struct DenseLayer {
  Matrix weights;  // out_dim × in_dim
  Matrix bias;     // 1 × out_dim
  Activation activation = Activation::identity;

  std::size_t in_dim() const { return weights.cols; }
  std::size_t out_dim() const { return weights.rows; }
};

// Uniform(−a, a) weights with a = sqrt(6/in) for relu (He) and sqrt(6/(in+out)) otherwise
// (Glorot); zero bias.
DenseLayer make_dense(std::size_t in, std::size_t out, Activation act, std::mt19937_64& rng);
DenseLayer make_zero_dense(std::size_t in, std::size_t out, Activation act);

// Builds a stack in → hidden... → out with `hidden_act` between layers and `out_act` last.
std::vector<DenseLayer> make_mlp(std::size_t in, const std::vector<std::size_t>& hidden,
                                 std::size_t out, Activation hidden_act, Activation out_act,
                                 std::mt19937_64& rng);

struct BoundLayer {
  Value weights;
  Value bias;
  Activation activation = Activation::identity;
};

BoundLayer bind(Tape& tape, const DenseLayer& layer);
std::vector<BoundLayer> bind(Tape& tape, const std::vector<DenseLayer>& layers);

Value activate(Activation a, Value x);
Value forward(const BoundLayer& layer, Value x);
Value forward(const std::vector<BoundLayer>& layers, Value x);

// Appends pointers to weights then bias of every layer, in order.
void collect_parameters(std::vector<DenseLayer>& layers, std::vector<Matrix*>& out);
void collect_parameters(DenseLayer& layer, std::vector<Matrix*>& out);
// Gradients for the same order as collect_parameters.
void collect_gradients(const std::vector<BoundLayer>& layers, std::vector<Matrix>& out);
void collect_gradients(const BoundLayer& layer, std::vector<Matrix>& out);

}  // namespace imb::ad
