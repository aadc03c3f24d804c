#include "imb/serialize.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>

#include "imb/errors.hpp"

namespace imb::serialize {

std::string exact_decimal(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double parse_exact_decimal(const std::string& s) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0') throw ParseError("invalid decimal '" + s + "'", 0);
  return v;
}

nlohmann::json matrix_to_json(const Matrix& m) {
  nlohmann::json values = nlohmann::json::array();
  for (double v : m.data) values.push_back(exact_decimal(v));
  return {{"rows", m.rows}, {"cols", m.cols}, {"values", std::move(values)}};
}

Matrix matrix_from_json(const nlohmann::json& j) {
  Matrix m(j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>());
  const auto& values = j.at("values");
  if (values.size() != m.size())
    throw ParseError("matrix " + m.shape_string() + " has " + std::to_string(values.size()) + " values", 0);
  for (std::size_t i = 0; i < m.size(); ++i) m.data[i] = parse_exact_decimal(values[i].get<std::string>());
  return m;
}

nlohmann::json layer_to_json(const ad::DenseLayer& layer) {
  return {{"activation", std::string(ad::activation_name(layer.activation))},
          {"weights", matrix_to_json(layer.weights)},
          {"bias", matrix_to_json(layer.bias)}};
}

ad::DenseLayer layer_from_json(const nlohmann::json& j) {
  ad::DenseLayer layer;
  layer.activation = ad::parse_activation(j.at("activation").get<std::string>());
  layer.weights = matrix_from_json(j.at("weights"));
  layer.bias = matrix_from_json(j.at("bias"));
  if (layer.bias.rows != 1 || layer.bias.cols != layer.weights.rows)
    throw ParseError("layer bias " + layer.bias.shape_string() + " does not match weights " +
                         layer.weights.shape_string(),
                     0);
  return layer;
}

nlohmann::json layers_to_json(const std::vector<ad::DenseLayer>& layers) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& l : layers) out.push_back(layer_to_json(l));
  return out;
}

std::vector<ad::DenseLayer> layers_from_json(const nlohmann::json& j) {
  std::vector<ad::DenseLayer> out;
  for (const auto& l : j) out.push_back(layer_from_json(l));
  return out;
}

void reject_unknown_keys(const nlohmann::json& j, const std::vector<std::string>& allowed,
                         const std::string& context) {
  if (!j.is_object()) throw ContractError(context + ": expected a JSON object");
  for (const auto& [key, _] : j.items())
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw ContractError(context + ": unknown key '" + key + "'");
}

}  // namespace imb::serialize
