#pragma once

// JSON encoding shared by checkpoints. Parameter values are stored as decimal strings with
// 17 significant digits so a save/load cycle reproduces every double exactly.

#include <string>
#include <vector>

#include <json.hpp>

#include "imb/layers.hpp"
#include "imb/matrix.hpp"

namespace imb::serialize {

std::string exact_decimal(double v);
double parse_exact_decimal(const std::string& s);

nlohmann::json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const nlohmann::json& j);

nlohmann::json layer_to_json(const ad::DenseLayer& layer);
ad::DenseLayer layer_from_json(const nlohmann::json& j);

nlohmann::json layers_to_json(const std::vector<ad::DenseLayer>& layers);
std::vector<ad::DenseLayer> layers_from_json(const nlohmann::json& j);

// Throws ContractError naming the first key of `j` that is not in `allowed`.
void reject_unknown_keys(const nlohmann::json& j, const std::vector<std::string>& allowed,
                         const std::string& context);

}  // namespace imb::serialize
