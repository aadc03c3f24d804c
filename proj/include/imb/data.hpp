#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "imb/matrix.hpp"

namespace imb::data {

// Feature matrix with binary labels. The label column's position in the source header is
// remembered so written CSVs reproduce the input header exactly.
struct Dataset {
  Matrix features;  // n × d
  std::vector<int> labels;
  std::vector<std::string> feature_names;
  std::string label_name = "Class";
  std::size_t label_position = 0;  // index of the label column in the CSV header

  std::size_t size() const { return labels.size(); }
  std::size_t dim() const { return features.cols; }
  std::size_t count(int label) const;
  Dataset subset(std::span<const std::size_t> rows) const;
};

// Throws ParseError (with the 1-based line) on a missing file, a ragged row, a non-numeric
// cell or a label outside {0,1}; the message names the available columns when
// `label_column` is absent.
Dataset load_csv(const std::filesystem::path& path, const std::string& label_column);
// Values are written with 17 significant digits so a reload reproduces them exactly.
void write_csv(const Dataset& ds, const std::filesystem::path& path);

struct NormStats {
  std::vector<double> mean;
  std::vector<double> std;             // strictly positive
  std::vector<bool> zero_variance;     // features whose std was replaced by 1
  double clip_k = 5.0;
};

// Population mean/std of the fitting rows. Throws ContractError on an empty set.
NormStats fit_normalize(const Dataset& train, double clip_k = 5.0);
// z-score every feature, then clip to [−clip_k, clip_k].
Dataset apply_normalize(const Dataset& ds, const NormStats& stats);

std::string norm_stats_to_json(const NormStats& stats);
NormStats norm_stats_from_json(const std::string& text);

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
  std::vector<std::size_t> test;
  std::uint64_t seed = 0;
};

// Per class: shuffle member indices with the seeded RNG, then allocate
// round(f_train·n) to train, round(f_val·n) to val and the rest to test, moving single
// rows from the largest part so no part is empty. Index lists come back sorted.
SplitIndices stratified_split(const Dataset& ds, std::array<double, 3> fractions = {0.70, 0.15, 0.15},
                              std::uint64_t seed = 0);

// Majority rows ~ N(0, I_d) labelled 0 first, then minority rows ~ N(sep·e₁, I_d) labelled 1.
Dataset synth_imbalanced(std::size_t n_major, std::size_t n_minor, std::size_t d,
                         double mean_separation, std::uint64_t seed);

}  // namespace imb::data
