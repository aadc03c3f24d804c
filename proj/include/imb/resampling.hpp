#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "imb/data.hpp"
#include "imb/matrix.hpp"

namespace imb::resample {

// Per-class loss multipliers: the minority class is weighted by n_major / n_minor and the
// majority class by 1.
struct ClassWeights {
  int minority_label = 1;
  double w_minority = 1.0;
  double w_majority = 1.0;
  std::size_t n_major = 0;
  std::size_t n_minor = 0;

  double weight_for(int label) const { return label == minority_label ? w_minority : w_majority; }
  std::vector<double> per_sample(std::span<const int> labels) const;
};

// Minority = the less frequent label (label 1 on a tie). Throws ContractError unless both
// classes are present.
ClassWeights class_weights(std::span<const int> labels);

struct Neighbor {
  std::size_t index;
  double distance;
};

// Brute-force Euclidean k-NN over the rows of `points`. A point is never its own neighbour;
// lists are sorted by distance with ties broken by the lower row index.
struct NeighborIndex {
  std::size_t k = 0;
  std::vector<std::vector<Neighbor>> neighbors;
};

NeighborIndex build_neighbor_index(const Matrix& points, std::size_t k);

// Provenance of one synthetic row: x_new = x_parent + lambda·(x_neighbor − x_parent).
// Indices refer to rows of the input Dataset.
struct SyntheticOrigin {
  std::size_t output_row;
  std::size_t parent;
  std::size_t neighbor;
  double lambda;
};

struct ResampleResult {
  data::Dataset data;
  std::vector<SyntheticOrigin> synthetic;
};

data::Dataset random_undersample(const data::Dataset& ds, std::uint64_t seed);
data::Dataset random_oversample(const data::Dataset& ds, std::uint64_t seed);

struct SmoteOptions {
  std::size_t k = 5;
  // Total minority rows wanted after synthesis; defaults to the majority count.
  std::optional<std::size_t> target_minority_count;
  std::uint64_t seed = 0;
  // Forces every interpolation coefficient (tests only).
  std::optional<double> fixed_lambda;
};

// Output: the input rows in their original order followed by the synthetic minority rows.
ResampleResult smote(const data::Dataset& ds, const SmoteOptions& opts);
// Same interpolation as smote, but each minority point's share of the synthesis budget is
// proportional to the fraction of majority points among its k nearest neighbours in the
// full dataset. Falls back to the uniform smote allocation when no minority point has a
// majority neighbour.
ResampleResult adasyn(const data::Dataset& ds, const SmoteOptions& opts);

// Number of synthetic rows allotted to each minority point (in minority-row order) for a
// total budget; uniform for smote, density-weighted for adasyn. Exposed for inspection.
std::vector<std::size_t> smote_allocation(std::size_t n_minor, std::size_t budget);
std::vector<std::size_t> adasyn_allocation(const data::Dataset& ds, std::size_t k, std::size_t budget);

}  // namespace imb::resample
