#include "imb/resampling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "imb/errors.hpp"
#include "imb/kernels.hpp"
#include "imb/parallel.hpp"

namespace imb::resample {
namespace {

struct ClassSplit {
  std::vector<std::size_t> minority;
  std::vector<std::size_t> majority;
  int minority_label;
};

ClassSplit split_classes(const data::Dataset& ds) {
  const ClassWeights w = class_weights(ds.labels);
  ClassSplit s{{}, {}, w.minority_label};
  for (std::size_t i = 0; i < ds.size(); ++i)
    (ds.labels[i] == w.minority_label ? s.minority : s.majority).push_back(i);
  return s;
}

void append_row(data::Dataset& out, std::span<const double> row, int label) {
  out.features.data.insert(out.features.data.end(), row.begin(), row.end());
  out.features.rows += 1;
  out.labels.push_back(label);
}

void check_smote_preconditions(std::size_t n_minor, std::size_t k) {
  if (n_minor < 2) throw ContractError("smote: at least 2 minority rows are required");
  if (k == 0) throw ContractError("smote: k must be positive");
  if (k >= n_minor)
    throw ContractError("smote: k=" + std::to_string(k) + " requires more than k minority rows, found " +
                        std::to_string(n_minor));
}

ResampleResult interpolate(const data::Dataset& ds, const ClassSplit& classes,
                           const std::vector<std::size_t>& allocation, const SmoteOptions& opts) {
  Matrix minority_points(classes.minority.size(), ds.dim());
  for (std::size_t i = 0; i < classes.minority.size(); ++i)
    std::copy_n(ds.features.row(classes.minority[i]).begin(), ds.dim(), minority_points.row(i).begin());
  const NeighborIndex index = build_neighbor_index(minority_points, opts.k);

  ResampleResult result{ds, {}};
  std::mt19937_64 rng(opts.seed);
  std::uniform_int_distribution<std::size_t> pick(0, opts.k - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> synth(ds.dim());
  for (std::size_t p = 0; p < allocation.size(); ++p) {
    const auto parent = minority_points.row(p);
    for (std::size_t c = 0; c < allocation[p]; ++c) {
      const std::size_t nb = index.neighbors[p][pick(rng)].index;
      const double lambda = opts.fixed_lambda ? *opts.fixed_lambda : unit(rng);
      const auto other = minority_points.row(nb);
      for (std::size_t j = 0; j < ds.dim(); ++j) synth[j] = parent[j] + lambda * (other[j] - parent[j]);
      result.synthetic.push_back(
          {result.data.size(), classes.minority[p], classes.minority[nb], lambda});
      append_row(result.data, synth, classes.minority_label);
    }
  }
  return result;
}

std::size_t synthesis_budget(const ClassSplit& classes, const SmoteOptions& opts) {
  const std::size_t target = opts.target_minority_count.value_or(classes.majority.size());
  return target > classes.minority.size() ? target - classes.minority.size() : 0;
}

}  // namespace

std::vector<double> ClassWeights::per_sample(std::span<const int> labels) const {
  std::vector<double> w;
  w.reserve(labels.size());
  for (int y : labels) w.push_back(weight_for(y));
  return w;
}

ClassWeights class_weights(std::span<const int> labels) {
  std::size_t ones = 0, zeros = 0;
  for (int y : labels) {
    if (y == 1)
      ++ones;
    else if (y == 0)
      ++zeros;
    else
      throw ContractError("class_weights: labels must be 0 or 1");
  }
  if (ones == 0 || zeros == 0) throw ContractError("class_weights: both classes must be present");
  ClassWeights w;
  w.minority_label = ones <= zeros ? 1 : 0;
  w.n_minor = std::min(ones, zeros);
  w.n_major = std::max(ones, zeros);
  w.w_minority = static_cast<double>(w.n_major) / static_cast<double>(w.n_minor);
  w.w_majority = 1.0;
  return w;
}

NeighborIndex build_neighbor_index(const Matrix& points, std::size_t k) {
  const std::size_t n = points.rows;
  if (k == 0 || k >= n)
    throw ContractError("build_neighbor_index: k=" + std::to_string(k) + " needs at least k+1 points, have " +
                        std::to_string(n));
  NeighborIndex index;
  index.k = k;
  index.neighbors.resize(n);
  parallel_for(n, [&](std::size_t i) {
    std::vector<std::pair<double, std::size_t>> cand;
    cand.reserve(n - 1);
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) cand.emplace_back(kernels::squared_distance(points.row(i), points.row(j)), j);
    std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(k), cand.end());
    auto& list = index.neighbors[i];
    list.reserve(k);
    for (std::size_t r = 0; r < k; ++r) list.push_back({cand[r].second, std::sqrt(cand[r].first)});
  });
  return index;
}

data::Dataset random_undersample(const data::Dataset& ds, std::uint64_t seed) {
  ClassSplit classes = split_classes(ds);
  std::mt19937_64 rng(seed);
  std::shuffle(classes.majority.begin(), classes.majority.end(), rng);
  classes.majority.resize(classes.minority.size());
  std::vector<std::size_t> keep = classes.minority;
  keep.insert(keep.end(), classes.majority.begin(), classes.majority.end());
  std::sort(keep.begin(), keep.end());
  return ds.subset(keep);
}

data::Dataset random_oversample(const data::Dataset& ds, std::uint64_t seed) {
  const ClassSplit classes = split_classes(ds);
  data::Dataset out = ds;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, classes.minority.size() - 1);
  for (std::size_t c = classes.minority.size(); c < classes.majority.size(); ++c) {
    const std::size_t src = classes.minority[pick(rng)];
    append_row(out, ds.features.row(src), classes.minority_label);
  }
  return out;
}

std::vector<std::size_t> smote_allocation(std::size_t n_minor, std::size_t budget) {
  if (n_minor == 0) throw ContractError("smote_allocation: no minority rows");
  std::vector<std::size_t> alloc(n_minor, budget / n_minor);
  for (std::size_t i = 0; i < budget % n_minor; ++i) alloc[i] += 1;
  return alloc;
}

std::vector<std::size_t> adasyn_allocation(const data::Dataset& ds, std::size_t k, std::size_t budget) {
  const ClassSplit classes = split_classes(ds);
  check_smote_preconditions(classes.minority.size(), k);
  const NeighborIndex all = build_neighbor_index(ds.features, k);

  std::vector<double> ratio(classes.minority.size(), 0.0);
  double total = 0.0;
  for (std::size_t p = 0; p < classes.minority.size(); ++p) {
    std::size_t majority_neighbors = 0;
    for (const Neighbor& nb : all.neighbors[classes.minority[p]])
      if (ds.labels[nb.index] != classes.minority_label) ++majority_neighbors;
    ratio[p] = static_cast<double>(majority_neighbors) / static_cast<double>(k);
    total += ratio[p];
  }
  if (total == 0.0) return smote_allocation(classes.minority.size(), budget);

  // Largest-remainder rounding keeps the total exactly equal to the budget.
  std::vector<std::size_t> alloc(ratio.size());
  std::vector<std::pair<double, std::size_t>> remainders;
  std::size_t assigned = 0;
  for (std::size_t p = 0; p < ratio.size(); ++p) {
    const double share = ratio[p] / total * static_cast<double>(budget);
    alloc[p] = static_cast<std::size_t>(std::floor(share));
    assigned += alloc[p];
    remainders.emplace_back(share - std::floor(share), p);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t r = 0; assigned < budget; ++r, ++assigned) alloc[remainders[r % remainders.size()].second] += 1;
  return alloc;
}

ResampleResult smote(const data::Dataset& ds, const SmoteOptions& opts) {
  const ClassSplit classes = split_classes(ds);
  check_smote_preconditions(classes.minority.size(), opts.k);
  const auto alloc = smote_allocation(classes.minority.size(), synthesis_budget(classes, opts));
  return interpolate(ds, classes, alloc, opts);
}

ResampleResult adasyn(const data::Dataset& ds, const SmoteOptions& opts) {
  const ClassSplit classes = split_classes(ds);
  check_smote_preconditions(classes.minority.size(), opts.k);
  const auto alloc = adasyn_allocation(ds, opts.k, synthesis_budget(classes, opts));
  return interpolate(ds, classes, alloc, opts);
}

}  // namespace imb::resample
