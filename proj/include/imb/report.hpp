#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "imb/matrix.hpp"
#include "imb/trainer.hpp"

namespace imb::report {

// Header iteration,train_loss,test_loss; values with round-trip precision.
void export_loss_csv(const dpgm::TrainTrace& trace, const std::filesystem::path& path);
dpgm::TrainTrace read_loss_csv(const std::filesystem::path& path);

enum class EmbeddingMethod { pca, tsne };

struct Embedding2D {
  Matrix coords;  // n × 2
  std::vector<int> labels;
  EmbeddingMethod method = EmbeddingMethod::pca;
  std::map<std::string, double> parameters;
};

struct PcaResult {
  Embedding2D embedding;
  double eigenvalue1 = 0.0;  // covariance eigenvalues, 1/(n−1) normalisation
  double eigenvalue2 = 0.0;
  double captured_variance() const { return eigenvalue1 + eigenvalue2; }
};

// Projection of the centred rows onto the top-2 covariance eigenvectors. Each axis is
// signed so its largest-magnitude loading is positive. Needs n ≥ 3, m ≥ 2 and non-constant
// input.
PcaResult pca2d(const Matrix& points, std::span<const int> labels = {});

struct TsneOptions {
  double perplexity = 30.0;
  std::size_t iterations = 1000;
  std::uint64_t seed = 0;
  double learning_rate = 200.0;
  double early_exaggeration = 4.0;
  std::size_t exaggeration_iters = 100;
  std::size_t momentum_switch_iter = 250;
};

struct TsneResult {
  Embedding2D embedding;
  std::vector<double> kl_history;  // KL(P‖Q) with the unexaggerated P, one per iteration
  std::vector<double> betas;       // per-point precision 1/(2σ²)
};

// Symmetrised input affinities P_ij = (p_{j|i} + p_{i|j}) / (2n) with each conditional's
// bandwidth found by bisection on the Shannon entropy (tolerance 1e-5 nats, log(perplexity)
// target). Works for any n ≥ 2. Rows computed in parallel, each independently.
Matrix tsne_affinities(const Matrix& points, double perplexity, std::vector<double>* betas = nullptr);

// Exact O(n²) t-SNE: Student-t output kernel, gradient descent with gains, momentum
// 0.5 → 0.8 and early exaggeration. Requires 3 ≤ n ≤ 5000 and perplexity < n/3.
// Inputs receive a seeded 1e-12 jitter; the layout starts from N(0, 1e-4).
TsneResult tsne_exact(const Matrix& points, std::span<const int> labels, const TsneOptions& opts);

// Mean silhouette coefficient over all points (Euclidean).
double silhouette(const Matrix& coords, std::span<const int> labels);

// Picks at most `max_rows` row indices, proportionally per class, seeded; sorted.
std::vector<std::size_t> stratified_subsample(std::span<const int> labels, std::size_t max_rows, std::uint64_t seed);

struct SweepRow {
  double threshold;
  double precision;
  double recall;
  double f1;
};

// Throws ContractError if grid is empty or leaves [0, 1].
std::vector<SweepRow> threshold_sweep(std::span<const double> scores, std::span<const int> labels,
                                      std::span<const double> grid);
std::vector<double> uniform_grid(std::size_t steps);  // 0, 1/steps, …, 1

void write_sweep_csv(const std::vector<SweepRow>& rows, const std::filesystem::path& path);
std::vector<SweepRow> read_sweep_csv(const std::filesystem::path& path);
void write_embedding_csv(const Embedding2D& e, const std::filesystem::path& path);
Embedding2D read_embedding_csv(const std::filesystem::path& path);

}  // namespace imb::report
