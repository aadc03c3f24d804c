#include "imb/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include <Eigen/Dense>

#include "imb/errors.hpp"
#include "imb/kernels.hpp"
#include "imb/metrics.hpp"
#include "imb/parallel.hpp"

namespace imb::report {
namespace {

void append_double(std::string& out, double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, ptr);
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw IoError("cannot write '" + path.string() + "'");
  file << text;
  if (!file) throw IoError("write failed for '" + path.string() + "'");
}

// Reads a numeric CSV with the expected header; returns rows of values.
std::vector<std::vector<double>> read_numeric_csv(const std::filesystem::path& path, const std::string& header) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line) || line != header)
    throw ParseError("'" + path.string() + "': expected header '" + header + "'", 1);
  const std::size_t width = static_cast<std::size_t>(std::count(header.begin(), header.end(), ',')) + 1;
  std::vector<std::vector<double>> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<double> row;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = line.find(',', start);
      const std::string_view cell(line.data() + start, (comma == std::string::npos ? line.size() : comma) - start);
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (ec != std::errc() || ptr != cell.data() + cell.size())
        throw ParseError("'" + path.string() + "' line " + std::to_string(line_no) + ": bad number", line_no);
      row.push_back(v);
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (row.size() != width)
      throw ParseError("'" + path.string() + "' line " + std::to_string(line_no) + ": wrong cell count", line_no);
    rows.push_back(std::move(row));
  }
  return rows;
}

// Row i of the conditional affinities with precision beta; returns the Shannon entropy.
double conditional_row(std::span<const double> sq_dist, std::size_t i, double beta, std::span<double> out) {
  double min_d = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < sq_dist.size(); ++j)
    if (j != i) min_d = std::min(min_d, sq_dist[j]);
  double total = 0.0;
  double weighted = 0.0;
  for (std::size_t j = 0; j < sq_dist.size(); ++j) {
    if (j == i) {
      out[j] = 0.0;
      continue;
    }
    const double shifted = sq_dist[j] - min_d;
    out[j] = std::exp(-shifted * beta);
    total += out[j];
    weighted += shifted * out[j];
  }
  for (double& v : out) v /= total;
  return std::log(total) + beta * weighted / total;
}

}  // namespace

void export_loss_csv(const dpgm::TrainTrace& trace, const std::filesystem::path& path) {
  if (trace.records.empty()) throw ContractError("export_loss_csv: empty trace");
  std::string out = "iteration,train_loss,test_loss\n";
  for (const auto& r : trace.records) {
    out += std::to_string(r.iteration);
    out += ',';
    append_double(out, r.train_loss);
    out += ',';
    append_double(out, r.test_loss);
    out += '\n';
  }
  write_text(path, out);
}

dpgm::TrainTrace read_loss_csv(const std::filesystem::path& path) {
  dpgm::TrainTrace trace;
  for (const auto& row : read_numeric_csv(path, "iteration,train_loss,test_loss"))
    trace.records.push_back({static_cast<std::size_t>(row[0]), row[1], row[2]});
  return trace;
}

PcaResult pca2d(const Matrix& points, std::span<const int> labels) {
  const std::size_t n = points.rows, m = points.cols;
  if (n < 3) throw ContractError("pca2d: at least 3 points are required");
  if (m < 2) throw ContractError("pca2d: at least 2 input dimensions are required");
  if (!labels.empty() && labels.size() != n) throw DimensionError("pca2d: label count differs from point count");

  Eigen::MatrixXd centered(n, m);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) centered(i, j) = points(i, j);
  centered.rowwise() -= centered.colwise().mean();
  const Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(n - 1);
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success) throw NumericError("pca2d: eigendecomposition failed");
  const Eigen::VectorXd& values = solver.eigenvalues();  // ascending
  if (!(values(m - 1) > 0.0)) throw ContractError("pca2d: input has rank 0 (all points identical)");

  Eigen::MatrixXd axes(m, 2);
  axes.col(0) = solver.eigenvectors().col(m - 1);
  axes.col(1) = solver.eigenvectors().col(m - 2);
  for (int c = 0; c < 2; ++c) {
    Eigen::Index arg = 0;
    axes.col(c).cwiseAbs().maxCoeff(&arg);
    if (axes(arg, c) < 0) axes.col(c) *= -1.0;
  }
  const Eigen::MatrixXd projected = centered * axes;

  PcaResult r;
  r.eigenvalue1 = values(m - 1);
  r.eigenvalue2 = std::max(0.0, values(m - 2));
  r.embedding.method = EmbeddingMethod::pca;
  r.embedding.coords = Matrix(n, 2);
  for (std::size_t i = 0; i < n; ++i) {
    r.embedding.coords(i, 0) = projected(i, 0);
    r.embedding.coords(i, 1) = projected(i, 1);
  }
  r.embedding.labels.assign(labels.begin(), labels.end());
  if (r.embedding.labels.empty()) r.embedding.labels.assign(n, 0);
  r.embedding.parameters = {{"eigenvalue1", r.eigenvalue1}, {"eigenvalue2", r.eigenvalue2}};
  return r;
}

Matrix tsne_affinities(const Matrix& points, double perplexity, std::vector<double>* betas) {
  const std::size_t n = points.rows;
  if (n < 2) throw ContractError("tsne_affinities: at least 2 points are required");
  if (!(perplexity > 0.0)) throw ContractError("tsne_affinities: perplexity must be positive");
  const double target = std::log(perplexity);

  Matrix sq(n, n);
  parallel_for(n, [&](std::size_t i) {
    for (std::size_t j = 0; j < n; ++j) sq(i, j) = i == j ? 0.0 : kernels::squared_distance(points.row(i), points.row(j));
  });

  Matrix cond(n, n);
  std::vector<double> found(n, 1.0);
  parallel_for(n, [&](std::size_t i) {
    double beta = 1.0;
    double lo = 0.0, hi = std::numeric_limits<double>::infinity();
    for (int iter = 0; iter < 200; ++iter) {
      const double h = conditional_row(sq.row(i), i, beta, cond.row(i));
      found[i] = beta;
      const double diff = h - target;
      if (std::abs(diff) < 1e-5) break;
      if (diff > 0.0) {  // entropy too high → sharpen
        lo = beta;
        beta = std::isinf(hi) ? beta * 2.0 : (beta + hi) / 2.0;
      } else {
        hi = beta;
        beta = (beta + lo) / 2.0;
      }
    }
  });
  if (betas) *betas = found;

  Matrix p(n, n);
  const double denom = 2.0 * static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) p(i, j) = (cond(i, j) + cond(j, i)) / denom;
  return p;
}

TsneResult tsne_exact(const Matrix& points, std::span<const int> labels, const TsneOptions& opts) {
  const std::size_t n = points.rows;
  if (n < 3 || n > 5000) throw ContractError("tsne_exact: need 3 ≤ n ≤ 5000 points (subsample larger sets)");
  if (!(opts.perplexity < static_cast<double>(n) / 3.0))
    throw ContractError("tsne_exact: perplexity must be below n/3");
  if (!labels.empty() && labels.size() != n) throw DimensionError("tsne_exact: label count differs from point count");

  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix jittered = points;
  for (double& v : jittered.data) v += 1e-12 * normal(rng);

  TsneResult result;
  const Matrix p = tsne_affinities(jittered, opts.perplexity, &result.betas);

  Matrix y(n, 2);
  for (double& v : y.data) v = 1e-2 * normal(rng);
  Matrix velocity(n, 2), gains(n, 2, 1.0), grad(n, 2);
  std::vector<double> row_num_sum(n), row_kl(n);

  for (std::size_t iter = 0; iter < opts.iterations; ++iter) {
    const double exaggeration = iter < opts.exaggeration_iters ? opts.early_exaggeration : 1.0;
    const double momentum = iter < opts.momentum_switch_iter ? 0.5 : 0.8;

    parallel_for(n, [&](std::size_t i) {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        const double dx = y(i, 0) - y(j, 0), dy = y(i, 1) - y(j, 1);
        s += 1.0 / (1.0 + dx * dx + dy * dy);
      }
      row_num_sum[i] = s;
    });
    double num_total = 0.0;
    for (double s : row_num_sum) num_total += s;

    parallel_for(n, [&](std::size_t i) {
      double gx = 0.0, gy = 0.0, kl = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        const double dx = y(i, 0) - y(j, 0), dy = y(i, 1) - y(j, 1);
        const double num = 1.0 / (1.0 + dx * dx + dy * dy);
        const double q = std::max(num / num_total, 1e-300);
        const double pij = p(i, j);
        const double mult = (exaggeration * pij - q) * num;
        gx += mult * dx;
        gy += mult * dy;
        if (pij > 0.0) kl += pij * std::log(pij / q);
      }
      grad(i, 0) = 4.0 * gx;
      grad(i, 1) = 4.0 * gy;
      row_kl[i] = kl;
    });
    double kl_total = 0.0;
    for (double k : row_kl) kl_total += k;
    result.kl_history.push_back(kl_total);

    for (std::size_t k = 0; k < y.size(); ++k) {
      const bool same_sign = (grad.data[k] > 0.0) == (velocity.data[k] > 0.0);
      gains.data[k] = same_sign ? gains.data[k] * 0.8 : gains.data[k] + 0.2;
      gains.data[k] = std::max(gains.data[k], 0.01);
      velocity.data[k] = momentum * velocity.data[k] - opts.learning_rate * gains.data[k] * grad.data[k];
      y.data[k] += velocity.data[k];
    }
    for (std::size_t c = 0; c < 2; ++c) {
      double mean = 0.0;
      for (std::size_t i = 0; i < n; ++i) mean += y(i, c);
      mean /= static_cast<double>(n);
      for (std::size_t i = 0; i < n; ++i) y(i, c) -= mean;
    }
  }
  if (!y.all_finite()) throw NumericError("tsne_exact: embedding diverged");

  result.embedding.method = EmbeddingMethod::tsne;
  result.embedding.coords = std::move(y);
  result.embedding.labels.assign(labels.begin(), labels.end());
  if (result.embedding.labels.empty()) result.embedding.labels.assign(n, 0);
  result.embedding.parameters = {{"perplexity", opts.perplexity},
                                 {"iterations", static_cast<double>(opts.iterations)},
                                 {"learning_rate", opts.learning_rate},
                                 {"seed", static_cast<double>(opts.seed)}};
  return result;
}

double silhouette(const Matrix& coords, std::span<const int> labels) {
  const std::size_t n = coords.rows;
  if (labels.size() != n) throw DimensionError("silhouette: label count differs from point count");
  std::vector<int> classes(labels.begin(), labels.end());
  std::sort(classes.begin(), classes.end());
  classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
  if (classes.size() < 2) throw ContractError("silhouette: at least two clusters are required");

  std::vector<double> s(n, 0.0);
  parallel_for(n, [&](std::size_t i) {
    std::vector<double> dist_sum(classes.size(), 0.0);
    std::vector<std::size_t> counts(classes.size(), 0);
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const auto c = static_cast<std::size_t>(std::lower_bound(classes.begin(), classes.end(), labels[j]) - classes.begin());
      dist_sum[c] += std::sqrt(kernels::squared_distance(coords.row(i), coords.row(j)));
      counts[c] += 1;
    }
    const auto own = static_cast<std::size_t>(std::lower_bound(classes.begin(), classes.end(), labels[i]) - classes.begin());
    if (counts[own] == 0) return;  // singleton cluster scores 0
    const double a = dist_sum[own] / static_cast<double>(counts[own]);
    double b = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < classes.size(); ++c)
      if (c != own && counts[c] > 0) b = std::min(b, dist_sum[c] / static_cast<double>(counts[c]));
    const double denom = std::max(a, b);
    s[i] = denom > 0.0 ? (b - a) / denom : 0.0;
  });
  double total = 0.0;
  for (double v : s) total += v;
  return total / static_cast<double>(n);
}

std::vector<std::size_t> stratified_subsample(std::span<const int> labels, std::size_t max_rows, std::uint64_t seed) {
  const std::size_t n = labels.size();
  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), 0);
  if (n <= max_rows) return all;
  if (max_rows == 0) throw ContractError("stratified_subsample: max_rows must be positive");

  std::mt19937_64 rng(seed);
  std::vector<std::size_t> picked;
  for (int label : {0, 1}) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < n; ++i)
      if (labels[i] == label) members.push_back(i);
    if (members.empty()) continue;
    const double share = static_cast<double>(members.size()) * static_cast<double>(max_rows) / static_cast<double>(n);
    std::size_t take = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(share + 0.5)));
    take = std::min(take, members.size());
    std::shuffle(members.begin(), members.end(), rng);
    picked.insert(picked.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(take));
  }
  std::sort(picked.begin(), picked.end());
  while (picked.size() > max_rows) picked.pop_back();
  return picked;
}

std::vector<SweepRow> threshold_sweep(std::span<const double> scores, std::span<const int> labels,
                                      std::span<const double> grid) {
  if (grid.empty()) throw ContractError("threshold_sweep: empty threshold grid");
  std::vector<SweepRow> rows;
  for (double t : grid) {
    if (!(t >= 0.0 && t <= 1.0)) throw ContractError("threshold_sweep: thresholds must lie in [0, 1]");
    const auto prf = metrics::precision_recall_f1(metrics::confusion_at_threshold(scores, labels, t));
    rows.push_back({t, prf.precision, prf.recall, prf.f1});
  }
  return rows;
}

std::vector<double> uniform_grid(std::size_t steps) {
  if (steps == 0) throw ContractError("uniform_grid: steps must be positive");
  std::vector<double> g;
  for (std::size_t i = 0; i <= steps; ++i) g.push_back(static_cast<double>(i) / static_cast<double>(steps));
  return g;
}

void write_sweep_csv(const std::vector<SweepRow>& rows, const std::filesystem::path& path) {
  std::string out = "threshold,precision,recall,f1\n";
  for (const auto& r : rows) {
    append_double(out, r.threshold);
    out += ',';
    append_double(out, r.precision);
    out += ',';
    append_double(out, r.recall);
    out += ',';
    append_double(out, r.f1);
    out += '\n';
  }
  write_text(path, out);
}

std::vector<SweepRow> read_sweep_csv(const std::filesystem::path& path) {
  std::vector<SweepRow> rows;
  for (const auto& r : read_numeric_csv(path, "threshold,precision,recall,f1")) rows.push_back({r[0], r[1], r[2], r[3]});
  return rows;
}

void write_embedding_csv(const Embedding2D& e, const std::filesystem::path& path) {
  std::string out = "x,y,label\n";
  for (std::size_t i = 0; i < e.coords.rows; ++i) {
    append_double(out, e.coords(i, 0));
    out += ',';
    append_double(out, e.coords(i, 1));
    out += ',';
    out += std::to_string(e.labels[i]);
    out += '\n';
  }
  write_text(path, out);
}

Embedding2D read_embedding_csv(const std::filesystem::path& path) {
  const auto rows = read_numeric_csv(path, "x,y,label");
  Embedding2D e;
  e.coords = Matrix(rows.size(), 2);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    e.coords(i, 0) = rows[i][0];
    e.coords(i, 1) = rows[i][1];
    e.labels.push_back(static_cast<int>(rows[i][2]));
  }
  return e;
}

}  // namespace imb::report
