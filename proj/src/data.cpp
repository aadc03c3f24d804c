#include "imb/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "imb/errors.hpp"

namespace imb::data {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return s;
}

std::vector<std::string_view> split_line(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      cells.push_back(trim(line.substr(start)));
      break;
    }
    cells.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
  return cells;
}

bool parse_double(std::string_view cell, double& out) {
  if (cell.empty()) return false;
  if (cell.front() == '+') cell.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), out);
  return ec == std::errc() && ptr == cell.data() + cell.size() && std::isfinite(out);
}

void append_double(std::string& out, double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, ptr);
}

}  // namespace

std::size_t Dataset::count(int label) const {
  return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), label));
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
  Dataset out;
  out.feature_names = feature_names;
  out.label_name = label_name;
  out.label_position = label_position;
  out.features = Matrix(rows.size(), dim());
  out.labels.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] >= size()) throw ContractError("Dataset::subset: row index out of range");
    std::copy_n(features.row(rows[i]).begin(), dim(), out.features.row(i).begin());
    out.labels.push_back(labels[rows[i]]);
  }
  return out;
}

Dataset load_csv(const std::filesystem::path& path, const std::string& label_column) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path.string() + "'", 0);

  std::string line;
  if (!std::getline(in, line)) throw ParseError("'" + path.string() + "' has no header row", 1);
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  const auto header = split_line(line);

  Dataset ds;
  ds.label_name = label_column;
  bool found = false;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == label_column && !found) {
      ds.label_position = c;
      found = true;
    } else {
      ds.feature_names.emplace_back(header[c]);
    }
  }
  if (!found) {
    std::string available;
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (c) available += ", ";
      available += std::string(header[c]);
    }
    throw ParseError("label column '" + label_column + "' not found; available columns: " + available, 1);
  }
  if (ds.feature_names.empty()) throw ParseError("no feature columns besides the label", 1);

  const std::size_t width = header.size();
  const std::size_t d = width - 1;
  std::vector<double> values;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split_line(line);
    if (cells.size() != width)
      throw ParseError("line " + std::to_string(line_no) + ": expected " + std::to_string(width) +
                           " cells, found " + std::to_string(cells.size()),
                       line_no);
    for (std::size_t c = 0; c < width; ++c) {
      double v = 0.0;
      if (!parse_double(cells[c], v))
        throw ParseError("line " + std::to_string(line_no) + ": non-numeric value '" +
                             std::string(cells[c]) + "' in column '" + std::string(header[c]) + "'",
                         line_no);
      if (c == ds.label_position) {
        if (v != 0.0 && v != 1.0)
          throw ParseError("line " + std::to_string(line_no) + ": label '" + std::string(cells[c]) +
                               "' is not 0 or 1",
                           line_no);
        ds.labels.push_back(static_cast<int>(v));
      } else {
        values.push_back(v);
      }
    }
  }
  if (ds.labels.empty()) throw ParseError("'" + path.string() + "' has no data rows", line_no);
  ds.features.rows = ds.labels.size();
  ds.features.cols = d;
  ds.features.data = std::move(values);
  return ds;
}

void write_csv(const Dataset& ds, const std::filesystem::path& path) {
  std::string out;
  const std::size_t width = ds.dim() + 1;
  for (std::size_t c = 0, f = 0; c < width; ++c) {
    if (c) out += ',';
    out += c == ds.label_position ? ds.label_name : ds.feature_names[f++];
  }
  out += '\n';
  for (std::size_t i = 0; i < ds.size(); ++i) {
    for (std::size_t c = 0, f = 0; c < width; ++c) {
      if (c) out += ',';
      if (c == ds.label_position)
        out += ds.labels[i] ? '1' : '0';
      else
        append_double(out, ds.features(i, f++));
    }
    out += '\n';
  }
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw IoError("cannot write '" + path.string() + "'");
  file << out;
  if (!file) throw IoError("write failed for '" + path.string() + "'");
}

NormStats fit_normalize(const Dataset& train, double clip_k) {
  if (train.size() == 0) throw ContractError("fit_normalize: empty fitting set");
  if (!(clip_k > 0.0)) throw ContractError("fit_normalize: clip_k must be positive");
  const std::size_t n = train.size();
  const std::size_t d = train.dim();
  NormStats s;
  s.clip_k = clip_k;
  s.mean.assign(d, 0.0);
  s.std.assign(d, 0.0);
  s.zero_variance.assign(d, false);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) s.mean[j] += train.features(i, j);
  for (double& m : s.mean) m /= static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      const double c = train.features(i, j) - s.mean[j];
      s.std[j] += c * c;
    }
  for (std::size_t j = 0; j < d; ++j) {
    s.std[j] = std::sqrt(s.std[j] / static_cast<double>(n));
    if (!(s.std[j] > 0.0)) {
      s.std[j] = 1.0;
      s.zero_variance[j] = true;
    }
  }
  return s;
}

Dataset apply_normalize(const Dataset& ds, const NormStats& stats) {
  if (stats.mean.size() != ds.dim() || stats.std.size() != ds.dim())
    throw DimensionError("apply_normalize: statistics for " + std::to_string(stats.mean.size()) +
                         " features, dataset has " + std::to_string(ds.dim()));
  Dataset out = ds;
  for (std::size_t i = 0; i < out.size(); ++i)
    for (std::size_t j = 0; j < out.dim(); ++j) {
      const double z = (out.features(i, j) - stats.mean[j]) / stats.std[j];
      out.features(i, j) = std::clamp(z, -stats.clip_k, stats.clip_k);
    }
  return out;
}

std::string norm_stats_to_json(const NormStats& stats) {
  nlohmann::json j;
  j["mean"] = stats.mean;
  j["std"] = stats.std;
  j["clip_k"] = stats.clip_k;
  std::vector<std::size_t> flagged;
  for (std::size_t i = 0; i < stats.zero_variance.size(); ++i)
    if (stats.zero_variance[i]) flagged.push_back(i);
  j["zero_variance_features"] = flagged;
  return j.dump(2) + "\n";
}

NormStats norm_stats_from_json(const std::string& text) {
  NormStats s;
  try {
    const auto j = nlohmann::json::parse(text);
    s.mean = j.at("mean").get<std::vector<double>>();
    s.std = j.at("std").get<std::vector<double>>();
    s.clip_k = j.at("clip_k").get<double>();
    s.zero_variance.assign(s.mean.size(), false);
    if (j.contains("zero_variance_features"))
      for (std::size_t i : j.at("zero_variance_features").get<std::vector<std::size_t>>())
        if (i < s.zero_variance.size()) s.zero_variance[i] = true;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("norm stats: ") + e.what(), 0);
  }
  if (s.mean.size() != s.std.size()) throw ParseError("norm stats: mean/std length mismatch", 0);
  for (double v : s.std)
    if (!(v > 0.0)) throw ParseError("norm stats: std must be strictly positive", 0);
  return s;
}

SplitIndices stratified_split(const Dataset& ds, std::array<double, 3> fractions, std::uint64_t seed) {
  const double total = fractions[0] + fractions[1] + fractions[2];
  if (std::abs(total - 1.0) > 1e-9 || fractions[0] < 0 || fractions[1] < 0 || fractions[2] < 0)
    throw ContractError("stratified_split: fractions must be non-negative and sum to 1");

  SplitIndices split;
  split.seed = seed;
  std::mt19937_64 rng(seed);
  for (int label : {0, 1}) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < ds.size(); ++i)
      if (ds.labels[i] == label) members.push_back(i);
    if (members.empty()) continue;
    if (members.size() < 3)
      throw ContractError("stratified_split: class " + std::to_string(label) + " has only " +
                          std::to_string(members.size()) +
                          " member(s); at least 3 are needed (augment the class synthetically first)");
    std::shuffle(members.begin(), members.end(), rng);

    const double n = static_cast<double>(members.size());
    std::array<std::size_t, 3> take{static_cast<std::size_t>(std::floor(fractions[0] * n + 0.5)),
                                    static_cast<std::size_t>(std::floor(fractions[1] * n + 0.5)), 0};
    take[0] = std::min(take[0], members.size());
    take[1] = std::min(take[1], members.size() - take[0]);
    take[2] = members.size() - take[0] - take[1];
    for (std::size_t part = 0; part < 3; ++part) {
      if (take[part] > 0 || fractions[part] == 0.0) continue;
      const auto largest = std::max_element(take.begin(), take.end()) - take.begin();
      take[largest] -= 1;
      take[part] += 1;
    }
    auto it = members.begin();
    split.train.insert(split.train.end(), it, it + take[0]);
    it += take[0];
    split.val.insert(split.val.end(), it, it + take[1]);
    it += take[1];
    split.test.insert(split.test.end(), it, members.end());
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.val.begin(), split.val.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

Dataset synth_imbalanced(std::size_t n_major, std::size_t n_minor, std::size_t d,
                         double mean_separation, std::uint64_t seed) {
  if (n_major == 0 || n_minor == 0 || d == 0)
    throw ContractError("synth_imbalanced: class counts and dimension must be positive");
  Dataset ds;
  ds.features = Matrix(n_major + n_minor, d);
  ds.labels.assign(n_major, 0);
  ds.labels.resize(n_major + n_minor, 1);
  for (std::size_t j = 0; j < d; ++j) ds.feature_names.push_back("x" + std::to_string(j));
  ds.label_name = "Class";
  ds.label_position = d;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t i = 0; i < ds.size(); ++i)
    for (std::size_t j = 0; j < d; ++j) ds.features(i, j) = normal(rng);
  for (std::size_t i = n_major; i < ds.size(); ++i) ds.features(i, 0) += mean_separation;
  return ds;
}

}  // namespace imb::data
