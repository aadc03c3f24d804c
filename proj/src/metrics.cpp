#include "imb/metrics.hpp"

#include <algorithm>
#include <numeric>

#include <json.hpp>

#include "imb/errors.hpp"

namespace imb::metrics {
namespace {

void check_inputs(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size())
    throw DimensionError("metrics: " + std::to_string(scores.size()) + " scores but " +
                         std::to_string(labels.size()) + " labels");
  for (int y : labels)
    if (y != 0 && y != 1) throw ContractError("metrics: labels must be 0 or 1");
}

std::size_t count_positive(std::span<const int> labels) {
  return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
}

void require_both_classes(std::size_t pos, std::size_t n) {
  if (pos == 0 || pos == n) throw ContractError("metrics: ROC analysis needs both classes present");
}

}  // namespace

ConfusionCounts confusion_at_threshold(std::span<const double> scores, std::span<const int> labels,
                                       double threshold) {
  check_inputs(scores, labels);
  ConfusionCounts c;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool predicted = scores[i] >= threshold;
    if (labels[i] == 1)
      predicted ? ++c.tp : ++c.fn;
    else
      predicted ? ++c.fp : ++c.tn;
  }
  return c;
}

PrecisionRecallF1 precision_recall_f1(const ConfusionCounts& c) {
  PrecisionRecallF1 r;
  if (c.tp + c.fp == 0)
    r.flags.emplace_back("precision_undefined");
  else
    r.precision = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
  if (c.tp + c.fn == 0)
    r.flags.emplace_back("recall_undefined");
  else
    r.recall = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
  if (r.precision + r.recall == 0.0)
    r.flags.emplace_back("f1_undefined");
  else
    r.f1 = 2.0 * r.precision * r.recall / (r.precision + r.recall);
  return r;
}

double roc_auc(std::span<const double> scores, std::span<const int> labels) {
  check_inputs(scores, labels);
  const std::size_t n = scores.size();
  const std::size_t n_pos = count_positive(labels);
  require_both_classes(n_pos, n);
  const std::size_t n_neg = n - n_pos;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Sum of positive ranks with midranks for ties; ranks doubled to stay in integers.
  std::size_t doubled_rank_sum = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    const std::size_t doubled_midrank = (i + 1) + j;  // 2 · (i+1 + j)/2
    for (std::size_t t = i; t < j; ++t)
      if (labels[order[t]] == 1) doubled_rank_sum += doubled_midrank;
    i = j;
  }
  // U = Σ ranks(pos) − n_pos(n_pos+1)/2, kept doubled: 2U = doubled_rank_sum − n_pos(n_pos+1)
  const std::size_t doubled_u = doubled_rank_sum - n_pos * (n_pos + 1);
  return static_cast<double>(doubled_u) / (2.0 * static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

std::vector<RocPoint> roc_points(std::span<const double> scores, std::span<const int> labels) {
  check_inputs(scores, labels);
  const std::size_t n = scores.size();
  const std::size_t n_pos = count_positive(labels);
  require_both_classes(n_pos, n);
  const double pos = static_cast<double>(n_pos);
  const double neg = static_cast<double>(n - n_pos);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  std::vector<RocPoint> curve{{0.0, 0.0}};
  std::size_t tp = 0, fp = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) {
      labels[order[j]] == 1 ? ++tp : ++fp;
      ++j;
    }
    curve.push_back({static_cast<double>(fp) / neg, static_cast<double>(tp) / pos});
    i = j;
  }
  return curve;
}

double trapezoid_area(std::span<const RocPoint> curve) {
  double area = 0.0;
  for (std::size_t i = 1; i < curve.size(); ++i)
    area += (curve[i].fpr - curve[i - 1].fpr) * (curve[i].tpr + curve[i - 1].tpr) / 2.0;
  return area;
}

MetricsReport evaluate(std::span<const double> scores, std::span<const int> labels, double threshold) {
  MetricsReport r;
  r.threshold = threshold;
  r.confusion = confusion_at_threshold(scores, labels, threshold);
  const PrecisionRecallF1 prf = precision_recall_f1(r.confusion);
  r.precision = prf.precision;
  r.recall = prf.recall;
  r.f1 = prf.f1;
  r.flags = prf.flags;
  const std::size_t n_pos = count_positive(labels);
  if (n_pos == 0 || n_pos == labels.size()) {
    r.auc = 0.0;
    r.flags.emplace_back("auc_undefined_single_class");
  } else {
    r.auc = roc_auc(scores, labels);
  }
  return r;
}

std::string to_json(const MetricsReport& r, const std::string& extra_json) {
  nlohmann::json j{{"auc", r.auc},
                   {"precision", r.precision},
                   {"recall", r.recall},
                   {"f1", r.f1},
                   {"threshold", r.threshold},
                   {"confusion", {{"tp", r.confusion.tp}, {"fp", r.confusion.fp}, {"tn", r.confusion.tn}, {"fn", r.confusion.fn}}},
                   {"flags", r.flags}};
  const nlohmann::json extra = nlohmann::json::parse(extra_json);
  for (const auto& [key, value] : extra.items()) j[key] = value;
  return j.dump(2) + "\n";
}

}  // namespace imb::metrics
