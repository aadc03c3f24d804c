#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace imb::metrics {

struct ConfusionCounts {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
  std::size_t total() const { return tp + fp + tn + fn; }
};

// Predicts positive iff score ≥ threshold.
ConfusionCounts confusion_at_threshold(std::span<const double> scores, std::span<const int> labels,
                                       double threshold = 0.5);

struct PrecisionRecallF1 {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  // Names of quantities whose denominator was zero and were reported as 0.
  std::vector<std::string> flags;
};

PrecisionRecallF1 precision_recall_f1(const ConfusionCounts& c);

// Mann–Whitney statistic with midranks: [#(pos > neg) + ½ #(pos = neg)] / (n_pos · n_neg).
// O(n log n). Throws ContractError unless both classes are present.
double roc_auc(std::span<const double> scores, std::span<const int> labels);

struct RocPoint {
  double fpr;
  double tpr;
};

// One point per distinct score threshold (descending), starting at (0,0) and ending at (1,1).
std::vector<RocPoint> roc_points(std::span<const double> scores, std::span<const int> labels);
double trapezoid_area(std::span<const RocPoint> curve);

struct MetricsReport {
  double auc = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double threshold = 0.5;
  ConfusionCounts confusion;
  std::vector<std::string> flags;
};

MetricsReport evaluate(std::span<const double> scores, std::span<const int> labels, double threshold = 0.5);
// {auc, precision, recall, f1, threshold, confusion:{tp,fp,tn,fn}, flags:[...]} plus any
// members of `extra_json` merged at top level.
std::string to_json(const MetricsReport& r, const std::string& extra_json = "{}");

}  // namespace imb::metrics
