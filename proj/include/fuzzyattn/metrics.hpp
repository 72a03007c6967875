#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "fuzzyattn/stats.hpp"

namespace fuzzyattn {

struct EvalResult {
  double accuracy = 0.0;
  double recall = 0.0;
  double precision = 0.0;
  double f1 = 0.0;
  // undefined (nullopt) when only one class is present
  std::optional<double> roc_auc;
  std::optional<double> pr_auc;
  std::int64_t tp = 0, fp = 0, tn = 0, fn = 0;
};

// scores are positive-class probabilities; score >= threshold predicts 1.
// ROC AUC uses the trapezoidal rule over the tie-grouped threshold sweep;
// PR AUC uses the step rule (precision weighted by recall increments).
EvalResult classification_metrics(const std::vector<double>& scores,
                                  const std::vector<int>& labels,
                                  double threshold = 0.5);

struct CompareResult {
  double t = 0.0;
  double p = 1.0;
  double df = 0.0;
  bool zero_variance = false;
};

// Two-sample t-test over per-seed metric values (>= 2 entries each).
CompareResult bootstrap_compare(const std::vector<double>& run_metrics_a,
                                const std::vector<double>& run_metrics_b);

}  // namespace fuzzyattn
