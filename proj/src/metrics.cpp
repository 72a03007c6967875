#include "fuzzyattn/metrics.hpp"

#include <algorithm>
#include <numeric>

#include "fuzzyattn/tensor.hpp"

namespace fuzzyattn {

EvalResult classification_metrics(const std::vector<double>& scores,
                                  const std::vector<int>& labels,
                                  double threshold) {
  if (scores.empty() || scores.size() != labels.size()) {
    throw ContractError("classification_metrics: need equal-length, non-empty inputs");
  }
  for (int l : labels) {
    if (l != 0 && l != 1) throw ContractError("classification_metrics: labels must be 0/1");
  }

  EvalResult r;
  for (size_t i = 0; i < scores.size(); ++i) {
    const int pred = scores[i] >= threshold ? 1 : 0;
    if (pred == 1 && labels[i] == 1) ++r.tp;
    if (pred == 1 && labels[i] == 0) ++r.fp;
    if (pred == 0 && labels[i] == 0) ++r.tn;
    if (pred == 0 && labels[i] == 1) ++r.fn;
  }
  const double n = static_cast<double>(scores.size());
  r.accuracy = static_cast<double>(r.tp + r.tn) / n;
  r.recall = r.tp + r.fn > 0 ? static_cast<double>(r.tp) / static_cast<double>(r.tp + r.fn) : 0.0;
  r.precision = r.tp + r.fp > 0 ? static_cast<double>(r.tp) / static_cast<double>(r.tp + r.fp) : 0.0;
  r.f1 = r.precision + r.recall > 0.0
             ? 2.0 * r.precision * r.recall / (r.precision + r.recall)
             : 0.0;

  const std::int64_t n_pos = r.tp + r.fn;
  const std::int64_t n_neg = r.fp + r.tn;
  if (n_pos == 0 || n_neg == 0) return r;  // AUCs stay undefined

  // descending sweep with ties collapsed into one threshold group
  std::vector<size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return scores[a] > scores[b]; });

  double roc = 0.0, pr = 0.0;
  double tpr_prev = 0.0, fpr_prev = 0.0, recall_prev = 0.0;
  std::int64_t tp_cum = 0, fp_cum = 0;
  size_t i = 0;
  while (i < order.size()) {
    size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    for (size_t k = i; k < j; ++k) {
      if (labels[order[k]] == 1) ++tp_cum;
      else ++fp_cum;
    }
    const double tpr = static_cast<double>(tp_cum) / static_cast<double>(n_pos);
    const double fpr = static_cast<double>(fp_cum) / static_cast<double>(n_neg);
    roc += (fpr - fpr_prev) * 0.5 * (tpr + tpr_prev);
    const double prec = static_cast<double>(tp_cum) / static_cast<double>(tp_cum + fp_cum);
    pr += (tpr - recall_prev) * prec;
    tpr_prev = tpr;
    fpr_prev = fpr;
    recall_prev = tpr;
    i = j;
  }
  r.roc_auc = roc;
  r.pr_auc = pr;
  return r;
}

CompareResult bootstrap_compare(const std::vector<double>& run_metrics_a,
                                const std::vector<double>& run_metrics_b) {
  if (run_metrics_a.size() < 2 || run_metrics_b.size() < 2) {
    throw ContractError("bootstrap_compare: need at least 2 runs per side");
  }
  const WelchResult w = welch_t(run_metrics_a, run_metrics_b);
  return {w.t, w.p, w.df, w.degenerate};
}

}  // namespace fuzzyattn
