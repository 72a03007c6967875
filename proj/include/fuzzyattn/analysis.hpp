// Interpretability pipeline over a trained classifier: per-trial rule firing
// reports, group-level t-value maps contrasting the two conditions, rule
// center reconstruction back into input space, and inter-brain synchrony
// statistics on the pooled embeddings.

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fuzzyattn/pair_model.hpp"
#include "fuzzyattn/stats.hpp"
#include "fuzzyattn/synth.hpp"

namespace fuzzyattn {

// Block index of the deepest fuzzy sublayer; ContractError if none exist.
int default_explain_layer(const PairClassifier& model);

// Firing matrix [tokens, rules] for one trial at the given block, averaged
// over the two participants' streams.
Tensor trial_firing(const Trial& trial, const PairClassifier& model,
                    int layer_index);

struct RuleReportEntry {
  int rule = 0;
  double strength = 0.0;           // mean firing over tokens
  std::vector<int> top_tokens;     // k largest firings; ties -> lowest index
};

struct SampleExplanation {
  int trial_id = 0;
  int label = 0;
  int layer = 0;
  std::vector<RuleReportEntry> rules;
  std::vector<std::string> token_labels;
};

SampleExplanation explain_sample(const Trial& trial, const PairClassifier& model,
                                 int layer_index, int top_k = 3);

struct GroupRuleMap {
  int layer = 0;
  std::vector<std::vector<double>> t;  // [rules][tokens]
  std::vector<std::vector<double>> p;
  std::vector<std::string> token_labels;
};

// Welch t-map over per-trial firing values, positive condition minus
// negative. Needs at least two trials of each label.
GroupRuleMap group_rule_map(const TrialSet& set, const PairClassifier& model,
                            int layer_index);

struct Prototype {
  int rule = 0;
  std::vector<double> center;       // query-space center
  std::vector<double> layer_input;  // least-squares preimage under W_q
  double residual = 0.0;            // ||W_q x + b_q - m|| after re-projection
  // For the first block only: preimage pulled on through the input embedding;
  // one value per raw token feature.
  std::vector<double> raw_input;
};

// token_index selects whose positional embedding is removed before the
// embedding pull-back (rules usually serve specific token positions);
// -1 removes the mean over positions.
std::vector<Prototype> center_prototypes(const PairClassifier& model,
                                         int layer_index, int token_index = -1);

struct IbsValues {
  std::optional<double> pearson;  // undefined for zero-variance embeddings
  std::optional<double> cosine;   // undefined for zero embeddings
  double euclidean = 0.0;
};

IbsValues ibs_metrics(const std::vector<double>& e1, const std::vector<double>& e2);

struct IbsMetricTest {
  WelchResult test;
  double mean_h1 = 0.0;
  double mean_h0 = 0.0;
  std::size_t n_h1 = 0;
  std::size_t n_h0 = 0;
};

struct IbsGroupResult {
  IbsMetricTest pearson, cosine, euclidean;
};

// Per-trial synchrony metrics from the pooled embeddings, contrasted between
// conditions with Welch's t-test.
IbsGroupResult ibs_group_test(const TrialSet& set, const PairClassifier& model);

// Token labels for reports: channel names under channel-first, time stamps
// under time-first.
std::vector<std::string> token_labels_for(InputStructure structure,
                                          std::int64_t tokens);

}  // namespace fuzzyattn
