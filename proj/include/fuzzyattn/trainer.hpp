// Seeded epoch loop: shuffled minibatches, cosine-with-warmup learning rate,
// AdamW updates, per-epoch validation metrics, best-validation-PR-AUC model
// selection. Everything is reproducible from (data, config).

#pragma once

#include <cstdint>
#include <vector>

#include "fuzzyattn/metrics.hpp"
#include "fuzzyattn/optim.hpp"
#include "fuzzyattn/pair_model.hpp"
#include "fuzzyattn/synth.hpp"

namespace fuzzyattn {

struct SplitIndices {
  std::vector<int> train, val, test;
};

// Deterministic trial-wise 70/15/15 split.
SplitIndices split_trials(std::int64_t n_trials, std::uint64_t seed);

struct EpochRecord {
  int epoch = 0;
  double lr = 0.0;
  double train_loss = 0.0;
  EvalResult val;
};

struct TrainResult {
  std::vector<EpochRecord> history;
  int best_epoch = -1;
  EvalResult best_val;
  std::vector<double> best_params;  // flat snapshot in parameter order
  SplitIndices split;
};

std::vector<double> snapshot_params(const ParamList& params);
void restore_params(ParamList& params, const std::vector<double>& flat);

// Positive-class probabilities for the given trials.
std::vector<double> pair_scores(const PairClassifier& model, const TrialSet& set,
                                const std::vector<int>& indices);

EvalResult evaluate(const PairClassifier& model, const TrialSet& set,
                    const std::vector<int>& indices);

// Trains in place and leaves the model at the best-validation parameters.
TrainResult train(PairClassifier& model, const TrialSet& set,
                  const OptimConfig& config);

}  // namespace fuzzyattn
