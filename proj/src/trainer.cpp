#include "fuzzyattn/trainer.hpp"

#include <cmath>
#include <numeric>

namespace fuzzyattn {

namespace {

struct OrientedSet {
  std::vector<std::pair<Tensor, Tensor>> streams;
  std::int64_t tokens = 0;
  std::int64_t features = 0;
};

OrientedSet orient_all(const TrialSet& set, InputStructure structure) {
  OrientedSet out;
  out.streams.reserve(set.trials.size());
  for (const Trial& t : set.trials) out.streams.push_back(orient(t, structure));
  if (!out.streams.empty()) {
    out.tokens = out.streams.front().first.rows();
    out.features = out.streams.front().first.cols();
  }
  return out;
}

// all first streams, then all second streams, in index order
Tensor stack_pairs(const OrientedSet& oriented, const std::vector<int>& indices) {
  const std::int64_t tokens = oriented.tokens;
  const std::int64_t features = oriented.features;
  const std::int64_t pairs = static_cast<std::int64_t>(indices.size());
  std::vector<double> data(static_cast<size_t>(2 * pairs * tokens * features));
  const size_t stream_len = static_cast<size_t>(tokens * features);
  for (std::int64_t i = 0; i < pairs; ++i) {
    const auto& [d1, d2] = oriented.streams[static_cast<size_t>(indices[static_cast<size_t>(i)])];
    std::copy(d1.data().begin(), d1.data().end(),
              data.begin() + static_cast<size_t>(i) * stream_len);
    std::copy(d2.data().begin(), d2.data().end(),
              data.begin() + static_cast<size_t>(pairs + i) * stream_len);
  }
  return Tensor::from_vector({2 * pairs * tokens, features}, std::move(data));
}

std::vector<double> scores_from(const PairClassifier& model,
                                const OrientedSet& oriented,
                                const std::vector<int>& indices) {
  NoGradGuard guard;
  std::vector<double> scores;
  scores.reserve(indices.size());
  constexpr std::int64_t kChunk = 64;
  for (size_t start = 0; start < indices.size(); start += kChunk) {
    const size_t end = std::min(indices.size(), start + kChunk);
    std::vector<int> chunk(indices.begin() + static_cast<std::ptrdiff_t>(start),
                           indices.begin() + static_cast<std::ptrdiff_t>(end));
    Tensor stacked = stack_pairs(oriented, chunk);
    Tensor logits =
        model.forward_batch(stacked, static_cast<std::int64_t>(chunk.size())).logits;
    for (std::int64_t i = 0; i < logits.rows(); ++i) {
      const double a = logits.at(i, 0), b = logits.at(i, 1);
      const double mx = std::max(a, b);
      const double ea = std::exp(a - mx), eb = std::exp(b - mx);
      scores.push_back(eb / (ea + eb));
    }
  }
  return scores;
}

}  // namespace

SplitIndices split_trials(std::int64_t n_trials, std::uint64_t seed) {
  if (n_trials < 3) throw ContractError("split_trials: need at least 3 trials");
  std::vector<int> order(static_cast<size_t>(n_trials));
  std::iota(order.begin(), order.end(), 0);
  CounterRng rng = CounterRng(seed).substream("split");
  rng.shuffle(order);

  const auto n_train = static_cast<std::int64_t>(std::floor(0.70 * static_cast<double>(n_trials)));
  const auto n_val = static_cast<std::int64_t>(std::floor(0.15 * static_cast<double>(n_trials)));
  SplitIndices split;
  split.train.assign(order.begin(), order.begin() + n_train);
  split.val.assign(order.begin() + n_train, order.begin() + n_train + n_val);
  split.test.assign(order.begin() + n_train + n_val, order.end());
  if (split.train.empty() || split.val.empty() || split.test.empty()) {
    throw ContractError("split_trials: a split came out empty");
  }
  return split;
}

std::vector<double> snapshot_params(const ParamList& params) {
  std::vector<double> flat;
  for (const ParamRef& p : params)
    flat.insert(flat.end(), p.tensor.data().begin(), p.tensor.data().end());
  return flat;
}

void restore_params(ParamList& params, const std::vector<double>& flat) {
  size_t offset = 0;
  for (ParamRef& p : params) {
    auto& value = p.tensor.data();
    if (offset + value.size() > flat.size()) {
      throw ContractError("restore_params: snapshot too short");
    }
    std::copy(flat.begin() + static_cast<std::ptrdiff_t>(offset),
              flat.begin() + static_cast<std::ptrdiff_t>(offset + value.size()),
              value.begin());
    offset += value.size();
  }
  if (offset != flat.size()) {
    throw ContractError("restore_params: snapshot size mismatch");
  }
}

std::vector<double> pair_scores(const PairClassifier& model, const TrialSet& set,
                                const std::vector<int>& indices) {
  OrientedSet oriented = orient_all(set, model.encoder().config().structure);
  return scores_from(model, oriented, indices);
}

EvalResult evaluate(const PairClassifier& model, const TrialSet& set,
                    const std::vector<int>& indices) {
  std::vector<double> scores = pair_scores(model, set, indices);
  std::vector<int> labels;
  labels.reserve(indices.size());
  for (int i : indices) labels.push_back(set.trials[static_cast<size_t>(i)].label);
  return classification_metrics(scores, labels);
}

TrainResult train(PairClassifier& model, const TrialSet& set,
                  const OptimConfig& config) {
  config.validate();
  if (set.trials.empty()) throw ContractError("train: empty corpus");

  TrainResult result;
  result.split = split_trials(static_cast<std::int64_t>(set.trials.size()), config.seed);

  OrientedSet oriented = orient_all(set, model.encoder().config().structure);
  ParamList params = model.parameters();
  AdamW optimizer(params, config);
  const CounterRng root(config.seed);

  double best_score = -1.0;
  std::vector<int> batch_order = result.split.train;
  for (int epoch = 0; epoch < config.max_epochs; ++epoch) {
    const double lr = lr_at(epoch, config);
    CounterRng shuffle_rng = root.substream("epoch-shuffle", static_cast<std::uint64_t>(epoch));
    shuffle_rng.shuffle(batch_order);

    double loss_sum = 0.0;
    for (size_t start = 0; start < batch_order.size();
         start += static_cast<size_t>(config.batch_size)) {
      const size_t end =
          std::min(batch_order.size(), start + static_cast<size_t>(config.batch_size));
      std::vector<int> batch(batch_order.begin() + static_cast<std::ptrdiff_t>(start),
                             batch_order.begin() + static_cast<std::ptrdiff_t>(end));
      std::vector<int> labels;
      labels.reserve(batch.size());
      for (int i : batch) labels.push_back(set.trials[static_cast<size_t>(i)].label);

      Tensor stacked = stack_pairs(oriented, batch);
      Tensor logits =
          model.forward_batch(stacked, static_cast<std::int64_t>(batch.size())).logits;
      Tensor loss = softmax_cross_entropy_mean(logits, labels);
      const double loss_value = loss.scalar();
      if (!std::isfinite(loss_value)) {
        throw NumericError("train: non-finite loss at epoch " + std::to_string(epoch));
      }
      loss_sum += loss_value * static_cast<double>(batch.size());

      optimizer.zero_grad();
      loss.backward();
      optimizer.step(lr);
    }

    EpochRecord record;
    record.epoch = epoch;
    record.lr = lr;
    record.train_loss = loss_sum / static_cast<double>(batch_order.size());
    record.val = evaluate(model, set, result.split.val);
    // ties go to the later epoch: on a plateau the most-converged weights win
    const double selection = record.val.pr_auc.value_or(-1.0);
    if (result.best_epoch < 0 || selection >= best_score) {
      best_score = selection;
      result.best_epoch = epoch;
      result.best_val = record.val;
      result.best_params = snapshot_params(params);
    }
    result.history.push_back(std::move(record));
  }

  restore_params(params, result.best_params);
  return result;
}

}  // namespace fuzzyattn
