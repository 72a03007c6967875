#include "fuzzyattn/pair_model.hpp"

#include <cmath>

namespace fuzzyattn {

namespace {

Tensor xavier_uniform(std::int64_t fan_in, std::int64_t fan_out,
                      CounterRng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::vector<double> v(static_cast<size_t>(fan_in * fan_out));
  for (double& x : v) x = rng.uniform(-limit, limit);
  return Tensor::from_vector({fan_in, fan_out}, std::move(v), true);
}

CounterRng init_stream(std::uint64_t seed) {
  return CounterRng(seed).substream("model-init");
}

}  // namespace

PairClassifier::PairClassifier(const EncoderConfig& config,
                               std::int64_t head_hidden, std::uint64_t seed)
    : encoder_([&] {
        CounterRng rng = init_stream(seed);
        return Encoder(config, rng);
      }()),
      head_hidden_(head_hidden),
      seed_(seed) {
  if (head_hidden_ < 1) throw ContractError("PairClassifier: head_hidden must be >= 1");
  CounterRng rng = init_stream(seed).substream("head");
  head_w1_ = xavier_uniform(2 * config.d_model, head_hidden_, rng);
  head_b1_ = Tensor::zeros({head_hidden_}, true);
  head_w2_ = xavier_uniform(head_hidden_, 2, rng);
  head_b2_ = Tensor::zeros({2}, true);
}

Tensor PairClassifier::head(const Tensor& pooled_pairs) const {
  Tensor h = relu(add_rowvec(matmul(pooled_pairs, head_w1_), head_b1_));
  return add_rowvec(matmul(h, head_w2_), head_b2_);
}

PairClassifier::PairOutput PairClassifier::forward_pair(const Tensor& d1,
                                                        const Tensor& d2) const {
  if (d1.shape() != d2.shape()) {
    throw ContractError("forward_pair: stream shapes differ, " +
                        shape_str(d1.shape()) + " vs " + shape_str(d2.shape()));
  }
  Tensor stacked = concat_rows({d1, d2});
  BatchOutput batch = forward_batch(stacked, 1);

  PairOutput out;
  out.logits = reshape(batch.logits, {2});
  const std::int64_t tokens = d1.rows();
  for (const Tensor& f : batch.firing) {
    out.firing1.push_back(slice_rows(f, 0, tokens));
    out.firing2.push_back(slice_rows(f, tokens, tokens));
  }
  return out;
}

PairClassifier::BatchOutput PairClassifier::forward_batch(
    const Tensor& stacked, std::int64_t pairs) const {
  if (pairs < 1 || stacked.rows() % (2 * pairs) != 0) {
    throw ShapeError("forward_batch: cannot split " + shape_str(stacked.shape()) +
                     " into " + std::to_string(pairs) + " pairs");
  }
  const std::int64_t tokens = stacked.rows() / (2 * pairs);
  Encoder::Output enc = encoder_.encode(stacked, 2 * pairs);
  Tensor pooled = mean_rows(enc.hidden, tokens);  // [2*pairs, d_model]
  Tensor e1 = slice_rows(pooled, 0, pairs);
  Tensor e2 = slice_rows(pooled, pairs, pairs);
  // participant 1 first, participant 2 second; the order is part of the model
  Tensor joint = concat_cols(e1, e2);
  return {head(joint), std::move(enc.firing)};
}

std::pair<Tensor, Tensor> PairClassifier::embeddings_for_ibs(
    const Tensor& d1, const Tensor& d2) const {
  if (d1.shape() != d2.shape()) {
    throw ContractError("embeddings_for_ibs: stream shapes differ, " +
                        shape_str(d1.shape()) + " vs " + shape_str(d2.shape()));
  }
  const std::int64_t tokens = d1.rows();
  Encoder::Output enc = encoder_.encode(concat_rows({d1, d2}), 2);
  Tensor pooled = mean_rows(enc.hidden, tokens);
  return {reshape(slice_rows(pooled, 0, 1), {encoder_.config().d_model}),
          reshape(slice_rows(pooled, 1, 1), {encoder_.config().d_model})};
}

ParamList PairClassifier::parameters() const {
  ParamList params;
  encoder_.append_parameters(params, "encoder.");
  params.push_back({"head.w1", head_w1_, true});
  params.push_back({"head.b1", head_b1_, false});
  params.push_back({"head.w2", head_w2_, true});
  params.push_back({"head.b2", head_b2_, false});
  return params;
}

Tensor cross_entropy(const Tensor& logits, int label) {
  if (logits.ndim() != 1 || logits.size() != 2) {
    throw ShapeError("cross_entropy: expected 2 logits, got " +
                     shape_str(logits.shape()));
  }
  if (label != 0 && label != 1) {
    throw ContractError("cross_entropy: label must be 0 or 1");
  }
  return softmax_cross_entropy_mean(reshape(logits, {1, 2}), {label});
}

}  // namespace fuzzyattn
