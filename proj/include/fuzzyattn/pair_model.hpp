// Paired-stream classifier: one shared encoder digests both participants'
// recordings, token embeddings are mean-pooled per stream, the two pooled
// vectors are concatenated in fixed order and a 2-layer ReLU head emits two
// logits.

#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "fuzzyattn/encoder.hpp"
#include "fuzzyattn/params.hpp"
#include "fuzzyattn/tensor.hpp"

namespace fuzzyattn {

class PairClassifier {
 public:
  PairClassifier(const EncoderConfig& config, std::int64_t head_hidden,
                 std::uint64_t seed);

  struct PairOutput {
    Tensor logits;                // [2]
    std::vector<Tensor> firing1;  // per fuzzy layer, stream 1
    std::vector<Tensor> firing2;  // per fuzzy layer, stream 2
  };
  PairOutput forward_pair(const Tensor& d1, const Tensor& d2) const;

  // Batched path: tokens of all first streams stacked, then all second
  // streams: [2 * pairs * tokens, features] -> logits [pairs, 2]. The firing
  // tensors cover both stream banks ([2 * pairs * tokens, rules]).
  struct BatchOutput {
    Tensor logits;
    std::vector<Tensor> firing;
  };
  BatchOutput forward_batch(const Tensor& stacked, std::int64_t pairs) const;

  // Pooled per-participant embeddings used by the synchrony analysis.
  std::pair<Tensor, Tensor> embeddings_for_ibs(const Tensor& d1,
                                               const Tensor& d2) const;

  const Encoder& encoder() const { return encoder_; }
  std::int64_t head_hidden() const { return head_hidden_; }
  std::uint64_t seed() const { return seed_; }

  ParamList parameters() const;

 private:
  Tensor head(const Tensor& pooled_pairs) const;  // [n, 2*d_model] -> [n, 2]

  Encoder encoder_;
  std::int64_t head_hidden_;
  std::uint64_t seed_;
  Tensor head_w1_, head_b1_, head_w2_, head_b2_;
};

// -log softmax(logits)[label]; logits must be a length-2 vector.
Tensor cross_entropy(const Tensor& logits, int label);

}  // namespace fuzzyattn
