// Post-norm transformer encoder whose attention sublayers are selectable per
// layer: rule-based (fuzzy) or scaled dot-product. Firing-strength matrices
// from every fuzzy sublayer are surfaced for the interpretability pipeline.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fuzzyattn/fuzzy_attention.hpp"
#include "fuzzyattn/params.hpp"
#include "fuzzyattn/rng.hpp"
#include "fuzzyattn/tensor.hpp"

namespace fuzzyattn {

enum class AttentionKind { kFuzzy, kDot };
enum class InputStructure { kChannelFirst, kTimeFirst };

std::string to_string(AttentionKind kind);
std::string to_string(InputStructure structure);
AttentionKind attention_kind_from(const std::string& name);
InputStructure structure_from(const std::string& name);

struct EncoderConfig {
  int depth = 3;
  std::int64_t d_model = 64;
  std::int64_t ffn_hidden = 128;
  std::vector<AttentionKind> attention_kinds;  // length == depth
  std::int64_t rules = 10;
  InputStructure structure = InputStructure::kTimeFirst;
  std::int64_t max_tokens = 0;      // sequence length the model is built for
  std::int64_t token_features = 0;  // raw features per token

  // Fills attention_kinds with `kind` for every layer.
  void fill_attention(AttentionKind kind);
  void validate() const;  // throws ContractError
};

struct DotAttentionLayer {
  Tensor w_q, b_q, w_k, b_k, w_v, b_v;

  static DotAttentionLayer init(std::int64_t d_model, CounterRng& rng);
};

// Single-head self-attention with 1/sqrt(d) scaling, applied independently to
// each consecutive `tokens_per_sample` row group.
Tensor dot_attention(const Tensor& x, const DotAttentionLayer& layer,
                     std::int64_t samples = 1);

struct FeedForward {
  Tensor w1, b1, w2, b2;
};

struct LayerNormParams {
  Tensor gamma, beta;
};

struct EncoderBlock {
  AttentionKind kind;
  std::optional<FuzzyAttentionLayer> fuzzy;
  std::optional<DotAttentionLayer> dot;
  LayerNormParams norm_attn;
  FeedForward ffn;
  LayerNormParams norm_ffn;
};

class Encoder {
 public:
  Encoder(const EncoderConfig& config, CounterRng& rng);

  // raw: [samples * max_tokens, token_features] -> [same rows, d_model]
  Tensor embed_input(const Tensor& raw, std::int64_t samples = 1) const;

  struct Output {
    Tensor hidden;               // [samples * tokens, d_model]
    std::vector<Tensor> firing;  // one [samples * tokens, rules] per fuzzy layer
  };
  Output encode(const Tensor& raw, std::int64_t samples = 1) const;

  const EncoderConfig& config() const { return config_; }
  const std::vector<EncoderBlock>& blocks() const { return blocks_; }
  const Tensor& embed_weight() const { return embed_w_; }
  const Tensor& embed_bias() const { return embed_b_; }
  const Tensor& positional() const { return positional_; }

  // Indices (into blocks) of the fuzzy sublayers, in depth order.
  std::vector<int> fuzzy_layer_indices() const;

  void append_parameters(ParamList& out, const std::string& prefix) const;

  static constexpr double kLayerNormEps = 1e-5;

 private:
  EncoderConfig config_;
  Tensor embed_w_;     // [token_features, d_model]
  Tensor embed_b_;     // [d_model]
  Tensor positional_;  // [max_tokens, d_model]
  std::vector<EncoderBlock> blocks_;
};

}  // namespace fuzzyattn
