#include "fuzzyattn/encoder.hpp"

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

LayerNormParams init_norm(std::int64_t width) {
  return {Tensor::full({width}, 1.0, true), Tensor::zeros({width}, true)};
}

Tensor affine(const Tensor& x, const Tensor& w, const Tensor& b) {
  return add_rowvec(matmul(x, w), b);
}

}  // namespace

std::string to_string(AttentionKind kind) {
  return kind == AttentionKind::kFuzzy ? "fuzzy" : "dot";
}

std::string to_string(InputStructure structure) {
  return structure == InputStructure::kChannelFirst ? "channel-first"
                                                    : "time-first";
}

AttentionKind attention_kind_from(const std::string& name) {
  if (name == "fuzzy") return AttentionKind::kFuzzy;
  if (name == "dot") return AttentionKind::kDot;
  throw ContractError("unknown attention kind '" + name + "'");
}

InputStructure structure_from(const std::string& name) {
  if (name == "channel-first" || name == "channel_first")
    return InputStructure::kChannelFirst;
  if (name == "time-first" || name == "time_first")
    return InputStructure::kTimeFirst;
  throw ContractError("unknown input structure '" + name + "'");
}

void EncoderConfig::fill_attention(AttentionKind kind) {
  attention_kinds.assign(static_cast<size_t>(depth), kind);
}

void EncoderConfig::validate() const {
  if (depth < 1) throw ContractError("EncoderConfig: depth must be >= 1");
  if (d_model < 1 || ffn_hidden < 1 || rules < 1) {
    throw ContractError("EncoderConfig: d_model, ffn_hidden, rules must be >= 1");
  }
  if (attention_kinds.size() != static_cast<size_t>(depth)) {
    throw ContractError("EncoderConfig: " +
                        std::to_string(attention_kinds.size()) +
                        " attention kinds for depth " + std::to_string(depth));
  }
  if (max_tokens < 1 || token_features < 1) {
    throw ContractError("EncoderConfig: max_tokens and token_features must be set");
  }
}

DotAttentionLayer DotAttentionLayer::init(std::int64_t d_model,
                                          CounterRng& rng) {
  DotAttentionLayer layer;
  layer.w_q = xavier_uniform(d_model, d_model, rng);
  layer.b_q = Tensor::zeros({d_model}, true);
  layer.w_k = xavier_uniform(d_model, d_model, rng);
  layer.b_k = Tensor::zeros({d_model}, true);
  layer.w_v = xavier_uniform(d_model, d_model, rng);
  layer.b_v = Tensor::zeros({d_model}, true);
  return layer;
}

Tensor dot_attention(const Tensor& x, const DotAttentionLayer& layer,
                     std::int64_t samples) {
  if (x.ndim() != 2 || samples < 1 || x.rows() % samples != 0) {
    throw ShapeError("dot_attention: cannot split " + shape_str(x.shape()) +
                     " into " + std::to_string(samples) + " samples");
  }
  const std::int64_t tokens = x.rows() / samples;
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(x.cols()));

  Tensor q = affine(x, layer.w_q, layer.b_q);
  Tensor k = affine(x, layer.w_k, layer.b_k);
  Tensor v = affine(x, layer.w_v, layer.b_v);

  std::vector<Tensor> outs;
  outs.reserve(static_cast<size_t>(samples));
  for (std::int64_t s = 0; s < samples; ++s) {
    Tensor qs = samples == 1 ? q : slice_rows(q, s * tokens, tokens);
    Tensor ks = samples == 1 ? k : slice_rows(k, s * tokens, tokens);
    Tensor vs = samples == 1 ? v : slice_rows(v, s * tokens, tokens);
    Tensor scores = scale(matmul(qs, transpose(ks)), inv_sqrt_d);
    Tensor weights = softmax(scores, 1);
    outs.push_back(matmul(weights, vs));
  }
  return samples == 1 ? outs.front() : concat_rows(outs);
}

Encoder::Encoder(const EncoderConfig& config, CounterRng& rng)
    : config_(config) {
  config_.validate();
  embed_w_ = xavier_uniform(config_.token_features, config_.d_model, rng);
  embed_b_ = Tensor::zeros({config_.d_model}, true);
  std::vector<double> pos(static_cast<size_t>(config_.max_tokens * config_.d_model));
  for (double& p : pos) p = rng.normal(0.0, 0.02);
  positional_ = Tensor::from_vector({config_.max_tokens, config_.d_model},
                                    std::move(pos), true);

  for (int layer = 0; layer < config_.depth; ++layer) {
    EncoderBlock block;
    block.kind = config_.attention_kinds[static_cast<size_t>(layer)];
    if (block.kind == AttentionKind::kFuzzy) {
      block.fuzzy = FuzzyAttentionLayer::init(config_.d_model, config_.d_model,
                                              config_.rules, config_.d_model, rng);
    } else {
      block.dot = DotAttentionLayer::init(config_.d_model, rng);
    }
    block.norm_attn = init_norm(config_.d_model);
    block.ffn.w1 = xavier_uniform(config_.d_model, config_.ffn_hidden, rng);
    block.ffn.b1 = Tensor::zeros({config_.ffn_hidden}, true);
    block.ffn.w2 = xavier_uniform(config_.ffn_hidden, config_.d_model, rng);
    block.ffn.b2 = Tensor::zeros({config_.d_model}, true);
    block.norm_ffn = init_norm(config_.d_model);
    blocks_.push_back(std::move(block));
  }
}

Tensor Encoder::embed_input(const Tensor& raw, std::int64_t samples) const {
  if (raw.ndim() != 2 || samples < 1 || raw.rows() % samples != 0) {
    throw ShapeError("embed_input: cannot split " + shape_str(raw.shape()) +
                     " into " + std::to_string(samples) + " samples");
  }
  const std::int64_t tokens = raw.rows() / samples;
  if (tokens > config_.max_tokens) {
    throw ContractError("embed_input: sequence of " + std::to_string(tokens) +
                        " tokens exceeds configured maximum " +
                        std::to_string(config_.max_tokens));
  }
  if (raw.cols() != config_.token_features) {
    throw ShapeError("embed_input: " + shape_str(raw.shape()) +
                     " does not carry " + std::to_string(config_.token_features) +
                     " features per token");
  }
  Tensor h = affine(raw, embed_w_, embed_b_);
  Tensor pos = tokens == config_.max_tokens ? positional_
                                            : slice_rows(positional_, 0, tokens);
  return add_tiled_rows(h, pos);
}

Encoder::Output Encoder::encode(const Tensor& raw, std::int64_t samples) const {
  Output out;
  Tensor h = embed_input(raw, samples);
  for (const EncoderBlock& block : blocks_) {
    Tensor attn;
    if (block.kind == AttentionKind::kFuzzy) {
      FuzzyAttentionOutput f = fuzzy_attention_forward(h, *block.fuzzy);
      attn = f.out;
      out.firing.push_back(f.firing);
    } else {
      attn = dot_attention(h, *block.dot, samples);
    }
    h = layer_norm(add(h, attn), block.norm_attn.gamma, block.norm_attn.beta,
                   kLayerNormEps);
    Tensor mid = relu(affine(h, block.ffn.w1, block.ffn.b1));
    Tensor ff = affine(mid, block.ffn.w2, block.ffn.b2);
    h = layer_norm(add(h, ff), block.norm_ffn.gamma, block.norm_ffn.beta,
                   kLayerNormEps);
  }
  out.hidden = h;
  return out;
}

std::vector<int> Encoder::fuzzy_layer_indices() const {
  std::vector<int> idx;
  for (size_t i = 0; i < blocks_.size(); ++i) {
    if (blocks_[i].kind == AttentionKind::kFuzzy) idx.push_back(static_cast<int>(i));
  }
  return idx;
}

void Encoder::append_parameters(ParamList& out, const std::string& prefix) const {
  out.push_back({prefix + "embed.weight", embed_w_, true});
  out.push_back({prefix + "embed.bias", embed_b_, false});
  out.push_back({prefix + "embed.positional", positional_, true});
  for (size_t i = 0; i < blocks_.size(); ++i) {
    const EncoderBlock& b = blocks_[i];
    const std::string base = prefix + "block" + std::to_string(i) + ".";
    if (b.kind == AttentionKind::kFuzzy) {
      out.push_back({base + "attn.w_q", b.fuzzy->w_q, true});
      out.push_back({base + "attn.b_q", b.fuzzy->b_q, false});
      out.push_back({base + "attn.centers", b.fuzzy->rules.centers, false});
      out.push_back({base + "attn.width_raw", b.fuzzy->rules.width_raw, false});
      out.push_back({base + "attn.consequents", b.fuzzy->rules.consequents, true});
    } else {
      out.push_back({base + "attn.w_q", b.dot->w_q, true});
      out.push_back({base + "attn.b_q", b.dot->b_q, false});
      out.push_back({base + "attn.w_k", b.dot->w_k, true});
      out.push_back({base + "attn.b_k", b.dot->b_k, false});
      out.push_back({base + "attn.w_v", b.dot->w_v, true});
      out.push_back({base + "attn.b_v", b.dot->b_v, false});
    }
    out.push_back({base + "norm_attn.gamma", b.norm_attn.gamma, false});
    out.push_back({base + "norm_attn.beta", b.norm_attn.beta, false});
    out.push_back({base + "ffn.w1", b.ffn.w1, true});
    out.push_back({base + "ffn.b1", b.ffn.b1, false});
    out.push_back({base + "ffn.w2", b.ffn.w2, true});
    out.push_back({base + "ffn.b2", b.ffn.b2, false});
    out.push_back({base + "norm_ffn.gamma", b.norm_ffn.gamma, false});
    out.push_back({base + "norm_ffn.beta", b.norm_ffn.beta, false});
  }
}

}  // namespace fuzzyattn
