// Attention driven by a bank of Gaussian rules. Each token's projected query
// is scored against every rule by negative scaled squared distance; a softmax
// over rules turns the scores into firing strengths, and the output is the
// firing-weighted mix of per-rule consequent vectors.

#pragma once

#include <cstdint>
#include <vector>

#include "fuzzyattn/rng.hpp"
#include "fuzzyattn/tensor.hpp"

namespace fuzzyattn {

struct RuleBank {
  // Widths are stored through softplus so they can never collapse to zero:
  // width = kWidthFloor + softplus(width_raw).
  static constexpr double kWidthFloor = 1e-3;

  Tensor centers;    // [rules, dims]
  Tensor width_raw;  // [rules, dims]
  Tensor consequents;  // [rules, out_features]

  static RuleBank init(std::int64_t rules, std::int64_t dims,
                       std::int64_t out_features, CounterRng& rng);

  std::int64_t rule_count() const { return centers.rows(); }
  std::int64_t dims() const { return centers.cols(); }
  std::int64_t out_features() const { return consequents.cols(); }

  // Graph-connected positive widths.
  Tensor widths() const;
  // Raw parameter value that makes widths() evaluate to `width`.
  static double raw_for_width(double width);
};

struct FuzzyAttentionLayer {
  Tensor w_q;  // [in_features, dims]
  Tensor b_q;  // [dims]
  RuleBank rules;

  static FuzzyAttentionLayer init(std::int64_t in_features, std::int64_t dims,
                                  std::int64_t rules, std::int64_t out_features,
                                  CounterRng& rng);
};

// Row i is softmax_r of -sum_d (q[i,d]-m[r,d])^2 / (2 w[r,d]^2).
Tensor firing_strengths(const Tensor& q, const RuleBank& rules);

// Same quantity via explicit products of Gaussian memberships, normalized by
// their sum. Forward-only; kept as the independent cross-check for the
// softmax form, which it must match elementwise. Rows whose memberships all
// underflow to zero are left zero and flagged.
Tensor firing_strengths_product_form(const Tensor& q, const RuleBank& rules,
                                     bool* underflow = nullptr);

struct FuzzyAttentionOutput {
  Tensor out;     // [tokens, out_features]
  Tensor firing;  // [tokens, rules]
};

FuzzyAttentionOutput fuzzy_attention_forward(const Tensor& x,
                                             const FuzzyAttentionLayer& layer);

}  // namespace fuzzyattn
