#include "fuzzyattn/fuzzy_attention.hpp"

#include <cmath>
#include <iostream>

namespace fuzzyattn {

namespace {

Tensor xavier_uniform(std::int64_t fan_in, std::int64_t fan_out,
                      CounterRng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::vector<double> v(static_cast<size_t>(fan_in * fan_out));
  for (double& x : v) x = rng.uniform(-limit, limit);
  return Tensor::from_vector({fan_in, fan_out}, std::move(v), true);
}

}  // namespace

double RuleBank::raw_for_width(double width) {
  // inverse of softplus at (width - floor)
  const double y = width - kWidthFloor;
  return std::log(std::expm1(y));
}

RuleBank RuleBank::init(std::int64_t rules, std::int64_t dims,
                        std::int64_t out_features, CounterRng& rng) {
  if (rules < 1 || dims < 1 || out_features < 1) {
    throw ContractError("RuleBank: rules, dims, out_features must be >= 1");
  }
  RuleBank bank;
  std::vector<double> centers(static_cast<size_t>(rules * dims));
  for (double& x : centers) x = rng.normal();
  bank.centers = Tensor::from_vector({rules, dims}, std::move(centers), true);

  // start every width at 1.0: unit-scale queries then give O(1) distances
  bank.width_raw = Tensor::full({rules, dims}, raw_for_width(1.0), true);

  std::vector<double> consequents(static_cast<size_t>(rules * out_features));
  for (double& x : consequents) x = rng.normal(0.0, 0.02);
  bank.consequents =
      Tensor::from_vector({rules, out_features}, std::move(consequents), true);
  return bank;
}

Tensor RuleBank::widths() const {
  return add(softplus(width_raw),
             Tensor::full({rule_count(), dims()}, kWidthFloor));
}

FuzzyAttentionLayer FuzzyAttentionLayer::init(std::int64_t in_features,
                                              std::int64_t dims,
                                              std::int64_t rules,
                                              std::int64_t out_features,
                                              CounterRng& rng) {
  FuzzyAttentionLayer layer;
  layer.w_q = xavier_uniform(in_features, dims, rng);
  layer.b_q = Tensor::zeros({dims}, true);
  layer.rules = RuleBank::init(rules, dims, out_features, rng);
  return layer;
}

Tensor firing_strengths(const Tensor& q, const RuleBank& rules) {
  return softmax(neg_scaled_sqdist(q, rules.centers, rules.widths()), 1);
}

Tensor firing_strengths_product_form(const Tensor& q, const RuleBank& rules,
                                     bool* underflow) {
  if (q.ndim() != 2 || q.cols() != rules.dims()) {
    throw ShapeError("firing_strengths_product_form: query " +
                     shape_str(q.shape()) + " vs centers " +
                     shape_str(rules.centers.shape()));
  }
  if (underflow) *underflow = false;

  const std::int64_t s = q.rows(), r = rules.rule_count(), d = rules.dims();
  const Tensor w = rules.widths();
  Tensor out = Tensor::zeros({s, r});
  bool warned = false;
  for (std::int64_t i = 0; i < s; ++i) {
    double total = 0.0;
    for (std::int64_t j = 0; j < r; ++j) {
      double membership = 1.0;
      for (std::int64_t l = 0; l < d; ++l) {
        const double diff = q.at(i, l) - rules.centers.at(j, l);
        const double width = w.at(j, l);
        membership *= std::exp(-0.5 * (diff / width) * (diff / width));
      }
      out.data()[static_cast<size_t>(i * r + j)] = membership;
      total += membership;
    }
    if (total == 0.0) {
      if (underflow) *underflow = true;
      if (!warned) {
        std::cerr << "firing_strengths_product_form: memberships underflowed "
                     "for token "
                  << i << "; row left zero\n";
        warned = true;
      }
      continue;
    }
    const double inv = 1.0 / total;
    for (std::int64_t j = 0; j < r; ++j)
      out.data()[static_cast<size_t>(i * r + j)] *= inv;
  }
  return out;
}

FuzzyAttentionOutput fuzzy_attention_forward(const Tensor& x,
                                             const FuzzyAttentionLayer& layer) {
  if (x.ndim() != 2 || x.cols() != layer.w_q.rows()) {
    throw ShapeError("fuzzy_attention_forward: input " + shape_str(x.shape()) +
                     " vs projection " + shape_str(layer.w_q.shape()));
  }
  Tensor q = add_rowvec(matmul(x, layer.w_q), layer.b_q);
  Tensor firing = firing_strengths(q, layer.rules);
  Tensor out = matmul(firing, layer.rules.consequents);
  return {out, firing};
}

}  // namespace fuzzyattn
