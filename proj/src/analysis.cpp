#include "fuzzyattn/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fuzzyattn/linalg.hpp"

namespace fuzzyattn {

namespace {

const FuzzyAttentionLayer& fuzzy_layer_at(const PairClassifier& model,
                                          int layer_index) {
  const auto& blocks = model.encoder().blocks();
  if (layer_index < 0 || layer_index >= static_cast<int>(blocks.size())) {
    throw ContractError("layer " + std::to_string(layer_index) +
                        " out of range for depth " + std::to_string(blocks.size()));
  }
  const EncoderBlock& block = blocks[static_cast<size_t>(layer_index)];
  if (block.kind != AttentionKind::kFuzzy) {
    throw ContractError("layer " + std::to_string(layer_index) +
                        " is a dot-attention layer; nothing to explain");
  }
  return *block.fuzzy;
}

int fuzzy_ordinal(const PairClassifier& model, int layer_index) {
  fuzzy_layer_at(model, layer_index);  // validates
  const std::vector<int> fuzzy = model.encoder().fuzzy_layer_indices();
  return static_cast<int>(
      std::find(fuzzy.begin(), fuzzy.end(), layer_index) - fuzzy.begin());
}

}  // namespace

int default_explain_layer(const PairClassifier& model) {
  const std::vector<int> fuzzy = model.encoder().fuzzy_layer_indices();
  if (fuzzy.empty()) {
    throw ContractError("model has no fuzzy attention layer to explain");
  }
  return fuzzy.back();
}

Tensor trial_firing(const Trial& trial, const PairClassifier& model,
                    int layer_index) {
  const int ordinal = fuzzy_ordinal(model, layer_index);
  NoGradGuard guard;
  auto [d1, d2] = orient(trial, model.encoder().config().structure);
  PairClassifier::PairOutput out = model.forward_pair(d1, d2);
  const Tensor& f1 = out.firing1[static_cast<size_t>(ordinal)];
  const Tensor& f2 = out.firing2[static_cast<size_t>(ordinal)];
  return scale(add(f1, f2), 0.5);
}

std::vector<std::string> token_labels_for(InputStructure structure,
                                          std::int64_t tokens) {
  std::vector<std::string> labels;
  labels.reserve(static_cast<size_t>(tokens));
  for (std::int64_t s = 0; s < tokens; ++s) {
    if (structure == InputStructure::kChannelFirst) {
      labels.push_back(ChannelLayout::feature_name(static_cast<int>(s)));
    } else {
      const double t_s = static_cast<double>(s) / ChannelLayout::kSampleRateHz;
      char buf[32];
      std::snprintf(buf, sizeof(buf), "t=%.3fs", t_s);
      labels.emplace_back(buf);
    }
  }
  return labels;
}

SampleExplanation explain_sample(const Trial& trial, const PairClassifier& model,
                                 int layer_index, int top_k) {
  if (top_k < 1) throw ContractError("explain_sample: top_k must be >= 1");
  Tensor firing = trial_firing(trial, model, layer_index);
  const std::int64_t tokens = firing.rows(), rules = firing.cols();
  const std::int64_t k = std::min<std::int64_t>(top_k, tokens);

  SampleExplanation out;
  out.trial_id = trial.trial_id;
  out.label = trial.label;
  out.layer = layer_index;
  out.token_labels = token_labels_for(model.encoder().config().structure, tokens);

  for (std::int64_t r = 0; r < rules; ++r) {
    RuleReportEntry entry;
    entry.rule = static_cast<int>(r);
    double mean = 0.0;
    for (std::int64_t s = 0; s < tokens; ++s) mean += firing.at(s, r);
    entry.strength = mean / static_cast<double>(tokens);

    std::vector<int> order(static_cast<size_t>(tokens));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return firing.at(a, r) > firing.at(b, r);  // stable: ties keep low index
    });
    entry.top_tokens.assign(order.begin(), order.begin() + k);
    out.rules.push_back(std::move(entry));
  }
  return out;
}

GroupRuleMap group_rule_map(const TrialSet& set, const PairClassifier& model,
                            int layer_index) {
  std::size_t n_pos = 0, n_neg = 0;
  for (const Trial& t : set.trials) (t.label == 1 ? n_pos : n_neg) += 1;
  if (n_pos < 2 || n_neg < 2) {
    throw ContractError("group_rule_map: need at least 2 trials per label");
  }

  std::vector<Tensor> firings;
  firings.reserve(set.trials.size());
  for (const Trial& t : set.trials)
    firings.push_back(trial_firing(t, model, layer_index));

  const std::int64_t tokens = firings.front().rows();
  const std::int64_t rules = firings.front().cols();

  GroupRuleMap map;
  map.layer = layer_index;
  map.token_labels = token_labels_for(model.encoder().config().structure, tokens);
  map.t.assign(static_cast<size_t>(rules),
               std::vector<double>(static_cast<size_t>(tokens), 0.0));
  map.p.assign(static_cast<size_t>(rules),
               std::vector<double>(static_cast<size_t>(tokens), 1.0));

  std::vector<double> pos, neg;
  for (std::int64_t r = 0; r < rules; ++r) {
    for (std::int64_t s = 0; s < tokens; ++s) {
      pos.clear();
      neg.clear();
      for (size_t i = 0; i < set.trials.size(); ++i) {
        const double value = firings[i].at(s, r);
        (set.trials[i].label == 1 ? pos : neg).push_back(value);
      }
      const WelchResult w = welch_t(pos, neg);
      map.t[static_cast<size_t>(r)][static_cast<size_t>(s)] = w.t;
      map.p[static_cast<size_t>(r)][static_cast<size_t>(s)] = w.p;
    }
  }
  return map;
}

std::vector<Prototype> center_prototypes(const PairClassifier& model,
                                         int layer_index, int token_index) {
  const FuzzyAttentionLayer& layer = fuzzy_layer_at(model, layer_index);
  const Tensor w_pinv = pinv(layer.w_q);  // [dims, in_features]
  const std::int64_t rules = layer.rules.rule_count();
  const std::int64_t dims = layer.rules.dims();
  const std::int64_t in_features = layer.w_q.rows();

  // First block: the path from raw tokens to the query is affine, so centers
  // can be pulled all the way back to raw token features. The positional
  // offset is the chosen token's embedding, or the mean over positions.
  Tensor embed_pinv;
  std::vector<double> embed_offset;
  if (layer_index == 0) {
    const Encoder& enc = model.encoder();
    embed_pinv = pinv(enc.embed_weight());  // [d_model, token_features]
    const Tensor& pos = enc.positional();
    if (token_index >= pos.rows()) {
      throw ContractError("center_prototypes: token " + std::to_string(token_index) +
                          " out of range for " + std::to_string(pos.rows()) +
                          " positions");
    }
    embed_offset.assign(static_cast<size_t>(pos.cols()), 0.0);
    if (token_index >= 0) {
      for (std::int64_t j = 0; j < pos.cols(); ++j)
        embed_offset[static_cast<size_t>(j)] = pos.at(token_index, j);
    } else {
      for (std::int64_t s = 0; s < pos.rows(); ++s)
        for (std::int64_t j = 0; j < pos.cols(); ++j)
          embed_offset[static_cast<size_t>(j)] += pos.at(s, j);
      for (double& v : embed_offset) v /= static_cast<double>(pos.rows());
    }
    for (std::int64_t j = 0; j < pos.cols(); ++j)
      embed_offset[static_cast<size_t>(j)] +=
          enc.embed_bias().data()[static_cast<size_t>(j)];
  }

  std::vector<Prototype> out;
  out.reserve(static_cast<size_t>(rules));
  for (std::int64_t r = 0; r < rules; ++r) {
    Prototype proto;
    proto.rule = static_cast<int>(r);
    proto.center.resize(static_cast<size_t>(dims));
    for (std::int64_t d = 0; d < dims; ++d)
      proto.center[static_cast<size_t>(d)] =
          layer.rules.centers.at(r, d) - layer.b_q.data()[static_cast<size_t>(d)];

    // x = (m - b) * pinv(W), row convention
    proto.layer_input.assign(static_cast<size_t>(in_features), 0.0);
    for (std::int64_t d = 0; d < dims; ++d) {
      const double md = proto.center[static_cast<size_t>(d)];
      for (std::int64_t j = 0; j < in_features; ++j)
        proto.layer_input[static_cast<size_t>(j)] += md * w_pinv.at(d, j);
    }

    double residual = 0.0;
    for (std::int64_t d = 0; d < dims; ++d) {
      double re = layer.b_q.data()[static_cast<size_t>(d)] -
                  layer.rules.centers.at(r, d);
      for (std::int64_t j = 0; j < in_features; ++j)
        re += proto.layer_input[static_cast<size_t>(j)] * layer.w_q.at(j, d);
      residual += re * re;
    }
    proto.residual = std::sqrt(residual);
    // restore center to query space (the subtraction above was b_q)
    for (std::int64_t d = 0; d < dims; ++d)
      proto.center[static_cast<size_t>(d)] = layer.rules.centers.at(r, d);

    if (layer_index == 0) {
      const std::int64_t raw_features = embed_pinv.cols();
      proto.raw_input.assign(static_cast<size_t>(raw_features), 0.0);
      for (std::int64_t d = 0; d < embed_pinv.rows(); ++d) {
        const double hd = proto.layer_input[static_cast<size_t>(d)] -
                          embed_offset[static_cast<size_t>(d)];
        for (std::int64_t j = 0; j < raw_features; ++j)
          proto.raw_input[static_cast<size_t>(j)] += hd * embed_pinv.at(d, j);
      }
    }
    out.push_back(std::move(proto));
  }
  return out;
}

IbsValues ibs_metrics(const std::vector<double>& e1, const std::vector<double>& e2) {
  if (e1.size() != e2.size() || e1.size() < 2) {
    throw ContractError("ibs_metrics: need two equal-length embeddings (d >= 2)");
  }
  IbsValues out;
  out.pearson = pearson_correlation(e1, e2);

  double dot = 0.0, n1 = 0.0, n2 = 0.0, dist = 0.0;
  for (size_t i = 0; i < e1.size(); ++i) {
    dot += e1[i] * e2[i];
    n1 += e1[i] * e1[i];
    n2 += e2[i] * e2[i];
    dist += (e1[i] - e2[i]) * (e1[i] - e2[i]);
  }
  if (n1 > 0.0 && n2 > 0.0) out.cosine = dot / std::sqrt(n1 * n2);
  out.euclidean = std::sqrt(dist);
  return out;
}

IbsGroupResult ibs_group_test(const TrialSet& set, const PairClassifier& model) {
  std::vector<double> pe[2], co[2], eu[2];
  {
    NoGradGuard guard;
    for (const Trial& trial : set.trials) {
      auto [d1, d2] = orient(trial, model.encoder().config().structure);
      auto [e1, e2] = model.embeddings_for_ibs(d1, d2);
      const IbsValues v = ibs_metrics(e1.data(), e2.data());
      const int g = trial.label == 1 ? 1 : 0;
      if (v.pearson) pe[g].push_back(*v.pearson);
      if (v.cosine) co[g].push_back(*v.cosine);
      eu[g].push_back(v.euclidean);
    }
  }

  auto summarize = [](const std::vector<double>& h1, const std::vector<double>& h0) {
    IbsMetricTest m;
    m.n_h1 = h1.size();
    m.n_h0 = h0.size();
    m.test = welch_t(h1, h0);
    for (double v : h1) m.mean_h1 += v;
    for (double v : h0) m.mean_h0 += v;
    if (!h1.empty()) m.mean_h1 /= static_cast<double>(h1.size());
    if (!h0.empty()) m.mean_h0 /= static_cast<double>(h0.size());
    return m;
  };

  IbsGroupResult out;
  out.pearson = summarize(pe[1], pe[0]);
  out.cosine = summarize(co[1], co[0]);
  out.euclidean = summarize(eu[1], eu[0]);
  return out;
}

}  // namespace fuzzyattn
