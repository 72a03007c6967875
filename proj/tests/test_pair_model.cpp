#include <cmath>

#include "doctest.h"
#include "fuzzyattn/optim.hpp"
#include "fuzzyattn/pair_model.hpp"

using namespace fuzzyattn;

namespace {

EncoderConfig toy_config() {
  EncoderConfig config;
  config.depth = 1;
  config.d_model = 8;
  config.ffn_hidden = 16;
  config.rules = 4;
  config.fill_attention(AttentionKind::kFuzzy);
  config.max_tokens = 6;
  config.token_features = 4;
  return config;
}

Tensor random_tensor(Shape shape, CounterRng& rng) {
  std::vector<double> v(static_cast<size_t>(shape_numel(shape)));
  for (double& x : v) x = rng.normal();
  return Tensor::from_vector(std::move(shape), std::move(v));
}

void zero_param(PairClassifier& model, const std::string& name) {
  for (ParamRef& p : model.parameters()) {
    if (p.name == name) {
      std::fill(p.tensor.data().begin(), p.tensor.data().end(), 0.0);
      return;
    }
  }
  FAIL("no parameter named ", name);
}

}  // namespace

TEST_CASE("zeroed output layer gives zero logits") {
  PairClassifier model(toy_config(), 8, 3);
  zero_param(model, "head.w2");
  zero_param(model, "head.b2");

  CounterRng rng(1);
  Tensor d = random_tensor({6, 4}, rng);
  PairClassifier::PairOutput out = model.forward_pair(d, d);
  CHECK(out.logits.data()[0] == 0.0);
  CHECK(out.logits.data()[1] == 0.0);
}

TEST_CASE("stream order matters") {
  PairClassifier model(toy_config(), 8, 3);
  CounterRng rng(2);
  Tensor d1 = random_tensor({6, 4}, rng);
  Tensor d2 = random_tensor({6, 4}, rng);
  Tensor ab = model.forward_pair(d1, d2).logits;
  Tensor ba = model.forward_pair(d2, d1).logits;
  const double diff = std::abs(ab.data()[0] - ba.data()[0]) +
                      std::abs(ab.data()[1] - ba.data()[1]);
  CHECK(diff > 0.0);
}

TEST_CASE("mismatched streams are rejected") {
  PairClassifier model(toy_config(), 8, 3);
  Tensor d1 = Tensor::zeros({6, 4});
  Tensor d2 = Tensor::zeros({5, 4});
  CHECK_THROWS_AS(model.forward_pair(d1, d2), ContractError);
}

TEST_CASE("pooled embeddings equal encoder column means") {
  PairClassifier model(toy_config(), 8, 3);
  CounterRng rng(4);
  Tensor d1 = random_tensor({6, 4}, rng);
  Tensor d2 = random_tensor({6, 4}, rng);

  auto [e1, e2] = model.embeddings_for_ibs(d1, d2);
  CHECK(e1.shape() == Shape{8});
  CHECK(e2.shape() == Shape{8});

  Tensor h1 = model.encoder().encode(d1).hidden;
  for (std::int64_t j = 0; j < 8; ++j) {
    double mean = 0.0;
    for (std::int64_t i = 0; i < 6; ++i) mean += h1.at(i, j);
    mean /= 6.0;
    CHECK(std::abs(e1.data()[static_cast<size_t>(j)] - mean) < 1e-12);
  }

  auto [same1, same2] = model.embeddings_for_ibs(d1, d1);
  CHECK(same1.data() == same2.data());
}

TEST_CASE("batched forward agrees with per-pair forward") {
  PairClassifier model(toy_config(), 8, 5);
  CounterRng rng(6);
  Tensor a1 = random_tensor({6, 4}, rng);
  Tensor a2 = random_tensor({6, 4}, rng);
  Tensor b1 = random_tensor({6, 4}, rng);
  Tensor b2 = random_tensor({6, 4}, rng);

  Tensor stacked = concat_rows({a1, b1, a2, b2});  // d1 bank then d2 bank
  Tensor logits = model.forward_batch(stacked, 2).logits;
  Tensor la = model.forward_pair(a1, a2).logits;
  Tensor lb = model.forward_pair(b1, b2).logits;
  CHECK(logits.at(0, 0) == doctest::Approx(la.data()[0]).epsilon(1e-12));
  CHECK(logits.at(0, 1) == doctest::Approx(la.data()[1]).epsilon(1e-12));
  CHECK(logits.at(1, 0) == doctest::Approx(lb.data()[0]).epsilon(1e-12));
  CHECK(logits.at(1, 1) == doctest::Approx(lb.data()[1]).epsilon(1e-12));
}

TEST_CASE("encoder parameters are shared storage, not copies") {
  PairClassifier model(toy_config(), 8, 3);
  ParamList first = model.parameters();
  ParamList second = model.parameters();
  REQUIRE(first.size() == second.size());
  for (size_t i = 0; i < first.size(); ++i) {
    CHECK(first[i].tensor.node().get() == second[i].tensor.node().get());
  }
}

TEST_CASE("cross entropy closed forms") {
  CHECK(cross_entropy(Tensor::from_vector({2}, {0, 0}), 0).scalar() ==
        doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(cross_entropy(Tensor::from_vector({2}, {0, 0}), 1).scalar() ==
        doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(cross_entropy(Tensor::from_vector({2}, {30, -30}), 0).scalar() < 1e-12);
  CHECK(cross_entropy(Tensor::from_vector({2}, {1, 3}), 1).scalar() ==
        doctest::Approx(std::log(1.0 + std::exp(-2.0))).epsilon(1e-12));
  CHECK_THROWS_AS(cross_entropy(Tensor::from_vector({2}, {0, 0}), 2), ContractError);
}

TEST_CASE("logits stay finite on wild inputs") {
  PairClassifier model(toy_config(), 8, 9);
  CounterRng rng(7);
  for (int trial = 0; trial < 10; ++trial) {
    Tensor d1 = scale(random_tensor({6, 4}, rng), 100.0);
    Tensor d2 = scale(random_tensor({6, 4}, rng), 1e-6);
    Tensor logits = model.forward_pair(d1, d2).logits;
    CHECK(std::isfinite(logits.data()[0]));
    CHECK(std::isfinite(logits.data()[1]));
  }
}

TEST_CASE("loss falls within 20 steps on a separable toy task") {
  for (std::uint64_t seed : {11ull, 12ull, 13ull}) {
    PairClassifier model(toy_config(), 8, seed);
    CounterRng rng(seed * 1000 + 5);

    // two classes separated by a mean shift on every feature
    std::vector<Tensor> d1s, d2s;
    std::vector<int> labels;
    for (int i = 0; i < 8; ++i) {
      const int label = i % 2;
      const double shift = label == 1 ? 1.5 : -1.5;
      Tensor d1 = add(random_tensor({6, 4}, rng), Tensor::full({6, 4}, shift));
      Tensor d2 = add(random_tensor({6, 4}, rng), Tensor::full({6, 4}, shift));
      d1s.push_back(d1);
      d2s.push_back(d2);
      labels.push_back(label);
    }

    OptimConfig opt;
    opt.max_epochs = 30;
    opt.warmup_epochs = 0;
    opt.weight_decay = 0.0;
    AdamW optimizer(model.parameters(), opt);

    auto epoch_loss = [&]() {
      Tensor total = Tensor::scalar_value(0.0);
      for (size_t i = 0; i < d1s.size(); ++i) {
        Tensor loss = cross_entropy(model.forward_pair(d1s[i], d2s[i]).logits,
                                    labels[i]);
        total = add(total, loss);
      }
      return scale(total, 1.0 / static_cast<double>(d1s.size()));
    };

    const double initial = epoch_loss().scalar();
    double last = initial;
    for (int step = 0; step < 20; ++step) {
      Tensor loss = epoch_loss();
      optimizer.zero_grad();
      loss.backward();
      optimizer.step(3e-3);
      last = loss.scalar();
    }
    CHECK(last < initial);
  }
}
