#include <cmath>

#include "doctest.h"
#include "fuzzyattn/linalg.hpp"
#include "fuzzyattn/rng.hpp"

using namespace fuzzyattn;

namespace {

Tensor random_matrix(std::int64_t n, std::int64_t m, CounterRng& rng) {
  std::vector<double> v(static_cast<size_t>(n * m));
  for (double& x : v) x = rng.normal();
  return Tensor::from_vector({n, m}, std::move(v));
}

Tensor mm(const Tensor& a, const Tensor& b) { return matmul(a, b); }

double max_abs_diff(const Tensor& a, const Tensor& b) {
  double mx = 0.0;
  for (size_t i = 0; i < a.data().size(); ++i)
    mx = std::max(mx, std::abs(a.data()[i] - b.data()[i]));
  return mx;
}

double max_asym(const Tensor& a) {
  double mx = 0.0;
  for (std::int64_t i = 0; i < a.rows(); ++i)
    for (std::int64_t j = 0; j < a.cols(); ++j)
      mx = std::max(mx, std::abs(a.at(i, j) - a.at(j, i)));
  return mx;
}

void check_moore_penrose(const Tensor& w, double tol = 1e-8) {
  Tensor p = pinv(w);
  CHECK(max_abs_diff(mm(mm(w, p), w), w) < tol);
  CHECK(max_abs_diff(mm(mm(p, w), p), p) < tol);
  CHECK(max_asym(mm(w, p)) < tol);
  CHECK(max_asym(mm(p, w)) < tol);
}

}  // namespace

TEST_CASE("pinv of identity and diagonal") {
  Tensor eye = Tensor::from_vector({3, 3}, {1, 0, 0, 0, 1, 0, 0, 0, 1});
  CHECK(max_abs_diff(pinv(eye), eye) < 1e-12);

  Tensor diag = Tensor::from_vector({2, 2}, {2, 0, 0, 4});
  Tensor expect = Tensor::from_vector({2, 2}, {0.5, 0, 0, 0.25});
  CHECK(max_abs_diff(pinv(diag), expect) < 1e-12);
}

TEST_CASE("pinv is a left inverse for full column rank") {
  CounterRng rng(31);
  Tensor w = random_matrix(5, 3, rng);
  Tensor ident = mm(pinv(w), w);
  for (std::int64_t i = 0; i < 3; ++i)
    for (std::int64_t j = 0; j < 3; ++j)
      CHECK(std::abs(ident.at(i, j) - (i == j ? 1.0 : 0.0)) < 1e-8);
}

TEST_CASE("Moore-Penrose conditions across shapes and ranks") {
  CounterRng rng(77);
  for (int trial = 0; trial < 10; ++trial) {
    check_moore_penrose(random_matrix(4, 4, rng));
    check_moore_penrose(random_matrix(3, 6, rng));
    check_moore_penrose(random_matrix(7, 2, rng));
    // rank-deficient: product of thin factors
    Tensor lo = random_matrix(5, 2, rng);
    Tensor hi = random_matrix(2, 4, rng);
    check_moore_penrose(mm(lo, hi));
  }
  check_moore_penrose(Tensor::zeros({3, 4}));
}

TEST_CASE("svd reconstructs the input") {
  CounterRng rng(9);
  for (auto [n, m] : {std::pair<std::int64_t, std::int64_t>{6, 4}, {4, 6}, {5, 5}}) {
    Tensor w = random_matrix(n, m, rng);
    SvdResult f = svd(w);
    const std::int64_t r = static_cast<std::int64_t>(f.singular.size());
    Tensor us = Tensor::zeros({n, r});
    for (std::int64_t i = 0; i < n; ++i)
      for (std::int64_t k = 0; k < r; ++k)
        us.data()[static_cast<size_t>(i * r + k)] =
            f.u.at(i, k) * f.singular[static_cast<size_t>(k)];
    Tensor rec = mm(us, transpose(f.v));
    CHECK(max_abs_diff(rec, w) < 1e-10);
    for (size_t k = 1; k < f.singular.size(); ++k)
      CHECK(f.singular[k] <= f.singular[k - 1]);
  }
}

TEST_CASE("svd rejects non-finite input") {
  Tensor bad = Tensor::from_vector({2, 2}, {1.0, std::nan(""), 0.0, 1.0});
  CHECK_THROWS_AS(svd(bad), NumericError);
}
