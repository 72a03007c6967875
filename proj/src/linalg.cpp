#include "fuzzyattn/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace fuzzyattn {

namespace {

// One-sided Jacobi (Hestenes): rotate column pairs of B until all pairs are
// orthogonal, accumulating the rotations in V. Then A = B V^T with
// B = U diag(sigma). Requires n >= m; the wrapper transposes otherwise.
struct JacobiSvd {
  std::int64_t n, m;
  std::vector<double> b;  // n x m
  std::vector<double> v;  // m x m

  bool run() {
    constexpr double kTol = 1e-15;
    constexpr int kMaxSweeps = 60;
    for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
      bool rotated = false;
      for (std::int64_t p = 0; p < m - 1; ++p) {
        for (std::int64_t q = p + 1; q < m; ++q) {
          double alpha = 0.0, beta = 0.0, gamma = 0.0;
          for (std::int64_t i = 0; i < n; ++i) {
            const double bp = b[static_cast<size_t>(i * m + p)];
            const double bq = b[static_cast<size_t>(i * m + q)];
            alpha += bp * bp;
            beta += bq * bq;
            gamma += bp * bq;
          }
          if (std::abs(gamma) <= kTol * std::sqrt(alpha * beta)) continue;
          rotated = true;
          const double zeta = (beta - alpha) / (2.0 * gamma);
          const double t = (zeta >= 0.0 ? 1.0 : -1.0) /
                           (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
          const double c = 1.0 / std::sqrt(1.0 + t * t);
          const double s = c * t;
          for (std::int64_t i = 0; i < n; ++i) {
            const size_t ip = static_cast<size_t>(i * m + p);
            const size_t iq = static_cast<size_t>(i * m + q);
            const double bp = b[ip], bq = b[iq];
            b[ip] = c * bp - s * bq;
            b[iq] = s * bp + c * bq;
          }
          for (std::int64_t i = 0; i < m; ++i) {
            const size_t ip = static_cast<size_t>(i * m + p);
            const size_t iq = static_cast<size_t>(i * m + q);
            const double vp = v[ip], vq = v[iq];
            v[ip] = c * vp - s * vq;
            v[iq] = s * vp + c * vq;
          }
        }
      }
      if (!rotated) return true;
    }
    return false;
  }
};

}  // namespace

SvdResult svd(const Tensor& a) {
  if (a.ndim() != 2) {
    throw ShapeError("svd: expected 2-D tensor, got " + shape_str(a.shape()));
  }
  for (double x : a.data()) {
    if (!std::isfinite(x)) throw NumericError("svd: non-finite input");
  }

  const std::int64_t n0 = a.rows(), m0 = a.cols();
  const bool flip = n0 < m0;  // work on the transpose so rows >= cols
  const std::int64_t n = flip ? m0 : n0;
  const std::int64_t m = flip ? n0 : m0;

  JacobiSvd j;
  j.n = n;
  j.m = m;
  j.b.resize(static_cast<size_t>(n * m));
  const auto& av = a.data();
  for (std::int64_t i = 0; i < n; ++i)
    for (std::int64_t k = 0; k < m; ++k)
      j.b[static_cast<size_t>(i * m + k)] =
          flip ? av[static_cast<size_t>(k * m0 + i)] : av[static_cast<size_t>(i * m0 + k)];
  j.v.assign(static_cast<size_t>(m * m), 0.0);
  for (std::int64_t i = 0; i < m; ++i) j.v[static_cast<size_t>(i * m + i)] = 1.0;

  if (!j.run()) throw NumericError("svd: Jacobi sweep did not converge");

  std::vector<double> sigma(static_cast<size_t>(m));
  for (std::int64_t k = 0; k < m; ++k) {
    double acc = 0.0;
    for (std::int64_t i = 0; i < n; ++i) {
      const double x = j.b[static_cast<size_t>(i * m + k)];
      acc += x * x;
    }
    sigma[static_cast<size_t>(k)] = std::sqrt(acc);
  }

  std::vector<std::int64_t> perm(static_cast<size_t>(m));
  std::iota(perm.begin(), perm.end(), 0);
  std::stable_sort(perm.begin(), perm.end(), [&](std::int64_t x, std::int64_t y) {
    return sigma[static_cast<size_t>(x)] > sigma[static_cast<size_t>(y)];
  });

  Tensor u = Tensor::zeros({n, m});
  Tensor v = Tensor::zeros({m, m});
  std::vector<double> s(static_cast<size_t>(m));
  for (std::int64_t k = 0; k < m; ++k) {
    const std::int64_t src = perm[static_cast<size_t>(k)];
    const double sv = sigma[static_cast<size_t>(src)];
    s[static_cast<size_t>(k)] = sv;
    if (sv > 0.0) {
      const double inv = 1.0 / sv;
      for (std::int64_t i = 0; i < n; ++i)
        u.data()[static_cast<size_t>(i * m + k)] =
            j.b[static_cast<size_t>(i * m + src)] * inv;
    }
    for (std::int64_t i = 0; i < m; ++i)
      v.data()[static_cast<size_t>(i * m + k)] = j.v[static_cast<size_t>(i * m + src)];
  }

  if (flip) return {v, std::move(s), u};  // (A^T)^T = V' Sigma U'^T
  return {u, std::move(s), v};
}

Tensor pinv(const Tensor& a, double rcond) {
  SvdResult f = svd(a);
  const std::int64_t n = a.rows(), m = a.cols();
  const std::int64_t r = static_cast<std::int64_t>(f.singular.size());
  const double smax = f.singular.empty() ? 0.0 : f.singular.front();
  const double cutoff = rcond * smax;

  // pinv = V * Sigma^+ * U^T
  Tensor out = Tensor::zeros({m, n});
  for (std::int64_t k = 0; k < r; ++k) {
    const double sv = f.singular[static_cast<size_t>(k)];
    if (sv <= cutoff || sv == 0.0) continue;
    const double inv = 1.0 / sv;
    for (std::int64_t i = 0; i < m; ++i) {
      const double vik = f.v.data()[static_cast<size_t>(i * r + k)] * inv;
      if (vik == 0.0) continue;
      for (std::int64_t jj = 0; jj < n; ++jj)
        out.data()[static_cast<size_t>(i * n + jj)] +=
            vik * f.u.data()[static_cast<size_t>(jj * r + k)];
    }
  }
  return out;
}

}  // namespace fuzzyattn
