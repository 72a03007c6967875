#include "fuzzyattn/stats.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "fuzzyattn/tensor.hpp"

namespace fuzzyattn {

namespace {

struct Moments {
  double mean = 0.0;
  double var = 0.0;  // unbiased
  std::size_t n = 0;
};

Moments moments(const std::vector<double>& values) {
  Moments m;
  m.n = values.size();
  for (double v : values) m.mean += v;
  m.mean /= static_cast<double>(m.n);
  // a constant sample has zero variance by definition, roundoff in the mean
  // must not leak in
  bool constant = true;
  for (double v : values) constant = constant && v == values.front();
  if (constant) {
    m.mean = values.front();
    return m;
  }
  for (double v : values) m.var += (v - m.mean) * (v - m.mean);
  m.var /= static_cast<double>(m.n - 1);
  return m;
}

// continued fraction for the incomplete beta (Lentz)
double betacf(double a, double b, double x) {
  constexpr int kMaxIter = 300;
  constexpr double kEps = 1e-15;
  constexpr double kTiny = 1e-300;

  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) return h;
  }
  throw NumericError("regularized_incomplete_beta: continued fraction stalled");
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x) {
  if (a <= 0.0 || b <= 0.0) {
    throw ContractError("regularized_incomplete_beta: a, b must be positive");
  }
  if (x < 0.0 || x > 1.0) {
    throw ContractError("regularized_incomplete_beta: x outside [0, 1]");
  }
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double front = std::exp(std::lgamma(a + b) - std::lgamma(a) -
                                std::lgamma(b) + a * std::log(x) +
                                b * std::log1p(-x));
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * betacf(a, b, x) / a;
  }
  return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

double student_t_two_sided_p(double t, double df) {
  if (df <= 0.0) throw ContractError("student_t_two_sided_p: df must be positive");
  if (!std::isfinite(t)) return 0.0;
  const double x = df / (df + t * t);
  return regularized_incomplete_beta(df / 2.0, 0.5, x);
}

WelchResult welch_t(const std::vector<double>& group_a,
                    const std::vector<double>& group_b) {
  if (group_a.size() < 2 || group_b.size() < 2) {
    throw ContractError("welch_t: each group needs at least 2 samples");
  }
  const Moments a = moments(group_a);
  const Moments b = moments(group_b);

  WelchResult out;
  const double sa = a.var / static_cast<double>(a.n);
  const double sb = b.var / static_cast<double>(b.n);
  if (sa + sb == 0.0) {
    out.df = static_cast<double>(a.n + b.n - 2);
    if (a.mean == b.mean) {
      out.t = 0.0;
      out.p = 1.0;
    } else {
      out.t = a.mean > b.mean ? std::numeric_limits<double>::infinity()
                              : -std::numeric_limits<double>::infinity();
      out.p = 0.0;
      out.degenerate = true;
    }
    return out;
  }

  out.t = (a.mean - b.mean) / std::sqrt(sa + sb);
  out.df = (sa + sb) * (sa + sb) /
           (sa * sa / static_cast<double>(a.n - 1) +
            sb * sb / static_cast<double>(b.n - 1));
  out.p = student_t_two_sided_p(out.t, out.df);
  return out;
}

std::optional<double> pearson_correlation(const std::vector<double>& a,
                                          const std::vector<double>& b) {
  if (a.size() != b.size() || a.size() < 2) {
    throw ContractError("pearson_correlation: need two equal-length vectors (n >= 2)");
  }
  const std::size_t n = a.size();
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= static_cast<double>(n);
  mb /= static_cast<double>(n);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) return std::nullopt;
  return sab / std::sqrt(saa * sbb);
}

}  // namespace fuzzyattn
