#pragma once

#include <optional>
#include <vector>

namespace fuzzyattn {

struct WelchResult {
  double t = 0.0;
  double p = 1.0;
  double df = 0.0;
  // set when both groups have zero variance but different means: the t
  // statistic is unbounded and p is pinned to 0
  bool degenerate = false;
};

// Unequal-variance two-sample t-test with Welch-Satterthwaite degrees of
// freedom and a two-sided p-value.
WelchResult welch_t(const std::vector<double>& group_a,
                    const std::vector<double>& group_b);

// I_x(a, b) by continued fraction; accurate to ~1e-14 for moderate a, b.
double regularized_incomplete_beta(double a, double b, double x);

// Two-sided tail probability of Student's t.
double student_t_two_sided_p(double t, double df);

std::optional<double> pearson_correlation(const std::vector<double>& a,
                                          const std::vector<double>& b);

}  // namespace fuzzyattn
