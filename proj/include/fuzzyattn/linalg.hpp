// Small dense linear algebra: one-sided Jacobi SVD and the Moore-Penrose
// pseudoinverse built on it. Sized for desk-scale matrices.

#pragma once

#include "fuzzyattn/tensor.hpp"

namespace fuzzyattn {

struct SvdResult {
  Tensor u;                      // [n, r]
  std::vector<double> singular;  // length r = min(n, m), descending
  Tensor v;                      // [m, r]
};

// A = U * diag(singular) * V^T. Throws NumericError if the sweep fails to
// converge.
SvdResult svd(const Tensor& a);

// Singular values below rcond * sigma_max are treated as zero.
Tensor pinv(const Tensor& a, double rcond = 1e-12);

}  // namespace fuzzyattn
