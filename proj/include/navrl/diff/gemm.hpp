#pragma once

#include "navrl/diff/tensor.hpp"

namespace navrl::diff::detail {

// C = alpha * op(A) * op(B) + beta * C, row-major, op = transpose when t* set.
// m, n, k are the dimensions of the product: op(A) is m x k, op(B) is k x n.
void gemm(bool ta, bool tb, int m, int n, int k, double alpha, const real* a,
          int lda, const real* b, int ldb, double beta, real* c, int ldc);

}  // namespace navrl::diff::detail
