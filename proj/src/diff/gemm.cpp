#include "navrl/diff/gemm.hpp"

#ifdef NAVRL_WITH_OPENBLAS
#include <cblas.h>
#endif

namespace navrl::diff::detail {

#ifdef NAVRL_WITH_OPENBLAS

void gemm(bool ta, bool tb, int m, int n, int k, double alpha, const real* a,
          int lda, const real* b, int ldb, double beta, real* c, int ldc) {
#ifdef NAVRL_STORAGE_FLOAT32
  cblas_sgemm(CblasRowMajor, ta ? CblasTrans : CblasNoTrans,
              tb ? CblasTrans : CblasNoTrans, m, n, k,
              static_cast<float>(alpha), a, lda, b, ldb,
              static_cast<float>(beta), c, ldc);
#else
  cblas_dgemm(CblasRowMajor, ta ? CblasTrans : CblasNoTrans,
              tb ? CblasTrans : CblasNoTrans, m, n, k, alpha, a, lda, b, ldb,
              beta, c, ldc);
#endif
}

#else

// Reference kernel so the project still builds without BLAS. ikj loop order
// keeps the inner loop contiguous for the non-transposed case.
void gemm(bool ta, bool tb, int m, int n, int k, double alpha, const real* a,
          int lda, const real* b, int ldb, double beta, real* c, int ldc) {
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) {
      real& cv = c[i * ldc + j];
      cv = beta == 0.0 ? real(0) : cv * static_cast<real>(beta);
    }
  for (int i = 0; i < m; ++i) {
    for (int p = 0; p < k; ++p) {
      real av = ta ? a[p * lda + i] : a[i * lda + p];
      av *= static_cast<real>(alpha);
      if (av == real(0)) continue;
      if (!tb) {
        const real* brow = b + static_cast<size_t>(p) * ldb;
        real* crow = c + static_cast<size_t>(i) * ldc;
        for (int j = 0; j < n; ++j) crow[j] += av * brow[j];
      } else {
        real* crow = c + static_cast<size_t>(i) * ldc;
        for (int j = 0; j < n; ++j) crow[j] += av * b[j * ldb + p];
      }
    }
  }
}

#endif

}  // namespace navrl::diff::detail
