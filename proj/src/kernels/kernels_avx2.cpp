#include "pam1d/kernels.hpp"

#include <immintrin.h>

namespace pam1d::kernels {
namespace {

void sturm_count4_avx2(const double* diag, const double* off_sq, std::size_t n,
                       const double* shifts, double pivmin, int* counts) {
  const __m256d s = _mm256_loadu_pd(shifts);
  const __m256d piv = _mm256_set1_pd(pivmin);
  const __m256d neg_piv = _mm256_set1_pd(-pivmin);
  const __m256d zero = _mm256_setzero_pd();
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d abs_mask = _mm256_castsi256_pd(_mm256_set1_epi64x(0x7fffffffffffffffLL));

  __m256d q = _mm256_sub_pd(_mm256_set1_pd(diag[0]), s);
  __m256d small = _mm256_cmp_pd(_mm256_and_pd(q, abs_mask), piv, _CMP_LT_OQ);
  q = _mm256_blendv_pd(q, neg_piv, small);
  __m256d count = _mm256_and_pd(_mm256_cmp_pd(q, zero, _CMP_LT_OQ), one);
  for (std::size_t i = 1; i < n; ++i) {
    const __m256d d = _mm256_sub_pd(_mm256_set1_pd(diag[i]), s);
    q = _mm256_sub_pd(d, _mm256_div_pd(_mm256_set1_pd(off_sq[i - 1]), q));
    small = _mm256_cmp_pd(_mm256_and_pd(q, abs_mask), piv, _CMP_LT_OQ);
    q = _mm256_blendv_pd(q, neg_piv, small);
    count = _mm256_add_pd(count, _mm256_and_pd(_mm256_cmp_pd(q, zero, _CMP_LT_OQ), one));
  }
  alignas(32) double c[4];
  _mm256_store_pd(c, count);
  for (int k = 0; k < 4; ++k) counts[k] = static_cast<int>(c[k]);
}

void tridiag_matvec_avx2(const double* diag, const double* off, const double* x,
                         double* y, std::size_t n) {
  if (n < 6) {
    scalar_table().tridiag_matvec(diag, off, x, y, n);
    return;
  }
  y[0] = diag[0] * x[0] + off[0] * x[1];
  std::size_t i = 1;
  for (; i + 4 < n; i += 4) {
    const __m256d dx = _mm256_mul_pd(_mm256_loadu_pd(diag + i), _mm256_loadu_pd(x + i));
    const __m256d lo = _mm256_mul_pd(_mm256_loadu_pd(off + i - 1), _mm256_loadu_pd(x + i - 1));
    const __m256d hi = _mm256_mul_pd(_mm256_loadu_pd(off + i), _mm256_loadu_pd(x + i + 1));
    _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_add_pd(dx, lo), hi));
  }
  for (; i + 1 < n; ++i) {
    y[i] = (diag[i] * x[i] + off[i - 1] * x[i - 1]) + off[i] * x[i + 1];
  }
  y[n - 1] = diag[n - 1] * x[n - 1] + off[n - 2] * x[n - 2];
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    acc1 = _mm256_add_pd(acc1,
                         _mm256_mul_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4)));
  }
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, _mm256_add_pd(acc0, acc1));
  double s = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

const KernelTable& avx2_table() {
  static const KernelTable table{Isa::Avx2, &sturm_count4_avx2, &tridiag_matvec_avx2,
                                 &dot_avx2};
  return table;
}

}  // namespace pam1d::kernels
