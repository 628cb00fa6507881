#include <immintrin.h>

#include "ciflab/kernels.hpp"

namespace cif::kernels {

namespace {
double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}
}  // namespace

ReciprocalSums reciprocal_sums_avx2(const double* gap, const double* cosv, const double* weight, std::size_t n,
                                    double base, double scale) {
  const __m256d vb = _mm256_set1_pd(base);
  const __m256d vs = _mm256_set1_pd(scale);
  __m256d a0 = _mm256_setzero_pd(), a1 = _mm256_setzero_pd();
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    const __m256d den = _mm256_fmadd_pd(vs, _mm256_loadu_pd(gap + k), vb);
    const __m256d q = _mm256_div_pd(_mm256_loadu_pd(weight + k), den);
    a0 = _mm256_add_pd(a0, q);
    a1 = _mm256_fmadd_pd(q, _mm256_loadu_pd(cosv + k), a1);
  }
  ReciprocalSums r{hsum(a0), hsum(a1)};
  for (; k < n; ++k) {
    const double q = weight[k] / (base + scale * gap[k]);
    r.s0 += q;
    r.s1 += q * cosv[k];
  }
  return r;
}

}  // namespace cif::kernels
