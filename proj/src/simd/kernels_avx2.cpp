// Compiled with -mavx2 -mfma; only reached after a CPUID check.
#include <immintrin.h>

#include <cmath>

#include "fwq/simd.hpp"

namespace fwq::simd::avx2 {

namespace {

// exp(a) for |a| <= 700: a = k ln2 + r with |r| <= ln2/2, degree-13 Taylor on r.
inline __m256d exp_pd(__m256d a) {
  const __m256d lim = _mm256_set1_pd(700.0);
  a = _mm256_min_pd(_mm256_max_pd(a, _mm256_sub_pd(_mm256_setzero_pd(), lim)), lim);
  const __m256d inv_ln2 = _mm256_set1_pd(1.4426950408889634074);
  const __m256d ln2_hi = _mm256_set1_pd(6.93145751953125e-1);
  const __m256d ln2_lo = _mm256_set1_pd(1.42860682030941723212e-6);
  const __m256d k = _mm256_round_pd(_mm256_mul_pd(a, inv_ln2), _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m256d r = _mm256_fnmadd_pd(k, ln2_hi, a);
  r = _mm256_fnmadd_pd(k, ln2_lo, r);
  static const double c[] = {1.0 / 6227020800.0, 1.0 / 479001600.0, 1.0 / 39916800.0, 1.0 / 3628800.0,
                             1.0 / 362880.0,     1.0 / 40320.0,     1.0 / 5040.0,     1.0 / 720.0,
                             1.0 / 120.0,        1.0 / 24.0,        1.0 / 6.0,        0.5,
                             1.0,                1.0};
  __m256d p = _mm256_set1_pd(c[0]);
  for (int i = 1; i < 14; ++i) p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(c[i]));
  const __m128i ki = _mm256_cvtpd_epi32(k);
  __m256i e = _mm256_cvtepi32_epi64(ki);
  e = _mm256_add_epi64(e, _mm256_set1_epi64x(1023));
  e = _mm256_slli_epi64(e, 52);
  return _mm256_mul_pd(p, _mm256_castsi256_pd(e));
}

}  // namespace

void solv_norms(double log_lambda, const double* t, const double* vx, const double* vy,
                const double* vt, double* out, std::size_t n) {
  const __m256d two_l = _mm256_set1_pd(2.0 * log_lambda);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d e = exp_pd(_mm256_mul_pd(two_l, _mm256_loadu_pd(t + i)));
    const __m256d x = _mm256_loadu_pd(vx + i);
    const __m256d y = _mm256_loadu_pd(vy + i);
    const __m256d z = _mm256_loadu_pd(vt + i);
    __m256d q = _mm256_mul_pd(z, z);
    q = _mm256_fmadd_pd(_mm256_mul_pd(e, y), y, q);
    q = _mm256_add_pd(q, _mm256_div_pd(_mm256_mul_pd(x, x), e));
    _mm256_storeu_pd(out + i, _mm256_sqrt_pd(q));
  }
  if (i < n) scalar::solv_norms(log_lambda, t + i, vx + i, vy + i, vt + i, out + i, n - i);
}

void quad_norms(const double* g, const double* v, double* out, std::size_t n) {
  std::size_t i = 0;
  alignas(32) double buf[9][4];
  for (; i + 4 <= n; i += 4) {
    for (int k = 0; k < 4; ++k) {
      const double* G = g + 6 * (i + k);
      for (int j = 0; j < 6; ++j) buf[j][k] = G[j];
      for (int j = 0; j < 3; ++j) buf[6 + j][k] = v[3 * (i + k) + j];
    }
    const __m256d xx = _mm256_load_pd(buf[0]), xy = _mm256_load_pd(buf[1]), xt = _mm256_load_pd(buf[2]);
    const __m256d yy = _mm256_load_pd(buf[3]), yt = _mm256_load_pd(buf[4]), tt = _mm256_load_pd(buf[5]);
    const __m256d x = _mm256_load_pd(buf[6]), y = _mm256_load_pd(buf[7]), z = _mm256_load_pd(buf[8]);
    __m256d cross = _mm256_mul_pd(_mm256_mul_pd(xy, x), y);
    cross = _mm256_fmadd_pd(_mm256_mul_pd(xt, x), z, cross);
    cross = _mm256_fmadd_pd(_mm256_mul_pd(yt, y), z, cross);
    __m256d q = _mm256_mul_pd(_mm256_mul_pd(xx, x), x);
    q = _mm256_fmadd_pd(_mm256_mul_pd(yy, y), y, q);
    q = _mm256_fmadd_pd(_mm256_mul_pd(tt, z), z, q);
    q = _mm256_fmadd_pd(_mm256_set1_pd(2.0), cross, q);
    q = _mm256_max_pd(q, _mm256_setzero_pd());
    _mm256_storeu_pd(out + i, _mm256_sqrt_pd(q));
  }
  if (i < n) scalar::quad_norms(g + 6 * i, v + 3 * i, out + i, n - i);
}

}  // namespace fwq::simd::avx2
