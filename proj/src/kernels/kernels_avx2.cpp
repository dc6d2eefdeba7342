// AVX2/FMA variants of the hot reductions. Compiled only on x86-64 (see
// CMakeLists); callers go through the dispatch layer.
#include "nmq/kernels.hpp"

#include <cmath>
#include <immintrin.h>

namespace nmq::kernels::avx2 {

namespace {

// exp for 4 doubles, Cephes-style rational approximation after range
// reduction x = n*ln2 + r. Inputs are clamped to [-708, 708] so the 2^n
// assembly below never leaves the normal range. Accuracy ~1 ulp.
inline __m256d exp4(__m256d x) {
  const __m256d log2e = _mm256_set1_pd(1.4426950408889634073599);
  const __m256d ln2_hi = _mm256_set1_pd(6.93145751953125e-1);
  const __m256d ln2_lo = _mm256_set1_pd(1.42860682030941723212e-6);

  x = _mm256_min_pd(x, _mm256_set1_pd(708.0));
  x = _mm256_max_pd(x, _mm256_set1_pd(-708.0));

  const __m256d n = _mm256_round_pd(_mm256_mul_pd(x, log2e),
                                    _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  x = _mm256_fnmadd_pd(n, ln2_hi, x);
  x = _mm256_fnmadd_pd(n, ln2_lo, x);

  const __m256d xx = _mm256_mul_pd(x, x);
  __m256d p = _mm256_set1_pd(1.26177193074810590878e-4);
  p = _mm256_fmadd_pd(p, xx, _mm256_set1_pd(3.02994407707441961300e-2));
  p = _mm256_fmadd_pd(p, xx, _mm256_set1_pd(9.99999999999999999910e-1));
  p = _mm256_mul_pd(p, x);
  __m256d q = _mm256_set1_pd(3.00198505138664455042e-6);
  q = _mm256_fmadd_pd(q, xx, _mm256_set1_pd(2.52448340349684104192e-3));
  q = _mm256_fmadd_pd(q, xx, _mm256_set1_pd(2.27265548208155028766e-1));
  q = _mm256_fmadd_pd(q, xx, _mm256_set1_pd(2.00000000000000000005e0));
  __m256d e = _mm256_div_pd(p, _mm256_sub_pd(q, p));
  e = _mm256_fmadd_pd(_mm256_set1_pd(2.0), e, _mm256_set1_pd(1.0));

  __m128i ni = _mm256_cvtpd_epi32(n);
  __m256i n64 = _mm256_cvtepi32_epi64(ni);
  n64 = _mm256_add_epi64(n64, _mm256_set1_epi64x(1023));
  n64 = _mm256_slli_epi64(n64, 52);
  return _mm256_mul_pd(e, _mm256_castsi256_pd(n64));
}

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

}  // namespace

void exp_moments_d2(std::size_t n, const double* c2, const double* csq,
                    double m, double shift, double w, double out[3]) {
  const __m256d vm = _mm256_set1_pd(m);
  const __m256d vs = _mm256_set1_pd(shift);
  __m256d s0 = _mm256_setzero_pd(), s1 = _mm256_setzero_pd(), s2 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d e = exp4(_mm256_fmsub_pd(vm, _mm256_loadu_pd(c2 + i), vs));
    const __m256d c = _mm256_loadu_pd(csq + i);
    s0 = _mm256_add_pd(s0, e);
    s1 = _mm256_fmadd_pd(c, e, s1);
    s2 = _mm256_fmadd_pd(_mm256_mul_pd(c, c), e, s2);
  }
  double r0 = hsum(s0), r1 = hsum(s1), r2 = hsum(s2);
  for (; i < n; ++i) {
    const double e = std::exp(m * c2[i] - shift);
    const double c = csq[i];
    r0 += e;
    r1 += c * e;
    r2 += c * c * e;
  }
  out[0] = w * r0;
  out[1] = w * r1;
  out[2] = w * r2;
}

void exp_moments_d3(std::size_t n, const double* w, const double* u1,
                    const double* u2, const double* u3, const double mu[3],
                    double shift, double out[10]) {
  const __m256d m1 = _mm256_set1_pd(mu[0]);
  const __m256d m2 = _mm256_set1_pd(mu[1]);
  const __m256d m3 = _mm256_set1_pd(mu[2]);
  const __m256d vs = _mm256_set1_pd(shift);
  __m256d s[10];
  for (auto& v : s) v = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d a = _mm256_loadu_pd(u1 + i);
    const __m256d b = _mm256_loadu_pd(u2 + i);
    const __m256d c = _mm256_loadu_pd(u3 + i);
    __m256d x = _mm256_fmsub_pd(m1, a, vs);
    x = _mm256_fmadd_pd(m2, b, x);
    x = _mm256_fmadd_pd(m3, c, x);
    const __m256d e = _mm256_mul_pd(_mm256_loadu_pd(w + i), exp4(x));
    s[0] = _mm256_add_pd(s[0], e);
    s[1] = _mm256_fmadd_pd(a, e, s[1]);
    s[2] = _mm256_fmadd_pd(b, e, s[2]);
    s[3] = _mm256_fmadd_pd(c, e, s[3]);
    s[4] = _mm256_fmadd_pd(_mm256_mul_pd(a, a), e, s[4]);
    s[5] = _mm256_fmadd_pd(_mm256_mul_pd(b, b), e, s[5]);
    s[6] = _mm256_fmadd_pd(_mm256_mul_pd(c, c), e, s[6]);
    s[7] = _mm256_fmadd_pd(_mm256_mul_pd(a, b), e, s[7]);
    s[8] = _mm256_fmadd_pd(_mm256_mul_pd(a, c), e, s[8]);
    s[9] = _mm256_fmadd_pd(_mm256_mul_pd(b, c), e, s[9]);
  }
  double r[10];
  for (int k = 0; k < 10; ++k) r[k] = hsum(s[k]);
  for (; i < n; ++i) {
    const double a = u1[i], b = u2[i], c = u3[i];
    const double e = w[i] * std::exp(mu[0] * a + mu[1] * b + mu[2] * c - shift);
    r[0] += e;
    r[1] += a * e;
    r[2] += b * e;
    r[3] += c * e;
    r[4] += a * a * e;
    r[5] += b * b * e;
    r[6] += c * c * e;
    r[7] += a * b * e;
    r[8] += a * c * e;
    r[9] += b * c * e;
  }
  for (int k = 0; k < 10; ++k) out[k] = r[k];
}

double dot(std::size_t n, const double* a, const double* b) {
  __m256d s0 = _mm256_setzero_pd(), s1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    s0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), s0);
    s1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), s1);
  }
  double r = hsum(_mm256_add_pd(s0, s1));
  for (; i < n; ++i) r += a[i] * b[i];
  return r;
}

double sumsq(std::size_t n, const double* a) {
  __m256d s0 = _mm256_setzero_pd(), s1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256d x = _mm256_loadu_pd(a + i);
    const __m256d y = _mm256_loadu_pd(a + i + 4);
    s0 = _mm256_fmadd_pd(x, x, s0);
    s1 = _mm256_fmadd_pd(y, y, s1);
  }
  double r = hsum(_mm256_add_pd(s0, s1));
  for (; i < n; ++i) r += a[i] * a[i];
  return r;
}

void axpy(std::size_t n, double a, const double* x, double* y) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  for (; i < n; ++i) y[i] += a * x[i];
}

}  // namespace nmq::kernels::avx2
