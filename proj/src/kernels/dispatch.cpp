#include "nmq/kernels.hpp"

#include <stdexcept>

namespace nmq::kernels {

namespace {

bool detect_avx2() {
#if defined(NMQ_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Backend g_backend = detect_avx2() ? Backend::avx2 : Backend::scalar;

}  // namespace

Backend active() { return g_backend; }

bool avx2_available() { return detect_avx2(); }

void force_backend(Backend b) {
  if (b == Backend::avx2 && !avx2_available())
    throw std::runtime_error("kernels: AVX2 backend not available on this CPU/build");
  g_backend = b;
}

void reset_backend() { g_backend = detect_avx2() ? Backend::avx2 : Backend::scalar; }

void exp_moments_d2(std::size_t n, const double* c2, const double* csq,
                    double m, double shift, double w, double out[3]) {
#ifdef NMQ_HAVE_AVX2
  if (g_backend == Backend::avx2) {
    avx2::exp_moments_d2(n, c2, csq, m, shift, w, out);
    return;
  }
#endif
  scalar::exp_moments_d2(n, c2, csq, m, shift, w, out);
}

void exp_moments_d3(std::size_t n, const double* w, const double* u1,
                    const double* u2, const double* u3, const double mu[3],
                    double shift, double out[10]) {
#ifdef NMQ_HAVE_AVX2
  if (g_backend == Backend::avx2) {
    avx2::exp_moments_d3(n, w, u1, u2, u3, mu, shift, out);
    return;
  }
#endif
  scalar::exp_moments_d3(n, w, u1, u2, u3, mu, shift, out);
}

double dot(std::size_t n, const double* a, const double* b) {
#ifdef NMQ_HAVE_AVX2
  if (g_backend == Backend::avx2) return avx2::dot(n, a, b);
#endif
  return scalar::dot(n, a, b);
}

double sumsq(std::size_t n, const double* a) {
#ifdef NMQ_HAVE_AVX2
  if (g_backend == Backend::avx2) return avx2::sumsq(n, a);
#endif
  return scalar::sumsq(n, a);
}

void axpy(std::size_t n, double a, const double* x, double* y) {
#ifdef NMQ_HAVE_AVX2
  if (g_backend == Backend::avx2) {
    avx2::axpy(n, a, x, y);
    return;
  }
#endif
  scalar::axpy(n, a, x, y);
}

}  // namespace nmq::kernels
