// kernels.hpp -- arithmetic inner loops: scalar reference implementations and
// AVX2 variants selected at runtime. Both backends are exposed directly so the
// tests can check them against each other on the same inputs.
#pragma once

#include <cstddef>

namespace nmq::kernels {

enum class Backend { scalar, avx2 };

/// Backend picked at startup (AVX2+FMA when the CPU has it, scalar otherwise).
Backend active();
bool avx2_available();
/// Force a backend (tests / troubleshooting). Throws if unavailable.
void force_backend(Backend b);
void reset_backend();

// Exponential-weighted moment reductions. These are the inner loops of the
// Maier-Saupe partition-function solves: all sums share the factor
// exp(a*x[i] - shift) resp. exp(mu.w2 - shift) and a strictly positive weight.
//
// d=2 circle rule with uniform weight w:
//   out[0] = w * sum exp(m*c2[i] - shift)
//   out[1] = w * sum csq[i]   * exp(...)
//   out[2] = w * sum csq[i]^2 * exp(...)
void exp_moments_d2(std::size_t n, const double* c2, const double* csq,
                    double m, double shift, double w, double out[3]);

// d=3 sphere rule with per-node weight. e = exp(mu1*u1+mu2*u2+mu3*u3 - shift):
//   out[0] = sum w*e
//   out[1..3] = sum w*ui*e
//   out[4..6] = sum w*ui^2*e      (i = 1..3)
//   out[7..9] = sum w*u1u2*e, w*u1u3*e, w*u2u3*e
void exp_moments_d3(std::size_t n, const double* w, const double* u1,
                    const double* u2, const double* u3, const double mu[3],
                    double shift, double out[10]);

double dot(std::size_t n, const double* a, const double* b);
double sumsq(std::size_t n, const double* a);
void axpy(std::size_t n, double a, const double* x, double* y);

namespace scalar {
void exp_moments_d2(std::size_t n, const double* c2, const double* csq,
                    double m, double shift, double w, double out[3]);
void exp_moments_d3(std::size_t n, const double* w, const double* u1,
                    const double* u2, const double* u3, const double mu[3],
                    double shift, double out[10]);
double dot(std::size_t n, const double* a, const double* b);
double sumsq(std::size_t n, const double* a);
void axpy(std::size_t n, double a, const double* x, double* y);
}  // namespace scalar

#ifdef NMQ_HAVE_AVX2
namespace avx2 {
void exp_moments_d2(std::size_t n, const double* c2, const double* csq,
                    double m, double shift, double w, double out[3]);
void exp_moments_d3(std::size_t n, const double* w, const double* u1,
                    const double* u2, const double* u3, const double mu[3],
                    double shift, double out[10]);
double dot(std::size_t n, const double* a, const double* b);
double sumsq(std::size_t n, const double* a);
void axpy(std::size_t n, double a, const double* x, double* y);
}  // namespace avx2
#endif

}  // namespace nmq::kernels
