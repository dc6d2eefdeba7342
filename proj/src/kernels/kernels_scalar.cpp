#include "nmq/kernels.hpp"

#include <cmath>

namespace nmq::kernels::scalar {

void exp_moments_d2(std::size_t n, const double* c2, const double* csq,
                    double m, double shift, double w, double out[3]) {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = std::exp(m * c2[i] - shift);
    const double c = csq[i];
    s0 += e;
    s1 += c * e;
    s2 += c * c * e;
  }
  out[0] = w * s0;
  out[1] = w * s1;
  out[2] = w * s2;
}

void exp_moments_d3(std::size_t n, const double* w, const double* u1,
                    const double* u2, const double* u3, const double mu[3],
                    double shift, double out[10]) {
  double s[10] = {0, 0, 0, 0, 0, 0, 0, 0, 0, 0};
  for (std::size_t i = 0; i < n; ++i) {
    const double a = u1[i], b = u2[i], c = u3[i];
    const double e = w[i] * std::exp(mu[0] * a + mu[1] * b + mu[2] * c - shift);
    s[0] += e;
    s[1] += a * e;
    s[2] += b * e;
    s[3] += c * e;
    s[4] += a * a * e;
    s[5] += b * b * e;
    s[6] += c * c * e;
    s[7] += a * b * e;
    s[8] += a * c * e;
    s[9] += b * c * e;
  }
  for (int k = 0; k < 10; ++k) out[k] = s[k];
}

double dot(std::size_t n, const double* a, const double* b) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

double sumsq(std::size_t n, const double* a) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * a[i];
  return s;
}

void axpy(std::size_t n, double a, const double* x, double* y) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

}  // namespace nmq::kernels::scalar
