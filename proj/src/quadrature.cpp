#include "nmq/quadrature.hpp"

#include <cmath>

#include "nmq/errors.hpp"

namespace nmq {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    // Newton on P_n with the Chebyshev-like initial guess
    double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
      }
      pp = n * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / pp;
      z -= dz;
      if (std::fabs(dz) < 1e-15) break;
    }
    x[i] = -z;
    x[n - 1 - i] = z;
    w[i] = w[n - 1 - i] = 2.0 / ((1.0 - z * z) * pp * pp);
  }
}

CircleQuad::CircleQuad(int nodes) {
  if (nodes < kMinNodes)
    throw QuadratureUnderResolved("d=2 circle rule needs >= 64 nodes, got " +
                                  std::to_string(nodes));
  n = nodes;
  weight = 2.0 * kPi / n;
  c2.resize(n);
  csq.resize(n);
  for (int k = 0; k < n; ++k) {
    const double th = 2.0 * kPi * k / n;
    c2[k] = std::cos(2.0 * th);
    const double c = std::cos(th);
    csq[k] = c * c;
  }
}

SphereQuad::SphereQuad(int nt, int np) {
  if (nt < kMinTheta || np < kMinPhi)
    throw QuadratureUnderResolved("d=3 sphere rule needs >= 32x64 nodes, got " +
                                  std::to_string(nt) + "x" + std::to_string(np));
  n_theta = nt;
  n_phi = np;
  std::vector<double> gx, gw;
  gauss_legendre(nt, gx, gw);
  const double wphi = 2.0 * kPi / np;
  const std::size_t total = static_cast<std::size_t>(nt) * np;
  w.resize(total);
  u1.resize(total);
  u2.resize(total);
  u3.resize(total);
  std::size_t idx = 0;
  for (int i = 0; i < nt; ++i) {
    const double ct = gx[i];            // cos(theta)
    const double st2 = 1.0 - ct * ct;   // sin^2(theta)
    for (int j = 0; j < np; ++j, ++idx) {
      const double phi = 2.0 * kPi * j / np;
      const double cp = std::cos(phi), sp = std::sin(phi);
      w[idx] = gw[i] * wphi;
      u1[idx] = st2 * cp * cp;
      u2[idx] = st2 * sp * sp;
      u3[idx] = ct * ct;
    }
  }
}

}  // namespace nmq
