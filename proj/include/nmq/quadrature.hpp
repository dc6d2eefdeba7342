// Quadrature rules on S^{d-1} for the Maier-Saupe partition function:
// d=2 composite trapezoid on [0, 2pi) (spectrally accurate for smooth
// periodic integrands), d=3 product Gauss-Legendre in cos(theta) x trapezoid
// in phi. Node data is laid out as flat arrays for the reduction kernels.
#pragma once

#include <vector>

namespace nmq {

/// Gauss-Legendre nodes/weights on [-1, 1].
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w);

struct CircleQuad {
  int n = 0;
  double weight = 0;        // uniform node weight 2*pi/n
  std::vector<double> c2;   // cos(2 theta_k)
  std::vector<double> csq;  // cos^2(theta_k)

  static constexpr int kMinNodes = 64;
  /// Throws QuadratureUnderResolved below the documented minimum.
  explicit CircleQuad(int nodes = 256);
};

struct SphereQuad {
  int n_theta = 0, n_phi = 0;
  std::vector<double> w;                 // node weights, sum = 4*pi
  std::vector<double> u1, u2, u3;        // omega_i^2 at nodes
  std::size_t size() const { return w.size(); }

  static constexpr int kMinTheta = 32;
  static constexpr int kMinPhi = 64;
  explicit SphereQuad(int nt = 64, int np = 128);
};

}  // namespace nmq
