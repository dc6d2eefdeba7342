// sym0.hpp -- symmetric trace-free d x d matrices (d = 2, 3) stored as
// independent components, with closed-form spectral decomposition and the
// eigenvalue physicality predicates.
//
// Component order (fixed, shared with field arrays and file formats):
//   d=2: q11, q12
//   d=3: q11, q22, q12, q13, q23
#pragma once

#include <array>
#include <cmath>

namespace nmq {

template <int D>
struct Sym0 {
  static_assert(D == 2 || D == 3);
  static constexpr int NC = D * (D + 1) / 2 - 1;
  std::array<double, NC> c{};

  double& operator[](int i) { return c[i]; }
  double operator[](int i) const { return c[i]; }

  Sym0& operator+=(const Sym0& o) {
    for (int i = 0; i < NC; ++i) c[i] += o.c[i];
    return *this;
  }
  Sym0& operator-=(const Sym0& o) {
    for (int i = 0; i < NC; ++i) c[i] -= o.c[i];
    return *this;
  }
  Sym0& operator*=(double a) {
    for (int i = 0; i < NC; ++i) c[i] *= a;
    return *this;
  }
  friend Sym0 operator+(Sym0 a, const Sym0& b) { return a += b; }
  friend Sym0 operator-(Sym0 a, const Sym0& b) { return a -= b; }
  friend Sym0 operator*(double s, Sym0 a) { return a *= s; }

  /// Full matrix, row-major.
  std::array<double, D * D> full() const;
};

template <>
inline std::array<double, 4> Sym0<2>::full() const {
  return {c[0], c[1], c[1], -c[0]};
}

template <>
inline std::array<double, 9> Sym0<3>::full() const {
  const double q33 = -c[0] - c[1];
  return {c[0], c[2], c[3], c[2], c[1], c[4], c[3], c[4], q33};
}

/// Frobenius inner product tr[A B] on the component representation.
inline double fdot(const Sym0<2>& a, const Sym0<2>& b) {
  return 2.0 * (a[0] * b[0] + a[1] * b[1]);
}
inline double fdot(const Sym0<3>& a, const Sym0<3>& b) {
  // |Q|^2 = q11^2 + q22^2 + q33^2 + 2(q12^2+q13^2+q23^2), q33 = -q11-q22
  return a[0] * b[0] + a[1] * b[1] + (a[0] + a[1]) * (b[0] + b[1]) +
         2.0 * (a[2] * b[2] + a[3] * b[3] + a[4] * b[4]);
}
template <int D>
double fnorm(const Sym0<D>& a) {
  return std::sqrt(fdot(a, a));
}

// Frobenius-orthonormal coordinates of Sym0(d): |iso(Q)| = |Q|_F, and
// conjugation by rotations acts orthogonally on them. Used by the mollifier.
inline std::array<double, 2> iso_coords(const Sym0<2>& q) {
  constexpr double s2 = 1.4142135623730950488;
  return {s2 * q[0], s2 * q[1]};
}
inline Sym0<2> from_iso(const std::array<double, 2>& y) {
  constexpr double is2 = 0.70710678118654752440;
  return Sym0<2>{{is2 * y[0], is2 * y[1]}};
}
inline std::array<double, 5> iso_coords(const Sym0<3>& q) {
  constexpr double s2 = 1.4142135623730950488;
  const double is2 = 1.0 / s2;
  const double s32 = 1.2247448713915890491;  // sqrt(3/2)
  return {(q[0] - q[1]) * is2, (q[0] + q[1]) * s32, s2 * q[2], s2 * q[3], s2 * q[4]};
}
inline Sym0<3> from_iso(const std::array<double, 5>& y) {
  constexpr double is2 = 0.70710678118654752440;
  const double i6 = 0.40824829046386301637;  // 1/sqrt(6)
  const double q11 = is2 * y[0] + i6 * y[1];
  const double q22 = -is2 * y[0] + i6 * y[1];
  return Sym0<3>{{q11, q22, is2 * y[2], is2 * y[3], is2 * y[4]}};
}

template <int D>
struct Spectrum {
  std::array<double, D> lambda;     // ascending
  std::array<double, D * D> frame;  // row-major rotation; columns = eigenvectors, det +1
};

/// Trace-free symmetric part <(A+A^T)/2> of a full row-major d x d matrix.
template <int D>
Sym0<D> trace_free(const std::array<double, D * D>& a);

/// Closed-form eigendecomposition (d=2 direct, d=3 trigonometric with the
/// acos argument clamped to [-1,1]). Degenerate eigenvalues get a
/// deterministic orthonormal completion.
template <int D>
Spectrum<D> spectrum(const Sym0<D>& q);

/// U diag(g) U^T projected trace-free (frame row-major, columns u_k).
template <int D>
Sym0<D> compose(const std::array<double, D * D>& frame, const std::array<double, D>& g);

/// R Q R^T for a d x d rotation R (row-major).
template <int D>
Sym0<D> rotate(const Sym0<D>& q, const std::array<double, D * D>& r);

template <int D>
double margin_of(const std::array<double, D>& lambda_ascending) {
  return std::fmin(lambda_ascending[0] + 1.0 / D,
                   1.0 - 1.0 / D - lambda_ascending[D - 1]);
}

/// delta(Q) = min(lambda_min + 1/d, 1 - 1/d - lambda_max); positive iff Q is
/// strictly inside the physical triangle.
template <int D>
double physicality_margin(const Sym0<D>& q) {
  return margin_of<D>(spectrum(q).lambda);
}

}  // namespace nmq
