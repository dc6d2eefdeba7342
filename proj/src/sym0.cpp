#include "nmq/sym0.hpp"

#include <algorithm>
#include <cmath>

namespace nmq {

namespace {

constexpr double kPi = 3.14159265358979323846;

inline std::array<double, 3> cross(const std::array<double, 3>& a,
                                   const std::array<double, 3>& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2],
          a[0] * b[1] - a[1] * b[0]};
}

inline double norm3(const std::array<double, 3>& v) {
  return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
}

inline void normalize3(std::array<double, 3>& v) {
  const double n = norm3(v);
  for (auto& x : v) x /= n;
}

// Eigenvector of the symmetric matrix m for (well-separated) eigenvalue l:
// the largest cross product of rows of m - l*I.
std::array<double, 3> eigvec_cross(const std::array<double, 9>& m, double l) {
  const std::array<double, 3> r0{m[0] - l, m[1], m[2]};
  const std::array<double, 3> r1{m[3], m[4] - l, m[5]};
  const std::array<double, 3> r2{m[6], m[7], m[8] - l};
  std::array<std::array<double, 3>, 3> cand{cross(r0, r1), cross(r0, r2), cross(r1, r2)};
  int best = 0;
  double bn = norm3(cand[0]);
  for (int i = 1; i < 3; ++i) {
    const double n = norm3(cand[i]);
    if (n > bn) {
      bn = n;
      best = i;
    }
  }
  auto v = cand[best];
  if (bn > 0) normalize3(v);
  return v;
}

// Deterministic completion of a unit vector to an orthonormal pair: pivot on
// the coordinate axis least aligned with v (smallest index wins ties).
std::array<double, 3> orth_complement(const std::array<double, 3>& v) {
  int k = 0;
  double best = std::fabs(v[0]);
  for (int i = 1; i < 3; ++i)
    if (std::fabs(v[i]) < best) {
      best = std::fabs(v[i]);
      k = i;
    }
  std::array<double, 3> w{0, 0, 0};
  w[k] = 1.0;
  const double d = w[0] * v[0] + w[1] * v[1] + w[2] * v[2];
  for (int i = 0; i < 3; ++i) w[i] -= d * v[i];
  normalize3(w);
  return w;
}

double det3x3(const std::array<double, 9>& m) {
  return m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6]) +
         m[2] * (m[3] * m[7] - m[4] * m[6]);
}

}  // namespace

template <>
Sym0<2> trace_free<2>(const std::array<double, 4>& a) {
  const double tr = (a[0] + a[3]) / 2.0;
  return Sym0<2>{{a[0] - tr, (a[1] + a[2]) / 2.0}};
}

template <>
Sym0<3> trace_free<3>(const std::array<double, 9>& a) {
  const double tr = (a[0] + a[4] + a[8]) / 3.0;
  return Sym0<3>{{a[0] - tr, a[4] - tr, (a[1] + a[3]) / 2.0, (a[2] + a[6]) / 2.0,
                  (a[5] + a[7]) / 2.0}};
}

template <>
Spectrum<2> spectrum<2>(const Sym0<2>& q) {
  const double a = q[0], b = q[1];
  const double s = std::hypot(a, b);
  Spectrum<2> out;
  out.lambda = {-s, s};
  if (s < 1e-300) {
    out.frame = {1, 0, 0, 1};
    return out;
  }
  // eigenvector for +s of [[a,b],[b,-a]], stable branch selection
  double vx, vy;
  if (a >= 0) {
    vx = s + a;
    vy = b;
  } else {
    vx = b;
    vy = s - a;
  }
  const double n = std::hypot(vx, vy);
  vx /= n;
  vy /= n;
  // columns: (-s)-vector then (+s)-vector, det +1
  out.frame = {vy, vx, -vx, vy};
  return out;
}

template <>
Spectrum<3> spectrum<3>(const Sym0<3>& q) {
  Spectrum<3> out;
  const double nrm = fnorm(q);
  if (nrm < 1e-300) {
    out.lambda = {0, 0, 0};
    out.frame = {1, 0, 0, 0, 1, 0, 0, 0, 1};
    return out;
  }
  const auto m = q.full();
  // trace-free: char poly t^3 - (|Q|^2/2) t - det = 0, trig solution
  const double p = std::sqrt(nrm * nrm / 6.0);
  const double r = det3x3(m) / (2.0 * p * p * p);
  const double phi = std::acos(std::clamp(r, -1.0, 1.0)) / 3.0;
  const double lmax = 2.0 * p * std::cos(phi);
  const double lmin = 2.0 * p * std::cos(phi + 2.0 * kPi / 3.0);
  out.lambda = {lmin, -lmin - lmax, lmax};

  const double gap_lo = out.lambda[1] - out.lambda[0];
  const double gap_hi = out.lambda[2] - out.lambda[1];
  const double degtol = 1e-7 * nrm;

  std::array<std::array<double, 3>, 3> v;
  if (gap_lo < degtol && gap_hi < degtol) {
    out.frame = {1, 0, 0, 0, 1, 0, 0, 0, 1};
    return out;
  }
  if (gap_lo < degtol || gap_hi < degtol) {
    // one isolated eigenvalue, one (near-)degenerate pair
    const int iso = (gap_lo < degtol) ? 2 : 0;
    v[iso] = eigvec_cross(m, out.lambda[iso]);
    const int d0 = (iso == 2) ? 0 : 1;
    const int d1 = (iso == 2) ? 1 : 2;
    v[d0] = orth_complement(v[iso]);
    v[d1] = cross(v[iso], v[d0]);
  } else {
    v[0] = eigvec_cross(m, out.lambda[0]);
    v[2] = eigvec_cross(m, out.lambda[2]);
    // Gram-Schmidt guard, then middle vector from the cross product
    double d = v[2][0] * v[0][0] + v[2][1] * v[0][1] + v[2][2] * v[0][2];
    for (int i = 0; i < 3; ++i) v[2][i] -= d * v[0][i];
    normalize3(v[2]);
    v[1] = cross(v[2], v[0]);
  }
  for (int col = 0; col < 3; ++col)
    for (int row = 0; row < 3; ++row) out.frame[3 * row + col] = v[col][row];
  // columns built as a right-handed set; enforce det +1 against rounding
  if (det3x3(out.frame) < 0)
    for (int row = 0; row < 3; ++row) out.frame[3 * row + 1] = -out.frame[3 * row + 1];
  return out;
}

template <int D>
Sym0<D> compose(const std::array<double, D * D>& u, const std::array<double, D>& g) {
  std::array<double, D * D> m{};
  for (int i = 0; i < D; ++i)
    for (int j = 0; j < D; ++j) {
      double s = 0;
      for (int k = 0; k < D; ++k) s += g[k] * u[D * i + k] * u[D * j + k];
      m[D * i + j] = s;
    }
  return trace_free<D>(m);
}

template <int D>
Sym0<D> rotate(const Sym0<D>& q, const std::array<double, D * D>& r) {
  const auto m = q.full();
  std::array<double, D * D> rm{}, rmrt{};
  for (int i = 0; i < D; ++i)
    for (int j = 0; j < D; ++j) {
      double s = 0;
      for (int k = 0; k < D; ++k) s += r[D * i + k] * m[D * k + j];
      rm[D * i + j] = s;
    }
  for (int i = 0; i < D; ++i)
    for (int j = 0; j < D; ++j) {
      double s = 0;
      for (int k = 0; k < D; ++k) s += rm[D * i + k] * r[D * j + k];
      rmrt[D * i + j] = s;
    }
  return trace_free<D>(rmrt);
}

template Sym0<2> compose<2>(const std::array<double, 4>&, const std::array<double, 2>&);
template Sym0<3> compose<3>(const std::array<double, 9>&, const std::array<double, 3>&);
template Sym0<2> rotate<2>(const Sym0<2>&, const std::array<double, 4>&);
template Sym0<3> rotate<3>(const Sym0<3>&, const std::array<double, 9>&);

}  // namespace nmq
