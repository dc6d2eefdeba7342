#include "oracles.hpp"

#include <algorithm>
#include <stdexcept>

namespace oracles {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

template <std::size_t K>
std::array<double, K> rk45(const std::function<std::array<double, K>(const std::array<double, K>&)>& f,
                           std::array<double, K> y, double T, double rtol, double atol) {
  // Dormand-Prince coefficients
  static const double c[7] = {0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
  static const double a[7][6] = {
      {},
      {1.0 / 5},
      {3.0 / 40, 9.0 / 40},
      {44.0 / 45, -56.0 / 15, 32.0 / 9},
      {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
      {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
      {35.0 / 384, 0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84}};
  static const double b5[7] = {35.0 / 384,     0, 500.0 / 1113, 125.0 / 192,
                               -2187.0 / 6784, 11.0 / 84, 0};
  static const double b4[7] = {5179.0 / 57600,  0,           7571.0 / 16695, 393.0 / 640,
                               -92097.0 / 339200, 187.0 / 2100, 1.0 / 40};
  (void)c;

  double t = 0, h = T / 100;
  int guard = 0;
  while (t < T) {
    if (++guard > 2000000) throw std::runtime_error("rk45: too many steps");
    h = std::min(h, T - t);
    std::array<std::array<double, K>, 7> k;
    k[0] = f(y);
    for (int s = 1; s < 7; ++s) {
      std::array<double, K> ys = y;
      for (int q = 0; q < s; ++q)
        for (std::size_t i = 0; i < K; ++i) ys[i] += h * a[s][q] * k[q][i];
      k[s] = f(ys);
    }
    std::array<double, K> y5 = y, y4 = y;
    for (int s = 0; s < 7; ++s)
      for (std::size_t i = 0; i < K; ++i) {
        y5[i] += h * b5[s] * k[s][i];
        y4[i] += h * b4[s] * k[s][i];
      }
    double err = 0;
    for (std::size_t i = 0; i < K; ++i) {
      const double sc = atol + rtol * std::max(std::fabs(y[i]), std::fabs(y5[i]));
      err = std::max(err, std::fabs(y5[i] - y4[i]) / sc);
    }
    if (err <= 1.0) {
      t += h;
      y = y5;
    }
    const double fac = std::clamp(0.9 * std::pow(err > 0 ? err : 1e-10, -0.2), 0.2, 5.0);
    h *= fac;
  }
  return y;
}

template std::array<double, 2> rk45<2>(
    const std::function<std::array<double, 2>(const std::array<double, 2>&)>&,
    std::array<double, 2>, double, double, double);
template std::array<double, 5> rk45<5>(
    const std::function<std::array<double, 5>(const std::array<double, 5>&)>&,
    std::array<double, 5>, double, double, double);

std::array<double, 3> cubic_eigs_bisect(const std::array<double, 9>& m) {
  auto det = [&](double t) {
    const double a = m[0] - t, b = m[1], c = m[2];
    const double d = m[4] - t, e = m[5];
    const double f = m[8] - t;
    return a * (d * f - e * e) - b * (b * f - e * c) + c * (b * e - d * c);
  };
  double scale = 0;
  for (const double x : m) scale = std::max(scale, std::fabs(x));
  const double R = 2.0 * scale + 1e-12;
  const int ngrid = 200000;
  std::vector<double> roots;
  double prev = det(-R);
  double tprev = -R;
  for (int i = 1; i <= ngrid; ++i) {
    const double t = -R + 2.0 * R * i / ngrid;
    const double d = det(t);
    if ((prev <= 0 && d > 0) || (prev >= 0 && d < 0)) {
      double lo = tprev, hi = t;
      for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if ((det(lo) <= 0) == (det(mid) <= 0))
          lo = mid;
        else
          hi = mid;
      }
      roots.push_back(0.5 * (lo + hi));
    }
    prev = d;
    tprev = t;
  }
  if (roots.size() != 3) throw std::runtime_error("cubic_eigs_bisect: expected 3 roots");
  std::sort(roots.begin(), roots.end());
  return {roots[0], roots[1], roots[2]};
}

void circle_partition_reference(double mu1, double mu2, double& logZ, double& m1,
                                int nodes) {
  double z = 0, s1 = 0;
  for (int k = 0; k < nodes; ++k) {
    const double th = 2.0 * kPi * k / nodes;
    const double c = std::cos(th), s = std::sin(th);
    const double e = std::exp(mu1 * c * c + mu2 * s * s);
    z += e;
    s1 += c * c * e;
  }
  const double w = 2.0 * kPi / nodes;
  logZ = std::log(z * w);
  m1 = s1 / z;
}

void sphere_partition_reference(const std::array<double, 3>& mu, double& logZ,
                                std::array<double, 3>& m, int ntheta, int nphi) {
  // Gauss-Legendre in cos(theta) by Newton (local copy, independent of the
  // library's generator)
  std::vector<double> x(ntheta), w(ntheta);
  for (int i = 0; i < (ntheta + 1) / 2; ++i) {
    double z = std::cos(kPi * (i + 0.75) / (ntheta + 0.5));
    double pp = 0;
    for (int it = 0; it < 200; ++it) {
      double p0 = 1, p1 = 0;
      for (int j = 0; j < ntheta; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1) * z * p1 - j * p2) / (j + 1);
      }
      pp = ntheta * (z * p0 - p1) / (z * z - 1);
      const double dz = p0 / pp;
      z -= dz;
      if (std::fabs(dz) < 1e-16) break;
    }
    x[i] = -z;
    x[ntheta - 1 - i] = z;
    w[i] = w[ntheta - 1 - i] = 2.0 / ((1 - z * z) * pp * pp);
  }
  double z = 0, s[3] = {0, 0, 0};
  for (int i = 0; i < ntheta; ++i) {
    const double ct = x[i], st2 = 1 - ct * ct;
    for (int j = 0; j < nphi; ++j) {
      const double phi = 2.0 * kPi * j / nphi;
      const double o1 = st2 * std::cos(phi) * std::cos(phi);
      const double o2 = st2 * std::sin(phi) * std::sin(phi);
      const double o3 = ct * ct;
      const double e = w[i] * std::exp(mu[0] * o1 + mu[1] * o2 + mu[2] * o3);
      z += e;
      s[0] += o1 * e;
      s[1] += o2 * e;
      s[2] += o3 * e;
    }
  }
  const double wphi = 2.0 * kPi / nphi;
  logZ = std::log(z * wphi);
  for (int i = 0; i < 3; ++i) m[i] = s[i] / z;
}

double prox_value_grid_search(const std::array<double, 3>& lambda, double J,
                              const std::function<double(const std::array<double, 3>&)>& psi,
                              int coarse, int refine_rounds) {
  // search over (a1, a2) with a3 = -a1-a2 inside the open triangle
  double c1 = 0, c2 = 0, half = 1.0;  // center and half-width of the window
  double best = 1e300;
  for (int round = 0; round <= refine_rounds; ++round) {
    double b1 = c1, b2 = c2;
    for (int i = 0; i <= coarse; ++i)
      for (int j = 0; j <= coarse; ++j) {
        const double a1 = c1 - half + 2.0 * half * i / coarse;
        const double a2 = c2 - half + 2.0 * half * j / coarse;
        const double a3 = -a1 - a2;
        const double lo = -1.0 / 3 + 1e-9, hi = 2.0 / 3 - 1e-9;
        if (a1 < lo || a2 < lo || a3 < lo || a1 > hi || a2 > hi || a3 > hi) continue;
        const double v = J * ((a1 - lambda[0]) * (a1 - lambda[0]) +
                              (a2 - lambda[1]) * (a2 - lambda[1]) +
                              (a3 - lambda[2]) * (a3 - lambda[2])) +
                         psi({a1, a2, a3});
        if (v < best) {
          best = v;
          b1 = a1;
          b2 = a2;
        }
      }
    c1 = b1;
    c2 = b2;
    half *= 2.5 / coarse;
  }
  return best;
}

std::vector<double> fd8_derivative(const std::vector<double>& f, double dx) {
  static const double c[4] = {4.0 / 5, -1.0 / 5, 4.0 / 105, -1.0 / 280};
  const int n = static_cast<int>(f.size());
  std::vector<double> out(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double s = 0;
    for (int k = 1; k <= 4; ++k)
      s += c[k - 1] * (f[(i + k) % n] - f[(i - k + 8 * n) % n]);
    out[i] = s / dx;
  }
  return out;
}

double uniform_entropy_reference(int dim, int nodes) {
  // rho = 1/|S^{d-1}|; entropy = int rho log rho = -log|S^{d-1}|
  if (dim == 2) {
    double area = 0;
    for (int k = 0; k < nodes; ++k) area += 2.0 * kPi / nodes;
    const double rho = 1.0 / area;
    return area * rho * std::log(rho);
  }
  // d=3: area by the same product rule family
  double area = 0;
  const int nt = 128, np = 256;
  std::vector<double> x(nt), w(nt);
  for (int i = 0; i < (nt + 1) / 2; ++i) {
    double z = std::cos(kPi * (i + 0.75) / (nt + 0.5));
    double pp = 0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1, p1 = 0;
      for (int j = 0; j < nt; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1) * z * p1 - j * p2) / (j + 1);
      }
      pp = nt * (z * p0 - p1) / (z * z - 1);
      z -= p0 / pp;
    }
    x[i] = -z;
    x[nt - 1 - i] = z;
    w[i] = w[nt - 1 - i] = 2.0 / ((1 - z * z) * pp * pp);
  }
  for (int i = 0; i < nt; ++i) area += w[i] * 2.0 * kPi / np * np;
  const double rho = 1.0 / area;
  return area * rho * std::log(rho);
}

}  // namespace oracles
