#include "nmq/scenarios.hpp"

#include <cmath>
#include <random>

#include "nmq/errors.hpp"

namespace nmq {

namespace {

// white noise -> truncate to |j| <= jmax -> inverse; deterministic in seed
RealField band_limited_noise(const Transformer& tr, unsigned long long seed, int jmax,
                             int channels) {
  const Grid& g = tr.grid();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n01(0.0, 1.0);
  RealField white(g, channels);
  for (auto& x : white.v) x = n01(rng);
  SpecField wh;
  tr.forward(white, wh);
  int j[3];
  for (std::size_t i = 0; i < g.nspec(); ++i) {
    g.decode(i, j);
    bool kill = false;
    for (int a = 0; a < g.dim(); ++a)
      if (std::abs(j[a]) > jmax) kill = true;
    if (j[0] == 0 && j[1] == 0 && j[2] == 0) kill = true;  // zero mean
    if (kill)
      for (int c = 0; c < channels; ++c) wh.ch(c)[i] = 0.0;
  }
  RealField out;
  tr.inverse(wh, out);
  return out;
}

double sup_abs_field(const RealField& f) {
  double m = 0;
  for (const double x : f.v) m = std::max(m, std::fabs(x));
  return m;
}

template <int D>
double field_min_margin(const RealField& q) {
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < q.grid->npoints(); ++i) {
    Sym0<D> x;
    for (int c = 0; c < Sym0<D>::NC; ++c) x[c] = q.ch(c)[i];
    m = std::min(m, physicality_margin(x));
  }
  return m;
}

}  // namespace

RealField random_velocity(const Transformer& tr, unsigned long long seed, int jmax,
                          double amplitude) {
  const Grid& g = tr.grid();
  RealField u = band_limited_noise(tr, seed, jmax, g.dim());
  SpecField uh;
  tr.forward(u, uh);
  leray_project(uh);
  tr.inverse(uh, u);
  const double sup = sup_abs_field(u);
  if (sup > 0)
    for (auto& x : u.v) x *= amplitude / sup;
  return u;
}

RealField random_q_field(const Transformer& tr, unsigned long long seed, int jmax,
                         double target_margin) {
  const Grid& g = tr.grid();
  const int d = g.dim();
  const int nc = d * (d + 1) / 2 - 1;
  if (!(target_margin > 0) || !(target_margin < 1.0 / d))
    throw ValidationError("target margin must lie in (0, 1/d)");
  RealField q = band_limited_noise(tr, seed, jmax, nc);
  // margin(alpha q) decreases monotonically in alpha (eigenvalues scale);
  // bisect the scale to hit the target
  auto margin_at = [&](double alpha) {
    RealField s = q;
    for (auto& x : s.v) x *= alpha;
    return (d == 2) ? field_min_margin<2>(s) : field_min_margin<3>(s);
  };
  const double m1 = margin_at(1.0);
  double lo = 0, hi = 1.0;
  while (margin_at(hi) > target_margin) hi *= 2;
  (void)m1;
  for (int it = 0; it < 100; ++it) {
    const double mid = 0.5 * (lo + hi);
    (margin_at(mid) > target_margin ? lo : hi) = mid;
  }
  const double alpha = 0.5 * (lo + hi);
  for (auto& x : q.v) x *= alpha;
  return q;
}

RealField taylor_green(const Grid& g, double amplitude) {
  if (g.dim() != 2) throw ValidationError("taylor_green is a 2-D scenario");
  RealField u(g, 2);
  const double k = 2.0 / g.lambda();
  const int n = g.n();
  for (int i = 0; i < n; ++i) {
    const double x = -g.boxlen() / 2 + i * g.dx();
    for (int jj = 0; jj < n; ++jj) {
      const double y = -g.boxlen() / 2 + jj * g.dx();
      const std::size_t idx = static_cast<std::size_t>(i) * n + jj;
      u.ch(0)[idx] = amplitude * std::sin(k * x) * std::cos(k * y);
      u.ch(1)[idx] = -amplitude * std::cos(k * x) * std::sin(k * y);
    }
  }
  return u;
}

double taylor_green_decay_rate(const Grid& g, double nu) {
  const double k = 2.0 / g.lambda();
  return 2.0 * nu * k * k;
}

template <int D>
RealField homogeneous_q(const Grid& g, const Sym0<D>& q0) {
  RealField q(g, Sym0<D>::NC);
  for (int c = 0; c < Sym0<D>::NC; ++c)
    std::fill_n(q.ch(c), g.npoints(), q0[c]);
  return q;
}

template RealField homogeneous_q<2>(const Grid&, const Sym0<2>&);
template RealField homogeneous_q<3>(const Grid&, const Sym0<3>&);

GenericData generic_2d_data(const Transformer& tr, unsigned long long seed,
                            double q_margin, double u_amp, int jmax) {
  GenericData d;
  d.q0 = random_q_field(tr, seed, jmax, q_margin);
  d.u0 = random_velocity(tr, seed + 0x9e3779b97f4a7c15ull, jmax, u_amp);
  return d;
}

}  // namespace nmq
