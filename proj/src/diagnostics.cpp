#include "nmq/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nmq/errors.hpp"

namespace nmq {

namespace {

inline double spec_weight(const Grid& g, std::size_t idx) {
  const int nh = g.n() / 2 + 1;
  const int jlast = static_cast<int>(idx % nh);
  return (jlast == 0 || jlast == g.n() / 2) ? 1.0 : 2.0;
}

// sum over modes of w(idx) * kpow(k^2) * |Q(idx)|_F^2 using the component
// metric: d=2 |Q|^2 = 2(c0^2+c1^2); d=3 adds the q33 = -(c0+c1) diagonal term
template <typename KPow>
double sym0_weighted(const SpecField& qh, KPow kpow) {
  const Grid& g = *qh.grid;
  double s = 0;
  int j[3];
  if (qh.channels == 2) {
    const auto *c0 = qh.ch(0), *c1 = qh.ch(1);
    for (std::size_t i = 0; i < g.nspec(); ++i) {
      g.decode(i, j);
      double k2 = 0;
      for (int a = 0; a < 2; ++a) k2 += g.kwave(j[a]) * g.kwave(j[a]);
      s += spec_weight(g, i) * kpow(k2) * 2.0 * (std::norm(c0[i]) + std::norm(c1[i]));
    }
  } else {
    const auto *c0 = qh.ch(0), *c1 = qh.ch(1), *c2 = qh.ch(2), *c3 = qh.ch(3),
               *c4 = qh.ch(4);
    for (std::size_t i = 0; i < g.nspec(); ++i) {
      g.decode(i, j);
      double k2 = 0;
      for (int a = 0; a < 3; ++a) k2 += g.kwave(j[a]) * g.kwave(j[a]);
      const double m = std::norm(c0[i]) + std::norm(c1[i]) + std::norm(c0[i] + c1[i]) +
                       2.0 * (std::norm(c2[i]) + std::norm(c3[i]) + std::norm(c4[i]));
      s += spec_weight(g, i) * kpow(k2) * m;
    }
  }
  return s * g.volume();
}

}  // namespace

double sym0_l2norm2(const SpecField& qh) {
  return sym0_weighted(qh, [](double) { return 1.0; });
}
double sym0_h1norm2(const SpecField& qh) {
  return sym0_weighted(qh, [](double k2) { return k2; });
}
double sym0_lap_norm2(const SpecField& qh) {
  return sym0_weighted(qh, [](double k2) { return k2 * k2; });
}

double velocity_h1norm2(const SpecField& uh) {
  const Grid& g = *uh.grid;
  double s = 0;
  int j[3];
  for (std::size_t i = 0; i < g.nspec(); ++i) {
    g.decode(i, j);
    double k2 = 0;
    for (int a = 0; a < g.dim(); ++a) k2 += g.kwave(j[a]) * g.kwave(j[a]);
    double m = 0;
    for (int c = 0; c < uh.channels; ++c) m += std::norm(uh.ch(c)[i]);
    s += spec_weight(g, i) * k2 * m;
  }
  return s * g.volume();
}

namespace {

template <int D>
double field_metric_norm2(const Grid& g, const RealField& f) {
  // real-space midpoint quadrature of the pointwise Frobenius norm; equals
  // the Parseval sum of the grid interpolant
  const double w = g.volume() / static_cast<double>(g.npoints());
  double s = 0;
  for (std::size_t i = 0; i < g.npoints(); ++i) {
    Sym0<D> x;
    for (int c = 0; c < Sym0<D>::NC; ++c) x[c] = f.ch(c)[i];
    s += fdot(x, x);
  }
  return s * w;
}

}  // namespace

template <int D>
double energy_E(const Stepper<D>& st, const State<D>& s) {
  const auto fa = st.assemble(s, true);
  const SimConfig& c = st.config();
  const double psi_int = integral(fa.pot_val, 0);
  return 0.5 * c.L * sym0_h1norm2(s.qhat) + c.theta * psi_int -
         0.5 * c.kappa * sym0_l2norm2(s.qhat) + 0.5 * l2norm2(s.uhat);
}

template <int D>
double energy_F(const Stepper<D>& st, const State<D>& s) {
  return 0.5 * velocity_h1norm2(s.uhat) + 0.5 * st.config().L * sym0_lap_norm2(s.qhat);
}

template <int D>
double convexity_integral(const Grid& g, const FieldAssembly<D>& fa) {
  const double w = g.volume() / static_cast<double>(g.npoints());
  double s = 0;
  for (std::size_t i = 0; i < g.npoints(); ++i) {
    Sym0<D> lap, pg;
    for (int c = 0; c < Sym0<D>::NC; ++c) {
      lap[c] = fa.lapq.ch(c)[i];
      pg[c] = fa.pot_grad.ch(c)[i];
    }
    s += fdot(lap, pg);
  }
  return s * w;
}

template <int D>
EnergyRecord make_energy_record(const Stepper<D>& st, const State<D>& s) {
  const SimConfig& c = st.config();
  const Grid& g = st.grid();
  const auto fa = st.assemble(s, true);

  EnergyRecord r;
  r.t = s.t;
  const double psi_int = integral(fa.pot_val, 0);
  r.gradq_l2 = std::sqrt(sym0_h1norm2(s.qhat));
  r.q_l2 = std::sqrt(sym0_l2norm2(s.qhat));
  r.u_l2 = std::sqrt(l2norm2(s.uhat));
  r.gradu_l2sq = velocity_h1norm2(s.uhat);
  r.lapq_l2sq = sym0_lap_norm2(s.qhat);
  r.E = 0.5 * c.L * r.gradq_l2 * r.gradq_l2 + c.theta * psi_int -
        0.5 * c.kappa * r.q_l2 * r.q_l2 + 0.5 * r.u_l2 * r.u_l2;
  r.F = 0.5 * r.gradu_l2sq + 0.5 * c.L * r.lapq_l2sq;

  const double h_l2sq = field_metric_norm2<D>(g, fa.h);
  r.dissipation = c.gamma * h_l2sq + c.nu * r.gradu_l2sq;
  r.potgrad_l2sq = field_metric_norm2<D>(g, fa.pot_grad);
  r.convexity_integral = convexity_integral<D>(g, fa);

  r.lambda_min = std::numeric_limits<double>::infinity();
  r.lambda_max = -std::numeric_limits<double>::infinity();
  r.margin = std::numeric_limits<double>::infinity();
  r.psi_sup = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < g.npoints(); ++i) {
    Sym0<D> q;
    for (int cc = 0; cc < Sym0<D>::NC; ++cc) q[cc] = fa.q.ch(cc)[i];
    const auto sp = spectrum(q);
    r.lambda_min = std::min(r.lambda_min, sp.lambda[0]);
    r.lambda_max = std::max(r.lambda_max, sp.lambda[D - 1]);
    r.margin = std::min(r.margin, margin_of<D>(sp.lambda));
    r.psi_sup = std::max(r.psi_sup, fa.pot_val.ch(0)[i]);
  }
  return r;
}

std::vector<double> dissipation_residual(const std::vector<EnergyRecord>& recs) {
  if (recs.size() < 3)
    throw InsufficientRecords("dissipation residual needs >= 3 records, got " +
                              std::to_string(recs.size()));
  const double dt0 = recs[1].t - recs[0].t;
  for (std::size_t k = 1; k + 1 < recs.size(); ++k) {
    const double dt = recs[k + 1].t - recs[k].t;
    if (std::fabs(dt - dt0) > 1e-9 * std::max(1.0, dt0))
      throw InsufficientRecords("records are not uniformly spaced");
  }
  std::vector<double> out;
  out.reserve(recs.size() - 2);
  for (std::size_t k = 1; k + 1 < recs.size(); ++k) {
    const double dEdt = (recs[k + 1].E - recs[k - 1].E) / (2.0 * dt0);
    out.push_back(std::fabs(dEdt + recs[k].dissipation) /
                  std::max(1.0, recs[k].dissipation));
  }
  return out;
}

GronwallFit gronwall_fit(const std::vector<EnergyRecord>& recs) {
  if (recs.size() < 2) throw InsufficientRecords("gronwall fit needs >= 2 records");
  struct Iv {
    double s, f2;
  };
  std::vector<Iv> iv;
  for (std::size_t k = 0; k + 1 < recs.size(); ++k) {
    const double dt = recs[k + 1].t - recs[k].t;
    const double fmid = 0.5 * (recs[k].F + recs[k + 1].F);
    iv.push_back({(recs[k + 1].F - recs[k].F) / dt, fmid * fmid});
  }
  auto c1_needed = [&](double c0) {
    double c1 = 0;
    for (const auto& v : iv) c1 = std::max(c1, v.s - c0 * v.f2);
    return c1;
  };
  // minimize C0 + C1 over the feasible polygon: candidate vertices are C0 = 0,
  // pairwise constraint intersections, and the all-C0 corner
  std::vector<double> cand{0.0};
  for (std::size_t i = 0; i < iv.size(); ++i)
    for (std::size_t j = i + 1; j < iv.size(); ++j) {
      const double df = iv[i].f2 - iv[j].f2;
      if (std::fabs(df) < 1e-300) continue;
      const double c0 = (iv[i].s - iv[j].s) / df;
      if (c0 > 0 && std::isfinite(c0)) cand.push_back(c0);
    }
  double maxratio = 0;
  for (const auto& v : iv)
    if (v.f2 > 1e-300) maxratio = std::max(maxratio, v.s / v.f2);
  if (maxratio > 0) cand.push_back(maxratio);

  GronwallFit best;
  double bestsum = std::numeric_limits<double>::infinity();
  for (const double c0 : cand) {
    const double c1 = c1_needed(c0);
    if (c0 + c1 < bestsum) {
      bestsum = c0 + c1;
      best.C0 = c0;
      best.C1 = c1;
    }
  }
  best.worst_slack = -std::numeric_limits<double>::infinity();
  for (const auto& v : iv)
    best.worst_slack = std::max(best.worst_slack, v.s - best.C0 * v.f2 - best.C1);
  return best;
}

PhysicalityReport strict_physicality_report(const std::vector<EnergyRecord>& recs,
                                            double T, double t_burn_frac,
                                            double delta_floor) {
  if (recs.empty()) throw InsufficientRecords("no records");
  PhysicalityReport rep;
  rep.t_burn = t_burn_frac * T;
  rep.min_margin = std::numeric_limits<double>::infinity();
  rep.min_margin_burn = std::numeric_limits<double>::infinity();
  rep.max_psi = -std::numeric_limits<double>::infinity();
  for (const auto& r : recs) {
    if (r.margin <= 0)
      throw PhysicalityViolated("margin " + std::to_string(r.margin) + " at t = " +
                                std::to_string(r.t));
    rep.min_margin = std::min(rep.min_margin, r.margin);
    if (r.t >= rep.t_burn) rep.min_margin_burn = std::min(rep.min_margin_burn, r.margin);
    rep.max_psi = std::max(rep.max_psi, r.psi_sup);
  }
  rep.ok = rep.min_margin_burn >= delta_floor;
  return rep;
}

double CancellationReport::pair_rel(int j) const {
  const double denom = std::max({std::fabs(tp[j]), std::fabs(tm[j]), 1e-30});
  return std::fabs(tp[j] + tm[j]) / std::max(denom, 1e-12 * scale);
}

double CancellationReport::null_rel() const {
  return std::max(std::fabs(iterm), std::fabs(jterm)) / std::max(1.0, scale);
}

template <int D>
CancellationReport cancellation_check(const Stepper<D>& st, const State<D>& s) {
  constexpr int NC = Sym0<D>::NC;
  const Grid& g = st.grid();
  const SimConfig& c = st.config();
  const auto fa = st.assemble(s, false);
  const double w = g.volume() / static_cast<double>(g.npoints());
  const double xi = c.xi, L = c.L;

  CancellationReport rep;
  for (std::size_t i = 0; i < g.npoints(); ++i) {
    Sym0<D> q, lap, pg;
    for (int cc = 0; cc < NC; ++cc) {
      q[cc] = fa.q.ch(cc)[i];
      lap[cc] = fa.lapq.ch(cc)[i];
      pg[cc] = fa.pot_grad.ch(cc)[i];
    }
    std::array<Sym0<D>, D> gq;
    for (int a = 0; a < D; ++a)
      for (int cc = 0; cc < NC; ++cc) gq[a][cc] = fa.gradq.ch(a * NC + cc)[i];
    std::array<double, D * D> gu;  // (grad u)_{ab} = du_a/dx_b
    for (int a = 0; a < D; ++a)
      for (int b = 0; b < D; ++b) gu[D * a + b] = fa.gradu.ch(b * D + a)[i];

    // X = theta<dpsi> - kappa Q
    Sym0<D> x;
    for (int cc = 0; cc < NC; ++cc) x[cc] = c.theta * pg[cc] - c.kappa * q[cc];

    const auto qf = q.full();
    const auto lapf = lap.full();
    const auto xf = x.full();
    auto a_ = qf;
    for (int k = 0; k < D; ++k) a_[D * k + k] += 1.0 / D;

    std::array<double, D * D> w0{}, d1{};
    for (int a = 0; a < D; ++a)
      for (int b = 0; b < D; ++b) {
        w0[D * a + b] = 0.5 * (gu[D * a + b] - gu[D * b + a]);
        d1[D * a + b] = 0.5 * (gu[D * a + b] + gu[D * b + a]);
      }

    auto dot = [](const std::array<double, D * D>& m1, const std::array<double, D * D>& m2) {
      double r = 0;
      for (int k = 0; k < D * D; ++k) r += m1[k] * m2[k];
      return r;
    };
    auto comm = [](const std::array<double, D * D>& m1, const std::array<double, D * D>& m2) {
      std::array<double, D * D> r{};
      for (int a = 0; a < D; ++a)
        for (int b = 0; b < D; ++b) {
          double s1 = 0, s2 = 0;
          for (int k = 0; k < D; ++k) {
            s1 += m1[D * a + k] * m2[D * k + b];
            s2 += m2[D * a + k] * m1[D * k + b];
          }
          r[D * a + b] = s1 - s2;
        }
      return r;
    };
    auto acomm = [](const std::array<double, D * D>& m1, const std::array<double, D * D>& m2) {
      std::array<double, D * D> r{};
      for (int a = 0; a < D; ++a)
        for (int b = 0; b < D; ++b) {
          double s1 = 0;
          for (int k = 0; k < D; ++k)
            s1 += m1[D * a + k] * m2[D * k + b] + m2[D * a + k] * m1[D * k + b];
          r[D * a + b] = s1;
        }
      return r;
    };

    // (u.grad)Q and advective contraction with lap Q
    double ugradq_lap = 0;
    for (int a = 0; a < D; ++a) {
      Sym0<D> t;
      for (int cc = 0; cc < NC; ++cc) t[cc] = fa.u.ch(a)[i] * gq[a][cc];
      ugradq_lap += fdot(t, lap);
    }
    const auto w0q = comm(w0, qf);       // w0 Q - Q w0
    const auto w1a = acomm(d1, a_);      // w1 A + A w1
    const auto qlap = comm(qf, lapf);    // Q lapQ - lapQ Q
    const auto alap = acomm(a_, lapf);   // A lapQ + lapQ A
    const auto ax = acomm(a_, xf);       // A X + X A
    const auto qx = comm(qf, xf);        // Q X - X Q
    double trqgu = 0;
    for (int a = 0; a < D; ++a)
      for (int b = 0; b < D; ++b) trqgu += qf[D * a + b] * gu[D * b + a];
    const double trqlap = fdot(q, lap);
    const double trqx = fdot(q, x);
    // tr[d_i Q d_k Q] d_k u_i
    double t1m = 0;
    for (int a = 0; a < D; ++a)
      for (int b = 0; b < D; ++b) t1m += fdot(gq[b], gq[a]) * gu[D * a + b];
    auto af_minus = qf;
    for (int k = 0; k < D; ++k) af_minus[D * k + k] -= 1.0 / D;

    rep.tp[0] += w * (L * ugradq_lap);
    rep.tp[1] += w * (-L * dot(w0q, lapf));
    rep.tp[2] += w * (-L * xi * dot(w1a, lapf));
    rep.tp[3] += w * (2.0 * L * xi * trqgu * dot(a_, lapf));
    rep.tp[4] += w * (xi * dot(w1a, xf));
    rep.tp[5] += w * (-2.0 * xi * dot(a_, xf) * trqgu);
    rep.iterm += w * dot(w0q, xf);

    rep.tm[0] += w * (L * t1m);
    rep.tm[1] += w * (-L * dot(qlap, gu));
    rep.tm[2] += w * (L * xi * dot(alap, gu));
    rep.tm[3] += w * (-2.0 * L * xi * trqlap * dot(af_minus, gu));
    rep.tm[4] += w * (-xi * dot(ax, gu));
    rep.tm[5] += w * (2.0 * xi * trqx * dot(a_, gu));
    rep.jterm += w * (L * dot(qx, gu));
  }
  for (int j = 0; j < 6; ++j)
    rep.scale = std::max({rep.scale, std::fabs(rep.tp[j]), std::fabs(rep.tm[j])});
  return rep;
}

template double energy_E<2>(const Stepper<2>&, const State<2>&);
template double energy_E<3>(const Stepper<3>&, const State<3>&);
template double energy_F<2>(const Stepper<2>&, const State<2>&);
template double energy_F<3>(const Stepper<3>&, const State<3>&);
template double convexity_integral<2>(const Grid&, const FieldAssembly<2>&);
template double convexity_integral<3>(const Grid&, const FieldAssembly<3>&);
template EnergyRecord make_energy_record<2>(const Stepper<2>&, const State<2>&);
template EnergyRecord make_energy_record<3>(const Stepper<3>&, const State<3>&);
template CancellationReport cancellation_check<2>(const Stepper<2>&, const State<2>&);
template CancellationReport cancellation_check<3>(const Stepper<3>&, const State<3>&);

}  // namespace nmq
