// Acceptance suite: one pass/fail line per criterion, exit 1 on any failure.
// Every tolerance and runtime budget is pinned here.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "nmq/comparison.hpp"
#include "nmq/diagnostics.hpp"
#include "nmq/dynamics.hpp"
#include "nmq/mollified.hpp"
#include "nmq/potential.hpp"
#include "nmq/scenarios.hpp"
#include "nmq/sym0.hpp"
#include "oracles.hpp"

using namespace nmq;
using clk = std::chrono::steady_clock;

namespace {

int g_failures = 0;

struct Criterion {
  const char* label;
  double budget_s;
  clk::time_point start;
  bool ok = true;
  std::string detail;

  Criterion(const char* l, double budget) : label(l), budget_s(budget), start(clk::now()) {}
  void require(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      detail += (detail.empty() ? "" : "; ") + what;
    }
  }
  void note(const std::string& what) { detail += (detail.empty() ? "" : "; ") + what; }
  ~Criterion() {
    const double secs = std::chrono::duration<double>(clk::now() - start).count();
    if (secs > budget_s) {
      ok = false;
      detail += (detail.empty() ? "" : "; ") + std::string("runtime over budget");
    }
    std::printf("[%s] %s (%.1fs/%.0fs)%s%s\n", ok ? "PASS" : "FAIL", label, secs, budget_s,
                detail.empty() ? "" : " -- ", detail.c_str());
    std::fflush(stdout);
    if (!ok) ++g_failures;
  }
};

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", x);
  return buf;
}

std::mt19937_64 rng(20260810);

template <int D>
Sym0<D> random_interior(double min_margin) {
  std::normal_distribution<double> n01(0.0, 1.0);
  for (;;) {
    Sym0<D> q;
    for (int c = 0; c < Sym0<D>::NC; ++c) q[c] = 0.25 * n01(rng);
    if (physicality_margin(q) >= min_margin) return q;
  }
}

template <int D>
Sym0<D> random_any(double scale) {
  std::normal_distribution<double> n01(0.0, 1.0);
  Sym0<D> q;
  for (int c = 0; c < Sym0<D>::NC; ++c) q[c] = scale * n01(rng);
  return q;
}

template <int D>
std::array<double, D * D> random_rotation();
template <>
std::array<double, 4> random_rotation<2>() {
  std::uniform_real_distribution<double> U(0, 6.283185307179586);
  const double a = U(rng);
  return {std::cos(a), -std::sin(a), std::sin(a), std::cos(a)};
}
template <>
std::array<double, 9> random_rotation<3>() {
  std::normal_distribution<double> n01(0.0, 1.0);
  double q[4];
  double nn = 0;
  for (auto& x : q) {
    x = n01(rng);
    nn += x * x;
  }
  nn = std::sqrt(nn);
  for (auto& x : q) x /= nn;
  const double w = q[0], x = q[1], y = q[2], z = q[3];
  return {1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y),
          2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
          2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)};
}

std::vector<EnergyRecord> run_collect(Stepper<2>& st, const State<2>& s0) {
  std::vector<EnergyRecord> recs;
  RunHooks<2> hooks;
  hooks.on_record = [&](const State<2>&, const EnergyRecord& r) { recs.push_back(r); };
  State<2> s = s0;
  run(st, s, hooks);
  return recs;
}

/// spectral prolongation onto a finer grid (shared continuum initial data for
/// the refinement studies)
RealField prolong(const Transformer& coarse, const Transformer& fine, const RealField& f) {
  const Grid& gc = coarse.grid();
  const Grid& gf = fine.grid();
  SpecField fh;
  coarse.forward(f, fh);
  SpecField out(gf, f.channels);
  int j[3];
  const int nhf = gf.n() / 2 + 1;
  for (std::size_t i = 0; i < gc.nspec(); ++i) {
    gc.decode(i, j);
    bool edge = false;
    for (int a = 0; a < gc.dim(); ++a)
      if (std::abs(j[a]) >= gc.n() / 2) edge = true;  // drop ambiguous Nyquist modes
    if (edge) continue;
    std::size_t idx;
    if (gc.dim() == 2) {
      const int i0 = j[0] >= 0 ? j[0] : j[0] + gf.n();
      idx = static_cast<std::size_t>(i0) * nhf + j[1];
    } else {
      const int i0 = j[0] >= 0 ? j[0] : j[0] + gf.n();
      const int i1 = j[1] >= 0 ? j[1] : j[1] + gf.n();
      idx = (static_cast<std::size_t>(i0) * gf.n() + i1) * nhf + j[2];
    }
    for (int c = 0; c < f.channels; ++c) out.ch(c)[idx] = fh.ch(c)[i];
  }
  RealField rf;
  fine.inverse(out, rf);
  return rf;
}

void criterion1() {
  Criterion c("criterion 1: potential correctness (psi(0), grad vs FD)", 30);
  BallMajumdar<2> bm2;
  BallMajumdar<3> bm3;
  const double p2 = bm2.eval(Sym0<2>{}).psi;
  const double p3 = bm3.eval(Sym0<3>{}).psi;
  c.require(std::fabs(p2 + std::log(2 * M_PI)) <= 1e-8, "psi2(0)");
  c.require(std::fabs(p3 + std::log(4 * M_PI)) <= 1e-8, "psi3(0)");
  c.require(std::fabs(p2 - oracles::uniform_entropy_reference(2)) <= 1e-8, "psi2 oracle");
  c.require(std::fabs(p3 - oracles::uniform_entropy_reference(3)) <= 1e-8, "psi3 oracle");
  double worst2 = 0, worst3 = 0;
  for (int k = 0; k < 200; ++k) {
    worst2 = std::max(worst2, bm2.grad_fd_check(random_interior<2>(0.05), 1e-5));
    worst3 = std::max(worst3, bm3.grad_fd_check(random_interior<3>(0.05), 1e-5));
  }
  c.require(worst2 <= 1e-6, "d2 grad fd " + std::to_string(worst2));
  c.require(worst3 <= 1e-6, "d3 grad fd " + std::to_string(worst3));
}

template <int D>
void convexity_isotropy(Criterion& c, int n_psi, int n_psin) {
  auto bm = std::make_shared<BallMajumdar<D>>();
  MollifiedPotential<D> psiN(bm, 16);
  const std::string tag = "d" + std::to_string(D) + " ";
  double cvx = -1e300, iso = 0;
  for (int k = 0; k < n_psi; ++k) {
    const auto q1 = random_interior<D>(0.02);
    const auto q2 = random_interior<D>(0.02);
    const double f1 = bm->eval(q1).psi, f2 = bm->eval(q2).psi;
    const double j1 = bm->moreau_yosida(q1, 16).value;
    const double j2 = bm->moreau_yosida(q2, 16).value;
    for (const double t : {0.25, 0.5, 0.75}) {
      const Sym0<D> qm = t * q1 + (1 - t) * q2;
      if (physicality_margin(qm) > kEpsPhys)
        cvx = std::max(cvx, bm->eval(qm).psi - (t * f1 + (1 - t) * f2));
      cvx = std::max(cvx, bm->moreau_yosida(qm, 16).value - (t * j1 + (1 - t) * j2));
    }
    const auto r = random_rotation<D>();
    iso = std::max(iso, std::fabs(bm->eval(rotate(q1, r)).psi - f1));
    iso = std::max(iso, std::fabs(bm->moreau_yosida(rotate(q1, r), 16).value - j1));
  }
  c.require(cvx <= 1e-9, tag + "psi/psiJ convexity " + std::to_string(cvx));
  c.require(iso <= 1e-9, tag + "psi/psiJ isotropy " + std::to_string(iso));
  cvx = -1e300;
  iso = 0;
  for (int k = 0; k < n_psin; ++k) {
    const auto q1 = random_any<D>(0.45);
    const auto q2 = random_any<D>(0.45);
    const double f1 = psiN.value(q1), f2 = psiN.value(q2);
    for (const double t : {0.25, 0.5, 0.75}) {
      const Sym0<D> qm = t * q1 + (1 - t) * q2;
      cvx = std::max(cvx, psiN.value(qm) - (t * f1 + (1 - t) * f2));
    }
    iso = std::max(iso, std::fabs(psiN.value(rotate(q1, random_rotation<D>())) - f1));
  }
  c.require(cvx <= 1e-9, tag + "psiN convexity " + std::to_string(cvx));
  c.require(iso <= 1e-9, tag + "psiN isotropy " + std::to_string(iso));
  c.note(tag + "samples " + std::to_string(n_psi) + "/" + std::to_string(n_psin));
}

void criterion2() {
  Criterion c("criterion 2: convexity/isotropy suite (P4, P5, M1)", 120);
  convexity_isotropy<2>(c, 1000, 1000);
  convexity_isotropy<3>(c, 1000, 1000);
}

void criterion3() {
  Criterion c("criterion 3: regularization ladder (M2-M5)", 120);
  auto bm2 = std::make_shared<BallMajumdar<2>>();
  auto bm3 = std::make_shared<BallMajumdar<3>>();

  {
    MollifiedPotential<2> p4(bm2, 4), p5(bm2, 5), p8(bm2, 8), p9(bm2, 9), p16(bm2, 16),
        p17(bm2, 17), p32(bm2, 32);
    double order = -1e300, low = 1e300;
    for (int k = 0; k < 200; ++k) {
      const auto q = random_interior<2>(0.005);
      const double f = bm2->eval(q).psi;
      const double v[6] = {p4.value(q), p5.value(q),  p8.value(q),
                           p9.value(q), p16.value(q), p17.value(q)};
      order = std::max({order, v[0] - v[1], v[1] - f, v[2] - v[3], v[3] - f, v[4] - v[5],
                        v[5] - f});
      low = std::min({low, v[0], v[4]});
    }
    c.require(order <= 1e-9, "d2 M3 " + std::to_string(order));
    c.require(low >= -std::log(2 * M_PI) - 1e-9, "d2 M2");
    double e8 = 0, e16 = 0, e32 = 0;
    for (int k = 0; k < 60; ++k) {
      const auto q = random_interior<2>(0.05);
      const double f = bm2->eval(q).psi;
      e8 = std::max(e8, std::fabs(p8.value(q) - f));
      e16 = std::max(e16, std::fabs(p16.value(q) - f));
      e32 = std::max(e32, std::fabs(p32.value(q) - f));
    }
    c.require(e16 < e8 && e32 < e16, "d2 M4 decrease " + std::to_string(e8) + ">" +
                                         std::to_string(e16) + ">" + std::to_string(e32));
    MollifiedPotential<2> p64(bm2, 64);
    const double bad = p64.value(Sym0<2>{{4.0, 0.0}});
    c.require(bad > 1e3, "d2 divergence " + std::to_string(bad));
  }
  {
    MollifiedPotential<3> p4(bm3, 4), p5(bm3, 5), p8(bm3, 8), p9(bm3, 9), p16(bm3, 16),
        p17(bm3, 17);
    double order = -1e300, low = 1e300;
    for (int k = 0; k < 200; ++k) {
      const auto q = random_interior<3>(0.005);
      const double f = bm3->eval(q).psi;
      const double v[6] = {p4.value(q), p5.value(q),  p8.value(q),
                           p9.value(q), p16.value(q), p17.value(q)};
      order = std::max({order, v[0] - v[1], v[1] - f, v[2] - v[3], v[3] - f, v[4] - v[5],
                        v[5] - f});
      low = std::min({low, v[0], v[4]});
    }
    c.require(order <= 1e-9, "d3 M3 " + std::to_string(order));
    c.require(low >= -std::log(4 * M_PI) - 1e-9, "d3 M2");
    double e8 = 0, e16 = 0;
    for (int k = 0; k < 30; ++k) {
      const auto q = random_interior<3>(0.05);
      const double f = bm3->eval(q).psi;
      e8 = std::max(e8, std::fabs(p8.value(q) - f));
      e16 = std::max(e16, std::fabs(p16.value(q) - f));
    }
    c.require(e16 < e8, "d3 M4 decrease");
    MollifiedPotential<3> p64(bm3, 64);
    const double bad = p64.value(Sym0<3>{{4.0, -2.0, 0, 0, 0}});
    c.require(bad > 1e3, "d3 divergence " + std::to_string(bad));
  }
}

void criterion4() {
  Criterion c("criterion 4: Navier-Stokes reduction (Taylor-Green)", 60);
  SimConfig cfg;
  cfg.n = 64;
  cfg.nu = 0.1;
  cfg.T = 1.0;
  cfg.dt = 1e-3;
  Stepper<2> st(cfg, make_potential_model<2>(cfg));
  State<2> s = st.make_state(RealField(st.grid(), 2), taylor_green(st.grid(), 1.0));
  const double n0 = std::sqrt(l2norm2(s.uhat));
  for (long long k = 0; k < cfg.total_steps(); ++k) st.step(s);
  const double nT = std::sqrt(l2norm2(s.uhat));
  const double expected = n0 * std::exp(-taylor_green_decay_rate(st.grid(), cfg.nu) * cfg.T);
  const double rel = std::fabs(nT - expected) / expected;
  c.require(rel <= 1e-6, "decay error " + std::to_string(rel));
  double qn = 0;
  for (const auto& z : s.qhat.v) qn = std::max(qn, std::abs(z));
  c.require(qn <= 1e-13, "Q leakage");
}

void criterion5() {
  Criterion c("criterion 5: homogeneous gradient flow vs ODE oracle", 60);
  {  // d=2, psi_N
    SimConfig cfg;
    cfg.N = 16;
    cfg.dt = 1e-3;
    auto pot = make_potential_model<2>(cfg);
    const Sym0<2> q0{{0.26, -0.11}};
    auto f = [&](const std::array<double, 2>& y) {
      Sym0<2> q{{y[0], y[1]}}, g;
      pot->value_grad(q, nullptr, &g);
      return std::array<double, 2>{cfg.gamma * (-cfg.theta * g[0] + cfg.kappa * q[0]),
                                   cfg.gamma * (-cfg.theta * g[1] + cfg.kappa * q[1])};
    };
    const auto ref = oracles::rk45<2>(f, {q0[0], q0[1]}, 1.0, 1e-12, 1e-14);
    auto advance = [&](double dt) {
      SimConfig cc = cfg;
      cc.dt = dt;
      Sym0<2> q = q0;
      for (long long k = 0; k < std::llround(1.0 / dt); ++k)
        q = homogeneous_step<2>(q, cc, *pot);
      return q;
    };
    const auto qT = advance(1e-3);
    const double err = std::hypot(qT[0] - ref[0], qT[1] - ref[1]);
    c.require(err <= 1e-6, "d2 error " + std::to_string(err));
    const auto e1 = advance(2e-3), e2 = advance(1e-3);
    const double r = std::hypot(e1[0] - ref[0], e1[1] - ref[1]) /
                     std::hypot(e2[0] - ref[0], e2[1] - ref[1]);
    c.require(r >= 3.5 && r <= 4.5, "dt ratio " + std::to_string(r));
  }
  {  // d=3, exact psi
    SimConfig cfg;
    cfg.dim = 3;
    cfg.N = 0;
    cfg.dt = 1e-3;
    auto pot = make_potential_model<3>(cfg);
    const Sym0<3> q0{{0.21, -0.09, 0.05, -0.03, 0.08}};
    auto f = [&](const std::array<double, 5>& y) {
      Sym0<3> q, g;
      for (int i = 0; i < 5; ++i) q[i] = y[i];
      pot->value_grad(q, nullptr, &g);
      std::array<double, 5> out;
      for (int i = 0; i < 5; ++i) out[i] = cfg.gamma * (-cfg.theta * g[i] + cfg.kappa * q[i]);
      return out;
    };
    std::array<double, 5> y0;
    for (int i = 0; i < 5; ++i) y0[i] = q0[i];
    const auto ref = oracles::rk45<5>(f, y0, 1.0, 1e-11, 1e-13);
    Sym0<3> q = q0;
    for (int k = 0; k < 1000; ++k) q = homogeneous_step<3>(q, cfg, *pot);
    double err = 0;
    for (int i = 0; i < 5; ++i) err += (q[i] - ref[i]) * (q[i] - ref[i]);
    err = std::sqrt(err);
    c.require(err <= 1e-6, "d3 error " + std::to_string(err));
  }
}

void criterion6() {
  Criterion c("criterion 6: energy dissipation identity", 300);
  SimConfig cfg;
  cfg.n = 64;
  cfg.dt = 5e-4;
  cfg.T = 1.0;
  cfg.N = 16;
  cfg.record_every = 20;
  Stepper<2> st(cfg, make_potential_model<2>(cfg));
  auto data = generic_2d_data(st.transformer(), 101);
  const auto recs = run_collect(st, st.make_state(data.q0, data.u0));

  double incr = -1e300;
  for (std::size_t k = 1; k < recs.size(); ++k)
    incr = std::max(incr,
                    (recs[k].E - recs[k - 1].E) / std::max(1.0, std::fabs(recs[k - 1].E)));
  c.require(incr <= 1e-8, "max relative increase " + std::to_string(incr));

  const auto res = dissipation_residual(recs);
  const double r1 = *std::max_element(res.begin(), res.end());
  c.require(r1 <= 2e-2, "residual " + std::to_string(r1));

  SimConfig cfg2 = cfg;
  cfg2.dt = 2.5e-4;
  Stepper<2> st2(cfg2, make_potential_model<2>(cfg2));
  const auto recs2 = run_collect(st2, st2.make_state(data.q0, data.u0));
  const auto res2 = dissipation_residual(recs2);
  const double r2 = *std::max_element(res2.begin(), res2.end());
  c.require(r2 <= 0.65 * r1, "halving: " + std::to_string(r1) + " -> " + std::to_string(r2));
}

void criterion7() {
  Criterion c("criterion 7: energy-budget cancellation identities", 60);
  for (const double xi : {0.0, 0.7}) {
    SimConfig cfg;
    cfg.n = 32;
    cfg.xi = xi;
    cfg.N = 16;
    Stepper<2> st(cfg, make_potential_model<2>(cfg));
    double worst = 0, nullw = 0;
    for (int k = 0; k < 20; ++k) {
      auto q0 = random_q_field(st.transformer(), 3000 + k, 3, 0.05);
      auto u0 = random_velocity(st.transformer(), 4000 + k, 3, 0.6);
      State<2> s = st.make_state(q0, u0);
      const auto rep = cancellation_check(st, s);
      const int np = (xi == 0.0) ? 2 : 6;
      for (int j = 0; j < np; ++j) worst = std::max(worst, rep.pair_rel(j));
      nullw = std::max(nullw, rep.null_rel());
    }
    c.require(worst <= 1e-8, "xi=" + std::to_string(xi) + " pairs " + std::to_string(worst));
    c.require(nullw <= 1e-8, "xi=" + std::to_string(xi) + " null terms");
  }
}

void criterion8() {
  Criterion c("criterion 8: laplacian/potential-gradient convexity inequality", 60);
  SimConfig cfg;
  cfg.n = 64;
  cfg.N = 16;
  Stepper<2> st(cfg, make_potential_model<2>(cfg));
  double worst = -1e300;
  for (int k = 0; k < 50; ++k) {
    auto q0 = random_q_field(st.transformer(), 5000 + k, 5, 0.02 + 0.002 * k);
    State<2> s = st.make_state(q0, RealField(st.grid(), 2));
    const auto fa = st.assemble(s);
    const double v = convexity_integral(st.grid(), fa);
    const double tol = 1e-8 * (1.0 + std::sqrt(sym0_lap_norm2(s.qhat)) *
                                         std::sqrt(l2norm2(fa.pot_grad)));
    worst = std::max(worst, v - tol);
  }
  c.require(worst <= 0, "max excess " + std::to_string(worst));
}

void criterion9() {
  Criterion c("criterion 9: strict-physicality comparison certificate", 600);
  SimConfig cfg;
  cfg.n = 64;
  cfg.dt = 5e-4;
  cfg.T = 1.0;
  cfg.N = 16;
  cfg.record_every = 100;
  Stepper<2> st(cfg, make_potential_model<2>(cfg));
  auto data = generic_2d_data(st.transformer(), 101);
  State<2> s0 = st.make_state(data.q0, data.u0);
  const auto rep = certify(st, s0);
  c.require(rep.pass, "defect " + fmt(rep.max_defect) + " vs tol " + fmt(rep.tol));
  c.require(rep.hc_linf_measured <= rep.hc_linf_bound + 1e-3,
            "Hc bound " + fmt(rep.hc_linf_measured) + " vs " + fmt(rep.hc_linf_bound));

  // one grid + dt refinement on the same continuum data
  SimConfig fine = cfg;
  fine.n = 128;
  fine.dt = 2.5e-4;
  fine.record_every = 200;
  Stepper<2> stf(fine, make_potential_model<2>(fine));
  RealField qf = prolong(st.transformer(), stf.transformer(), data.q0);
  RealField uf = prolong(st.transformer(), stf.transformer(), data.u0);
  State<2> sf = stf.make_state(qf, uf);
  const auto repf = certify(stf, sf);
  c.require(repf.pass, "refined defect " + fmt(repf.max_defect) + " vs tol " + fmt(repf.tol));
  // the comparison principle puts the continuum defect at <= 0; what must
  // shrink under refinement is the violation above zero
  auto violation = [](const CertificateReport& r) {
    double m = 0;
    for (const auto& row : r.rows)
      if (row.t > 0) m = std::max(m, row.defect_sup);
    return m;
  };
  c.require(violation(repf) <= violation(rep) + 1e-12,
            "refinement violation " + fmt(violation(rep)) + " -> " + fmt(violation(repf)));
  c.note("defect(t>0) " + fmt(violation(rep)) + " / " + fmt(violation(repf)) + ", Hc " +
         fmt(rep.hc_linf_measured) + " <= " + fmt(rep.hc_linf_bound));
}

void criterion10() {
  Criterion c("criterion 10: physicality persistence from margin 1e-3", 300);
  SimConfig cfg;
  cfg.n = 64;
  cfg.dt = 5e-4;
  cfg.T = 1.0;
  cfg.N = 16;
  cfg.record_every = 20;
  Stepper<2> st(cfg, make_potential_model<2>(cfg));
  auto q0 = random_q_field(st.transformer(), 424242, 4, 1e-3);
  auto u0 = random_velocity(st.transformer(), 515151, 4, 0.3);
  const auto recs = run_collect(st, st.make_state(q0, u0));
  const auto rep = strict_physicality_report(recs, cfg.T, 0.05, 1e-6);
  c.require(rep.min_margin > 0, "margin " + std::to_string(rep.min_margin));
  c.require(rep.ok, "burn-in margin " + std::to_string(rep.min_margin_burn));
  c.note("min margin " + std::to_string(rep.min_margin) + ", after burn-in " +
         std::to_string(rep.min_margin_burn));
}

void criterion11() {
  Criterion c("criterion 11: higher-regularity energy tracker (d=2)", 300);
  SimConfig cfg;
  cfg.n = 64;
  cfg.dt = 5e-4;
  cfg.T = 2.0;
  cfg.N = 16;
  cfg.record_every = 40;
  Stepper<2> st(cfg, make_potential_model<2>(cfg));
  auto data = generic_2d_data(st.transformer(), 606);
  const auto recs = run_collect(st, st.make_state(data.q0, data.u0));
  const auto fit = gronwall_fit(recs);
  c.require(std::isfinite(fit.C0) && std::isfinite(fit.C1), "fit not finite");
  c.require(fit.worst_slack <= 1e-10, "slack " + std::to_string(fit.worst_slack));
  double fmax = 0;
  for (const auto& r : recs) fmax = std::max(fmax, r.F);
  c.require(fmax <= 3.0 * (1.0 + recs.front().F),
            "sup F " + std::to_string(fmax) + " vs F(0) " + std::to_string(recs.front().F));
  c.note("C0 " + std::to_string(fit.C0) + ", C1 " + std::to_string(fit.C1) + ", sup F " +
         std::to_string(fmax));
}

}  // namespace

int main() {
  std::printf("acceptance suite (criteria 1-11)\n");
  criterion1();
  criterion2();
  criterion3();
  criterion4();
  criterion5();
  criterion6();
  criterion7();
  criterion8();
  criterion9();
  criterion10();
  criterion11();
  std::printf("%d criteria failed\n", g_failures);
  return g_failures == 0 ? 0 : 1;
}
