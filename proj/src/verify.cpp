#include "nmq/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <random>

#include "nmq/comparison.hpp"
#include "nmq/diagnostics.hpp"
#include "nmq/dynamics.hpp"
#include "nmq/grid.hpp"
#include "nmq/mollified.hpp"
#include "nmq/potential.hpp"
#include "nmq/scenarios.hpp"
#include "nmq/sym0.hpp"

namespace nmq {

namespace {

using Rng = std::mt19937_64;

template <int D>
Sym0<D> random_sym0(Rng& rng, double scale) {
  std::normal_distribution<double> n01(0.0, 1.0);
  Sym0<D> q;
  for (int c = 0; c < Sym0<D>::NC; ++c) q[c] = scale * n01(rng);
  return q;
}

/// random Q with physicality margin >= m, rejection-scaled
template <int D>
Sym0<D> random_interior(Rng& rng, double min_margin) {
  for (;;) {
    Sym0<D> q = random_sym0<D>(rng, 0.25);
    const double m = physicality_margin(q);
    if (m >= min_margin) return q;
  }
}

template <int D>
std::array<double, D * D> random_rotation(Rng& rng);

template <>
std::array<double, 4> random_rotation<2>(Rng& rng) {
  std::uniform_real_distribution<double> U(0, 2 * 3.14159265358979323846);
  const double a = U(rng);
  return {std::cos(a), -std::sin(a), std::sin(a), std::cos(a)};
}

template <>
std::array<double, 9> random_rotation<3>(Rng& rng) {
  std::normal_distribution<double> n01(0.0, 1.0);
  double q[4];
  double nrm = 0;
  for (auto& x : q) {
    x = n01(rng);
    nrm += x * x;
  }
  nrm = std::sqrt(nrm);
  for (auto& x : q) x /= nrm;
  const double w = q[0], x = q[1], y = q[2], z = q[3];
  return {1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y),
          2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
          2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)};
}

void add(std::vector<CheckResult>& out, const std::string& name, double value,
         double threshold, bool informational = false) {
  out.push_back({name, informational || value <= threshold, value, threshold,
                 informational});
}

constexpr double kPi = 3.14159265358979323846;

template <int D>
void potential_suite(std::vector<CheckResult>& out, bool quick) {
  const std::string tag = "potential.d" + std::to_string(D) + ".";
  auto bm = std::make_shared<BallMajumdar<D>>();
  Rng rng(2024 + D);
  const int np = quick ? 50 : 200;
  const double sphere = (D == 2) ? 2 * kPi : 4 * kPi;

  add(out, tag + "P2_value_at_origin", std::fabs(bm->eval(Sym0<D>{}).psi + std::log(sphere)), 1e-8);

  {  // dual round trip: mu -> moments -> solve -> mu
    double worst = 0;
    std::normal_distribution<double> n01(0.0, 1.0);
    for (int k = 0; k < (quick ? 5 : 20); ++k) {
      std::array<double, D> muv{};
      double mean = 0;
      for (int i = 0; i < D; ++i) mean += (muv[i] = 1.5 * n01(rng));
      for (int i = 0; i < D; ++i) muv[i] -= mean / D;
      double lz;
      std::array<double, D> m;
      bm->partition_and_moments(muv, lz, m);
      std::array<double, D> lam;
      for (int i = 0; i < D; ++i) lam[i] = m[i] - 1.0 / D;
      const auto back = bm->solve_multipliers(lam, 1e-12);
      for (int i = 0; i < D; ++i) worst = std::max(worst, std::fabs(back[i] - muv[i]));
    }
    add(out, tag + "dual_stationarity_roundtrip", worst, 1e-8);
  }

  {  // gradient vs central differences
    double worst = 0;
    for (int k = 0; k < (quick ? 20 : np); ++k)
      worst = std::max(worst, bm->grad_fd_check(random_interior<D>(rng, 0.05), 1e-5));
    add(out, tag + "P1_smooth_grad_fd", worst, 1e-6);
  }

  {  // logarithmic blow-up along a boundary ray
    double prev = -1e300;
    bool increasing = true;
    double last = 0;
    for (const double marg : {1e-2, 1e-4, 1e-6}) {
      std::array<double, D> lam{};
      lam[D - 1] = 1.0 - 1.0 / D - marg;
      for (int i = 0; i + 1 < D; ++i) lam[i] = -(lam[D - 1]) / (D - 1);
      last = bm->eval_eigs(lam).psi;
      increasing = increasing && (last > prev);
      prev = last;
    }
    add(out, tag + "P3_blowup_monotone", increasing ? 0.0 : 1.0, 0.5);
    add(out, tag + "P3_blowup_magnitude", -last, -2.0);  // psi(margin 1e-6) > 2
  }

  auto psiN = std::make_shared<MollifiedPotential<D>>(bm, 16);
  auto psiN2 = std::make_shared<MollifiedPotential<D>>(bm, 17);

  {  // midpoint convexity and isotropy for psi, psi_J, psi_N
    const int npairs = quick ? 30 : (D == 2 ? 200 : 60);
    double cvx_psi = -1e300, cvx_j = -1e300, cvx_n = -1e300;
    double iso_psi = 0, iso_j = 0, iso_n = 0;
    for (int k = 0; k < npairs; ++k) {
      const auto q1 = random_interior<D>(rng, 0.02);
      const auto q2 = random_interior<D>(rng, 0.02);
      const double f1 = bm->eval(q1).psi, f2 = bm->eval(q2).psi;
      const double j1 = bm->moreau_yosida(q1, 16).value;
      const double j2 = bm->moreau_yosida(q2, 16).value;
      const double n1v = psiN->value(q1);
      const double n2v = psiN->value(q2);
      for (const double t : {0.25, 0.5, 0.75}) {
        Sym0<D> qm = t * q1 + (1.0 - t) * q2;
        if (physicality_margin(qm) > kEpsPhys)
          cvx_psi = std::max(cvx_psi, bm->eval(qm).psi - (t * f1 + (1 - t) * f2));
        cvx_j = std::max(cvx_j, bm->moreau_yosida(qm, 16).value - (t * j1 + (1 - t) * j2));
        cvx_n = std::max(cvx_n, psiN->value(qm) - (t * n1v + (1 - t) * n2v));
      }
      const auto r = random_rotation<D>(rng);
      const auto q1r = rotate(q1, r);
      iso_psi = std::max(iso_psi, std::fabs(bm->eval(q1r).psi - f1));
      iso_j = std::max(iso_j, std::fabs(bm->moreau_yosida(q1r, 16).value - j1));
      iso_n = std::max(iso_n, std::fabs(psiN->value(q1r) - n1v));
    }
    add(out, tag + "P4_convexity_psi", cvx_psi, 1e-9);
    add(out, tag + "M1_convexity_psiJ", cvx_j, 1e-9);
    add(out, tag + "M1_convexity_psiN", cvx_n, 1e-9);
    add(out, tag + "P5_isotropy_psi", iso_psi, 1e-9);
    add(out, tag + "P5_isotropy_psiJ", iso_j, 1e-9);
    add(out, tag + "P5_isotropy_psiN", iso_n, 1e-9);
  }

  {  // M2 lower bound and M3 ordering
    const int ns = quick ? 20 : 50;
    double lower = 1e300, order = -1e300;
    auto psi4 = std::make_shared<MollifiedPotential<D>>(bm, 4);
    auto psi5 = std::make_shared<MollifiedPotential<D>>(bm, 5);
    auto psi8 = std::make_shared<MollifiedPotential<D>>(bm, 8);
    for (int k = 0; k < ns; ++k) {
      const auto q = random_interior<D>(rng, 0.01);
      const double f = bm->eval(q).psi;
      const double v4 = psi4->value(q), v5 = psi5->value(q);
      const double v8 = psi8->value(q), v16 = psiN->value(q), v17 = psiN2->value(q);
      lower = std::min({lower, v4 + std::log(sphere), v16 + std::log(sphere)});
      order = std::max({order, v4 - v5, v5 - f, v8 - f, v16 - v17, v17 - f});
      const auto qb = random_sym0<D>(rng, 1.2);  // outside allowed too
      lower = std::min(lower, psiN->value(qb) + std::log(sphere));
    }
    add(out, tag + "M2_lower_bound", -lower, 1e-9);
    add(out, tag + "M3_monotone", order, 1e-9);
  }

  {  // M4/M5 convergence on a margin-0.05 compact set, divergence outside
    double e8 = 0, e16 = 0, g8 = 0, g16 = 0;
    auto psi8 = std::make_shared<MollifiedPotential<D>>(bm, 8);
    for (int k = 0; k < (quick ? 10 : 30); ++k) {
      const auto q = random_interior<D>(rng, 0.05);
      const auto ex = bm->eval(q);
      e8 = std::max(e8, std::fabs(psi8->value(q) - ex.psi));
      e16 = std::max(e16, std::fabs(psiN->value(q) - ex.psi));
      const auto m8 = psi8->eval(q), m16 = psiN->eval(q);
      g8 = std::max(g8, fnorm(m8.grad - ex.grad));
      g16 = std::max(g16, fnorm(m16.grad - ex.grad));
    }
    add(out, tag + "M4_value_converges", e16 - e8, 0.0);
    add(out, tag + "M5_grad_converges", g16 - g8, 0.0);
    Sym0<D> qbad;
    qbad[0] = 4.0;
    if constexpr (D == 3) qbad[1] = -2.0;
    MollifiedPotential<D> psi64(bm, 64);
    add(out, tag + "M4_divergence_at_bad", -psi64.value(qbad), -1e3);
  }

  {  // M6 growth constants on |Q| <= 10 (reported)
    double c1 = 0, c2 = 0;
    for (int k = 0; k < (quick ? 20 : 60); ++k) {
      auto q = random_sym0<D>(rng, 3.0);
      const auto e = psiN->eval(q);
      const double gn = fnorm(e.grad), qn = fnorm(q);
      if (qn > 1e-6) c1 = std::max(c1, (gn - c2) / qn);
      c2 = std::max(c2, gn - c1 * qn);
    }
    add(out, tag + "M6_growth_C1", c1, 0.0, true);
    add(out, tag + "M6_growth_C2", c2, 0.0, true);
  }
}

void spectral_suite(std::vector<CheckResult>& out, bool quick) {
  (void)quick;
  for (const int dim : {2, 3}) {
    const std::string tag = "spectral.d" + std::to_string(dim) + ".";
    const int n = dim == 2 ? 32 : 16;
    Grid g(dim, n, 1.5);
    Transformer tr(g);
    Rng rng(7 + dim);
    std::normal_distribution<double> n01(0.0, 1.0);

    RealField f(g, 1);
    for (auto& x : f.v) x = n01(rng);
    SpecField fh;
    tr.forward(f, fh);
    RealField back;
    tr.inverse(fh, back);
    double rt = 0, scale = 0;
    for (std::size_t i = 0; i < f.v.size(); ++i) {
      rt = std::max(rt, std::fabs(f.v[i] - back.v[i]));
      scale = std::max(scale, std::fabs(f.v[i]));
    }
    add(out, tag + "fft_roundtrip", rt / scale, 1e-12);

    add(out, tag + "parseval",
        std::fabs(l2norm2(fh) - l2norm2(f)) / std::max(1.0, l2norm2(f)), 1e-12);

    {  // eigenfunction: second derivative of sin(2 x0 / Lambda)
      RealField s(g, 1);
      const double k = g.kwave(1);
      for (std::size_t i = 0; i < g.npoints(); ++i) {
        const std::size_t i0 = (dim == 2) ? i / n : i / (n * n);
        const double x = -g.boxlen() / 2 + static_cast<double>(i0) * g.dx();
        s.v[i] = std::sin(k * x);
      }
      SpecField sh;
      tr.forward(s, sh);
      auto d2 = derivative(sh, 0, 2);
      RealField d2r;
      tr.inverse(d2, d2r);
      double worst = 0;
      for (std::size_t i = 0; i < g.npoints(); ++i)
        worst = std::max(worst, std::fabs(d2r.v[i] + k * k * s.v[i]));
      add(out, tag + "derivative_eigenfunction", worst, 1e-10);
    }

    {  // integration by parts <lap f, h> = -<grad f, grad h>
      dealias(fh);
      RealField h(g, 1);
      for (auto& x : h.v) x = n01(rng);
      SpecField hh;
      tr.forward(h, hh);
      dealias(hh);
      SpecField lap(g, 1);
      double lhs = 0, rhs = 0;
      for (int a = 0; a < dim; ++a) {
        auto da = derivative(fh, a, 2);
        for (std::size_t i = 0; i < g.nspec(); ++i) lap.ch(0)[i] += da.ch(0)[i];
        rhs -= l2inner(derivative(fh, a, 1), derivative(hh, a, 1));
      }
      lhs = l2inner(lap, hh);
      add(out, tag + "integration_by_parts", std::fabs(lhs - rhs) / std::max(1.0, std::fabs(rhs)),
          1e-10);
    }

    {  // Leray: kills gradients, idempotent, divergence-free output
      RealField v(g, dim);
      for (auto& x : v.v) x = n01(rng);
      SpecField vh;
      tr.forward(v, vh);
      dealias(vh);
      auto once = vh;
      leray_project(once);
      auto twice = once;
      leray_project(twice);
      double idem = 0;
      for (std::size_t i = 0; i < once.v.size(); ++i)
        idem = std::max(idem, std::abs(once.v[i] - twice.v[i]));
      add(out, tag + "leray_idempotent", idem, 1e-13);
      // divergence
      SpecField div(g, 1);
      int j[3];
      double dsup = 0;
      for (std::size_t i = 0; i < g.nspec(); ++i) {
        g.decode(i, j);
        std::complex<double> dv{0, 0};
        for (int a = 0; a < dim; ++a)
          dv += std::complex<double>(0, g.kwave(j[a])) * once.ch(a)[i];
        dsup = std::max(dsup, std::abs(dv));
      }
      add(out, tag + "leray_divergence", dsup, 1e-12);
      // pure gradient of a zero-mean potential is annihilated
      SpecField gradphi(g, dim);
      for (int a = 0; a < dim; ++a) {
        auto da = derivative(fh, a, 1);
        std::copy(da.ch(0), da.ch(0) + g.nspec(), gradphi.ch(a));
      }
      leray_project(gradphi);
      double gsup = 0;
      for (const auto& z : gradphi.v) gsup = std::max(gsup, std::abs(z));
      add(out, tag + "leray_kills_gradients", gsup, 1e-12);
    }

    {  // Galerkin projector: identity at huge M, idempotent, self-adjoint
      auto mask_all = galerkin_mask(g, 1 << 28);
      bool ident = std::all_of(mask_all.begin(), mask_all.end(),
                               [](std::uint8_t x) { return x == 1; });
      add(out, tag + "galerkin_identity", ident ? 0.0 : 1.0, 0.5);
      RealField v(g, dim), w(g, dim);
      for (auto& x : v.v) x = n01(rng);
      for (auto& x : w.v) x = n01(rng);
      SpecField vh, wh;
      tr.forward(v, vh);
      tr.forward(w, wh);
      leray_project(vh);
      leray_project(wh);
      auto mask = galerkin_mask(g, 7);
      auto pv = vh, pw = wh;
      galerkin_truncate(pv, mask);
      galerkin_truncate(pw, mask);
      auto ppv = pv;
      galerkin_truncate(ppv, mask);
      double idem = 0;
      for (std::size_t i = 0; i < pv.v.size(); ++i)
        idem = std::max(idem, std::abs(pv.v[i] - ppv.v[i]));
      add(out, tag + "galerkin_idempotent", idem, 0.0);
      const double a1 = l2inner(pv, wh), a2 = l2inner(vh, pw);
      add(out, tag + "galerkin_selfadjoint", std::fabs(a1 - a2) / std::max(1.0, std::fabs(a1)),
          1e-12);
    }
  }
}

void dynamics_suite(std::vector<CheckResult>& out, bool quick) {
  {  // rest state is a fixed point to machine precision
    SimConfig cfg;
    cfg.n = 16;
    cfg.dt = 1e-3;
    cfg.T = 1.0;
    Stepper<2> st(cfg, make_potential_model<2>(cfg));
    State<2> s = st.make_state(RealField(st.grid(), 2), RealField(st.grid(), 2));
    for (int k = 0; k < (quick ? 100 : 1000); ++k) st.step(s);
    double nrm = 0;
    for (const auto& z : s.qhat.v) nrm = std::max(nrm, std::abs(z));
    for (const auto& z : s.uhat.v) nrm = std::max(nrm, std::abs(z));
    add(out, "dynamics.rest_state", nrm, 0.0);
  }

  {  // Taylor-Green viscous decay against the exact solution
    SimConfig cfg;
    cfg.n = 32;
    cfg.nu = 0.1;
    cfg.dt = 1e-3;
    cfg.T = quick ? 0.1 : 0.5;
    Stepper<2> st(cfg, make_potential_model<2>(cfg));
    auto u0 = taylor_green(st.grid(), 1.0);
    State<2> s = st.make_state(RealField(st.grid(), 2), u0);
    const double n0 = std::sqrt(l2norm2(s.uhat));
    const long long steps = cfg.total_steps();
    for (long long k = 0; k < steps; ++k) st.step(s);
    const double nT = std::sqrt(l2norm2(s.uhat));
    const double expected = n0 * std::exp(-taylor_green_decay_rate(st.grid(), cfg.nu) * cfg.T);
    add(out, "dynamics.taylor_green_decay", std::fabs(nT - expected) / expected, 1e-6);
  }

  {  // second-order self-convergence on the homogeneous trajectory
    SimConfig cfg;
    cfg.N = 16;
    Sym0<2> q0;
    q0[0] = 0.22;
    q0[1] = -0.12;
    auto pot = make_potential_model<2>(cfg);
    auto advance = [&](double dt, double T) {
      SimConfig c = cfg;
      c.dt = dt;
      Sym0<2> q = q0;
      const long long steps = std::llround(T / dt);
      for (long long k = 0; k < steps; ++k) q = homogeneous_step<2>(q, c, *pot);
      return q;
    };
    const double T = 0.5;
    const auto ref = advance(1.0 / 8192, T);
    const auto e1 = advance(1.0 / 256, T) - ref;
    const auto e2 = advance(1.0 / 512, T) - ref;
    const double ratio = fnorm(e1) / fnorm(e2);
    add(out, "dynamics.homogeneous_order2_low", 3.3 - ratio, 0.0);
    add(out, "dynamics.homogeneous_order2_high", ratio - 4.7, 0.0);
  }

  {  // energy-budget cancellation identities
    for (const double xi : {0.0, 0.7}) {
      SimConfig cfg;
      cfg.n = 32;
      cfg.xi = xi;
      Stepper<2> st(cfg, make_potential_model<2>(cfg));
      Rng rng(99);
      double worst = 0, nullw = 0;
      for (int k = 0; k < (quick ? 3 : 10); ++k) {
        auto q0 = random_q_field(st.transformer(), 1000 + k, 3, 0.06);
        auto u0 = random_velocity(st.transformer(), 2000 + k, 3, 0.5);
        State<2> s = st.make_state(q0, u0);
        const auto rep = cancellation_check(st, s);
        const int npairs = (xi == 0.0) ? 2 : 6;
        for (int j = 0; j < npairs; ++j) worst = std::max(worst, rep.pair_rel(j));
        nullw = std::max(nullw, rep.null_rel());
      }
      (void)rng;
      const std::string x = (xi == 0.0) ? "xi0" : "xi07";
      add(out, "dynamics.cancellation_" + x, worst, 1e-8);
      add(out, "dynamics.null_terms_" + x, nullw, 1e-8);
    }
  }

  {  // energy is non-increasing on a short generic run
    SimConfig cfg;
    cfg.n = 32;
    cfg.dt = 5e-4;
    cfg.T = quick ? 0.05 : 0.2;
    cfg.record_every = 10;
    Stepper<2> st(cfg, make_potential_model<2>(cfg));
    auto data = generic_2d_data(st.transformer(), 5, 0.08, 0.4, 4);
    State<2> s = st.make_state(data.q0, data.u0);
    std::vector<EnergyRecord> recs;
    RunHooks<2> hooks;
    hooks.on_record = [&](const State<2>&, const EnergyRecord& r) { recs.push_back(r); };
    run(st, s, hooks);
    double incr = -1e300;
    for (std::size_t k = 1; k < recs.size(); ++k)
      incr = std::max(incr, (recs[k].E - recs[k - 1].E) /
                                std::max(1.0, std::fabs(recs[k - 1].E)));
    add(out, "dynamics.energy_nonincreasing", incr, 1e-8);
    const auto res = dissipation_residual(recs);
    add(out, "dynamics.dissipation_residual", *std::max_element(res.begin(), res.end()),
        2e-2);
  }
}

}  // namespace

std::vector<CheckResult> verify_potential(bool quick) {
  std::vector<CheckResult> out;
  potential_suite<2>(out, quick);
  potential_suite<3>(out, quick);
  return out;
}

std::vector<CheckResult> verify_spectral(bool quick) {
  std::vector<CheckResult> out;
  spectral_suite(out, quick);
  return out;
}

std::vector<CheckResult> verify_dynamics(bool quick) {
  std::vector<CheckResult> out;
  dynamics_suite(out, quick);
  return out;
}

int report_checks(const std::vector<CheckResult>& checks) {
  int failures = 0;
  for (const auto& c : checks) {
    if (c.informational) {
      std::printf("INFO %-44s value=%.6g\n", c.name.c_str(), c.value);
      continue;
    }
    if (!c.pass) ++failures;
    std::printf("%s %-44s value=%.6g threshold=%.6g\n", c.pass ? "PASS" : "FAIL",
                c.name.c_str(), c.value, c.threshold);
  }
  return failures;
}

}  // namespace nmq
