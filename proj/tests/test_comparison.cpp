#include <doctest.h>

#include <cmath>
#include <random>

#include "nmq/comparison.hpp"
#include "nmq/errors.hpp"
#include "nmq/scenarios.hpp"

using namespace nmq;

TEST_CASE("advect-diffuse: heat eigenmode decays exactly") {
  Grid g(2, 32, 1.0);
  Transformer tr(g);
  const double kdiff = 0.01, dt = 1e-3;
  AdvectDiffuse ad(tr, kdiff, dt);

  // single Fourier mode
  RealField f(g, 1);
  const double k = g.kwave(3);
  for (int i = 0; i < g.n(); ++i)
    for (int j = 0; j < g.n(); ++j) {
      const double x = -g.boxlen() / 2 + i * g.dx();
      f.ch(0)[i * g.n() + j] = std::cos(k * x);
    }
  SpecField fh;
  tr.forward(f, fh);
  const int steps = 500;
  for (int s = 0; s < steps; ++s) ad.step(fh, nullptr, nullptr);
  RealField out;
  tr.inverse(fh, out);
  const double expected = std::exp(-kdiff * k * k * steps * dt);
  double sup = 0;
  for (const double x : out.v) sup = std::max(sup, std::fabs(x));
  CHECK(sup == doctest::Approx(expected).epsilon(1e-8));
}

TEST_CASE("advect-diffuse: constants are invariant; mean is conserved") {
  Grid g(2, 32, 1.0);
  Transformer tr(g);
  AdvectDiffuse ad(tr, 0.01, 1e-3);
  auto u = random_velocity(tr, 5, 4, 1.0);
  SpecField uh;
  tr.forward(u, uh);
  leray_project(uh);

  // constant initial data stays constant under any u
  SpecField ch(g, 1);
  ch.ch(0)[0] = 2.75;
  for (int s = 0; s < 100; ++s) ad.step(ch, &uh, nullptr);
  CHECK(ch.ch(0)[0].real() == doctest::Approx(2.75).epsilon(1e-14));
  double rest = 0;
  for (std::size_t i = 1; i < g.nspec(); ++i) rest = std::max(rest, std::abs(ch.ch(0)[i]));
  CHECK(rest <= 1e-14);

  // zero-mean data keeps zero mean over 1e3 steps
  auto g0 = random_q_field(tr, 17, 4, 0.1);  // any band-limited scalar source
  RealField gs(g, 1);
  std::copy_n(g0.ch(0), g.npoints(), gs.ch(0));
  SpecField gh;
  tr.forward(gs, gh);
  gh.ch(0)[0] = 0.0;
  for (int s = 0; s < 1000; ++s) ad.step(gh, &uh, nullptr);
  CHECK(std::abs(gh.ch(0)[0]) <= 1e-10);
}

TEST_CASE("discrete maximum principle proxy with constant source") {
  Grid g(2, 32, 1.0);
  Transformer tr(g);
  const double dt = 5e-4, smax = 0.7;
  AdvectDiffuse ad(tr, 0.02, dt);
  auto u = random_velocity(tr, 21, 3, 0.8);
  SpecField uh;
  tr.forward(u, uh);
  leray_project(uh);

  auto f0 = random_q_field(tr, 31, 3, 0.1);
  RealField gs(g, 1);
  std::copy_n(f0.ch(0), g.npoints(), gs.ch(0));
  SpecField gh;
  tr.forward(gs, gh);
  RealField gr;
  tr.inverse(gh, gr);
  double max0 = -1e300;
  for (const double x : gr.v) max0 = std::max(max0, x);

  SpecField src(g, 1);
  src.ch(0)[0] = smax;  // constant source at its own bound
  const int steps = 400;
  for (int s = 0; s < steps; ++s) ad.step(gh, &uh, &src);
  tr.inverse(gh, gr);
  double maxT = -1e300;
  for (const double x : gr.v) maxT = std::max(maxT, x);
  CHECK(maxT <= max0 + steps * dt * smax + 1e-8);
}

TEST_CASE("certificate on degenerate trajectories") {
  SUBCASE("rest state: zero defect, Hc constant at psi_N(0)") {
    SimConfig cfg;
    cfg.n = 16;
    cfg.dt = 1e-3;
    cfg.T = 0.05;
    Stepper<2> st(cfg, make_potential_model<2>(cfg));
    State<2> s = st.make_state(RealField(st.grid(), 2), RealField(st.grid(), 2));
    const auto rep = certify(st, s);
    CHECK(rep.max_defect <= 1e-12);
    for (const auto& row : rep.rows) CHECK(row.g_sup <= 1e-12);
  }

  SUBCASE("homogeneous trajectory reduces to the scalar ODE bound") {
    SimConfig cfg;
    cfg.n = 16;
    cfg.dt = 5e-4;
    cfg.T = 0.5;
    cfg.record_every = 50;
    Stepper<2> st(cfg, make_potential_model<2>(cfg));
    Sym0<2> q0{{0.3, -0.1}};
    State<2> s = st.make_state(homogeneous_q(st.grid(), q0), RealField(st.grid(), 2));
    const auto rep = certify(st, s);
    for (const auto& row : rep.rows) CHECK(row.g_sup <= 1e-11);  // G stays 0
    CHECK(rep.max_defect <= 1e-6);
  }

  SUBCASE("xi != 0 and exact-psi trajectories are refused") {
    SimConfig cfg;
    cfg.n = 16;
    cfg.xi = 0.3;
    Stepper<2> st(cfg, make_potential_model<2>(cfg));
    State<2> s = st.make_state(RealField(st.grid(), 2), RealField(st.grid(), 2));
    CHECK_THROWS_AS(certify(st, s), ConfigMismatch);
    SimConfig ce = cfg;
    ce.xi = 0;
    ce.N = 0;
    Stepper<2> ste(ce, make_potential_model<2>(ce));
    State<2> se = ste.make_state(RealField(ste.grid(), 2), RealField(ste.grid(), 2));
    CHECK_THROWS_AS(certify(ste, se), ConfigMismatch);
  }
}

TEST_CASE("heat decay audit") {
  Grid g(2, 32, 1.0);
  Transformer tr(g);
  const double kdiff = 0.05;

  // pure mode with u = 0: exponential beats the power weight
  RealField f(g, 1);
  const double k = g.kwave(2);
  for (int i = 0; i < g.n(); ++i)
    for (int j = 0; j < g.n(); ++j)
      f.ch(0)[i * g.n() + j] = std::sin(k * (-g.boxlen() / 2 + i * g.dx()));
  auto series = heat_decay_check(tr, f, nullptr, kdiff, 1e-2, 20.0, 0.5, 100);
  REQUIRE(series.size() > 3);
  CHECK(series.back().ratio < series.front().ratio);
  CHECK(series.back().ratio < 1e-3 * series.front().ratio);

  // frozen Taylor-Green advection: series stays bounded
  auto u = taylor_green(g, 1.0);
  SpecField uh;
  tr.forward(u, uh);
  leray_project(uh);
  RealField spiky(g, 1);
  std::mt19937_64 rng(9);
  std::normal_distribution<double> n01(0.0, 1.0);
  for (auto& x : spiky.v) x = n01(rng);
  SpecField sh;
  tr.forward(spiky, sh);
  dealias(sh);
  sh.ch(0)[0] = 0.0;
  tr.inverse(sh, spiky);
  auto series2 = heat_decay_check(tr, spiky, &uh, kdiff, 1e-2, 10.0, 0.5, 50);
  double worst = 0;
  for (const auto& p : series2) worst = std::max(worst, p.ratio);
  CHECK(std::isfinite(worst));
  CHECK(series2.back().ratio <= worst);

  // linearity: scaling g0 by 10 leaves the ratio unchanged
  RealField scaled = spiky;
  for (auto& x : scaled.v) x *= 10.0;
  auto series3 = heat_decay_check(tr, scaled, &uh, kdiff, 1e-2, 1.0, 0.5, 50);
  auto series4 = heat_decay_check(tr, spiky, &uh, kdiff, 1e-2, 1.0, 0.5, 50);
  REQUIRE(series3.size() == series4.size());
  for (std::size_t i = 0; i < series3.size(); ++i)
    CHECK(series3[i].ratio == doctest::Approx(series4[i].ratio).epsilon(1e-12));

  // zero-mean precondition
  RealField bad(g, 1);
  for (auto& x : bad.v) x = 0.5;
  CHECK_THROWS_AS(heat_decay_check(tr, bad, nullptr, kdiff, 1e-2, 1.0, 0.5, 10),
                  NonZeroMean);
}
