#include <doctest.h>

#include <cmath>
#include <memory>
#include <random>

#include "nmq/errors.hpp"
#include "nmq/potential.hpp"
#include "nmq/quadrature.hpp"
#include "nmq/sym0.hpp"
#include "oracles.hpp"

using namespace nmq;

namespace {

std::mt19937_64 rng(314);

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
std::array<double, D> random_gauge_mu(double scale) {
  std::normal_distribution<double> n01(0.0, 1.0);
  std::array<double, D> mu;
  double mean = 0;
  for (auto& x : mu) mean += (x = scale * n01(rng));
  for (auto& x : mu) x -= mean / D;
  return mu;
}

constexpr double kTwoPi = 6.283185307179586476925;
constexpr double kFourPi = 12.56637061435917295385;

}  // namespace

TEST_CASE("quadrature rules") {
  CHECK_THROWS_AS(CircleQuad(32), QuadratureUnderResolved);
  CHECK_THROWS_AS(SphereQuad(16, 64), QuadratureUnderResolved);
  CHECK_THROWS_AS(SphereQuad(64, 32), QuadratureUnderResolved);
  // weights integrate the constant exactly
  SphereQuad sq(64, 128);
  double area = 0;
  for (const double w : sq.w) area += w;
  CHECK(area == doctest::Approx(kFourPi).epsilon(1e-13));
  // Gauss-Legendre: exact for x^8 on [-1,1] with 5 nodes
  std::vector<double> x, w;
  gauss_legendre(5, x, w);
  double s = 0;
  for (int i = 0; i < 5; ++i) s += w[i] * std::pow(x[i], 8);
  CHECK(s == doctest::Approx(2.0 / 9).epsilon(1e-13));
}

TEST_CASE("partition function and moments") {
  BallMajumdar<2> bm2;
  BallMajumdar<3> bm3;
  double logZ;

  // uniform density
  std::array<double, 3> m3;
  bm3.partition_and_moments({0, 0, 0}, logZ, m3);
  CHECK(logZ == doctest::Approx(std::log(kFourPi)).epsilon(1e-12));
  for (int i = 0; i < 3; ++i) CHECK(m3[i] == doctest::Approx(1.0 / 3).epsilon(1e-12));
  CHECK(m3[0] + m3[1] + m3[2] == doctest::Approx(1.0).epsilon(1e-13));

  // frozen digits for mu = (1,-1), confirmed against the high-resolution
  // quadrature oracle below (and log(2 pi I0(1)) analytically)
  std::array<double, 2> m2;
  bm2.partition_and_moments({1, -1}, logZ, m2);
  CHECK(logZ == doctest::Approx(2.07379142491652).epsilon(1e-11));
  CHECK(m2[0] == doctest::Approx(0.723194982948).epsilon(1e-10));
  double lz_ref, m1_ref;
  oracles::circle_partition_reference(1.0, -1.0, lz_ref, m1_ref);
  CHECK(logZ == doctest::Approx(lz_ref).epsilon(1e-12));
  CHECK(m2[0] == doctest::Approx(m1_ref).epsilon(1e-12));

  // gauge invariance: shifting mu by c*(1,..,1) shifts logZ by c only
  bm2.partition_and_moments({1 + 2.5, -1 + 2.5}, logZ, m2);
  CHECK(logZ == doctest::Approx(lz_ref + 2.5).epsilon(1e-12));
  CHECK(m2[0] == doctest::Approx(m1_ref).epsilon(1e-12));

  // d=3 random mu against the fine-rule oracle
  for (int it = 0; it < 10; ++it) {
    const auto mu = random_gauge_mu<3>(2.0);
    std::array<double, 3> m;
    bm3.partition_and_moments(mu, logZ, m);
    double lz2;
    std::array<double, 3> mref;
    oracles::sphere_partition_reference(mu, lz2, mref);
    CHECK(logZ == doctest::Approx(lz2).epsilon(1e-11));
    for (int i = 0; i < 3; ++i) CHECK(m[i] == doctest::Approx(mref[i]).epsilon(1e-11));
  }
}

TEST_CASE("solve_multipliers") {
  BallMajumdar<3> bm;
  // isotropic state
  const auto mu0 = bm.solve_multipliers({0, 0, 0}, 1e-12);
  for (int i = 0; i < 3; ++i) CHECK(std::fabs(mu0[i]) <= 1e-10);

  // round trip mu -> moments -> solve
  for (int it = 0; it < 25; ++it) {
    const auto mu = random_gauge_mu<3>(2.5);
    double lz;
    std::array<double, 3> m;
    bm.partition_and_moments(mu, lz, m);
    const auto back = bm.solve_multipliers({m[0] - 1.0 / 3, m[1] - 1.0 / 3, m[2] - 1.0 / 3},
                                           1e-12);
    for (int i = 0; i < 3; ++i) CHECK(std::fabs(back[i] - mu[i]) <= 1e-8);
  }

  // multipliers grow as the margin shrinks (logarithmic blow-up of psi)
  double prev = 0;
  for (const double margin : {1e-2, 1e-3, 1e-4}) {
    const double top = 2.0 / 3 - margin;
    const auto mu = bm.solve_multipliers({-top / 2, -top / 2, top}, 1e-11);
    double sup = 0;
    for (const double x : mu) sup = std::max(sup, std::fabs(x));
    CHECK(sup > prev);
    prev = sup;
  }

  CHECK_THROWS_AS(bm.solve_multipliers({0.7, -0.35, -0.35}, 1e-10), NonPhysicalInput);
  CHECK_THROWS_AS(bm.solve_multipliers({0.1, 0.1, 0.1}, 1e-10), NonPhysicalInput);
}

TEST_CASE("psi values and gradient") {
  BallMajumdar<2> bm2;
  BallMajumdar<3> bm3;

  // psi(0) equals the quadrature entropy of the uniform density
  CHECK(bm2.eval(Sym0<2>{}).psi ==
        doctest::Approx(oracles::uniform_entropy_reference(2)).epsilon(1e-10));
  CHECK(bm3.eval(Sym0<3>{}).psi ==
        doctest::Approx(oracles::uniform_entropy_reference(3)).epsilon(1e-10));
  CHECK(bm2.eval(Sym0<2>{}).psi == doctest::Approx(-std::log(kTwoPi)).epsilon(1e-12));
  CHECK(bm3.eval(Sym0<3>{}).psi == doctest::Approx(-std::log(kFourPi)).epsilon(1e-12));
  CHECK(fnorm(bm3.eval(Sym0<3>{}).grad) <= 1e-9);

  // frame independence under rotation is exercised through eval() directly
  std::uniform_real_distribution<double> U(0, kTwoPi);
  for (int it = 0; it < 50; ++it) {
    const auto q = random_interior<3>(0.02);
    const double a = U(rng), b = U(rng);
    const double ca = std::cos(a), sa = std::sin(a), cb = std::cos(b), sb = std::sin(b);
    const std::array<double, 9> r{ca, -sa, 0, sa, ca, 0, 0, 0, 1};
    const std::array<double, 9> r2{1, 0, 0, 0, cb, -sb, 0, sb, cb};
    const auto qr = rotate(rotate(q, r), r2);
    CHECK(std::fabs(bm3.eval(qr).psi - bm3.eval(q).psi) <= 1e-9);
  }

  // increasing along a boundary ray, exceeding any fixed bound
  double prev = -1e300;
  for (const double margin : {1e-2, 1e-4, 1e-6}) {
    const double top = 2.0 / 3 - margin;
    const double v = bm3.eval_eigs({-top / 2, -top / 2, top}).psi;
    CHECK(v > prev);
    prev = v;
  }
  CHECK(prev > 5.0);
  prev = -1e300;
  for (const double margin : {1e-2, 1e-4, 1e-6}) {
    const double v = bm2.eval_eigs({-(0.5 - margin), 0.5 - margin}).psi;
    CHECK(v > prev);
    prev = v;
  }

  CHECK_THROWS_AS(bm3.eval(Sym0<3>{{0.7, -0.35, 0, 0, 0}}), NonPhysicalInput);
}

TEST_CASE("gradient finite-difference audit") {
  BallMajumdar<2> bm2;
  BallMajumdar<3> bm3;
  CHECK(bm2.grad_fd_check(Sym0<2>{}, 1e-5) <= 1e-6);
  CHECK(bm3.grad_fd_check(Sym0<3>{}, 1e-5) <= 1e-6);
  for (int it = 0; it < 25; ++it) {
    CHECK(bm2.grad_fd_check(random_interior<2>(0.05), 1e-5) <= 1e-6);
    CHECK(bm3.grad_fd_check(random_interior<3>(0.05), 1e-5) <= 1e-6);
  }
  // near the boundary the curvature blows up; looser bound
  const auto sp = Sym0<3>{{-1.0 / 3 + 1e-3, -0.1, 0, 0, 0}};  // margin 1e-3
  const double dev = bm3.grad_fd_check(sp, 1e-5);
  CAPTURE(dev);
  CHECK(dev <= 1e-4);
}

TEST_CASE("moreau_yosida prox") {
  BallMajumdar<3> bm;
  BallMajumdar<2> bm2;

  // 0 minimizes both terms
  const auto p0 = bm.moreau_yosida(Sym0<3>{}, 16);
  CHECK(p0.value == doctest::Approx(-std::log(kFourPi)).epsilon(1e-10));
  CHECK(fnorm(p0.prox) <= 1e-9);

  // psi_J <= psi with gap shrinking in J at fixed interior Q
  for (int it = 0; it < 20; ++it) {
    const auto q = random_interior<3>(0.03);
    const double psi = bm.eval(q).psi;
    const double j16 = bm.moreau_yosida(q, 16).value;
    const double j64 = bm.moreau_yosida(q, 64).value;
    const double j256 = bm.moreau_yosida(q, 256).value;
    CHECK(j16 <= psi + 1e-10);
    CHECK(j16 <= j64 + 1e-10);
    CHECK(j64 <= j256 + 1e-10);
    CHECK(psi - j256 < psi - j64 + 1e-10);
    CHECK(psi - j256 <= (psi - j16) / 2 + 1e-9);  // gap -> 0
  }

  // non-physical input: finite value, strictly interior prox; value agrees
  // with an independent dense grid search over the triangle
  Sym0<3> qbad{{0.9, -0.45, 0, 0, 0}};
  const auto pb = bm.moreau_yosida(qbad, 8);
  CHECK(std::isfinite(pb.value));
  CHECK(margin_of<3>(pb.prox_lambda) > 0);
  const double oracle = oracles::prox_value_grid_search(
      {-0.45, -0.45, 0.9}, 8.0,
      [&](const std::array<double, 3>& a) { return bm.eval_eigs(a, 1e-10).psi; }, 60, 4);
  CHECK(pb.value == doctest::Approx(oracle).epsilon(1e-5));

  // d=2 prox of a far point stays interior
  const auto pb2 = bm2.moreau_yosida(Sym0<2>{{3.0, 0.0}}, 64);
  CHECK(std::isfinite(pb2.value));
  CHECK(margin_of<2>(pb2.prox_lambda) > 0);
}

TEST_CASE("convexity, isotropy and gradient monotonicity of psi") {
  BallMajumdar<2> bm2;
  const int pairs = 1000;
  double worst_cvx = -1e300, worst_mono = 1e300;
  for (int it = 0; it < pairs; ++it) {
    const auto q1 = random_interior<2>(0.01);
    const auto q2 = random_interior<2>(0.01);
    const auto e1 = bm2.eval(q1);
    const auto e2 = bm2.eval(q2);
    for (const double t : {0.25, 0.5, 0.75}) {
      const Sym0<2> qm = t * q1 + (1 - t) * q2;
      if (physicality_margin(qm) <= kEpsPhys) continue;
      worst_cvx = std::max(worst_cvx, bm2.eval(qm).psi - (t * e1.psi + (1 - t) * e2.psi));
    }
    worst_mono = std::min(worst_mono, fdot(e1.grad - e2.grad, q1 - q2));
  }
  CHECK(worst_cvx <= 1e-9);
  CHECK(worst_mono >= -1e-9);
}
