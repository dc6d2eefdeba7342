#include "nmq/potential.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "nmq/errors.hpp"
#include "nmq/kernels.hpp"

namespace nmq {

namespace {

// tangent basis of {sum mu = 0}, columns orthonormal
constexpr double kB2[2] = {0.70710678118654752440, -0.70710678118654752440};
constexpr double kB3a[3] = {0.70710678118654752440, -0.70710678118654752440, 0.0};
constexpr double kB3b[3] = {0.40824829046386301637, 0.40824829046386301637,
                            -0.81649658092772603273};

template <int D>
std::array<double, D> tangent_to_mu(const std::array<double, D - 1>& v);

template <>
std::array<double, 2> tangent_to_mu<2>(const std::array<double, 1>& v) {
  return {kB2[0] * v[0], kB2[1] * v[0]};
}
template <>
std::array<double, 3> tangent_to_mu<3>(const std::array<double, 2>& v) {
  return {kB3a[0] * v[0] + kB3b[0] * v[1], kB3a[1] * v[0] + kB3b[1] * v[1],
          kB3a[2] * v[0] + kB3b[2] * v[1]};
}

template <int D>
std::array<double, D - 1> to_tangent(const std::array<double, D>& x);

template <>
std::array<double, 1> to_tangent<2>(const std::array<double, 2>& x) {
  return {kB2[0] * x[0] + kB2[1] * x[1]};
}
template <>
std::array<double, 2> to_tangent<3>(const std::array<double, 3>& x) {
  return {kB3a[0] * x[0] + kB3a[1] * x[1] + kB3a[2] * x[2],
          kB3b[0] * x[0] + kB3b[1] * x[1] + kB3b[2] * x[2]};
}

// B^T C B for the covariance matrix C (D x D row-major)
template <int D>
std::array<double, (D - 1) * (D - 1)> project_cov(const std::array<double, D * D>& c);

template <>
std::array<double, 1> project_cov<2>(const std::array<double, 4>& c) {
  double s = 0;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) s += kB2[i] * c[2 * i + j] * kB2[j];
  return {s};
}
template <>
std::array<double, 4> project_cov<3>(const std::array<double, 9>& c) {
  const double* b[2] = {kB3a, kB3b};
  std::array<double, 4> h{};
  for (int a = 0; a < 2; ++a)
    for (int bb = 0; bb < 2; ++bb) {
      double s = 0;
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) s += b[a][i] * c[3 * i + j] * b[bb][j];
      h[2 * a + bb] = s;
    }
  return h;
}

// solve H x = -g for DV = D-1 (1x1 or 2x2 SPD with fallback)
template <int DV>
std::array<double, DV> newton_step(const std::array<double, DV * DV>& h,
                                   const std::array<double, DV>& g);

template <>
std::array<double, 1> newton_step<1>(const std::array<double, 1>& h,
                                     const std::array<double, 1>& g) {
  const double hh = (h[0] > 1e-300) ? h[0] : 1e-300;
  return {-g[0] / hh};
}
template <>
std::array<double, 2> newton_step<2>(const std::array<double, 4>& h,
                                     const std::array<double, 2>& g) {
  const double det = h[0] * h[3] - h[1] * h[2];
  const double tr = h[0] + h[3];
  if (det <= 1e-300 || det < 1e-14 * tr * tr) {
    const double s = (tr > 1e-300) ? tr : 1e-300;
    return {-g[0] / s, -g[1] / s};
  }
  return {(-g[0] * h[3] + g[1] * h[1]) / det, (g[0] * h[2] - g[1] * h[0]) / det};
}

MomentData<3> moments_d3_arrays(std::size_t n, const double* w, const double* u1,
                                const double* u2, const double* u3,
                                const std::array<double, 3>& mu) {
  const double shift = std::max({mu[0], mu[1], mu[2]});
  double out[10];
  kernels::exp_moments_d3(n, w, u1, u2, u3, mu.data(), shift, out);
  MomentData<3> md;
  md.logZ = shift + std::log(out[0]);
  for (int i = 0; i < 3; ++i) md.m[i] = out[1 + i] / out[0];
  const double s11 = out[4] / out[0], s22 = out[5] / out[0], s33 = out[6] / out[0];
  const double s12 = out[7] / out[0], s13 = out[8] / out[0], s23 = out[9] / out[0];
  md.second = {s11, s12, s13, s12, s22, s23, s13, s23, s33};
  return md;
}

MomentData<2> moments_d2_rule(const CircleQuad& q, const std::array<double, 2>& mu) {
  const double m = 0.5 * (mu[0] - mu[1]);
  const double shift = std::fabs(m);
  double out[3];
  kernels::exp_moments_d2(q.c2.size(), q.c2.data(), q.csq.data(), m, shift, q.weight, out);
  MomentData<2> md;
  md.logZ = 0.5 * (mu[0] + mu[1]) + shift + std::log(out[0]);
  const double m1 = out[1] / out[0];
  const double c4 = out[2] / out[0];  // <cos^4>
  md.m = {m1, 1.0 - m1};
  md.second = {c4, m1 - c4, m1 - c4, 1.0 - 2.0 * m1 + c4};
  return md;
}

int next_pow2(int n) {
  int p = 1;
  while (p < n) p *= 2;
  return p;
}

// composite 16-point GL panels on u in [0,1] (weights doubled: integrands are
// even in u), geometrically graded toward u = 0 and u = 1 at scale `wscale`
struct GradedSphere {
  std::vector<double> w, u1, u2, u3;
};

std::shared_ptr<const GradedSphere> build_graded(double wscale, int nphi) {
  static std::vector<double> gx, gw;
  if (gx.empty()) gauss_legendre(16, gx, gw);

  std::vector<double> bnd{0.0, 1.0, 0.5};
  for (double t = wscale; t < 0.3; t *= 3.0) {
    bnd.push_back(t);
    bnd.push_back(1.0 - t);
  }
  std::sort(bnd.begin(), bnd.end());
  bnd.erase(std::unique(bnd.begin(), bnd.end()), bnd.end());

  auto r = std::make_shared<GradedSphere>();
  const double pi = 3.14159265358979323846;
  const double wphi = 2.0 * pi / nphi;
  std::vector<double> cp2(nphi), sp2(nphi);
  for (int j = 0; j < nphi; ++j) {
    const double c = std::cos(2.0 * pi * j / nphi), s = std::sin(2.0 * pi * j / nphi);
    cp2[j] = c * c;
    sp2[j] = s * s;
  }
  for (std::size_t p = 0; p + 1 < bnd.size(); ++p) {
    const double a = bnd[p], b = bnd[p + 1];
    for (int i = 0; i < 16; ++i) {
      const double u = 0.5 * (a + b) + 0.5 * (b - a) * gx[i];
      const double wu = (b - a) * gw[i];  // x2 for the mirrored half
      const double st2 = 1.0 - u * u;
      for (int j = 0; j < nphi; ++j) {
        r->w.push_back(wu * wphi);
        r->u1.push_back(st2 * cp2[j]);
        r->u2.push_back(st2 * sp2[j]);
        r->u3.push_back(u * u);
      }
    }
  }
  return r;
}

std::mutex g_graded_mutex;
std::map<std::int64_t, std::shared_ptr<const GradedSphere>> g_graded_cache;

}  // namespace

template <int D>
BallMajumdar<D>::BallMajumdar() {
  if constexpr (D == 2)
    circle_ = std::make_shared<CircleQuad>(256);
  else
    sphere_ = std::make_shared<SphereQuad>(64, 128);
}

template <int D>
BallMajumdar<D>::BallMajumdar(int a, int b) {
  if constexpr (D == 2)
    circle_ = std::make_shared<CircleQuad>(a);
  else
    sphere_ = std::make_shared<SphereQuad>(a, b);
}

template <int D>
MomentData<D> BallMajumdar<D>::moments(const std::array<double, D>& mu) const {
  if constexpr (D == 2) {
    return moments_d2_rule(*circle_, mu);
  } else {
    return moments_d3_arrays(sphere_->size(), sphere_->w.data(), sphere_->u1.data(),
                             sphere_->u2.data(), sphere_->u3.data(), mu);
  }
}

template <int D>
void BallMajumdar<D>::partition_and_moments(const std::array<double, D>& mu,
                                            double& logZ, std::array<double, D>& m) const {
  const auto md = moments(mu);
  logZ = md.logZ;
  m = md.m;
}

namespace {

// Quadrature escalation levels for boundary-adjacent multipliers. A level is
// sticky within one dual solve so the line search always compares objective
// values computed on the same rule.
struct RuleLevel {
  int a = 0, b = 0;  // d=2: a = node count (0 = contract rule)
                     // d=3: a = grading depth + 1, b = log2(n_phi)
  bool operator<=(const RuleLevel& o) const { return a <= o.a && b <= o.b; }
};

RuleLevel max_level(RuleLevel x, RuleLevel y) {
  return {std::max(x.a, y.a), std::max(x.b, y.b)};
}

template <int D>
RuleLevel needed_level(const std::array<double, D>& mu) {
  if constexpr (D == 2) {
    const double m = std::fabs(0.5 * (mu[0] - mu[1]));
    if (m <= 30.0) return {};
    const int n = std::min(next_pow2(std::max(512, static_cast<int>(42.0 * std::sqrt(m)) + 1)),
                           1 << 20);
    return {n, 0};
  } else {
    // the 64x128 contract rule stays at ~1e-13 moment accuracy up to
    // multiplier spreads of a few hundred (GL endpoint clustering)
    const double spread = std::max({mu[0], mu[1], mu[2]}) - std::min({mu[0], mu[1], mu[2]});
    if (spread <= 250.0) return {};
    int kw = 0;
    double wscale = 0.25;
    while (wscale > 2.0 / spread && kw < 24) {
      wscale *= 0.25;
      ++kw;
    }
    double mus[3] = {mu[0], mu[1], mu[2]};
    std::sort(mus, mus + 3, [](double x, double y) { return std::fabs(x) > std::fabs(y); });
    const double beta = 0.5 * std::fabs(mus[1] - mus[2]);  // equatorial anisotropy
    int lb = 7;                                            // n_phi = 128
    while ((1 << lb) < std::min(8192, static_cast<int>(42.0 * std::sqrt(std::max(beta, 1.0))) + 64))
      ++lb;
    return {kw + 1, lb};
  }
}

}  // namespace

template <int D>
MomentData<D> BallMajumdar<D>::moments_on(const std::array<double, D>& mu,
                                          const void* level_ptr) const {
  const RuleLevel level = *static_cast<const RuleLevel*>(level_ptr);
  if constexpr (D == 2) {
    if (level.a == 0) return moments_d2_rule(*circle_, mu);
    std::shared_ptr<const CircleQuad> rule;
    {
      std::lock_guard<std::mutex> lock(ladder_mutex_);
      auto& slot = circle_ladder_[level.a];
      if (!slot) slot = std::make_shared<CircleQuad>(level.a);
      rule = slot;
    }
    return moments_d2_rule(*rule, mu);
  } else {
    if (level.a == 0)
      return moments_d3_arrays(sphere_->size(), sphere_->w.data(), sphere_->u1.data(),
                               sphere_->u2.data(), sphere_->u3.data(), mu);
    const int kw = level.a - 1;
    const int nphi = 1 << level.b;
    const std::int64_t key = (static_cast<std::int64_t>(kw) << 20) | nphi;
    std::shared_ptr<const GradedSphere> rule;
    {
      std::lock_guard<std::mutex> lock(g_graded_mutex);
      auto& slot = g_graded_cache[key];
      if (!slot) {
        double wscale = 0.25;
        for (int i = 0; i < kw; ++i) wscale *= 0.25;
        slot = build_graded(wscale, nphi);
      }
      rule = slot;
    }
    // polar axis = largest |mu_i|; the canonical rule has the polar axis last
    int p = 0;
    for (int i = 1; i < 3; ++i)
      if (std::fabs(mu[i]) > std::fabs(mu[p])) p = i;
    const int e1 = (p == 0) ? 1 : 0;
    const int e2 = (p == 2) ? 1 : 2;
    const std::array<double, 3> muc{mu[e1], mu[e2], mu[p]};
    const auto mc = moments_d3_arrays(rule->w.size(), rule->w.data(), rule->u1.data(),
                                      rule->u2.data(), rule->u3.data(), muc);
    MomentData<3> md;
    md.logZ = mc.logZ;
    const int ax[3] = {e1, e2, p};
    for (int i = 0; i < 3; ++i) {
      md.m[ax[i]] = mc.m[i];
      for (int j = 0; j < 3; ++j) md.second[3 * ax[i] + ax[j]] = mc.second[3 * i + j];
    }
    return md;
  }
}

template <int D>
MomentData<D> BallMajumdar<D>::moments_adaptive(const std::array<double, D>& mu) const {
  const RuleLevel level = needed_level<D>(mu);
  return moments_on(mu, &level);
}

template <int D>
EigenPotential<D> BallMajumdar<D>::solve_dual(const std::array<double, D>& lambda,
                                              double tol,
                                              const std::array<double, D>* warm) const {
  constexpr int DV = D - 1;
  std::array<double, D> t;
  double mean = 0;
  for (int i = 0; i < D; ++i) mean += lambda[i];
  mean /= D;
  for (int i = 0; i < D; ++i) t[i] = lambda[i] - mean + 1.0 / D;

  std::array<double, DV> v{};
  if (warm) v = to_tangent<D>(*warm);

  auto mu_of = [&](const std::array<double, DV>& vv) { return tangent_to_mu<D>(vv); };
  auto mu = mu_of(v);
  auto dual_obj = [&](const MomentData<D>& m, const std::array<double, D>& muv) {
    double s = m.logZ;
    for (int i = 0; i < D; ++i) s -= muv[i] * t[i];
    return s;
  };
  // the rule level only escalates within a solve, so every line-search
  // comparison happens on one fixed rule
  RuleLevel level = needed_level<D>(mu);
  MomentData<D> md = moments_on(mu, &level);
  double phi = dual_obj(md, mu);

  const double tol_eff = std::max(tol, 1e-14);
  int it = 0;
  for (; it < kMaxNewton; ++it) {
    const RuleLevel want = needed_level<D>(mu);
    if (!(want <= level)) {
      level = max_level(level, want);
      md = moments_on(mu, &level);
      phi = dual_obj(md, mu);
    }
    std::array<double, D> r;
    double rinf = 0;
    for (int i = 0; i < D; ++i) {
      r[i] = md.m[i] - t[i];
      rinf = std::max(rinf, std::fabs(r[i]));
    }
    if (rinf <= tol_eff) break;

    const auto g = to_tangent<D>(r);
    std::array<double, D * D> cov;
    for (int i = 0; i < D; ++i)
      for (int j = 0; j < D; ++j)
        cov[D * i + j] = md.second[D * i + j] - md.m[i] * md.m[j];
    const auto h = project_cov<D>(cov);
    const auto dv = newton_step<DV>(h, g);

    // near the optimum the objective decrease drowns in quadrature roundoff,
    // so take unguarded Newton steps there (smooth convex, contractive)
    if (rinf <= 1e-6) {
      for (int i = 0; i < DV; ++i) v[i] += dv[i];
      mu = mu_of(v);
      md = moments_on(mu, &level);
      phi = dual_obj(md, mu);
      continue;
    }

    double gd = 0;
    for (int i = 0; i < DV; ++i) gd += g[i] * dv[i];
    const double slack = 1e-15 * (std::fabs(phi) + 1.0);  // objective roundoff floor
    double alpha = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      std::array<double, DV> vt;
      for (int i = 0; i < DV; ++i) vt[i] = v[i] + alpha * dv[i];
      const auto mut = mu_of(vt);
      const auto mdt = moments_on(mut, &level);
      const double phit = dual_obj(mdt, mut);
      if (phit <= phi + 1e-4 * alpha * gd + slack) {
        v = vt;
        mu = mut;
        md = mdt;
        phi = phit;
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) break;  // stalled at the numerical floor; check below decides
  }

  {
    const RuleLevel want = needed_level<D>(mu);
    if (!(want <= level)) {
      level = max_level(level, want);
      md = moments_on(mu, &level);
    }
  }
  double rinf = 0;
  for (int i = 0; i < D; ++i) rinf = std::max(rinf, std::fabs(md.m[i] - t[i]));
  if (rinf > tol_eff)
    throw NoConvergence("multiplier Newton residual " + std::to_string(rinf) +
                        " above tol " + std::to_string(tol_eff));

  EigenPotential<D> out;
  out.mu = mu;
  out.logZ = md.logZ;
  out.newton_iters = it;
  double psi = -md.logZ;
  for (int i = 0; i < D; ++i) psi += mu[i] * t[i];
  out.psi = psi;  // = sum mu_i lambda_i - logZ in the sum(mu)=0 gauge
  for (int i = 0; i < D; ++i)
    for (int j = 0; j < D; ++j)
      out.cov[D * i + j] = md.second[D * i + j] - md.m[i] * md.m[j];
  return out;
}

template <int D>
std::array<double, D> BallMajumdar<D>::solve_multipliers(const std::array<double, D>& lambda,
                                                         double tol) const {
  double sum = 0;
  for (int i = 0; i < D; ++i) sum += lambda[i];
  if (std::fabs(sum) > 1e-10)
    throw NonPhysicalInput("eigenvalues must sum to 0, got sum " + std::to_string(sum));
  auto sorted = lambda;
  std::sort(sorted.begin(), sorted.end());
  if (margin_of<D>(sorted) <= kEpsPhys)
    throw NonPhysicalInput("eigenvalues outside the open physical triangle (margin " +
                           std::to_string(margin_of<D>(sorted)) + ")");
  return solve_dual(lambda, tol, nullptr).mu;
}

template <int D>
EigenPotential<D> BallMajumdar<D>::eval_eigs(std::array<double, D> lambda, double tol,
                                             const std::array<double, D>* warm) const {
  auto sorted = lambda;
  std::sort(sorted.begin(), sorted.end());
  if (margin_of<D>(sorted) <= kEpsPhys)
    throw NonPhysicalInput("Q outside the physical triangle (margin " +
                           std::to_string(margin_of<D>(sorted)) + ")");
  return solve_dual(lambda, tol, warm);
}

template <int D>
PotentialEval<D> BallMajumdar<D>::eval(const Sym0<D>& q, double tol) const {
  const auto sp = spectrum(q);
  if (margin_of<D>(sp.lambda) <= kEpsPhys)
    throw NonPhysicalInput("Q outside the physical triangle (margin " +
                           std::to_string(margin_of<D>(sp.lambda)) + ")");
  const auto e = solve_dual(sp.lambda, tol, nullptr);
  PotentialEval<D> out;
  out.psi = e.psi;
  out.mu = e.mu;
  out.logZ = e.logZ;
  out.grad = compose<D>(sp.frame, e.mu);
  return out;
}

template <int D>
double BallMajumdar<D>::grad_fd_check(const Sym0<D>& q, double h) const {
  const auto pe = eval(q);
  std::array<double, Sym0<D>::NC> an;
  double an_inf = 0;
  for (int c = 0; c < Sym0<D>::NC; ++c) {
    Sym0<D> e;
    e[c] = 1.0;
    an[c] = fdot(pe.grad, e);
    an_inf = std::max(an_inf, std::fabs(an[c]));
  }
  double dev = 0;
  for (int c = 0; c < Sym0<D>::NC; ++c) {
    Sym0<D> qp = q, qm = q;
    qp[c] += h;
    qm[c] -= h;
    const double fd = (eval(qp).psi - eval(qm).psi) / (2.0 * h);
    dev = std::max(dev, std::fabs(fd - an[c]));
  }
  return dev / std::max(1.0, an_inf);
}

template <int D>
std::array<double, D> BallMajumdar<D>::prox_eigs(const std::array<double, D>& lambda,
                                                 double J, const std::array<double, D>* warm,
                                                 double* value,
                                                 EigenPotential<D>* at_prox,
                                                 std::array<double, D>* mu_io) const {
  // Solved through the dual smoothing: the prox multipliers minimize
  //   D(mu) = logZ(mu) + |mu|^2/(4J) - mu.(lambda + 1/d),
  // smooth and strictly convex on the sum(mu)=0 subspace with Hessian
  // Cov + I/(2J), so the Newton iteration needs no feasibility handling; the
  // prox point is a = lambda - mu/(2J), automatically interior.
  constexpr int DV = D - 1;
  std::array<double, D> t;
  double lmean = 0;
  for (int i = 0; i < D; ++i) lmean += lambda[i];
  lmean /= D;
  for (int i = 0; i < D; ++i) t[i] = lambda[i] - lmean + 1.0 / D;

  std::array<double, DV> v{};
  if (mu_io) {
    v = to_tangent<D>(*mu_io);
  } else if (warm) {
    std::array<double, D> mu0;
    for (int i = 0; i < D; ++i) mu0[i] = -2.0 * J * ((*warm)[i] - (t[i] - 1.0 / D));
    v = to_tangent<D>(mu0);
  }

  auto mu = tangent_to_mu<D>(v);
  auto dual_obj = [&](const MomentData<D>& m, const std::array<double, D>& muv) {
    double s = m.logZ;
    for (int i = 0; i < D; ++i) s += muv[i] * muv[i] / (4.0 * J) - muv[i] * t[i];
    return s;
  };
  RuleLevel level = needed_level<D>(mu);
  MomentData<D> md = moments_on(mu, &level);
  double phi = dual_obj(md, mu);

  double dist = 0;
  for (int i = 0; i < D; ++i) dist = std::max(dist, std::fabs(t[i]));
  const double tol = 1e-12 * (1.0 + dist);

  for (int it = 0; it < kMaxNewton; ++it) {
    const RuleLevel want = needed_level<D>(mu);
    if (!(want <= level)) {
      level = max_level(level, want);
      md = moments_on(mu, &level);
      phi = dual_obj(md, mu);
    }
    std::array<double, D> r;
    double rinf = 0;
    for (int i = 0; i < D; ++i) {
      r[i] = md.m[i] + mu[i] / (2.0 * J) - t[i];
      rinf = std::max(rinf, std::fabs(r[i]));
    }
    if (rinf <= tol) break;

    const auto g = to_tangent<D>(r);
    std::array<double, D * D> cov;
    for (int i = 0; i < D; ++i)
      for (int j = 0; j < D; ++j)
        cov[D * i + j] = md.second[D * i + j] - md.m[i] * md.m[j] +
                         ((i == j) ? 1.0 / (2.0 * J) : 0.0);
    const auto h = project_cov<D>(cov);
    const auto dv = newton_step<DV>(h, g);

    if (rinf <= 1e-6 * (1.0 + dist)) {  // contractive region: pure Newton
      for (int i = 0; i < DV; ++i) v[i] += dv[i];
      mu = tangent_to_mu<D>(v);
      md = moments_on(mu, &level);
      phi = dual_obj(md, mu);
      continue;
    }

    double gd = 0;
    for (int i = 0; i < DV; ++i) gd += g[i] * dv[i];
    const double slack = 1e-15 * (std::fabs(phi) + 1.0);
    double alpha = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      std::array<double, DV> vt;
      for (int i = 0; i < DV; ++i) vt[i] = v[i] + alpha * dv[i];
      const auto mut = tangent_to_mu<D>(vt);
      const auto mdt = moments_on(mut, &level);
      const double phit = dual_obj(mdt, mut);
      if (phit <= phi + 1e-4 * alpha * gd + slack) {
        v = vt;
        mu = mut;
        md = mdt;
        phi = phit;
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) break;
  }

  {
    const RuleLevel want = needed_level<D>(mu);
    if (!(want <= level)) {
      level = max_level(level, want);
      md = moments_on(mu, &level);
    }
  }
  double rinf = 0;
  for (int i = 0; i < D; ++i)
    rinf = std::max(rinf, std::fabs(md.m[i] + mu[i] / (2.0 * J) - t[i]));
  if (rinf > std::max(tol, 1e-10 * (1.0 + dist)))
    throw NoConvergence("prox dual Newton residual " + std::to_string(rinf));

  std::array<double, D> a;
  for (int i = 0; i < D; ++i) a[i] = (t[i] - 1.0 / D) - mu[i] / (2.0 * J);
  double psi_a = -md.logZ;
  for (int i = 0; i < D; ++i) psi_a += mu[i] * (a[i] + 1.0 / D);
  if (value) {
    double q = 0;
    for (int i = 0; i < D; ++i) q += mu[i] * mu[i];
    *value = q / (4.0 * J) + psi_a;
  }
  if (at_prox) {
    EigenPotential<D> e;
    e.mu = mu;
    e.logZ = md.logZ;
    e.psi = psi_a;
    for (int i = 0; i < D; ++i)
      for (int j = 0; j < D; ++j)
        e.cov[D * i + j] = md.second[D * i + j] - md.m[i] * md.m[j];
    *at_prox = e;
  }
  if (mu_io) *mu_io = mu;
  return a;
}

template <int D>
typename BallMajumdar<D>::Prox BallMajumdar<D>::moreau_yosida(const Sym0<D>& q,
                                                              double J) const {
  const auto sp = spectrum(q);
  Prox out;
  out.prox_lambda = prox_eigs(sp.lambda, J, nullptr, &out.value, nullptr);
  out.prox = compose<D>(sp.frame, out.prox_lambda);
  return out;
}

template class BallMajumdar<2>;
template class BallMajumdar<3>;

}  // namespace nmq
