#include "nmq/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

#include "nmq/diagnostics.hpp"
#include "nmq/errors.hpp"

namespace nmq {

namespace {

bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }

}  // namespace

long long SimConfig::total_steps() const {
  if (T == 0) return 0;
  return std::llround(T / dt);
}

void SimConfig::validate() const {
  if (dim != 2 && dim != 3) throw ValidationError("dim");
  if (!(gamma > 0)) throw ValidationError("gamma");
  if (!(L > 0)) throw ValidationError("L");
  if (!(theta > 0)) throw ValidationError("theta");
  if (!(kappa > 0)) throw ValidationError("kappa");
  if (!(nu > 0)) throw ValidationError("nu");
  if (!(Lambda > 0)) throw ValidationError("lambda");
  if (!std::isfinite(xi)) throw ValidationError("xi");
  if (!is_pow2(n) || n < 8) throw ValidationError("n");
  if (!(dt > 0)) throw ValidationError("dt");
  if (!(T >= 0)) throw ValidationError("T");
  if (T > 0 && std::fabs(total_steps() * dt - T) > 1e-9 * std::max(1.0, T))
    throw ValidationError("T (must be an integer multiple of dt)");
  if (N < 0) throw ValidationError("N");
  if (M < 0) throw ValidationError("M");
  if (record_every < 1) throw ValidationError("record_every");
  if (snapshot_every < 0) throw ValidationError("snapshot_every");
}

// ---------------------------------------------------------------------------
// potential models

namespace {

template <int D>
class ExactModel final : public PotentialModel<D> {
 public:
  explicit ExactModel(std::shared_ptr<const BallMajumdar<D>> bm) : bm_(std::move(bm)) {}
  bool exact() const override { return true; }
  void value_grad(const Sym0<D>& q, double* value, Sym0<D>* grad) const override {
    const auto sp = spectrum(q);
    if (margin_of<D>(sp.lambda) <= kEpsPhys)
      throw NonPhysicalInput("field left the physical triangle (margin " +
                             std::to_string(margin_of<D>(sp.lambda)) + ")");
    const auto e = bm_->eval_eigs(sp.lambda, 1e-12, warm_ok_ ? &warm_ : nullptr);
    warm_ = e.mu;
    warm_ok_ = true;
    if (value) *value = e.psi;
    if (grad) *grad = compose<D>(sp.frame, e.mu);
  }

 private:
  std::shared_ptr<const BallMajumdar<D>> bm_;
  mutable std::array<double, D> warm_{};  // stepper is single-threaded
  mutable bool warm_ok_ = false;
};

class TableModel2 final : public PotentialModel<2> {
 public:
  explicit TableModel2(std::shared_ptr<const PsiNTable2> t) : t_(std::move(t)) {}
  bool exact() const override { return false; }
  int mollification_N() const override { return t_->mollified().N(); }
  void value_grad(const Sym0<2>& q, double* value, Sym0<2>* grad) const override {
    const double s = std::hypot(q[0], q[1]);
    double v, dv;
    t_->value_dvalue(s, value ? &v : nullptr, grad ? &dv : nullptr);
    if (value) *value = v;
    if (grad) {
      if (s < 1e-150)
        *grad = Sym0<2>{};
      else
        *grad = Sym0<2>{{dv * q[0] / (2.0 * s), dv * q[1] / (2.0 * s)}};
    }
  }

 private:
  std::shared_ptr<const PsiNTable2> t_;
};

class TableModel3 final : public PotentialModel<3> {
 public:
  explicit TableModel3(std::shared_ptr<const PsiNTable3> t) : t_(std::move(t)) {}
  bool exact() const override { return false; }
  int mollification_N() const override { return t_->mollified().N(); }
  void value_grad(const Sym0<3>& q, double* value, Sym0<3>* grad) const override {
    const auto sp = spectrum(q);
    double v, p1, p2;
    t_->value_grad(sp.lambda[0], sp.lambda[1], &v, &p1, &p2);
    if (value) *value = v;
    if (grad) {
      const double mean = (p1 + p2) / 3.0;
      *grad = compose<3>(sp.frame, {p1 - mean, p2 - mean, -mean});
    }
  }

 private:
  std::shared_ptr<const PsiNTable3> t_;
};

/// Direct node-sum psi_N evaluation (no table); used where table construction
/// would dominate (homogeneous trajectories, spot checks).
template <int D>
class DirectMollifiedModel final : public PotentialModel<D> {
 public:
  explicit DirectMollifiedModel(std::shared_ptr<const MollifiedPotential<D>> m)
      : m_(std::move(m)) {}
  bool exact() const override { return false; }
  int mollification_N() const override { return m_->N(); }
  void value_grad(const Sym0<D>& q, double* value, Sym0<D>* grad) const override {
    const auto e = m_->eval(q);
    if (value) *value = e.value;
    if (grad) *grad = e.grad;
  }

 private:
  std::shared_ptr<const MollifiedPotential<D>> m_;
};

std::mutex g_table_mutex;
std::map<int, std::shared_ptr<const PsiNTable2>> g_tables2;
std::map<int, std::shared_ptr<const PsiNTable3>> g_tables3;

}  // namespace

std::shared_ptr<const PsiNTable2> psi_n_table_2(int N) {
  std::lock_guard<std::mutex> lock(g_table_mutex);
  auto& slot = g_tables2[N];
  if (!slot) {
    auto base = std::make_shared<BallMajumdar<2>>();
    slot = std::make_shared<PsiNTable2>(std::make_shared<MollifiedPotential<2>>(base, N));
  }
  return slot;
}

std::shared_ptr<const PsiNTable3> psi_n_table_3(int N) {
  std::lock_guard<std::mutex> lock(g_table_mutex);
  auto& slot = g_tables3[N];
  if (!slot) {
    auto base = std::make_shared<BallMajumdar<3>>();
    slot = std::make_shared<PsiNTable3>(std::make_shared<MollifiedPotential<3>>(base, N));
  }
  return slot;
}

template <>
std::shared_ptr<PotentialModel<2>> make_potential_model<2>(const SimConfig& cfg) {
  if (cfg.N == 0)
    return std::make_shared<ExactModel<2>>(std::make_shared<BallMajumdar<2>>());
  return std::make_shared<TableModel2>(psi_n_table_2(cfg.N));
}

template <>
std::shared_ptr<PotentialModel<3>> make_potential_model<3>(const SimConfig& cfg) {
  if (cfg.N == 0)
    return std::make_shared<ExactModel<3>>(std::make_shared<BallMajumdar<3>>());
  return std::make_shared<TableModel3>(psi_n_table_3(cfg.N));
}

template <int D>
std::shared_ptr<PotentialModel<D>> make_direct_mollified_model(int N) {
  auto base = std::make_shared<BallMajumdar<D>>();
  return std::make_shared<DirectMollifiedModel<D>>(
      std::make_shared<MollifiedPotential<D>>(base, N));
}
template std::shared_ptr<PotentialModel<2>> make_direct_mollified_model<2>(int);
template std::shared_ptr<PotentialModel<3>> make_direct_mollified_model<3>(int);

// ---------------------------------------------------------------------------
// pointwise algebra

namespace {

template <int D>
std::array<double, D * D> to_full_plus_id(const Sym0<D>& q) {  // A = Q + I/d
  auto a = q.full();
  for (int i = 0; i < D; ++i) a[D * i + i] += 1.0 / D;
  return a;
}

template <int D>
std::array<double, D * D> matmul(const std::array<double, D * D>& a,
                                 const std::array<double, D * D>& b) {
  std::array<double, D * D> c{};
  for (int i = 0; i < D; ++i)
    for (int k = 0; k < D; ++k) {
      const double aik = a[D * i + k];
      for (int j = 0; j < D; ++j) c[D * i + j] += aik * b[D * k + j];
    }
  return c;
}

}  // namespace

template <int D>
Sym0<D> tumbling_S(const Sym0<D>& q, const std::array<double, D * D>& gradu, double xi) {
  // gradu rows are components: gradu[i*D+j] = du_i/dx_j
  std::array<double, D * D> w{}, d{};
  for (int i = 0; i < D; ++i)
    for (int j = 0; j < D; ++j) {
      w[D * i + j] = 0.5 * (gradu[D * i + j] - gradu[D * j + i]);
      d[D * i + j] = 0.5 * (gradu[D * i + j] + gradu[D * j + i]);
    }
  const auto a = to_full_plus_id<D>(q);
  std::array<double, D * D> wl = w, wr = w;  // D0 + xi D and D0 - xi D
  for (int i = 0; i < D * D; ++i) {
    wl[i] += xi * d[i];
    wr[i] -= xi * d[i];
  }
  auto s = matmul<D>(wl, a);
  const auto ar = matmul<D>(a, wr);
  double trqgu = 0;
  const auto qf = q.full();
  for (int i = 0; i < D; ++i)
    for (int j = 0; j < D; ++j) trqgu += qf[D * i + j] * gradu[D * j + i];
  for (int i = 0; i < D * D; ++i) s[i] -= ar[i] + 2.0 * xi * a[i] * trqgu;
  return trace_free<D>(s);
}

template <int D>
std::array<double, D * D> stress_tau(const Sym0<D>& q, const Sym0<D>& h,
                                     const std::array<Sym0<D>, D>& gradq, double xi,
                                     double L) {
  const auto a = to_full_plus_id<D>(q);
  const auto hf = h.full();
  const auto ah = matmul<D>(a, hf);
  const auto ha = matmul<D>(hf, a);
  const double trqh = fdot(q, h);
  std::array<double, D * D> tau{};
  for (int i = 0; i < D; ++i)
    for (int j = 0; j < D; ++j)
      tau[D * i + j] = -xi * (ah[D * i + j] + ha[D * i + j]) + 2.0 * xi * a[D * i + j] * trqh -
                       L * fdot(gradq[i], gradq[j]);
  return tau;
}

template <int D>
std::array<double, D * D> stress_sigma(const Sym0<D>& q, const Sym0<D>& h) {
  const auto qf = q.full();
  const auto hf = h.full();
  const auto qh = matmul<D>(qf, hf);
  std::array<double, D * D> s{};
  for (int i = 0; i < D; ++i)
    for (int j = 0; j < D; ++j) s[D * i + j] = qh[D * i + j] - qh[D * j + i];
  return s;
}

template Sym0<2> tumbling_S<2>(const Sym0<2>&, const std::array<double, 4>&, double);
template Sym0<3> tumbling_S<3>(const Sym0<3>&, const std::array<double, 9>&, double);
template std::array<double, 4> stress_tau<2>(const Sym0<2>&, const Sym0<2>&,
                                             const std::array<Sym0<2>, 2>&, double, double);
template std::array<double, 9> stress_tau<3>(const Sym0<3>&, const Sym0<3>&,
                                             const std::array<Sym0<3>, 3>&, double, double);
template std::array<double, 4> stress_sigma<2>(const Sym0<2>&, const Sym0<2>&);
template std::array<double, 9> stress_sigma<3>(const Sym0<3>&, const Sym0<3>&);

// ---------------------------------------------------------------------------
// stepper

template <int D>
Stepper<D>::Stepper(const SimConfig& cfg, std::shared_ptr<PotentialModel<D>> pot)
    : cfg_(cfg), grid_(cfg.dim, cfg.n, cfg.Lambda), tr_(grid_), pot_(std::move(pot)) {
  cfg_.validate();
  if (cfg.dim != D) throw ValidationError("dim (stepper instantiation mismatch)");
  eq_.resize(grid_.nspec());
  eu_.resize(grid_.nspec());
  int j[3];
  for (std::size_t i = 0; i < grid_.nspec(); ++i) {
    grid_.decode(i, j);
    double k2 = 0;
    for (int a = 0; a < D; ++a) {
      const double k = grid_.kwave(j[a]);
      k2 += k * k;
    }
    eq_[i] = std::exp(-cfg_.gamma * cfg_.L * k2 * cfg_.dt);
    eu_[i] = std::exp(-cfg_.nu * k2 * cfg_.dt);
  }
  if (cfg_.M > 0) gmask_ = galerkin_mask(grid_, cfg_.M);
}

template <int D>
void Stepper<D>::enforce(SpecField& qh, SpecField& uh) const {
  dealias(qh);
  dealias(uh);
  leray_project(uh);
  if (!gmask_.empty()) galerkin_truncate(uh, gmask_);
}

template <int D>
State<D> Stepper<D>::make_state(const RealField& q0, const RealField& u0) const {
  constexpr int NC = Sym0<D>::NC;
  if (q0.channels != NC || u0.channels != D)
    throw GridMismatch("make_state: channel counts must be (NC, d)");
  State<D> s;
  tr_.forward(q0, s.qhat);
  tr_.forward(u0, s.uhat);
  enforce(s.qhat, s.uhat);
  return s;
}

template <int D>
void Stepper<D>::quantize(State<D>& s, RealField& q, RealField& u) const {
  tr_.inverse(s.qhat, q);
  tr_.inverse(s.uhat, u);
  const double t = s.t;
  const long long step = s.step;
  s = make_state(q, u);
  s.t = t;
  s.step = step;
}

template <int D>
void Stepper<D>::assemble_into(const SpecField& qh, const SpecField& uh,
                               FieldAssembly<D>& fa, bool with_value) const {
  constexpr int NC = Sym0<D>::NC;
  const Grid& g = grid_;
  tr_.inverse(qh, fa.q);
  tr_.inverse(uh, fa.u);
  {
    double mx = 0;
    for (const double x : fa.q.v) mx = std::max(mx, std::fabs(x));
    for (const double x : fa.u.v) mx = std::max(mx, std::fabs(x));
    if (!(mx < 1e8))
      throw BlowUp("field magnitude " + std::to_string(mx) + " exceeds 1e8");
  }

  SpecField tmp;
  RealField slice;
  fa.gradu = RealField(g, D * D);
  for (int a = 0; a < D; ++a) {
    derivative(uh, a, 1, tmp);
    tr_.inverse(tmp, slice);
    for (int b = 0; b < D; ++b)
      std::copy_n(slice.ch(b), g.npoints(), fa.gradu.ch(a * D + b));
  }
  fa.gradq = RealField(g, D * NC);
  for (int a = 0; a < D; ++a) {
    derivative(qh, a, 1, tmp);
    tr_.inverse(tmp, slice);
    for (int c = 0; c < NC; ++c)
      std::copy_n(slice.ch(c), g.npoints(), fa.gradq.ch(a * NC + c));
  }
  // Laplacian: sum of second derivatives
  {
    SpecField lap(g, NC);
    for (int a = 0; a < D; ++a) {
      derivative(qh, a, 2, tmp);
      for (std::size_t i = 0; i < lap.v.size(); ++i) lap.v[i] += tmp.v[i];
    }
    tr_.inverse(lap, fa.lapq);
  }

  fa.pot_grad = RealField(g, NC);
  if (with_value) fa.pot_val = RealField(g, 1);
  fa.h = RealField(g, NC);
  const std::size_t np = g.npoints();
  std::size_t at = 0;
  try {
    for (at = 0; at < np; ++at) {
      Sym0<D> qp;
      for (int c = 0; c < NC; ++c) qp[c] = fa.q.ch(c)[at];
      Sym0<D> gp;
      double vp = 0;
      pot_->value_grad(qp, with_value ? &vp : nullptr, &gp);
      if (with_value) fa.pot_val.ch(0)[at] = vp;
      for (int c = 0; c < NC; ++c) {
        fa.pot_grad.ch(c)[at] = gp[c];
        fa.h.ch(c)[at] = cfg_.L * fa.lapq.ch(c)[at] - cfg_.theta * gp[c] + cfg_.kappa * qp[c];
      }
    }
  } catch (const NonPhysicalInput& e) {
    throw NonPhysicalInput(std::string(e.what()) + " at grid point " + std::to_string(at));
  }
}

template <int D>
FieldAssembly<D> Stepper<D>::assemble(const State<D>& s, bool with_value) const {
  FieldAssembly<D> fa;
  assemble_into(s.qhat, s.uhat, fa, with_value);
  return fa;
}

template <int D>
void Stepper<D>::rhs_explicit(const SpecField& qh, const SpecField& uh, SpecField& dq,
                              SpecField& du) const {
  constexpr int NC = Sym0<D>::NC;
  const Grid& g = grid_;
  FieldAssembly<D> fa;
  assemble_into(qh, uh, fa, false);

  RealField dqdt(g, NC), advu(g, D), ts(g, D * D);
  const std::size_t np = g.npoints();
  for (std::size_t i = 0; i < np; ++i) {
    Sym0<D> qp, hp;
    for (int c = 0; c < NC; ++c) {
      qp[c] = fa.q.ch(c)[i];
      hp[c] = fa.h.ch(c)[i];
    }
    std::array<double, D * D> gu;  // (grad u)_{ab} = du_a/dx_b
    for (int a = 0; a < D; ++a)
      for (int b = 0; b < D; ++b) gu[D * a + b] = fa.gradu.ch(b * D + a)[i];
    std::array<Sym0<D>, D> gq;
    for (int a = 0; a < D; ++a)
      for (int c = 0; c < NC; ++c) gq[a][c] = fa.gradq.ch(a * NC + c)[i];

    const Sym0<D> s = tumbling_S<D>(qp, gu, cfg_.xi);
    for (int c = 0; c < NC; ++c) {
      double adv = 0;
      for (int a = 0; a < D; ++a) adv += fa.u.ch(a)[i] * gq[a][c];
      dqdt.ch(c)[i] = -adv + s[c] + cfg_.gamma * (-cfg_.theta * fa.pot_grad.ch(c)[i] +
                                                  cfg_.kappa * qp[c]);
    }
    const auto tau = stress_tau<D>(qp, hp, gq, cfg_.xi, cfg_.L);
    const auto sig = stress_sigma<D>(qp, hp);
    for (int a = 0; a < D * D; ++a) ts.ch(a)[i] = tau[a] + sig[a];
    for (int b = 0; b < D; ++b) {
      double adv = 0;
      for (int a = 0; a < D; ++a) adv += fa.u.ch(a)[i] * fa.gradu.ch(a * D + b)[i];
      advu.ch(b)[i] = adv;
    }
  }

  tr_.forward(dqdt, dq);
  dealias(dq);

  SpecField au, tsh;
  tr_.forward(advu, au);
  tr_.forward(ts, tsh);
  dealias(au);
  dealias(tsh);
  if (du.grid == nullptr || !(*du.grid == g) || du.channels != D) du = SpecField(g, D);
  int j[3];
  for (std::size_t i = 0; i < g.nspec(); ++i) {
    g.decode(i, j);
    double k[3] = {g.kwave(j[0]), g.kwave(j[1]), g.kwave(j[2])};
    for (int b = 0; b < D; ++b) {
      std::complex<double> divts{0, 0};
      for (int a = 0; a < D; ++a)
        divts += std::complex<double>(0, k[a]) * tsh.ch(b * D + a)[i];
      du.ch(b)[i] = -au.ch(b)[i] + divts;
    }
  }
  // the advective term integrates to zero for divergence-free u
  for (int b = 0; b < D; ++b) du.ch(b)[0] = 0.0;
  leray_project(du);
}

template <int D>
void Stepper<D>::step(State<D>& s, SpecField* stage_q, SpecField* stage_u) const {
  const Grid& g = grid_;
  const double dt = cfg_.dt;
  constexpr int NC = Sym0<D>::NC;

  SpecField k1q, k1u, k2q, k2u;
  rhs_explicit(s.qhat, s.uhat, k1q, k1u);

  SpecField qs(g, NC), us(g, D);
  for (int c = 0; c < NC; ++c)
    for (std::size_t i = 0; i < g.nspec(); ++i)
      qs.ch(c)[i] = eq_[i] * (s.qhat.ch(c)[i] + dt * k1q.ch(c)[i]);
  for (int c = 0; c < D; ++c)
    for (std::size_t i = 0; i < g.nspec(); ++i)
      us.ch(c)[i] = eu_[i] * (s.uhat.ch(c)[i] + dt * k1u.ch(c)[i]);
  enforce(qs, us);

  rhs_explicit(qs, us, k2q, k2u);
  if (stage_q) *stage_q = qs;
  if (stage_u) *stage_u = us;

  for (int c = 0; c < NC; ++c)
    for (std::size_t i = 0; i < g.nspec(); ++i)
      s.qhat.ch(c)[i] = eq_[i] * (s.qhat.ch(c)[i] + 0.5 * dt * k1q.ch(c)[i]) +
                        0.5 * dt * k2q.ch(c)[i];
  for (int c = 0; c < D; ++c)
    for (std::size_t i = 0; i < g.nspec(); ++i)
      s.uhat.ch(c)[i] = eu_[i] * (s.uhat.ch(c)[i] + 0.5 * dt * k1u.ch(c)[i]) +
                        0.5 * dt * k2u.ch(c)[i];
  enforce(s.qhat, s.uhat);

  s.step += 1;
  s.t = static_cast<double>(s.step) * dt;

  double mx = 0;
  for (const auto& z : s.qhat.v) mx = std::max(mx, std::abs(z));
  for (const auto& z : s.uhat.v) mx = std::max(mx, std::abs(z));
  if (!(mx < 1e8))
    throw BlowUp("field magnitude " + std::to_string(mx) + " at t = " + std::to_string(s.t));
}

template <int D>
State<D> run(Stepper<D>& st, State<D> s, const RunHooks<D>& hooks) {
  const long long steps = st.config().total_steps();
  auto record = [&](const State<D>& state) {
    if (hooks.on_record) hooks.on_record(state, make_energy_record(st, state));
  };
  RealField qr, ur;
  auto snapshot = [&](State<D>& state) {
    st.quantize(state, qr, ur);  // part of the trajectory: see quantize()
    if (hooks.on_snapshot) hooks.on_snapshot(state, qr, ur);
  };
  // a restarted state is already at a synchronization point
  if (s.step == 0) snapshot(s);
  record(s);
  // cadences keyed to the absolute step index so restarts line up
  for (long long k = s.step + 1; k <= steps; ++k) {
    st.step(s);
    const bool last = (k == steps);
    const bool snap =
        (st.config().snapshot_every > 0 && k % st.config().snapshot_every == 0) || last;
    if (snap) st.quantize(s, qr, ur);
    if (k % st.config().record_every == 0 || last) record(s);
    if (snap && hooks.on_snapshot) hooks.on_snapshot(s, qr, ur);
  }
  return s;
}

template <int D>
Sym0<D> homogeneous_step(const Sym0<D>& q, const SimConfig& cfg,
                         const PotentialModel<D>& pot) {
  auto f = [&](const Sym0<D>& x) {
    Sym0<D> gp;
    pot.value_grad(x, nullptr, &gp);
    Sym0<D> r;
    for (int c = 0; c < Sym0<D>::NC; ++c)
      r[c] = cfg.gamma * (-cfg.theta * gp[c] + cfg.kappa * x[c]);
    return r;
  };
  const Sym0<D> k1 = f(q);
  Sym0<D> mid = q;
  for (int c = 0; c < Sym0<D>::NC; ++c) mid[c] += cfg.dt * k1[c];
  const Sym0<D> k2 = f(mid);
  Sym0<D> out = q;
  for (int c = 0; c < Sym0<D>::NC; ++c) out[c] += 0.5 * cfg.dt * (k1[c] + k2[c]);
  return out;
}

template class Stepper<2>;
template class Stepper<3>;
template State<2> run<2>(Stepper<2>&, State<2>, const RunHooks<2>&);
template State<3> run<3>(Stepper<3>&, State<3>, const RunHooks<3>&);
template Sym0<2> homogeneous_step<2>(const Sym0<2>&, const SimConfig&,
                                     const PotentialModel<2>&);
template Sym0<3> homogeneous_step<3>(const Sym0<3>&, const SimConfig&,
                                     const PotentialModel<3>&);

}  // namespace nmq
