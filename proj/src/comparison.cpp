#include "nmq/comparison.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nmq/errors.hpp"

namespace nmq {

AdvectDiffuse::AdvectDiffuse(const Transformer& tr, double kdiff, double dt)
    : tr_(tr), dt_(dt) {
  const Grid& g = tr.grid();
  e_.resize(g.nspec());
  int j[3];
  for (std::size_t i = 0; i < g.nspec(); ++i) {
    g.decode(i, j);
    double k2 = 0;
    for (int a = 0; a < g.dim(); ++a) k2 += g.kwave(j[a]) * g.kwave(j[a]);
    e_[i] = std::exp(-kdiff * k2 * dt);
  }
}

void AdvectDiffuse::nonlinear(const SpecField& gh, const SpecField* uhat,
                              const SpecField* source, SpecField& out) const {
  const Grid& g = tr_.grid();
  if (out.grid == nullptr || !(*out.grid == g) || out.channels != 1)
    out = SpecField(g, 1);
  std::fill(out.v.begin(), out.v.end(), std::complex<double>(0, 0));
  if (uhat) {
    RealField u, dg;
    tr_.inverse(*uhat, u);
    RealField adv(g, 1);
    SpecField tmp;
    for (int a = 0; a < g.dim(); ++a) {
      derivative(gh, a, 1, tmp);
      tr_.inverse(tmp, dg);
      const double* ua = u.ch(a);
      const double* d = dg.ch(0);
      double* dst = adv.ch(0);
      for (std::size_t i = 0; i < g.npoints(); ++i) dst[i] += ua[i] * d[i];
    }
    tr_.forward(adv, out);
    dealias(out);
    out.ch(0)[0] = 0.0;  // div-form advection integrates to zero
    for (auto& z : out.v) z = -z;
  }
  if (source) {
    const auto* src = source->ch(0);
    auto* dst = out.ch(0);
    for (std::size_t i = 0; i < g.nspec(); ++i) dst[i] += src[i];
  }
}

void AdvectDiffuse::step_stages(SpecField& gh, const SpecField* u1, const SpecField* u2,
                                const SpecField* src1, const SpecField* src2) const {
  const Grid& g = tr_.grid();
  SpecField k1, k2;
  nonlinear(gh, u1, src1, k1);
  SpecField gs(g, 1);
  for (std::size_t i = 0; i < g.nspec(); ++i)
    gs.ch(0)[i] = e_[i] * (gh.ch(0)[i] + dt_ * k1.ch(0)[i]);
  dealias(gs);
  nonlinear(gs, u2, src2, k2);
  for (std::size_t i = 0; i < g.nspec(); ++i)
    gh.ch(0)[i] = e_[i] * (gh.ch(0)[i] + 0.5 * dt_ * k1.ch(0)[i]) + 0.5 * dt_ * k2.ch(0)[i];
  dealias(gh);
}

void AdvectDiffuse::step(SpecField& gh, const SpecField* uhat,
                         const SpecField* source) const {
  step_stages(gh, uhat, uhat, source, source);
}

namespace {

template <int D>
void source_field(const Transformer& tr, const SpecField& qh, double coef,
                  SpecField& out) {
  const Grid& g = tr.grid();
  RealField q;
  tr.inverse(qh, q);
  RealField s(g, 1);
  for (std::size_t i = 0; i < g.npoints(); ++i) {
    Sym0<D> x;
    for (int c = 0; c < Sym0<D>::NC; ++c) x[c] = q.ch(c)[i];
    s.ch(0)[i] = coef * fdot(x, x);
  }
  tr.forward(s, out);
  dealias(out);
}

double sup_abs(const RealField& f) {
  double m = 0;
  for (const double x : f.v) m = std::max(m, std::fabs(x));
  return m;
}

}  // namespace

template <int D>
CertificateReport certify(
    Stepper<D>& st, const State<D>& s0,
    const std::function<void(long long, const RealField&, const RealField&)>& on_checkpoint) {
  const SimConfig& c = st.config();
  if (c.xi != 0)
    throw ConfigMismatch("certificate requires a xi = 0 trajectory (got xi = " +
                         std::to_string(c.xi) + ")");
  if (st.potential().exact())
    throw ConfigMismatch("certificate requires a mollified potential (N >= 1)");
  const Grid& g = st.grid();
  const Transformer& tr = st.transformer();
  const double src_coef = c.gamma * c.kappa * c.kappa / (2.0 * c.theta);

  State<D> s = s0;
  auto fa0 = st.assemble(s, true);
  const double mean0 = mean(fa0.pot_val, 0);

  SpecField Gh, Hh(g, 1);
  {
    RealField g0(g, 1);
    for (std::size_t i = 0; i < g.npoints(); ++i)
      g0.ch(0)[i] = fa0.pot_val.ch(0)[i] - mean0;
    tr.forward(g0, Gh);
    Hh.ch(0)[0] = mean0;
  }

  AdvectDiffuse ad(tr, c.gamma * c.L, c.dt);
  CertificateReport rep;
  rep.max_defect = -std::numeric_limits<double>::infinity();
  double psi_sup_traj = -std::numeric_limits<double>::infinity();

  RealField Gr, Hr;
  auto emit = [&](const FieldAssembly<D>& fa, double t) {
    tr.inverse(Gh, Gr);
    tr.inverse(Hh, Hr);
    CertificateRow row;
    row.t = t;
    row.psi_sup = -std::numeric_limits<double>::infinity();
    row.defect_sup = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < g.npoints(); ++i) {
      const double psi = fa.pot_val.ch(0)[i];
      row.psi_sup = std::max(row.psi_sup, psi);
      row.defect_sup =
          std::max(row.defect_sup, psi - Gr.ch(0)[i] - Hr.ch(0)[i]);
    }
    row.g_sup = sup_abs(Gr);
    row.hc_sup = sup_abs(Hr);
    rep.rows.push_back(row);
    rep.max_defect = std::max(rep.max_defect, row.defect_sup);
    psi_sup_traj = std::max(psi_sup_traj, std::fabs(row.psi_sup));
    rep.hc_linf_measured = std::max(rep.hc_linf_measured, row.hc_sup);
  };
  emit(fa0, 0.0);

  // s0 is expected to come from the stored initial snapshot, i.e. it is
  // already at a synchronization point; re-quantizing would leave the
  // original trajectory
  const long long steps = c.total_steps();
  SpecField u1, src1, src2, qs, us;
  RealField qr, ur;
  for (long long k = 1; k <= steps; ++k) {
    u1 = s.uhat;
    source_field<D>(tr, s.qhat, src_coef, src1);
    st.step(s, &qs, &us);
    source_field<D>(tr, qs, src_coef, src2);
    ad.step_stages(Gh, &u1, &us, nullptr, nullptr);
    ad.step_stages(Hh, &u1, &us, &src1, &src2);
    const bool snap = (c.snapshot_every > 0 && k % c.snapshot_every == 0) || k == steps;
    if (snap) {  // same synchronization points as run()
      st.quantize(s, qr, ur);
      if (on_checkpoint) on_checkpoint(k, qr, ur);
    }
    if (k % c.record_every == 0 || k == steps) {
      const auto fa = st.assemble(s, true);
      emit(fa, s.t);
    }
  }

  rep.tol = 5e-3 * (1.0 + psi_sup_traj);
  rep.pass = rep.max_defect <= rep.tol;
  rep.hc_linf_bound =
      (std::fabs(mean0) + c.gamma * c.kappa * c.kappa / (2.0 * c.theta)) * std::exp(c.T);
  return rep;
}

template CertificateReport certify<2>(
    Stepper<2>&, const State<2>&,
    const std::function<void(long long, const RealField&, const RealField&)>&);
template CertificateReport certify<3>(
    Stepper<3>&, const State<3>&,
    const std::function<void(long long, const RealField&, const RealField&)>&);

std::vector<DecayPoint> heat_decay_check(const Transformer& tr, const RealField& g0,
                                         const SpecField* frozen_u, double kdiff,
                                         double dt, double T, double gamma_exp,
                                         int sample_every) {
  const Grid& g = tr.grid();
  const double m = mean(g0, 0);
  if (std::fabs(m) > 1e-10)
    throw NonZeroMean("heat decay check needs zero-mean data, mean = " + std::to_string(m));
  double l1 = 0;
  for (const double x : g0.v) l1 += std::fabs(x);
  l1 *= g.volume() / static_cast<double>(g.npoints());

  SpecField gh;
  tr.forward(g0, gh);
  AdvectDiffuse ad(tr, kdiff, dt);
  const long long steps = std::llround(T / dt);
  std::vector<DecayPoint> out;
  RealField gr;
  for (long long k = 1; k <= steps; ++k) {
    ad.step(gh, frozen_u, nullptr);
    if (k % sample_every == 0 || k == steps) {
      tr.inverse(gh, gr);
      DecayPoint p;
      p.t = k * dt;
      p.sup = sup_abs(gr);
      p.ratio = p.sup * std::pow(p.t, 0.5 * g.dim() + gamma_exp) / l1;
      out.push_back(p);
    }
  }
  return out;
}

}  // namespace nmq
