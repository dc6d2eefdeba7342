#include "nmq/mollified.hpp"

#include <algorithm>
#include <cmath>

#include "nmq/errors.hpp"

namespace nmq {

namespace {

// C^infty bump profile on [0,1), unit value scale (normalization happens when
// the node weights are summed)
inline double bump(double rho2) {
  return (rho2 < 1.0) ? std::exp(-1.0 / (1.0 - rho2)) : 0.0;
}

constexpr int kPerms3[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2},
                               {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};

}  // namespace

template <int D>
MollifiedPotential<D>::MollifiedPotential(std::shared_ptr<const BallMajumdar<D>> base,
                                          int N, int J, int nodes_per_dim)
    : base_(std::move(base)), n_(N), j_(J > 0 ? J : N), radius_(1.0 / N) {
  if (N < 1) throw ValidationError("mollification index N must be >= 1");
  if constexpr (D == 3)
    inner_ = std::make_shared<BallMajumdar<3>>(32, 64);
  else
    inner_ = base_;
  const int npd = nodes_per_dim > 0 ? nodes_per_dim : (D == 2 ? 16 : 4);

  std::vector<double> gx, gw;
  gauss_legendre(npd, gx, gw);

  // tensor product over the bump box, nodes outside the ball dropped
  std::array<int, NC> ix{};
  double wsum = 0;
  for (;;) {
    std::array<double, NC> y;
    double w = 1.0, rho2 = 0;
    for (int d = 0; d < NC; ++d) {
      y[d] = radius_ * gx[ix[d]];
      w *= gw[ix[d]];
      rho2 += gx[ix[d]] * gx[ix[d]];
    }
    const double b = bump(rho2);
    if (b > 0) {
      nodes_.push_back(y);
      wts_.push_back(w * b);
      wsum += w * b;
    }
    int d = 0;
    for (; d < NC; ++d) {
      if (++ix[d] < npd) break;
      ix[d] = 0;
    }
    if (d == NC) break;
  }
  for (auto& w : wts_) w /= wsum;

  std::array<double, D> zero{};
  psi_at_0_ = base_->eval_eigs(zero).psi;
  shift_ = raw_value_grad(zero, nullptr) - psi_at_0_;
}

template <>
double MollifiedPotential<2>::raw_value_grad(const std::array<double, 2>& lambda,
                                             std::array<double, 2>* grad) const {
  constexpr double s2 = 1.4142135623730950488;
  const double s = 0.5 * std::fabs(lambda[1] - lambda[0]);
  const double z0 = s2 * s;

  double val = 0, dvds = 0;
  std::array<double, 2> pwarm{}, muwarm{};
  bool first = true;
  for (std::size_t k = 0; k < nodes_.size(); ++k) {
    const double dzx = z0 - nodes_[k][0];
    const double dzy = -nodes_[k][1];
    const double r = std::hypot(dzx, dzy);
    const double t = r / s2;
    double v = 0;
    const std::array<double, 2> le{-t, t};
    const auto a = base_->prox_eigs(le, j_, first ? nullptr : &pwarm, &v, nullptr,
                                    first ? nullptr : &muwarm);
    pwarm = a;
    first = false;
    val += wts_[k] * v;
    if (grad && r > 1e-300) {
      const double fjp = 2.0 * j_ * ((t - a[1]) - (-t - a[0]));  // dF/dt, envelope
      dvds += wts_[k] * fjp * dzx / r;                           // dt/ds = dzx/r
    }
  }
  if (grad) {
    const double g = 0.5 * dvds;
    if (lambda[1] >= lambda[0])
      *grad = {-g, g};
    else
      *grad = {g, -g};
  }
  return val;
}

template <>
double MollifiedPotential<3>::raw_value_grad(const std::array<double, 3>& lambda,
                                             std::array<double, 3>* grad) const {
  double val = 0;
  std::array<double, 3> acc{};
  for (const auto& p : kPerms3) {
    const std::array<double, 3> pl{lambda[p[0]], lambda[p[1]], lambda[p[2]]};
    std::array<double, 3> pwarm{}, muwarm{};
    bool first = true;
    std::array<double, 3> gper{};
    for (std::size_t k = 0; k < nodes_.size(); ++k) {
      const Sym0<3> y = from_iso(nodes_[k]);
      Sym0<3> m;
      m[0] = pl[0] - y[0];
      m[1] = pl[1] - y[1];
      m[2] = -y[2];
      m[3] = -y[3];
      m[4] = -y[4];
      const auto sp = spectrum(m);
      double v = 0;
      const auto a = inner_->prox_eigs(sp.lambda, j_, first ? nullptr : &pwarm, &v,
                                       nullptr, first ? nullptr : &muwarm);
      pwarm = a;
      first = false;
      val += wts_[k] * v / 6.0;
      if (grad) {
        double gj[3];
        for (int jj = 0; jj < 3; ++jj) gj[jj] = 2.0 * j_ * (sp.lambda[jj] - a[jj]);
        for (int i = 0; i < 3; ++i) {
          double gi = 0;
          for (int jj = 0; jj < 3; ++jj) {
            const double vij = sp.frame[3 * i + jj];
            gi += gj[jj] * vij * vij;
          }
          gper[i] += wts_[k] * gi / 6.0;
        }
      }
    }
    if (grad)
      for (int i = 0; i < 3; ++i) acc[p[i]] += gper[i];
  }
  if (grad) {
    const double mean = (acc[0] + acc[1] + acc[2]) / 3.0;
    for (int i = 0; i < 3; ++i) (*grad)[i] = acc[i] - mean;
  }
  return val;
}

template <int D>
void MollifiedPotential<D>::value_grad_eigs(const std::array<double, D>& lambda,
                                            double* value,
                                            std::array<double, D>* grad) const {
  const double raw = raw_value_grad(lambda, grad);
  if (value) *value = raw - shift_;
}

template <int D>
typename MollifiedPotential<D>::Eval MollifiedPotential<D>::eval(const Sym0<D>& q) const {
  const auto sp = spectrum(q);
  Eval out;
  std::array<double, D> g{};
  value_grad_eigs(sp.lambda, &out.value, &g);
  out.grad = compose<D>(sp.frame, g);
  return out;
}

template class MollifiedPotential<2>;
template class MollifiedPotential<3>;

PsiNTable2::PsiNTable2(std::shared_ptr<const MollifiedPotential<2>> m, double smax,
                       int nodes)
    : m_(std::move(m)), smax_(smax) {
  const int n = nodes > 0 ? nodes : std::clamp(256 * m_->N(), 2048, 16384);
  ds_ = smax_ / n;
  f_.resize(n + 1);
  df_.resize(n + 1);

  // dense Hermite profile of psi_J(t) (1-D prox sweep, warm-started), then
  // the bump sum is assembled from the profile; entries and their slopes stay
  // exact derivatives of one another by the chain rule
  const double J = m_->J();
  const double tmax = smax_ + m_->radius() + 0.05;
  const int nt = std::max(16384, 4 * n);
  const double dt = tmax / nt;
  std::vector<double> fj(nt + 1), dfj(nt + 1);
  std::array<double, 2> pwarm{}, muwarm{};
  bool first = true;
  for (int i = 0; i <= nt; ++i) {
    const double t = i * dt;
    double v = 0;
    const auto a = m_->inner_->prox_eigs({-t, t}, J, first ? nullptr : &pwarm, &v,
                                         nullptr, first ? nullptr : &muwarm);
    pwarm = a;
    first = false;
    fj[i] = v;
    dfj[i] = 2.0 * J * ((t - a[1]) - (-t - a[0]));
  }
  auto profile = [&](double t, double* v, double* dv) {
    const int i = std::min(static_cast<int>(t / dt), nt - 1);
    const double x = t / dt - i;
    const double x2 = x * x, x3 = x2 * x;
    const double f0 = fj[i], f1 = fj[i + 1], d0 = dfj[i] * dt, d1 = dfj[i + 1] * dt;
    *v = (2 * x3 - 3 * x2 + 1) * f0 + (x3 - 2 * x2 + x) * d0 +
         (-2 * x3 + 3 * x2) * f1 + (x3 - x2) * d1;
    *dv = ((6 * x2 - 6 * x) * f0 + (3 * x2 - 4 * x + 1) * d0 +
           (-6 * x2 + 6 * x) * f1 + (3 * x2 - 2 * x) * d1) /
          dt;
  };

  constexpr double s2 = 1.4142135623730950488;
  const auto& nodes_y = m_->nodes_;
  const auto& w = m_->wts_;
  for (int i = 0; i <= n; ++i) {
    const double s = i * ds_;
    const double z0 = s2 * s;
    double val = 0, dvds = 0;
    for (std::size_t k = 0; k < nodes_y.size(); ++k) {
      const double dzx = z0 - nodes_y[k][0];
      const double dzy = -nodes_y[k][1];
      const double r = std::hypot(dzx, dzy);
      double v, dv;
      profile(r / s2, &v, &dv);
      val += w[k] * v;
      if (r > 1e-300) dvds += w[k] * dv * dzx / r;
    }
    f_[i] = val - m_->shift();
    df_[i] = dvds;
  }
}

void PsiNTable2::value_dvalue(double s, double* v, double* dv) const {
  double sign = 1.0;
  if (s < 0) {
    s = -s;
    sign = -1.0;
  }
  if (s >= smax_) {
    std::array<double, 2> g{};
    double val = 0;
    m_->value_grad_eigs({-s, s}, &val, &g);
    if (v) *v = val;
    if (dv) *dv = sign * 2.0 * g[1];
    return;
  }
  const int i = std::min(static_cast<int>(s / ds_), static_cast<int>(f_.size()) - 2);
  const double t = s / ds_ - i;
  const double f0 = f_[i], f1 = f_[i + 1];
  const double d0 = df_[i] * ds_, d1 = df_[i + 1] * ds_;
  const double t2 = t * t, t3 = t2 * t;
  if (v)
    *v = (2 * t3 - 3 * t2 + 1) * f0 + (t3 - 2 * t2 + t) * d0 +
         (-2 * t3 + 3 * t2) * f1 + (t3 - t2) * d1;
  if (dv)
    *dv = sign *
          ((6 * t2 - 6 * t) * f0 + (3 * t2 - 4 * t + 1) * d0 +
           (-6 * t2 + 6 * t) * f1 + (3 * t2 - 2 * t) * d1) /
          ds_;
}

PsiNTable3::PsiNTable3(std::shared_ptr<const MollifiedPotential<3>> m, double range,
                       int nodes)
    : m_(std::move(m)), range_(range), nb_(nodes) {
  h_ = 2.0 * range_ / (nb_ - 1);
  const int total = nb_ * nb_;
  f_.resize(total);
  f1_.resize(total);
  f2_.resize(total);
  f12_.resize(total);
  for (int i = 0; i < nb_; ++i) {
    const double l1 = -range_ + i * h_;
    for (int j = 0; j < nb_; ++j) {
      const double l2 = -range_ + j * h_;
      std::array<double, 3> g{};
      double v = 0;
      m_->value_grad_eigs({l1, l2, -l1 - l2}, &v, &g);
      f_[idx(i, j)] = v;
      // partials in the (l1, l2) chart with l3 = -l1-l2
      f1_[idx(i, j)] = g[0] - g[2];
      f2_[idx(i, j)] = g[1] - g[2];
    }
  }
  for (int i = 0; i < nb_; ++i)
    for (int j = 0; j < nb_; ++j) {
      const int jm = std::max(j - 1, 0), jp = std::min(j + 1, nb_ - 1);
      f12_[idx(i, j)] = (f1_[idx(i, jp)] - f1_[idx(i, jm)]) / ((jp - jm) * h_);
    }
}

namespace {
inline void hermite_basis(double t, double h[4], double dh[4]) {
  const double t2 = t * t, t3 = t2 * t;
  h[0] = 2 * t3 - 3 * t2 + 1;
  h[1] = t3 - 2 * t2 + t;
  h[2] = -2 * t3 + 3 * t2;
  h[3] = t3 - t2;
  dh[0] = 6 * t2 - 6 * t;
  dh[1] = 3 * t2 - 4 * t + 1;
  dh[2] = -6 * t2 + 6 * t;
  dh[3] = 3 * t2 - 2 * t;
}
}  // namespace

void PsiNTable3::value_grad(double l1, double l2, double* v, double* g1, double* g2) const {
  if (std::fabs(l1) >= range_ || std::fabs(l2) >= range_) {
    std::array<double, 3> g{};
    double val = 0;
    m_->value_grad_eigs({l1, l2, -l1 - l2}, &val, &g);
    if (v) *v = val;
    if (g1) *g1 = g[0] - g[2];
    if (g2) *g2 = g[1] - g[2];
    return;
  }
  const double x = (l1 + range_) / h_, y = (l2 + range_) / h_;
  const int i = std::min(static_cast<int>(x), nb_ - 2);
  const int j = std::min(static_cast<int>(y), nb_ - 2);
  const double u = x - i, w = y - j;
  double hu[4], dhu[4], hw[4], dhw[4];
  hermite_basis(u, hu, dhu);
  hermite_basis(w, hw, dhw);
  // corner data rows: [F, h*Fx] x [F, h*Fy] pattern per Hermite tensor patch
  const int c[2] = {idx(i, j), idx(i + 1, j)};
  double val = 0, du = 0, dw = 0;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      const int id = c[a] + b;
      const double F = f_[id];
      const double Fx = f1_[id] * h_;
      const double Fy = f2_[id] * h_;
      const double Fxy = f12_[id] * h_ * h_;
      const double hua = hu[a * 2], huad = hu[a * 2 + 1];
      const double hwb = hw[b * 2], hwbd = hw[b * 2 + 1];
      const double dhua = dhu[a * 2], dhuad = dhu[a * 2 + 1];
      const double dhwb = dhw[b * 2], dhwbd = dhw[b * 2 + 1];
      val += hua * hwb * F + huad * hwb * Fx + hua * hwbd * Fy + huad * hwbd * Fxy;
      du += dhua * hwb * F + dhuad * hwb * Fx + dhua * hwbd * Fy + dhuad * hwbd * Fxy;
      dw += hua * dhwb * F + huad * dhwb * Fx + hua * dhwbd * Fy + huad * dhwbd * Fxy;
    }
  if (v) *v = val;
  if (g1) *g1 = du / h_;
  if (g2) *g2 = dw / h_;
}

}  // namespace nmq
