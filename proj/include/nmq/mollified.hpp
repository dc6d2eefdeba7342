// mollified.hpp -- the regularized potentials psi_N: Moreau-Yosida psi_{J=N}
// convolved with a radial C^infty bump of radius 1/N in Frobenius-orthonormal
// Sym0 coordinates, normalized so psi_N(0) = psi(0).
//
// The convolution is a fixed positive-weight node sum evaluated through the
// eigenvalue representation with the node set symmetrized over eigenvalue
// permutations. That makes psi_N exactly isotropic and exactly convex
// (a symmetric convex function of eigenvalues) independent of the quadrature
// resolution; the resolution only controls how closely the ideal mollified
// map is approximated.
#pragma once

#include <array>
#include <memory>
#include <vector>

#include "nmq/potential.hpp"
#include "nmq/sym0.hpp"

namespace nmq {

template <int D>
class MollifiedPotential {
 public:
  static constexpr int NC = Sym0<D>::NC;

  /// J defaults to N; nodes_per_dim defaults to 16 (d=2) / 5 (d=3).
  MollifiedPotential(std::shared_ptr<const BallMajumdar<D>> base, int N, int J = 0,
                     int nodes_per_dim = 0);

  int N() const { return n_; }
  double J() const { return j_; }
  double radius() const { return radius_; }
  double psi0() const { return psi_at_0_; }  // psi(0) = -log|S^{d-1}|
  double shift() const { return shift_; }
  const BallMajumdar<D>& base() const { return *base_; }
  std::shared_ptr<const BallMajumdar<D>> base_ptr() const { return base_; }

  struct Eval {
    double value = 0;
    Sym0<D> grad;
  };
  /// Total on Sym0 (non-physical Q allowed).
  Eval eval(const Sym0<D>& q) const;
  double value(const Sym0<D>& q) const { return eval(q).value; }

  /// Eigenvalue-space value and tangent gradient (gamma with sum gamma_i = 0,
  /// matching the lambda ordering). grad may be null.
  void value_grad_eigs(const std::array<double, D>& lambda, double* value,
                       std::array<double, D>* grad) const;

  /// bump node offsets (iso coordinates) and their positive weights (sum 1)
  const std::vector<std::array<double, NC>>& bump_nodes() const { return nodes_; }
  const std::vector<double>& bump_weights() const { return wts_; }

 private:
  std::shared_ptr<const BallMajumdar<D>> base_;
  // d=3 node loops run their prox solves on the 32x64 minimum rule; the
  // mollifier's structural properties do not depend on the rule, and the
  // value deviation stays ~1e-11 (checked in tests against the 64x128 rule)
  std::shared_ptr<const BallMajumdar<D>> inner_;
  int n_ = 0;
  double j_ = 0;
  double radius_ = 0;
  double psi_at_0_ = 0;
  double shift_ = 0;
  // bump nodes in iso coordinates, weights positive, sum = 1, set symmetric
  // under y -> -y
  std::vector<std::array<double, NC>> nodes_;
  std::vector<double> wts_;

  double raw_value_grad(const std::array<double, D>& lambda,
                        std::array<double, D>* grad) const;

  friend class PsiNTable2;
};

template <>
double MollifiedPotential<2>::raw_value_grad(const std::array<double, 2>&,
                                             std::array<double, 2>*) const;
template <>
double MollifiedPotential<3>::raw_value_grad(const std::array<double, 3>&,
                                             std::array<double, 3>*) const;

extern template class MollifiedPotential<2>;
extern template class MollifiedPotential<3>;

/// Dense cubic-Hermite table of the d=2 radial profile f_N(s) (s = lambda_max)
/// for PDE inner loops. The gradient is the analytic derivative of the value
/// interpolant, so tabled energies and forces are mutually consistent to
/// machine precision. Falls back to direct evaluation beyond smax.
class PsiNTable2 {
 public:
  explicit PsiNTable2(std::shared_ptr<const MollifiedPotential<2>> m, double smax = 2.0,
                      int nodes = 0);
  void value_dvalue(double s, double* v, double* dv) const;
  const MollifiedPotential<2>& mollified() const { return *m_; }

 private:
  std::shared_ptr<const MollifiedPotential<2>> m_;
  double smax_ = 0, ds_ = 0;
  std::vector<double> f_, df_;
};

/// Bicubic-Hermite table of the d=3 eigenvalue profile f_N(l1, l2) on
/// [-range, range]^2 (l3 = -l1-l2). Built lazily for d=3 psi_N PDE runs.
class PsiNTable3 {
 public:
  explicit PsiNTable3(std::shared_ptr<const MollifiedPotential<3>> m, double range = 1.2,
                      int nodes = 96);
  /// value and d/d(l1), d/d(l2) of the interpolant; falls back outside range.
  void value_grad(double l1, double l2, double* v, double* g1, double* g2) const;
  const MollifiedPotential<3>& mollified() const { return *m_; }

 private:
  std::shared_ptr<const MollifiedPotential<3>> m_;
  double range_ = 0, h_ = 0;
  int nb_ = 0;
  std::vector<double> f_, f1_, f2_, f12_;
  int idx(int i, int j) const { return i * nb_ + j; }
};

}  // namespace nmq
