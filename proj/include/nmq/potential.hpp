// potential.hpp -- the Ball-Majumdar singular potential psi: minimum
// orientational entropy over densities on S^{d-1} with prescribed second
// moments. Evaluated through the dual problem: gauge-fixed multipliers mu
// (sum mu_i = 0) solve <omega_i^2> = lambda_i + 1/d under the density
// exp(sum mu_i omega_i^2)/Z, and psi = sum mu_i lambda_i - log Z.
//
// Also the Moreau-Yosida regularization psi_J (value + proximal point),
// solved in the eigenframe as a (d-1)-dimensional convex problem over the
// open eigenvalue triangle.
#pragma once

#include <array>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include "nmq/quadrature.hpp"
#include "nmq/sym0.hpp"

namespace nmq {

/// Margin below which psi reports NonPhysicalInput.
inline constexpr double kEpsPhys = 1e-9;

template <int D>
struct PotentialEval {
  double psi = 0;
  Sym0<D> grad;
  std::array<double, D> mu{};  // gauge sum mu_i = 0
  double logZ = 0;
};

/// Eigenvalue-space evaluation record (lambda order preserved).
template <int D>
struct EigenPotential {
  double psi = 0;
  std::array<double, D> mu{};
  double logZ = 0;
  std::array<double, D * D> cov{};  // covariance of (omega_i^2), for Hessians
  int newton_iters = 0;
};

template <int D>
struct MomentData {
  double logZ = 0;
  std::array<double, D> m{};            // <omega_i^2>, sums to 1
  std::array<double, D * D> second{};   // <omega_i^2 omega_j^2>
};

template <int D>
class BallMajumdar {
 public:
  static constexpr int kMaxNewton = 100;

  BallMajumdar();
  BallMajumdar(int nodes_a, int nodes_b);  // d=2: (nodes, unused); d=3: (ntheta, nphi)

  /// logZ and second-moment vector on the fixed contract rule.
  void partition_and_moments(const std::array<double, D>& mu, double& logZ,
                             std::array<double, D>& m) const;

  MomentData<D> moments(const std::array<double, D>& mu) const;

  /// Gauge-fixed multipliers with |m(mu) - (lambda + 1/d)|_inf <= tol.
  /// Internally escalates to finer rules of the same family when |mu| exceeds
  /// what the contract rule resolves (boundary-adjacent inputs).
  std::array<double, D> solve_multipliers(const std::array<double, D>& lambda,
                                          double tol) const;

  /// NonPhysicalInput if margin(Q) <= kEpsPhys.
  PotentialEval<D> eval(const Sym0<D>& q, double tol = 1e-12) const;

  EigenPotential<D> eval_eigs(std::array<double, D> lambda, double tol = 1e-12,
                              const std::array<double, D>* warm = nullptr) const;

  /// Max deviation between the analytic gradient and central finite
  /// differences in Sym0 component coordinates, relative to max(1, |grad|_inf).
  double grad_fd_check(const Sym0<D>& q, double h) const;

  struct Prox {
    double value = 0;
    Sym0<D> prox;
    std::array<double, D> prox_lambda{};
  };
  /// Moreau-Yosida envelope: min over A of J|A-Q|^2 + psi(A). Total on Sym0.
  Prox moreau_yosida(const Sym0<D>& q, double J) const;

  /// Eigenvalue-space prox (lambda need not be physical). Warm starts are
  /// caller-owned (prox point and dual multipliers), so concurrent use stays
  /// safe; mu_io is updated with the converged multipliers at the prox point.
  std::array<double, D> prox_eigs(const std::array<double, D>& lambda, double J,
                                  const std::array<double, D>* warm, double* value,
                                  EigenPotential<D>* at_prox = nullptr,
                                  std::array<double, D>* mu_io = nullptr) const;

 private:
  MomentData<D> moments_adaptive(const std::array<double, D>& mu) const;
  MomentData<D> moments_on(const std::array<double, D>& mu, const void* level) const;
  EigenPotential<D> solve_dual(const std::array<double, D>& lambda, double tol,
                               const std::array<double, D>* warm) const;

  // contract rules
  std::shared_ptr<const CircleQuad> circle_;  // D == 2
  std::shared_ptr<const SphereQuad> sphere_;  // D == 3
  // escalation ladder, built lazily
  mutable std::mutex ladder_mutex_;
  mutable std::map<int, std::shared_ptr<const CircleQuad>> circle_ladder_;
  mutable std::map<int, std::shared_ptr<const SphereQuad>> sphere_ladder_;
};

extern template class BallMajumdar<2>;
extern template class BallMajumdar<3>;

}  // namespace nmq
