// comparison.hpp -- scalar advection-diffusion solvers for the two comparison
// problems (homogeneous G with mean-zero data, forced Hc with constant data),
// the strict-physicality certificate that co-evolves them along a trajectory,
// and the L1 -> Linf heat-decay check.
#pragma once

#include <functional>
#include <vector>

#include "nmq/diagnostics.hpp"
#include "nmq/dynamics.hpp"
#include "nmq/grid.hpp"

namespace nmq {

/// IMEX integrator for dg/dt + (u.grad)g - kdiff lap g = source, same
/// integrating-factor RK2 family as the coupled stepper.
class AdvectDiffuse {
 public:
  AdvectDiffuse(const Transformer& tr, double kdiff, double dt);

  /// One step with velocity and source frozen over the step.
  void step(SpecField& gh, const SpecField* uhat, const SpecField* source) const;

  /// One step with per-stage velocities/sources (trajectory co-evolution).
  void step_stages(SpecField& gh, const SpecField* u1, const SpecField* u2,
                   const SpecField* src1, const SpecField* src2) const;

  const Transformer& transformer() const { return tr_; }

 private:
  const Transformer& tr_;
  double dt_;
  std::vector<double> e_;  // exp(-kdiff k^2 dt)
  void nonlinear(const SpecField& gh, const SpecField* uhat, const SpecField* source,
                 SpecField& out) const;
};

struct CertificateRow {
  double t = 0;
  double defect_sup = 0;  // sup_x psi_N(Q) - G - Hc
  double psi_sup = 0;
  double g_sup = 0;   // sup |G|
  double hc_sup = 0;  // sup |Hc|
};

struct CertificateReport {
  std::vector<CertificateRow> rows;
  double max_defect = 0;
  double tol = 0;  // 5e-3 * (1 + sup |psi_N(Q)|) over the trajectory
  bool pass = false;
  double hc_linf_measured = 0;
  double hc_linf_bound = 0;  // (|mean psi_N(Q0)| + Gamma kappa^2/(2 theta)) e^T
};

/// Replays the trajectory from s0 with the given stepper (xi must be 0 and
/// the stepper potential a mollified psi_N), co-evolving G and Hc with the
/// stage velocities. The replay applies the same checkpoint quantization as
/// run(); on_checkpoint receives the quantized real fields for bitwise
/// cross-checks against stored snapshots. Rows are sampled at record_every.
template <int D>
CertificateReport certify(
    Stepper<D>& st, const State<D>& s0,
    const std::function<void(long long, const RealField&, const RealField&)>&
        on_checkpoint = {});

struct DecayPoint {
  double t = 0;
  double sup = 0;    // |g(.,t)|_inf
  double ratio = 0;  // sup * t^(d/2+gamma) / |g0|_1
};

/// Homogeneous advection-diffusion decay audit for zero-mean data; u frozen
/// (nullptr = no advection). Throws NonZeroMean if |mean g0| > 1e-10.
std::vector<DecayPoint> heat_decay_check(const Transformer& tr, const RealField& g0,
                                         const SpecField* frozen_u, double kdiff,
                                         double dt, double T, double gamma_exp,
                                         int sample_every);

}  // namespace nmq
