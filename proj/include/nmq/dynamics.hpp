// dynamics.hpp -- right-hand sides of the coupled Q-tensor / Navier-Stokes
// system and the IMEX time integrator: stiff linear diffusion integrated
// exactly per mode (integrating factor), everything else by explicit
// second-order Runge-Kutta, pressure eliminated by Leray projection.
//
// Velocity gradient convention: (grad u)_{ij} = du_i/dx_j, div(X)_i = d_j X_ij.
#pragma once

#include <array>
#include <functional>
#include <memory>
#include <string>

#include "nmq/grid.hpp"
#include "nmq/mollified.hpp"
#include "nmq/potential.hpp"
#include "nmq/sym0.hpp"

namespace nmq {

struct EnergyRecord;

struct SimConfig {
  int dim = 2;
  double gamma = 1.0;   // rotational diffusion Gamma
  double L = 0.01;      // elastic constant
  double theta = 1.0;   // temperature-like coefficient
  double kappa = 1.0;   // interaction strength
  double nu = 0.1;      // kinematic viscosity
  double xi = 0.0;      // tumbling parameter
  double Lambda = 1.0;  // box scale (period Lambda*pi)
  int n = 64;
  double dt = 1e-3;
  double T = 1.0;
  int N = 16;  // mollification index, 0 = exact psi
  int M = 0;   // Galerkin cutoff, 0 = none
  unsigned long long seed = 1;
  std::string output_dir = "out";
  int snapshot_every = 0;  // steps; 0 = initial/final only
  int record_every = 10;   // steps

  long long total_steps() const;
  void validate() const;  // ValidationError naming the violated field
};

/// Pointwise bulk-potential evaluation used by the stepper (exact psi or a
/// table-backed psi_N). Implementations are stateful only through warm-start
/// caches owned per instance; one instance per stepper.
template <int D>
class PotentialModel {
 public:
  virtual ~PotentialModel() = default;
  virtual bool exact() const = 0;
  virtual int mollification_N() const { return 0; }
  /// value and/or trace-free gradient of the potential at one Q.
  virtual void value_grad(const Sym0<D>& q, double* value, Sym0<D>* grad) const = 0;
};

template <int D>
std::shared_ptr<PotentialModel<D>> make_potential_model(const SimConfig& cfg);

/// psi_N without the interpolation table (direct node sums); preferable when
/// only a handful of points are evaluated (homogeneous trajectories).
template <int D>
std::shared_ptr<PotentialModel<D>> make_direct_mollified_model(int N);

/// S(Q, grad u): the flow-coupling ("twist and stretch") term. Symmetric by
/// construction; returned trace-free (exact when tr[grad u] = 0).
template <int D>
Sym0<D> tumbling_S(const Sym0<D>& q, const std::array<double, D * D>& gradu, double xi);

/// tau_ij = -xi(A H + H A)_ij + 2 xi A_ij tr[Q H] - L tr[d_i Q d_j Q], A = Q + I/d.
template <int D>
std::array<double, D * D> stress_tau(const Sym0<D>& q, const Sym0<D>& h,
                                     const std::array<Sym0<D>, D>& gradq, double xi,
                                     double L);

/// sigma = Q H - H Q (antisymmetric).
template <int D>
std::array<double, D * D> stress_sigma(const Sym0<D>& q, const Sym0<D>& h);

template <int D>
struct State {
  double t = 0;
  long long step = 0;
  SpecField qhat;  // Sym0 component channels
  SpecField uhat;  // velocity channels, divergence-free
};

/// Real-space views of one state: everything the RHS and the diagnostics
/// need. Velocity gradient channels are (a*D + b) = d_a u_b.
template <int D>
struct FieldAssembly {
  RealField q, u, gradu, gradq, lapq;
  RealField pot_grad;  // trace-free potential gradient, NC channels
  RealField pot_val;   // 1 channel (filled when with_value)
  RealField h;         // molecular field H = L lap Q - theta pot_grad + kappa Q
};

template <int D>
class Stepper {
 public:
  Stepper(const SimConfig& cfg, std::shared_ptr<PotentialModel<D>> pot);

  const Grid& grid() const { return grid_; }
  const SimConfig& config() const { return cfg_; }
  const Transformer& transformer() const { return tr_; }
  PotentialModel<D>& potential() const { return *pot_; }

  /// Project arbitrary initial data onto the scheme's constraint set
  /// (divergence-free u, dealiased, Galerkin-truncated).
  State<D> make_state(const RealField& q0, const RealField& u0) const;

  FieldAssembly<D> assemble(const State<D>& s, bool with_value = false) const;

  /// Explicit RHS parts (diffusion handled by the integrating factor):
  /// dq = -(u.grad)Q + S + Gamma(-theta pot_grad + kappa Q)
  /// du = Leray[-(u.grad)u + div(tau + sigma)]
  void rhs_explicit(const SpecField& qh, const SpecField& uh, SpecField& dq,
                    SpecField& du) const;

  void step(State<D>& s) const { step(s, nullptr, nullptr); }
  /// step exposing the RK midpoint stage (co-evolved scalar problems use the
  /// same stage velocities)
  void step(State<D>& s, SpecField* stage_q, SpecField* stage_u) const;

  /// Replace the state by the one regenerated from its real-space samples
  /// (the snapshot representation) and emit those samples. Checkpoints are
  /// synchronization points: a restart from the written fields continues the
  /// run bit-exactly.
  void quantize(State<D>& s, RealField& q, RealField& u) const;

 private:
  SimConfig cfg_;
  Grid grid_;
  Transformer tr_;
  std::shared_ptr<PotentialModel<D>> pot_;
  std::vector<double> eq_, eu_;  // per-mode integrating factors exp(-c k^2 dt)
  std::vector<std::uint8_t> gmask_;
  void assemble_into(const SpecField& qh, const SpecField& uh, FieldAssembly<D>& fa,
                     bool with_value) const;
  void enforce(SpecField& qh, SpecField& uh) const;
};

template <int D>
struct RunHooks {
  std::function<void(const State<D>&, const EnergyRecord&)> on_record;
  /// invoked with the quantized state and the exact real fields it was
  /// regenerated from (the bytes to persist)
  std::function<void(const State<D>&, const RealField& q, const RealField& u)> on_snapshot;
};

/// Advance to T with records/snapshots at the configured cadences. Records
/// are also emitted for the initial and final state. Throws BlowUp /
/// NonPhysicalInput from the stepper; the caller owns flushing partial output.
template <int D>
State<D> run(Stepper<D>& st, State<D> s, const RunHooks<D>& hooks);

/// The same RK2/integrating-factor update restricted to spatially constant
/// states (no spatial terms); bit-compatible with the grid stepper on
/// constant fields.
template <int D>
Sym0<D> homogeneous_step(const Sym0<D>& q, const SimConfig& cfg,
                         const PotentialModel<D>& pot);

extern template class Stepper<2>;
extern template class Stepper<3>;

}  // namespace nmq
