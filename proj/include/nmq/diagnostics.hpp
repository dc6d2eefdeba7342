// diagnostics.hpp -- energy functionals, dissipation-identity residuals, the
// convexity-inequality check, eigenvalue/physicality monitoring, the
// higher-order energy tracker, and the energy-budget cancellation identities.
#pragma once

#include <vector>

#include "nmq/dynamics.hpp"

namespace nmq {

struct EnergyRecord {
  double t = 0;
  double E = 0;            // L/2|grad Q|^2 + theta int psi - kappa/2|Q|^2 + 1/2|u|^2
  double F = 0;            // 1/2|grad u|^2 + L/2|lap Q|^2
  double dissipation = 0;  // Gamma|H|^2 + nu|grad u|^2
  double residual = 0;     // filled by dissipation_residual / the csv writer
  double lambda_min = 0, lambda_max = 0;
  double margin = 0;   // min physicality margin over the grid
  double psi_sup = 0;  // sup of the potential over the grid
  double convexity_integral = 0;

  // uniform-bound proxies (not part of the energy.csv schema)
  double gradq_l2 = 0, u_l2 = 0, q_l2 = 0, lapq_l2sq = 0, gradu_l2sq = 0,
         potgrad_l2sq = 0;
};

/// Frobenius-metric L2 norms of Sym0 component fields.
double sym0_l2norm2(const SpecField& qh);
double sym0_h1norm2(const SpecField& qh);        // |grad Q|_2^2
double sym0_lap_norm2(const SpecField& qh);      // |lap Q|_2^2
double velocity_h1norm2(const SpecField& uh);    // |grad u|_2^2

template <int D>
double energy_E(const Stepper<D>& st, const State<D>& s);
template <int D>
double energy_F(const Stepper<D>& st, const State<D>& s);
template <int D>
double convexity_integral(const Grid& g, const FieldAssembly<D>& fa);

template <int D>
EnergyRecord make_energy_record(const Stepper<D>& st, const State<D>& s);

/// Central-difference d/dt E plus pointwise dissipation, relative to
/// max(1, dissipation); entries correspond to interior records. Throws
/// InsufficientRecords for fewer than 3 records.
std::vector<double> dissipation_residual(const std::vector<EnergyRecord>& recs);

/// Smallest (C0, C1) >= 0 (by C0 + C1) with dF/dt <= C0 F^2 + C1 on every
/// record interval.
struct GronwallFit {
  double C0 = 0, C1 = 0;
  double worst_slack = 0;  // max over intervals of dF/dt - (C0 F^2 + C1)
};
GronwallFit gronwall_fit(const std::vector<EnergyRecord>& recs);

struct PhysicalityReport {
  double min_margin = 0;       // over all records
  double min_margin_burn = 0;  // over records with t >= t_burn
  double max_psi = 0;
  double t_burn = 0;
  bool ok = false;  // min_margin_burn >= delta_floor
};
/// Per-record margin audit; throws PhysicalityViolated (with time) if the
/// margin is non-positive at any record.
PhysicalityReport strict_physicality_report(const std::vector<EnergyRecord>& recs,
                                            double T, double t_burn_frac = 0.05,
                                            double delta_floor = 1e-6);

/// Signed addends of the two energy budgets (Q-side tested against -H,
/// u-side against u). Each pair must sum to zero; I and J vanish identically.
struct CancellationReport {
  double tp[6] = {0, 0, 0, 0, 0, 0};
  double tm[6] = {0, 0, 0, 0, 0, 0};
  double iterm = 0, jterm = 0;
  double scale = 0;  // max |addend|, the relative-error denominator
  double pair_rel(int j) const;
  double null_rel() const;
};
template <int D>
CancellationReport cancellation_check(const Stepper<D>& st, const State<D>& s);

}  // namespace nmq
