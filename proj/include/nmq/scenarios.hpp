// scenarios.hpp -- built-in initial data: seeded random band-limited fields
// and the Taylor-Green vortex.
#pragma once

#include "nmq/dynamics.hpp"
#include "nmq/grid.hpp"
#include "nmq/sym0.hpp"

namespace nmq {

/// Random band-limited divergence-free velocity, |u|_inf scaled to amplitude.
RealField random_velocity(const Transformer& tr, unsigned long long seed, int jmax,
                          double amplitude);

/// Random band-limited Sym0 field rescaled so the minimum physicality margin
/// over the grid equals target_margin (must be in (0, 1/d)).
RealField random_q_field(const Transformer& tr, unsigned long long seed, int jmax,
                         double target_margin);

/// 2-D Taylor-Green vortex u = a (sin kx cos ky, -cos kx sin ky), k = 2/Lambda.
/// Exact Navier-Stokes solution decaying like exp(-2 nu (2/Lambda)^2 t).
RealField taylor_green(const Grid& g, double amplitude);
double taylor_green_decay_rate(const Grid& g, double nu);

/// Spatially constant Sym0 field.
template <int D>
RealField homogeneous_q(const Grid& g, const Sym0<D>& q0);

/// Initial data for the generic 2-D runs used by the verification suites:
/// random physical Q (margin target) + random solenoidal u.
struct GenericData {
  RealField q0, u0;
};
GenericData generic_2d_data(const Transformer& tr, unsigned long long seed,
                            double q_margin = 0.08, double u_amp = 0.4, int jmax = 4);

}  // namespace nmq
