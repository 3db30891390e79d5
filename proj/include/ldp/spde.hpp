#pragma once

#include "ldp/prm.hpp"
#include "ldp/skeleton.hpp"

#include <vector>

namespace ldp {

struct SimOptions {
  double dt = 0.0;  // base grid step; 0: horizon / 1000
  TimeScheme scheme = TimeScheme::semi_implicit;
  int max_newton = 50;
  double newton_tol = 1e-12;
  double censor_factor = 1e6;  // censor when |X|_H > factor * max(1, |x0|_H)
  PrmOptions prm;
};

struct PathResult {
  Trajectory trajectory;  // base grid merged with the jump times
  std::vector<JumpRecord> jumps;
  bool censored = false;
  double censor_time = 0.0;  // meaningful only when censored
};

/// Jump-driven state equation in compensated form,
///   X = x0 + int A(t, X) dt - int sum_j nu_j f(t, X, j) dt
///          + eps * sum over jumps of f(t, X-, mark),
/// advanced on the base grid merged with the jump times. The continuous
/// correction term uses the original intensity and does not depend on how
/// the jumps were sampled. Paths whose H-norm leaves the censor band are
/// frozen at the censor time and flagged.
PathResult simulate_with_jumps(const GalerkinSpace& sp,
                               const DriftOperator& drift,
                               const NoiseCoefficient& noise,
                               const MarkSpace& ms, const Vector& x0,
                               double horizon, double eps,
                               const std::vector<JumpRecord>& jumps,
                               const SimOptions& opts = {});

/// Sample jumps at intensity (1/eps) nu(dz) dt and integrate.
PathResult simulate(const GalerkinSpace& sp, const DriftOperator& drift,
                    const NoiseCoefficient& noise, const MarkSpace& ms,
                    const Vector& x0, double horizon, double eps,
                    StreamRng rng, const SimOptions& opts = {});

/// Sample jumps at the tilted intensity (1/eps) psi(t, z) nu(dz) dt and
/// integrate; the compensated correction stays at the original intensity.
PathResult simulate_controlled(const GalerkinSpace& sp,
                               const DriftOperator& drift,
                               const NoiseCoefficient& noise,
                               const MarkSpace& ms, const Vector& x0,
                               const Control& modulation, double eps,
                               StreamRng rng, const SimOptions& opts = {});

/// sup over the path's grid points of |path(t) - reference.at(t)|_H, with
/// the reference evaluated by interpolation. Grids need not match.
double sup_h_distance_interp(const GalerkinSpace& sp, const Trajectory& path,
                             const Trajectory& reference);

struct CoupledResult {
  PathResult path;
  double sup_error = 0.0;  // sup_t |X(t) - Y(t)|_H over the path grid
};

/// Simulates the tilted equation and measures its sup-distance to the
/// deterministic controlled path with the same modulation. Pass the solved
/// controlled path as `reference` to amortize it across paths; when null it
/// is solved here with the matching step size.
CoupledResult coupled_simulate(const GalerkinSpace& sp,
                               const DriftOperator& drift,
                               const NoiseCoefficient& noise,
                               const MarkSpace& ms, const Vector& x0,
                               const Control& modulation, double eps,
                               StreamRng rng, const SimOptions& opts = {},
                               const Trajectory* reference = nullptr);

}  // namespace ldp
