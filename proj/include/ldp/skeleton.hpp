#pragma once

#include "ldp/control.hpp"
#include "ldp/operators.hpp"
#include "ldp/spaces.hpp"
#include "ldp/types.hpp"

#include <vector>

namespace ldp {

/// Path sampled on a time grid; column i of states is the state at times[i].
struct Trajectory {
  Vector times;
  Matrix states;

  [[nodiscard]] Index steps() const { return times.size() - 1; }
  [[nodiscard]] Vector terminal() const {
    return states.col(states.cols() - 1);
  }
  /// Piecewise-linear evaluation; t is clamped to the grid range.
  [[nodiscard]] Vector at(double t) const;
};

/// sup over grid points of the H-distance. The grids must coincide.
double sup_h_distance(const GalerkinSpace& sp, const Trajectory& a,
                      const Trajectory& b);

/// Sorted union of a uniform n-cell grid on [0, horizon] with extra points;
/// points closer than 1e-12 * horizon are merged.
Vector merge_time_grid(double horizon, Index uniform_cells,
                       const Vector& extra);

/// Mean drift induced by tilting the jump intensity:
/// sum_j nu_j f(t, v, j) (g(t, j) - 1).
Vector control_drift(const NoiseCoefficient& noise, const MarkSpace& ms,
                     const Control& g, double t, const Vector& v);

enum class TimeScheme { semi_implicit, explicit_euler };

struct SolveOptions {
  double dt = 0.0;      // 0: horizon / 1000
  double fp_tol = 0.0;  // 0: 1e-10 for dim <= 8, else 1e-8
  int max_picard = 40;
  TimeScheme scheme = TimeScheme::semi_implicit;
  int max_newton = 50;
  double newton_tol = 1e-12;
};

/// One backward step in the drift: solves y = base + dt * A(t_next, y) by
/// damped Newton with the analytic Jacobian.
Vector backward_drift_step(const GalerkinSpace& sp, const DriftOperator& drift,
                           double t_next, double dt, const Vector& base,
                           const Vector& guess, const SolveOptions& opts);

struct WindowDiagnostic {
  double start = 0.0;
  double end = 0.0;
  int picard_iterations = 0;
  int halvings = 0;
  double final_delta = 0.0;
  double max_ratio = -1.0;  // worst measured contraction ratio; -1: none
};

struct SkeletonResult {
  Trajectory trajectory;
  std::vector<WindowDiagnostic> windows;
  double max_residual = 0.0;  // trapezoid check of the integral equation
};

/// Deterministic controlled path:
///   dY/dt = A(t, Y) + sum_j nu_j f(t, Y, j) (g(t, j) - 1),  Y(0) = x0.
/// Solved by successive substitution in the noise argument over windows
/// short enough that the substitution map provably contracts; the drift is
/// advanced implicitly inside each step (damped Newton on the analytic
/// Jacobian). Windows are halved when the observed contraction is poor or
/// an iterate escapes the entry energy guard.
SkeletonResult solve_skeleton(const GalerkinSpace& sp,
                              const DriftOperator& drift,
                              const NoiseCoefficient& noise,
                              const MarkSpace& ms, const Control& g,
                              const Vector& x0, const SolveOptions& opts = {});

struct AprioriBound {
  double control_supremum = 0.0;  // sup of the weighted |g-1| mass on the set
  double exponent = 0.0;
  double bound = 0.0;  // (|x0|_H^2 + exponent) * exp(exponent)
};

/// Energy bound valid for every controlled path whose control lies in the
/// cost level set {Q <= level}: sup_t |Y_t|_H^2 <= bound. Uses the noise
/// growth envelope and the drift forcing F, both scanned on a uniform grid.
AprioriBound apriori_bound(const GalerkinSpace& sp, const DriftOperator& drift,
                           const NoiseCoefficient& noise, const MarkSpace& ms,
                           const Vector& x0, double horizon, double level,
                           Index grid_cells = 256);

}  // namespace ldp
