#pragma once

#include "ldp/control.hpp"
#include "ldp/skeleton.hpp"

#include <functional>
#include <limits>
#include <vector>

namespace ldp {

/// dQ/dg_kj = dt_k * nu_j * log(g_kj). Entries must be strictly positive.
Matrix q_gradient(const MarkSpace& ms, const Control& g);

enum class EventKind { terminal_threshold, terminal_point, trajectory_functional };

/// Target event for the rate function. terminal_threshold is one-sided:
/// direction +1 asks Y_T[component] >= threshold, -1 asks <=.
struct EventSpec {
  EventKind kind = EventKind::terminal_point;
  Index component = 0;
  double threshold = 0.0;
  int direction = 1;
  Vector target;
  std::function<double(const Trajectory&)> violation;  // trajectory_functional
};

/// Violation distance of a solved path from the event (0 when it holds).
double event_violation(const GalerkinSpace& sp, const EventSpec& event,
                       const Trajectory& y);

struct MinimizeOptions {
  std::vector<double> penalty_ladder = {10.0, 100.0, 1000.0, 10000.0};
  int max_iterations = 60;     // gradient steps per rung
  double residual_tol = 1e-3;  // feasibility threshold on the violation
  double g_floor = 1e-8;       // barrier clip during optimization
  double g_cap = 1e3;
  double fd_step = 1e-6;
  double level_cap = std::numeric_limits<double>::infinity();
  SolveOptions solve;
};

struct RateEstimate {
  double value = 0.0;  // q_cost(minimizer); +inf when infeasible
  Control minimizer;
  double constraint_residual = 0.0;
  Index iterations = 0;
  bool feasible = true;
};

/// inf { Q(g) : the controlled path under g realizes the event }, searched
/// over positive piecewise-constant controls on `time_grid` by projected
/// gradient descent on Q + penalty * violation^2, with the penalty escalated
/// through the ladder, constraint gradients by forward differences through
/// the path solver, and entries kept in [g_floor, g_cap] (near-floor entries
/// are rounded to 0 afterwards when that keeps the event intact). Starts at
/// g = 1. Infeasible events come back flagged with value +inf.
RateEstimate minimize_rate(const GalerkinSpace& sp, const DriftOperator& drift,
                           const NoiseCoefficient& noise, const MarkSpace& ms,
                           const Vector& x0, const Vector& time_grid,
                           const EventSpec& event,
                           const MinimizeOptions& opts = {});

/// Set variant capped at the level set {Q <= level_cap}: iterates are pulled
/// back toward g = 1 whenever their cost leaves the cap. Events unreachable
/// within the cap come back infeasible.
RateEstimate rate_of_set(const GalerkinSpace& sp, const DriftOperator& drift,
                         const NoiseCoefficient& noise, const MarkSpace& ms,
                         const Vector& x0, const Vector& time_grid,
                         const EventSpec& event, double level_cap,
                         const MinimizeOptions& opts = {});

}  // namespace ldp
