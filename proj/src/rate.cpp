#include "ldp/rate.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <utility>

namespace ldp {

namespace {

Matrix clip_values(Matrix vals, double lo, double hi) {
  return vals.cwiseMax(lo).cwiseMin(hi);
}

// Pull g back into {Q <= cap} by blending toward the zero-cost control 1;
// the cost is increasing in the blend factor, so bisection applies.
Matrix project_to_level(const MarkSpace& ms, const Vector& grid,
                        const Matrix& vals, double cap) {
  const Control g(grid, vals);
  if (q_cost(ms, g) <= cap) return vals;
  const Matrix ones = Matrix::Ones(vals.rows(), vals.cols());
  double lo = 0.0, hi = 1.0;
  for (int i = 0; i < 60; ++i) {
    const double mid = 0.5 * (lo + hi);
    const Matrix blend = ones + mid * (vals - ones);
    if (q_cost(ms, Control(grid, blend)) <= cap)
      lo = mid;
    else
      hi = mid;
  }
  return ones + lo * (vals - ones);
}

struct Objective {
  double q = 0.0;
  double r = 0.0;
  [[nodiscard]] double penalized(double mu) const { return q + mu * r * r; }
};

}  // namespace

Matrix q_gradient(const MarkSpace& ms, const Control& g) {
  Matrix grad(g.cells(), g.marks());
  for (Index k = 0; k < g.cells(); ++k) {
    const double dt = g.cell_dt(k);
    for (Index j = 0; j < g.marks(); ++j) {
      const double x = g.values()(k, j);
      if (!(x > 0.0))
        throw std::invalid_argument("q_gradient: needs interior control");
      grad(k, j) = dt * ms.nu[j] * std::log(x);
    }
  }
  return grad;
}

double event_violation(const GalerkinSpace& sp, const EventSpec& event,
                       const Trajectory& y) {
  switch (event.kind) {
    case EventKind::terminal_point:
      if (event.target.size() != y.states.rows())
        throw std::invalid_argument("event: target dimension mismatch");
      return sp.h_norm(y.terminal() - event.target);
    case EventKind::terminal_threshold: {
      if (event.component < 0 || event.component >= y.states.rows())
        throw std::invalid_argument("event: component out of range");
      const double v = y.terminal()[event.component];
      return event.direction >= 0 ? std::max(0.0, event.threshold - v)
                                  : std::max(0.0, v - event.threshold);
    }
    case EventKind::trajectory_functional:
      if (!event.violation)
        throw std::invalid_argument("event: missing violation functional");
      return event.violation(y);
  }
  throw std::invalid_argument("event: unknown kind");
}

RateEstimate minimize_rate(const GalerkinSpace& sp, const DriftOperator& drift,
                           const NoiseCoefficient& noise, const MarkSpace& ms,
                           const Vector& x0, const Vector& time_grid,
                           const EventSpec& event,
                           const MinimizeOptions& opts) {
  const Index cells = time_grid.size() - 1;
  if (cells < 1)
    throw config_error("minimize_rate: control grid needs at least one cell");
  const Index marks = ms.size();
  const bool capped = std::isfinite(opts.level_cap);

  auto evaluate = [&](const Matrix& vals) -> Objective {
    const Control g(time_grid, vals);
    const SkeletonResult sol =
        solve_skeleton(sp, drift, noise, ms, g, x0, opts.solve);
    return {q_cost(ms, g), event_violation(sp, event, sol.trajectory)};
  };
  // Candidates that leave the solver's stability region are rejected, not
  // fatal; only the base point must solve.
  auto try_evaluate = [&](const Matrix& vals) -> std::optional<Objective> {
    try {
      return evaluate(vals);
    } catch (const numerical_error&) {
      return std::nullopt;
    }
  };

  Matrix vals = Matrix::Ones(cells, marks);
  Objective cur = evaluate(vals);
  Index total_iters = 0;

  for (double mu : opts.penalty_ladder) {
    double step = 1.0;
    for (int it = 0; it < opts.max_iterations; ++it) {
      ++total_iters;

      // Gradient of Q + mu r^2; the constraint part by forward differences.
      Matrix grad = q_gradient(ms, Control(time_grid, vals));
      if (cur.r > 0.0) {
        for (Index k = 0; k < cells; ++k) {
          for (Index j = 0; j < marks; ++j) {
            const double h =
                opts.fd_step * std::max(1.0, std::abs(vals(k, j)));
            Matrix bumped = vals;
            bumped(k, j) += h;
            if (const auto b = try_evaluate(bumped)) {
              grad(k, j) += 2.0 * mu * cur.r * (b->r - cur.r) / h;
            } else {
              bumped(k, j) = vals(k, j) - h;
              if (const auto bl = try_evaluate(bumped))
                grad(k, j) += 2.0 * mu * cur.r * (cur.r - bl->r) / h;
            }
          }
        }
      }
      const double gnorm = grad.norm();
      if (gnorm <= 1e-12 * std::max(1.0, std::abs(cur.penalized(mu)))) break;

      bool accepted = false;
      for (int bt = 0; bt < 40; ++bt) {
        Matrix cand = clip_values(vals - step * grad, opts.g_floor,
                                  opts.g_cap);
        if (capped)
          cand = project_to_level(ms, time_grid, cand, opts.level_cap);
        const auto next = try_evaluate(cand);
        if (next && next->penalized(mu) < cur.penalized(mu) - 1e-14) {
          vals.swap(cand);
          cur = *next;
          step = std::min(step * 1.5, 1e3);
          accepted = true;
          break;
        }
        step *= 0.5;
      }
      if (!accepted) break;  // no descent direction at resolvable step sizes
    }
  }

  // Near-floor entries mean "switched off"; report them as exact zeros when
  // that leaves the event intact.
  Matrix rounded = vals;
  bool any_rounded = false;
  for (Index k = 0; k < cells; ++k)
    for (Index j = 0; j < marks; ++j)
      if (rounded(k, j) < 2.0 * opts.g_floor) {
        rounded(k, j) = 0.0;
        any_rounded = true;
      }
  if (any_rounded) {
    const auto after = try_evaluate(rounded);
    if (after && after->r <= std::max(cur.r, opts.residual_tol)) {
      vals.swap(rounded);
      cur = *after;
    }
  }

  Control minimizer(time_grid, vals);
  const bool feasible = cur.r <= opts.residual_tol;
  RateEstimate out{feasible ? q_cost(ms, minimizer)
                            : std::numeric_limits<double>::infinity(),
                   std::move(minimizer), cur.r, total_iters, feasible};
  return out;
}

RateEstimate rate_of_set(const GalerkinSpace& sp, const DriftOperator& drift,
                         const NoiseCoefficient& noise, const MarkSpace& ms,
                         const Vector& x0, const Vector& time_grid,
                         const EventSpec& event, double level_cap,
                         const MinimizeOptions& opts) {
  MinimizeOptions capped = opts;
  capped.level_cap = level_cap;
  return minimize_rate(sp, drift, noise, ms, x0, time_grid, event, capped);
}

}  // namespace ldp
