#include "ldp/spde.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace ldp {

namespace {

Vector intensity_correction(const NoiseCoefficient& noise, const MarkSpace& ms,
                            double t, const Vector& v) {
  Vector out = Vector::Zero(v.size());
  for (Index j = 0; j < ms.size(); ++j)
    out += ms.nu[j] * noise.apply(t, v, j);
  return out;
}

}  // namespace

PathResult simulate_with_jumps(const GalerkinSpace& sp,
                               const DriftOperator& drift,
                               const NoiseCoefficient& noise,
                               const MarkSpace& ms, const Vector& x0,
                               double horizon, double eps,
                               const std::vector<JumpRecord>& jumps,
                               const SimOptions& opts) {
  if (x0.size() != sp.dim())
    throw std::invalid_argument("simulate: initial state dimension mismatch");
  if (!(horizon > 0.0)) throw config_error("simulate: horizon must be positive");
  if (!(eps > 0.0)) throw config_error("simulate: eps must be positive");
  if (opts.scheme == TimeScheme::semi_implicit && !drift.jacobian)
    throw config_error("simulate: implicit scheme needs a drift Jacobian");

  const double dt = opts.dt > 0.0 ? opts.dt : horizon * 1e-3;
  if (!(dt > 0.0) || dt > horizon) throw config_error("simulate: bad time step");

  Vector jump_times(static_cast<Index>(jumps.size()));
  for (std::size_t i = 0; i < jumps.size(); ++i)
    jump_times[static_cast<Index>(i)] = jumps[i].time;
  const Index cells = static_cast<Index>(std::ceil(horizon / dt - 1e-9));
  const Vector grid =
      merge_time_grid(horizon, std::max<Index>(1, cells), jump_times);
  const Index n = grid.size() - 1;
  const double tie_tol = 1e-12 * horizon;

  SolveOptions step_opts;
  step_opts.max_newton = opts.max_newton;
  step_opts.newton_tol = opts.newton_tol;

  const double censor_level =
      opts.censor_factor * std::max(1.0, sp.h_norm(x0));

  PathResult out;
  out.jumps = jumps;
  out.trajectory.times = grid;
  out.trajectory.states.resize(sp.dim(), n + 1);
  out.trajectory.states.col(0) = x0;

  std::size_t next_jump = 0;
  for (Index k = 0; k < n; ++k) {
    const double h = grid[k + 1] - grid[k];
    const Vector& y = out.trajectory.states.col(k);

    Vector z;
    if (opts.scheme == TimeScheme::semi_implicit) {
      const Vector rhs = y - h * intensity_correction(noise, ms, grid[k], y);
      z = backward_drift_step(sp, drift, grid[k + 1], h, rhs, y, step_opts);
    } else {
      z = y + h * (drift.apply(grid[k], y) -
                   intensity_correction(noise, ms, grid[k], y));
    }

    while (next_jump < jumps.size() &&
           jumps[next_jump].time <= grid[k + 1] + tie_tol) {
      const JumpRecord& jr = jumps[next_jump];
      z += eps * noise.apply(jr.time, z, jr.mark);
      ++next_jump;
    }

    if (!z.allFinite() || sp.h_norm(z) > censor_level) {
      out.censored = true;
      out.censor_time = grid[k + 1];
      if (!z.allFinite()) z = out.trajectory.states.col(k);
      for (Index r = k + 1; r <= n; ++r) out.trajectory.states.col(r) = z;
      return out;
    }
    out.trajectory.states.col(k + 1) = z;
  }
  return out;
}

PathResult simulate(const GalerkinSpace& sp, const DriftOperator& drift,
                    const NoiseCoefficient& noise, const MarkSpace& ms,
                    const Vector& x0, double horizon, double eps,
                    StreamRng rng, const SimOptions& opts) {
  const std::vector<JumpRecord> jumps =
      sample_prm(ms, horizon, 1.0 / eps, rng, opts.prm);
  return simulate_with_jumps(sp, drift, noise, ms, x0, horizon, eps, jumps,
                             opts);
}

PathResult simulate_controlled(const GalerkinSpace& sp,
                               const DriftOperator& drift,
                               const NoiseCoefficient& noise,
                               const MarkSpace& ms, const Vector& x0,
                               const Control& modulation, double eps,
                               StreamRng rng, const SimOptions& opts) {
  const std::vector<JumpRecord> jumps =
      sample_controlled_prm(ms, modulation, eps, rng, opts.prm);
  return simulate_with_jumps(sp, drift, noise, ms, x0, modulation.horizon(),
                             eps, jumps, opts);
}

double sup_h_distance_interp(const GalerkinSpace& sp, const Trajectory& path,
                             const Trajectory& reference) {
  double best = 0.0;
  for (Index i = 0; i < path.times.size(); ++i)
    best = std::max(best, sp.h_norm(path.states.col(i) -
                                    reference.at(path.times[i])));
  return best;
}

CoupledResult coupled_simulate(const GalerkinSpace& sp,
                               const DriftOperator& drift,
                               const NoiseCoefficient& noise,
                               const MarkSpace& ms, const Vector& x0,
                               const Control& modulation, double eps,
                               StreamRng rng, const SimOptions& opts,
                               const Trajectory* reference) {
  Trajectory local;
  if (reference == nullptr) {
    SolveOptions sopts;
    sopts.dt = opts.dt;
    sopts.scheme = opts.scheme;
    sopts.max_newton = opts.max_newton;
    sopts.newton_tol = opts.newton_tol;
    local = solve_skeleton(sp, drift, noise, ms, modulation, x0, sopts)
                .trajectory;
    reference = &local;
  }
  CoupledResult out;
  out.path =
      simulate_controlled(sp, drift, noise, ms, x0, modulation, eps, rng, opts);
  out.sup_error = sup_h_distance_interp(sp, out.path.trajectory, *reference);
  return out;
}

}  // namespace ldp
