#include "ldp/skeleton.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace ldp {

namespace {

constexpr double kExpGuard = 700.0;

double h_norm_sq(const GalerkinSpace& sp, const Vector& v) {
  return sp.h_inner(v, v);
}

}  // namespace

Vector backward_drift_step(const GalerkinSpace& sp, const DriftOperator& drift,
                           double t_next, double h, const Vector& rhs_base,
                           const Vector& guess, const SolveOptions& opts) {
  const Index n = rhs_base.size();
  auto residual = [&](const Vector& z) -> Vector {
    return z - h * drift.apply(t_next, z) - rhs_base;
  };
  const double tol = opts.newton_tol * std::max(1.0, sp.h_norm(rhs_base));

  Vector y = guess;
  Vector r = residual(y);
  if (!r.allFinite())
    throw numerical_error("implicit step: residual not finite at the guess");
  double rn = sp.h_norm(r);

  for (int it = 0; it < opts.max_newton; ++it) {
    if (rn <= tol) return y;
    Matrix jr = Matrix::Identity(n, n) - h * drift.jacobian(t_next, y);
    Vector step = jr.partialPivLu().solve(r);
    if (!step.allFinite())
      throw numerical_error("implicit step: singular step Jacobian");
    double s = 1.0;
    bool moved = false;
    for (int bt = 0; bt < 40; ++bt) {
      Vector yn = y - s * step;
      Vector rnew = residual(yn);
      double rnn = rnew.allFinite() ? sp.h_norm(rnew)
                                    : std::numeric_limits<double>::infinity();
      if (rnn < rn * (1.0 - 1e-4 * s) || rnn <= tol) {
        y.swap(yn);
        r.swap(rnew);
        rn = rnn;
        moved = true;
        break;
      }
      s *= 0.5;
    }
    if (!moved)
      throw numerical_error("implicit step: line search stalled");
  }
  if (rn <= tol) return y;
  throw numerical_error("implicit step: Newton did not converge");
}

Vector Trajectory::at(double t) const {
  const Index n = times.size() - 1;
  if (t <= times[0]) return states.col(0);
  if (t >= times[n]) return states.col(n);
  const double* begin = times.data();
  const Index i = std::upper_bound(begin, begin + n + 1, t) - begin - 1;
  const double w = (t - times[i]) / (times[i + 1] - times[i]);
  return (1.0 - w) * states.col(i) + w * states.col(i + 1);
}

double sup_h_distance(const GalerkinSpace& sp, const Trajectory& a,
                      const Trajectory& b) {
  if (a.times.size() != b.times.size())
    throw std::invalid_argument("sup_h_distance: grid sizes differ");
  const double horizon = a.times[a.times.size() - 1];
  const double tol = 1e-9 * std::max(1.0, horizon);
  if ((a.times - b.times).cwiseAbs().maxCoeff() > tol)
    throw std::invalid_argument("sup_h_distance: grids differ");
  double best = 0.0;
  for (Index i = 0; i < a.states.cols(); ++i)
    best = std::max(best, sp.h_norm(a.states.col(i) - b.states.col(i)));
  return best;
}

Vector merge_time_grid(double horizon, Index uniform_cells,
                       const Vector& extra) {
  if (!(horizon > 0.0))
    throw std::invalid_argument("merge_time_grid: horizon must be positive");
  if (uniform_cells < 1)
    throw std::invalid_argument("merge_time_grid: need at least one cell");
  const double tol = 1e-12 * horizon;
  std::vector<double> pts;
  pts.reserve(static_cast<std::size_t>(uniform_cells + 1 + extra.size()));
  for (Index i = 0; i <= uniform_cells; ++i)
    pts.push_back(horizon * static_cast<double>(i) /
                  static_cast<double>(uniform_cells));
  for (Index i = 0; i < extra.size(); ++i) {
    const double t = extra[i];
    if (t > -tol && t < horizon + tol)
      pts.push_back(std::clamp(t, 0.0, horizon));
  }
  std::sort(pts.begin(), pts.end());
  std::vector<double> kept;
  kept.reserve(pts.size());
  for (double t : pts)
    if (kept.empty() || t - kept.back() > tol) kept.push_back(t);
  kept.front() = 0.0;
  kept.back() = horizon;
  return Eigen::Map<const Vector>(kept.data(),
                                  static_cast<Index>(kept.size()));
}

Vector control_drift(const NoiseCoefficient& noise, const MarkSpace& ms,
                     const Control& g, double t, const Vector& v) {
  Vector out = Vector::Zero(v.size());
  for (Index j = 0; j < ms.size(); ++j) {
    const double w = g.value(t, j) - 1.0;
    if (w == 0.0) continue;
    out += ms.nu[j] * w * noise.apply(t, v, j);
  }
  return out;
}

SkeletonResult solve_skeleton(const GalerkinSpace& sp,
                              const DriftOperator& drift,
                              const NoiseCoefficient& noise,
                              const MarkSpace& ms, const Control& g,
                              const Vector& x0, const SolveOptions& opts) {
  if (x0.size() != sp.dim())
    throw std::invalid_argument("skeleton: initial state dimension mismatch");
  if (g.marks() != ms.size())
    throw config_error("skeleton: control marks do not match the mark space");
  if (opts.scheme == TimeScheme::semi_implicit && !drift.jacobian)
    throw config_error("skeleton: implicit scheme needs a drift Jacobian");

  const double horizon = g.horizon();
  const double dt = opts.dt > 0.0 ? opts.dt : horizon * 1e-3;
  if (!(dt > 0.0) || dt > horizon)
    throw config_error("skeleton: bad time step");
  const double fp_tol =
      opts.fp_tol > 0.0 ? opts.fp_tol : (sp.dim() <= 8 ? 1e-10 : 1e-8);

  const Index cells =
      static_cast<Index>(std::ceil(horizon / dt - 1e-9));
  const Vector grid = merge_time_grid(horizon, std::max<Index>(1, cells),
                                      g.time_grid());
  const Index n = grid.size() - 1;
  const Index dim = sp.dim();

  // Per-step forcing mass and noise-weighted control deviation, used by the
  // window bound. Each step lies inside a single control cell.
  Vector step_f(n), step_g(n);
  for (Index k = 0; k < n; ++k) {
    const double h = grid[k + 1] - grid[k];
    const double tm = 0.5 * (grid[k] + grid[k + 1]);
    step_f[k] = std::max(0.0, drift.hyp.big_f(tm)) * h;
    double gm = 0.0;
    for (Index j = 0; j < ms.size(); ++j)
      gm += ms.nu[j] * noise.lipschitz_envelope(tm, j) *
            std::abs(g.value(tm, j) - 1.0);
    step_g[k] = gm * h;
  }

  Matrix states(dim, n + 1);
  states.col(0) = x0;
  std::vector<WindowDiagnostic> diags;

  Index k0 = 0;
  int window_guard = 0;
  while (k0 < n) {
    if (++window_guard > 100000)
      throw numerical_error("skeleton: window count exploded");
    const Vector y0 = states.col(k0);
    const double rho_hat = std::max(0.0, drift.hyp.rho(y0));

    // Longest window with contraction certificate
    //   I_G * exp(I_F + rho * l + I_G) <= 1/2; always allow one step.
    Index k_end = k0 + 1;
    {
      double acc_f = step_f[k0];
      double acc_g = step_g[k0];
      for (Index k = k0 + 1; k < n; ++k) {
        const double nf = acc_f + step_f[k];
        const double ng = acc_g + step_g[k];
        const double expo = nf + rho_hat * (grid[k + 1] - grid[k0]) + ng;
        if (expo > kExpGuard || ng * std::exp(expo) > 0.5) break;
        acc_f = nf;
        acc_g = ng;
        k_end = k + 1;
      }
    }

    int halvings = 0;
    for (;;) {
      const Index wlen = k_end - k0;
      const double guard = 4.0 * (1.0 + h_norm_sq(sp, y0));
      Matrix iterate(dim, wlen + 1);
      for (Index c = 0; c <= wlen; ++c) iterate.col(c) = y0;

      int iters = 0;
      double delta = std::numeric_limits<double>::infinity();
      double max_ratio = -1.0;
      bool converged = false;
      bool guard_hit = false;
      while (iters < opts.max_picard) {
        ++iters;
        Matrix next(dim, wlen + 1);
        next.col(0) = y0;
        for (Index k = k0; k < k_end; ++k) {
          const double h = grid[k + 1] - grid[k];
          const Vector b =
              control_drift(noise, ms, g, grid[k], iterate.col(k - k0));
          Vector y;
          if (opts.scheme == TimeScheme::semi_implicit) {
            const Vector rhs = next.col(k - k0) + h * b;
            y = backward_drift_step(sp, drift, grid[k + 1], h, rhs,
                                    next.col(k - k0), opts);
          } else {
            y = next.col(k - k0) +
                h * (drift.apply(grid[k], next.col(k - k0)) + b);
          }
          if (!y.allFinite())
            throw numerical_error("skeleton: state not finite");
          next.col(k + 1 - k0) = y;
          if (h_norm_sq(sp, y) > guard) {
            guard_hit = true;
            break;
          }
        }
        if (guard_hit) break;

        const double prev_delta = delta;
        delta = 0.0;
        double scale = 1.0;
        for (Index c = 1; c <= wlen; ++c) {
          delta = std::max(delta,
                           sp.h_norm(next.col(c) - iterate.col(c)));
          scale = std::max(scale, sp.h_norm(next.col(c)));
        }
        iterate.swap(next);
        // Ratios measured only above the noise floor are meaningful.
        if (std::isfinite(prev_delta) && prev_delta > 100.0 * fp_tol * scale) {
          const double ratio = delta / prev_delta;
          max_ratio = std::max(max_ratio, ratio);
          if (ratio > 0.5 && delta > fp_tol * scale && wlen > 1)
            break;  // observed contraction too weak, shrink the window
        }
        if (delta <= fp_tol * scale) {
          converged = true;
          break;
        }
      }

      if (converged) {
        states.block(0, k0 + 1, dim, wlen) = iterate.rightCols(wlen);
        diags.push_back(
            {grid[k0], grid[k_end], iters, halvings, delta, max_ratio});
        k0 = k_end;
        break;
      }
      if (wlen == 1) {
        if (guard_hit)
          throw numerical_error("skeleton: energy guard hit on a single step");
        throw numerical_error("skeleton: no convergence on a single step");
      }
      ++halvings;
      k_end = k0 + std::max<Index>(1, wlen / 2);
    }
  }

  SkeletonResult result;
  result.trajectory.times = grid;
  result.trajectory.states = std::move(states);
  result.windows = std::move(diags);

  // Trapezoid residual of the integral form, as a consistency diagnostic.
  Vector acc = x0;
  Vector rhs_prev =
      drift.apply(grid[0], result.trajectory.states.col(0)) +
      control_drift(noise, ms, g, grid[0], result.trajectory.states.col(0));
  double max_res = 0.0;
  for (Index k = 0; k < n; ++k) {
    const double h = grid[k + 1] - grid[k];
    const Vector yk = result.trajectory.states.col(k + 1);
    const Vector rhs_k = drift.apply(grid[k + 1], yk) +
                         control_drift(noise, ms, g, grid[k + 1], yk);
    acc += 0.5 * h * (rhs_prev + rhs_k);
    max_res = std::max(max_res,
                       sp.h_norm(yk - acc) / std::max(1.0, sp.h_norm(yk)));
    rhs_prev = rhs_k;
  }
  result.max_residual = max_res;
  return result;
}

AprioriBound apriori_bound(const GalerkinSpace& sp, const DriftOperator& drift,
                           const NoiseCoefficient& noise, const MarkSpace& ms,
                           const Vector& x0, double horizon, double level,
                           Index grid_cells) {
  if (!(horizon > 0.0))
    throw std::invalid_argument("apriori_bound: horizon must be positive");
  if (!(level >= 0.0))
    throw std::invalid_argument("apriori_bound: level must be >= 0");
  if (grid_cells < 1)
    throw std::invalid_argument("apriori_bound: need at least one cell");

  // Time-uniform envelope per mark, so the supremum over the level set is
  // exact for the resulting one-cell problem.
  Matrix chi(1, ms.size());
  for (Index j = 0; j < ms.size(); ++j) {
    double m = 0.0;
    for (Index s = 0; s <= grid_cells; ++s) {
      const double t =
          horizon * static_cast<double>(s) / static_cast<double>(grid_cells);
      m = std::max(m, noise.growth_envelope(t, j));
    }
    chi(0, j) = m;
  }
  Vector one_cell(2);
  one_cell << 0.0, horizon;
  const EntropyBallResult eb =
      entropy_ball_sup(ms, one_cell, chi, level, BallObjective::abs_dev);

  double int_f = 0.0;
  const double h = horizon / static_cast<double>(grid_cells);
  for (Index k = 0; k < grid_cells; ++k)
    int_f += std::max(0.0, drift.hyp.big_f((static_cast<double>(k) + 0.5) * h)) * h;

  AprioriBound out;
  out.control_supremum = eb.value;
  out.exponent = int_f + 4.0 * eb.value;
  out.bound = (sp.h_inner(x0, x0) + out.exponent) *
              std::exp(std::min(kExpGuard, out.exponent));
  return out;
}

}  // namespace ldp
