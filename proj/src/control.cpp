#include "ldp/control.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace ldp {

namespace {

constexpr double kMultLo = 1e-8;
constexpr double kMultHi = 1e8;
constexpr Index kBisectIters = 200;
constexpr double kBisectTol = 1e-10;
constexpr double kExpGuard = 700.0;  // exp() overflow guard

double guarded_exp(double x) { return std::exp(std::min(x, kExpGuard)); }

}  // namespace

void MarkSpace::validate() const {
  if (points.size() == 0) throw config_error("mark space: no atoms");
  if (points.size() != nu.size())
    throw config_error("mark space: points/nu size mismatch");
  for (Index j = 0; j < nu.size(); ++j) {
    if (!(nu[j] > 0.0) || !std::isfinite(nu[j]))
      throw config_error("mark space: nu weights must be finite and positive");
  }
}

Control::Control(Vector time_grid, Matrix values)
    : time_grid_(std::move(time_grid)), values_(std::move(values)) {
  if (time_grid_.size() != values_.rows() + 1)
    throw std::invalid_argument("Control: grid size must be cells + 1");
  if (values_.rows() < 1 || values_.cols() < 1)
    throw std::invalid_argument("Control: need at least one cell and mark");
  if (time_grid_[0] != 0.0)
    throw std::invalid_argument("Control: grid must start at 0");
  for (Index k = 0; k + 1 < time_grid_.size(); ++k) {
    if (!(time_grid_[k + 1] > time_grid_[k]))
      throw std::invalid_argument("Control: grid must be strictly increasing");
  }
}

Control Control::constant(double value, Index cells, double horizon,
                          Index marks) {
  Vector grid = Vector::LinSpaced(cells + 1, 0.0, horizon);
  grid[0] = 0.0;
  grid[cells] = horizon;
  return Control(std::move(grid), Matrix::Constant(cells, marks, value));
}

Index Control::cell_of(double t) const {
  if (t <= time_grid_[0]) return 0;
  if (t >= time_grid_[cells()]) return cells() - 1;
  const double* begin = time_grid_.data();
  const double* end = begin + time_grid_.size();
  const Index k = std::upper_bound(begin, end, t) - begin - 1;
  return std::min(k, cells() - 1);
}

double Control::value(double t, Index mark) const {
  return values_(cell_of(t), mark);
}

double ell(double x) {
  if (x < 0.0 || !std::isfinite(x))
    throw std::invalid_argument("ell: domain is [0, inf)");
  if (x == 0.0) return 1.0;
  return x * std::log(x) - x + 1.0;
}

double q_cost(const MarkSpace& ms, const Control& g) {
  if (g.marks() != ms.size())
    throw std::invalid_argument("q_cost: control marks != mark space size");
  double total = 0.0;
  for (Index k = 0; k < g.cells(); ++k) {
    const double dt = g.cell_dt(k);
    for (Index j = 0; j < g.marks(); ++j)
      total += dt * ms.nu[j] * ell(g.values()(k, j));
  }
  return total;
}

bool in_level_set(const MarkSpace& ms, const Control& g, double level) {
  return q_cost(ms, g) <= level + 1e-12 * std::max(1.0, std::abs(level));
}

namespace {

// Pointwise maximizer of the per-cell Lagrangian at multiplier lam > 0 and
// its objective contribution. weighted_l2: concave in h, stationary at
// h = exp(chi^2 / lam). abs_dev: two concave branches (h >= 1 and h <= 1);
// the right branch dominates (sinh s >= s) but both are evaluated.
struct CellMax {
  double h;
  double objective;  // per unit weight
};

CellMax cell_max_weighted_l2(double chi, double lam) {
  const double h = guarded_exp(chi * chi / lam);
  return {h, chi * chi * (h + 1.0)};
}

CellMax cell_max_abs_dev(double chi, double lam) {
  const double s = chi / lam;
  const double h_right = guarded_exp(s);
  const double right = chi * (h_right - 1.0) - lam * ell(h_right);
  const double h_left = std::exp(-s);
  const double left = chi * (1.0 - h_left) - lam * ell(h_left);
  const double h = right >= left ? h_right : h_left;
  return {h, chi * std::abs(h - 1.0)};
}

CellMax cell_max(BallObjective obj, double chi, double lam) {
  return obj == BallObjective::weighted_l2 ? cell_max_weighted_l2(chi, lam)
                                           : cell_max_abs_dev(chi, lam);
}

}  // namespace

EntropyBallResult entropy_ball_sup(const MarkSpace& ms, const Vector& time_grid,
                                   const Matrix& chi, double budget,
                                   BallObjective objective) {
  ms.validate();
  if (chi.cols() != ms.size())
    throw std::invalid_argument("entropy_ball_sup: chi marks mismatch");
  if (time_grid.size() != chi.rows() + 1)
    throw std::invalid_argument("entropy_ball_sup: grid size mismatch");
  if (!(budget > 0.0))
    throw std::invalid_argument("entropy_ball_sup: budget must be positive");
  const Index K = chi.rows();
  const Index m = chi.cols();
  for (Index k = 0; k < K; ++k)
    for (Index j = 0; j < m; ++j)
      if (chi(k, j) < 0.0 || !std::isfinite(chi(k, j)))
        throw std::invalid_argument("entropy_ball_sup: chi must be >= 0");

  Matrix weights(K, m);
  for (Index k = 0; k < K; ++k)
    for (Index j = 0; j < m; ++j)
      weights(k, j) = (time_grid[k + 1] - time_grid[k]) * ms.nu[j];

  if (chi.maxCoeff() == 0.0) {
    // Objective is identically zero over the ball; h = 1 costs nothing.
    return {0.0, Matrix::Ones(K, m), 0.0, 0, false};
  }

  const auto fill = [&](double lam, Matrix& h_out) {
    double cost = 0.0;
    double value = 0.0;
    for (Index k = 0; k < K; ++k) {
      for (Index j = 0; j < m; ++j) {
        const CellMax cm = cell_max(objective, chi(k, j), lam);
        h_out(k, j) = cm.h;
        cost += weights(k, j) * ell(cm.h);
        value += weights(k, j) * cm.objective;
      }
    }
    return std::pair{cost, value};
  };

  Matrix h(K, m);
  double lo = std::log(kMultLo);
  double hi = std::log(kMultHi);

  // Excess cost is decreasing in the multiplier. If even the smallest
  // multiplier stays within budget, the constraint cannot bind on the range.
  if (fill(kMultLo, h).first <= budget) {
    const auto [cost, value] = fill(kMultLo, h);
    return {value, h, kMultLo, 0, cost >= budget * (1.0 - 1e-9)};
  }

  Index used = 0;
  for (Index it = 0; it < kBisectIters; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double excess = fill(std::exp(mid), h).first - budget;
    used = it + 1;
    if (std::abs(excess) <= kBisectTol * std::max(1.0, budget)) {
      lo = hi = mid;
      break;
    }
    if (excess > 0.0)
      lo = mid;  // cost too high -> raise multiplier
    else
      hi = mid;
  }
  // Finish on the feasible side of the bracket.
  const double lam = std::exp(hi);
  const auto [cost, value] = fill(lam, h);
  (void)cost;
  return {value, h, lam, used, true};
}

std::pair<double, double> product_entropy_bound(double a, double b,
                                                double sigma) {
  if (!(a > 0.0) || !(b > 0.0))
    throw std::invalid_argument("product_entropy_bound: need a, b > 0");
  if (!(sigma >= 1.0))
    throw std::invalid_argument("product_entropy_bound: need sigma >= 1");
  return {a * b, guarded_exp(sigma * a) + ell(b) / sigma};
}

EmbeddingWitness embedding_witness(const std::vector<double>& h_samples,
                                   double delta, double beta_exp) {
  if (!(delta > 0.0))
    throw std::invalid_argument("embedding_witness: delta must be > 0");
  if (beta_exp < 0.0)
    throw std::invalid_argument("embedding_witness: beta must be >= 0");

  double y_max = 50.0;
  for (double s : h_samples) y_max = std::max(y_max, std::abs(s) + 1.0);

  // Smallest grid M >= 1 with exp(delta y^2) >= y^(beta+2) for all tested
  // y >= M: scan downward and stop at the first violation.
  const double step = 1e-3;
  const Index n_steps = static_cast<Index>(std::ceil((y_max - 1.0) / step));
  double m_threshold = 1.0;
  for (Index i = n_steps; i >= 0; --i) {
    const double y = 1.0 + static_cast<double>(i) * step;
    const double lhs = delta * y * y;
    const double rhs = (beta_exp + 2.0) * std::log(y);
    if (lhs < rhs) {
      m_threshold = y + step;
      break;
    }
  }

  double lhs_integral = 0.0;
  double rhs_integral = 0.0;
  double h2_sum = 0.0;
  for (double s : h_samples) {
    const double y = std::abs(s);
    lhs_integral += std::pow(y, beta_exp + 2.0);
    h2_sum += y * y;
    if (y >= m_threshold) rhs_integral += guarded_exp(delta * y * y);
  }
  rhs_integral += std::pow(m_threshold, beta_exp) * h2_sum;
  return {m_threshold, lhs_integral, rhs_integral,
          lhs_integral <= rhs_integral * (1.0 + 1e-12)};
}

Vector dictionary_integrals(const MarkSpace& ms, const Control& g) {
  if (g.marks() != ms.size())
    throw std::invalid_argument("dictionary_integrals: marks mismatch");
  const double T = g.horizon();
  const double w = 2.0 * M_PI / T;
  Vector out = Vector::Zero(ms.size() * 5);
  for (Index k = 0; k < g.cells(); ++k) {
    const double a = g.time_grid()[k];
    const double b = g.time_grid()[k + 1];
    const double i0 = b - a;
    const double i1 = (b * b - a * a) / (2.0 * T);
    const double i2 = (b * b * b - a * a * a) / (3.0 * T * T);
    const double i3 = (std::cos(w * a) - std::cos(w * b)) / w;
    const double i4 = (std::sin(w * b) - std::sin(w * a)) / w;
    for (Index j = 0; j < g.marks(); ++j) {
      const double c = ms.nu[j] * g.values()(k, j);
      out[j * 5 + 0] += c * i0;
      out[j * 5 + 1] += c * i1;
      out[j * 5 + 2] += c * i2;
      out[j * 5 + 3] += c * i3;
      out[j * 5 + 4] += c * i4;
    }
  }
  return out;
}

}  // namespace ldp
