#pragma once

#include "ldp/types.hpp"

#include <utility>
#include <vector>

namespace ldp {

/// Finite mark space: atoms z_j with intensity weights nu_j > 0.
struct MarkSpace {
  Vector points;
  Vector nu;

  [[nodiscard]] Index size() const { return points.size(); }
  [[nodiscard]] double total_mass() const { return nu.sum(); }
  void validate() const;
};

/// Piecewise-constant field on [0, T] x marks: value(k, j) on the k-th time
/// cell. Serves both as deterministic control g and as thinning modulation.
class Control {
 public:
  Control(Vector time_grid, Matrix values);

  static Control constant(double value, Index cells, double horizon,
                          Index marks);

  [[nodiscard]] Index cells() const { return values_.rows(); }
  [[nodiscard]] Index marks() const { return values_.cols(); }
  [[nodiscard]] double horizon() const { return time_grid_[cells()]; }
  [[nodiscard]] const Vector& time_grid() const { return time_grid_; }
  [[nodiscard]] const Matrix& values() const { return values_; }
  [[nodiscard]] Matrix& values() { return values_; }

  [[nodiscard]] double cell_dt(Index k) const {
    return time_grid_[k + 1] - time_grid_[k];
  }
  [[nodiscard]] double cell_mid(Index k) const {
    return 0.5 * (time_grid_[k] + time_grid_[k + 1]);
  }

  /// Cell lookup; cells are right-open, t = T maps to the last cell.
  [[nodiscard]] Index cell_of(double t) const;
  [[nodiscard]] double value(double t, Index mark) const;

 private:
  Vector time_grid_;
  Matrix values_;
};

/// Pointwise entropy integrand ell(x) = x log x - x + 1, with ell(0) = 1.
[[nodiscard]] double ell(double x);

/// Q(g) = sum_k sum_j dt_k * nu_j * ell(g_kj).
[[nodiscard]] double q_cost(const MarkSpace& ms, const Control& g);

/// Level-set membership Q(g) <= level (tiny relative slack for roundoff).
[[nodiscard]] bool in_level_set(const MarkSpace& ms, const Control& g,
                                double level);

enum class BallObjective {
  weighted_l2,  // sup of sum w_c chi_c^2 (h_c + 1)
  abs_dev,      // sup of sum w_c chi_c |h_c - 1|
};

struct EntropyBallResult {
  double value;
  Matrix maximizer;    // cells x marks
  double multiplier;   // Lagrange multiplier at the solution
  Index iterations;    // bisection steps used
  bool binding;        // constraint active at the returned point
};

/// Supremum of the chosen functional over the discrete entropy ball
/// { h >= 0 : sum_c w_c ell(h_c) <= budget }, w_c = dt_k * nu_j, chi >= 0
/// given per cell. Solved by Lagrangian duality: the pointwise maximizer is
/// closed-form in the multiplier (two-branch case analysis for abs_dev) and
/// the multiplier is found by log-scale bisection on [1e-8, 1e8].
EntropyBallResult entropy_ball_sup(const MarkSpace& ms, const Vector& time_grid,
                                   const Matrix& chi, double budget,
                                   BallObjective objective);

/// Both sides of the product bound a*b <= e^{sigma a} + ell(b)/sigma,
/// valid for a, b > 0, sigma >= 1. Returns {lhs, rhs}.
[[nodiscard]] std::pair<double, double> product_entropy_bound(double a,
                                                              double b,
                                                              double sigma);

struct EmbeddingWitness {
  double m_threshold;     // smallest scanned M >= 1 with exp(d y^2) >= y^(b+2)
                          // for every tested y >= M
  double lhs_integral;    // sum |h_i|^(b+2)
  double rhs_integral;    // sum over {|h_i| >= M} exp(d h_i^2) + M^b sum h_i^2
  bool holds;
};

/// Scan witness for the superquadratic domination used to absorb the
/// beta-moment: finds M on a y-grid, then confirms the split bound on the
/// given samples (empirical integrals).
EmbeddingWitness embedding_witness(const std::vector<double>& h_samples,
                                   double delta, double beta_exp);

/// Integrals of dictionary functions phi(t, z) = b(t) * 1{z = z_j} against
/// g d(nu x dt), b in {1, t/T, (t/T)^2, sin(2 pi t/T), cos(2 pi t/T)}.
/// Time integrals are exact per cell. Layout: j * 5 + basis_index.
[[nodiscard]] Vector dictionary_integrals(const MarkSpace& ms,
                                          const Control& g);

}  // namespace ldp
