#pragma once

#include "ldp/types.hpp"

#include <vector>

namespace ldp {

/// CDF of the chi-square distribution with `dof` degrees of freedom.
double chi_square_cdf(double x, double dof);

/// Pearson statistic against known per-cell expectations (no fitted
/// parameters, so dof = #cells) and its p-value.
struct ChiSquareResult {
  double statistic;
  double dof;
  double p_value;
};
ChiSquareResult chi_square_known_mean(const std::vector<double>& observed,
                                      const std::vector<double>& expected);

/// Two independent count vectors with supposedly equal means; conditioning on
/// per-cell totals gives a binomial(1/2) statistic, dof = #cells with data.
ChiSquareResult chi_square_two_sample(const std::vector<double>& a,
                                      const std::vector<double>& b);

struct MeanStderr {
  double mean;
  double stderr_;
  Index count;
};
MeanStderr mean_stderr(const std::vector<double>& xs);

/// Weighted least-squares line fit y ~ intercept + slope * x.
struct LineFit {
  double slope;
  double intercept;
};
LineFit weighted_line_fit(const std::vector<double>& x,
                          const std::vector<double>& y,
                          const std::vector<double>& weight);

}  // namespace ldp
