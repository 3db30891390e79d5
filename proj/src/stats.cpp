#include "ldp/stats.hpp"

#include <unsupported/Eigen/SpecialFunctions>

#include <cmath>
#include <stdexcept>

namespace ldp {

double chi_square_cdf(double x, double dof) {
  if (x <= 0.0) return 0.0;
  using ArrayD = Eigen::Array<double, 1, 1>;
  ArrayD a, b;
  a << dof / 2.0;
  b << x / 2.0;
  return Eigen::igamma(a, b)(0);
}

ChiSquareResult chi_square_known_mean(const std::vector<double>& observed,
                                      const std::vector<double>& expected) {
  if (observed.size() != expected.size())
    throw std::invalid_argument("chi_square_known_mean: size mismatch");
  double stat = 0.0;
  double dof = 0.0;
  for (std::size_t c = 0; c < observed.size(); ++c) {
    if (expected[c] <= 0.0) continue;
    const double d = observed[c] - expected[c];
    stat += d * d / expected[c];
    dof += 1.0;
  }
  return {stat, dof, 1.0 - chi_square_cdf(stat, dof)};
}

ChiSquareResult chi_square_two_sample(const std::vector<double>& a,
                                      const std::vector<double>& b) {
  if (a.size() != b.size())
    throw std::invalid_argument("chi_square_two_sample: size mismatch");
  double stat = 0.0;
  double dof = 0.0;
  for (std::size_t c = 0; c < a.size(); ++c) {
    const double total = a[c] + b[c];
    if (total <= 0.0) continue;
    const double d = a[c] - b[c];
    stat += d * d / total;
    dof += 1.0;
  }
  return {stat, dof, 1.0 - chi_square_cdf(stat, dof)};
}

MeanStderr mean_stderr(const std::vector<double>& xs) {
  const Index n = static_cast<Index>(xs.size());
  if (n == 0) return {0.0, 0.0, 0};
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(n);
  if (n == 1) return {mean, 0.0, 1};
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  const double var = ss / static_cast<double>(n - 1);
  return {mean, std::sqrt(var / static_cast<double>(n)), n};
}

LineFit weighted_line_fit(const std::vector<double>& x,
                          const std::vector<double>& y,
                          const std::vector<double>& weight) {
  if (x.size() != y.size() || x.size() != weight.size() || x.size() < 2)
    throw std::invalid_argument("weighted_line_fit: need >= 2 matching points");
  double sw = 0, swx = 0, swy = 0, swxx = 0, swxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double w = weight[i];
    sw += w;
    swx += w * x[i];
    swy += w * y[i];
    swxx += w * x[i] * x[i];
    swxy += w * x[i] * y[i];
  }
  const double det = sw * swxx - swx * swx;
  if (det == 0.0 || sw <= 0.0)
    throw std::invalid_argument("weighted_line_fit: degenerate abscissae");
  const double slope = (sw * swxy - swx * swy) / det;
  const double intercept = (swy - slope * swx) / sw;
  return {slope, intercept};
}

}  // namespace ldp
