#pragma once

#include "ldp/problem.hpp"
#include "ldp/rate.hpp"
#include "ldp/spde.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace ldp {

enum class Verdict { pass, fail, inconclusive };

/// One checked quantity; hard rows decide the verdict, soft rows inform.
struct VerdictRow {
  std::string name;
  double observed = 0.0;
  double threshold = 0.0;
  std::string relation;
  bool passed = false;
  bool hard = true;
};

struct MetricPoint {
  double x = 0.0;
  double y = 0.0;
  double se = 0.0;
};

struct MetricSeries {
  std::string name;
  std::vector<MetricPoint> points;
};

struct ExperimentReport {
  std::string name;
  Verdict verdict = Verdict::pass;
  std::vector<VerdictRow> rows;
  std::vector<MetricSeries> series;
  std::uint64_t seed = 0;
  std::string inputs_digest;
  std::string note;
};

const char* verdict_name(Verdict v);

/// Cellwise psi * (1 + gamma sin(2 pi n t_mid)), clipped at 0. The family
/// converges weakly (not strongly) to psi as n grows.
Control oscillating_family(const Control& psi, int n, double gamma);

/// Largest gamma in [0, gamma_max] keeping every family member's cost
/// within the level (bisection to the boundary).
double tune_oscillation_amplitude(const MarkSpace& ms, const Control& psi,
                                  const std::vector<int>& n_list, double level,
                                  double gamma_max = 0.999);

struct Ldp1Options {
  std::vector<int> n_list = {2, 4, 8, 16, 32, 64};
  double gamma = 0.8;
  double level = 3.0;  // family must stay inside {Q <= level}
  bool tune_amplitude = false;
  double distance_ratio = 0.1;   // d at n_max vs d at n_min
  double slope_lo = 0.8;         // strong-family log-log slope band
  double slope_hi = 1.2;
  SolveOptions solve;
};

/// Continuity of the control-to-path map: the oscillating (weak) family's
/// path distances must collapse, the dictionary integrals must converge,
/// and the strong family psi + 1/n must show first-order decay.
ExperimentReport run_ldp1(const Problem& pb, const Control& psi,
                          const Ldp1Options& opts);

struct Ldp2Options {
  std::vector<double> eps_list = {0.125,    0.0625,    0.03125,
                                  0.015625, 0.0078125, 0.00390625};
  Index paths = 500;
  double delta = 0.1;        // threshold for the exceedance probability
  double slope_min = 0.45;
  double censor_limit = 0.01;
  std::uint64_t seed = 1;
  int threads = 1;
  SimOptions sim;
};

/// Convergence of the tilted stochastic paths to the controlled path: fits
/// the rate of E[sup^2] in eps and checks the exceedance probability is
/// nonincreasing. Jumps are coupled across eps by nested thinning of one
/// master stream per path, so the comparison shares randomness.
ExperimentReport run_ldp2(const Problem& pb, const Control& psi,
                          const Ldp2Options& opts);

struct DyadicOptions {
  std::vector<int> m_list = {3, 4, 5, 6, 7, 8, 9};
  double eps = 0.0;  // 0: deterministic path; > 0: one simulated path
  double ratio_threshold = 0.05;
  double slope_max = -0.5;  // log2 slope bound (deterministic mode)
  std::uint64_t seed = 1;
  SolveOptions solve;
  SimOptions sim;
};

/// Right-endpoint discretization defect D_m = int |Y(sbar_m(t)) - Y(t)|^2 dt
/// on dyadic grids; decays quadratically for smooth paths, first order with
/// jumps (where the decrease check is informational only).
ExperimentReport run_dyadic_diagnostic(const Problem& pb, const Control& psi,
                                       const DyadicOptions& opts);

struct TailOptions {
  std::vector<double> eps_list = {0.4, 0.2, 0.1};
  Index paths = 2000;
  double margin = 0.5;
  Index min_hits = 20;
  double level_cap = 10.0;
  std::uint64_t seed = 7;
  int threads = 1;
  Vector control_grid;  // minimizer search grid; empty: single cell
  MinimizeOptions rate_opts;
  SimOptions sim;
};

/// Rare-event trend: eps * log p(eps) against the optimized cost bound -I.
/// Inconclusive (never failing) when hit counts are too small to read.
ExperimentReport run_tail_trend(const Problem& pb, const EventSpec& event,
                                const TailOptions& opts);

}  // namespace ldp
