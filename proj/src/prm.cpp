#include "ldp/prm.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace ldp {

namespace {

void check_modulation(const Control& psi, double band) {
  for (Index k = 0; k < psi.cells(); ++k) {
    for (Index j = 0; j < psi.marks(); ++j) {
      const double x = psi.values()(k, j);
      if (!std::isfinite(x) || x < 0.0)
        throw config_error("modulation: entries must be finite and >= 0");
      if (x != 0.0 && (x < 1.0 / band || x > band))
        throw config_error("modulation: nonzero entries must lie in the band");
    }
  }
}

void sort_jumps(std::vector<JumpRecord>& jumps) {
  std::sort(jumps.begin(), jumps.end(), [](const JumpRecord& a,
                                           const JumpRecord& b) {
    if (a.time != b.time) return a.time < b.time;
    return a.mark < b.mark;
  });
}

// Dominating-rate sampler shared by the plain and thinned cases. peak[j] is
// the per-mark dominating modulation level; accept(t, j) in [0, 1] thins.
std::vector<JumpRecord> sample_core(
    const MarkSpace& ms, double horizon, double rate_scale, const Vector& peak,
    const std::function<double(double, Index)>& accept, StreamRng& rng,
    const PrmOptions& opts) {
  ms.validate();
  if (!(horizon > 0.0)) throw config_error("prm: horizon must be positive");
  if (!(rate_scale > 0.0)) throw config_error("prm: rate must be positive");

  double expected = 0.0;
  for (Index j = 0; j < ms.size(); ++j)
    expected += rate_scale * peak[j] * ms.nu[j] * horizon;
  if (expected > opts.max_expected)
    throw resource_error("prm: expected jump count exceeds the cap");

  std::vector<JumpRecord> jumps;
  jumps.reserve(static_cast<std::size_t>(std::min(expected * 1.5 + 16.0,
                                                  opts.max_expected)));
  for (Index j = 0; j < ms.size(); ++j) {
    if (peak[j] == 0.0) continue;
    StreamRng sub = rng.fork(static_cast<std::uint64_t>(j));
    const double mean = rate_scale * peak[j] * ms.nu[j] * horizon;
    std::poisson_distribution<long long> pois(mean);
    const long long count = pois(sub);
    for (long long i = 0; i < count; ++i) {
      const double t = sub.uniform01() * horizon;
      if (accept) {
        const double p = accept(t, j);
        if (sub.uniform01() >= p) continue;
      }
      jumps.push_back({t, j});
    }
  }
  sort_jumps(jumps);
  return jumps;
}

}  // namespace

std::vector<JumpRecord> sample_prm(const MarkSpace& ms, double horizon,
                                   double rate_scale, StreamRng rng,
                                   const PrmOptions& opts) {
  const Vector peak = Vector::Ones(ms.size());
  return sample_core(ms, horizon, rate_scale, peak, nullptr, rng, opts);
}

std::vector<JumpRecord> sample_controlled_prm(const MarkSpace& ms,
                                              const Control& psi, double eps,
                                              StreamRng rng,
                                              const PrmOptions& opts) {
  if (!(eps > 0.0)) throw config_error("controlled prm: eps must be positive");
  if (psi.marks() != ms.size())
    throw config_error("controlled prm: modulation marks mismatch");
  check_modulation(psi, opts.band_bound);

  Vector peak(ms.size());
  for (Index j = 0; j < ms.size(); ++j)
    peak[j] = psi.values().col(j).maxCoeff();
  auto accept = [&psi, &peak](double t, Index j) {
    return psi.value(t, j) / peak[j];
  };
  return sample_core(ms, psi.horizon(), 1.0 / eps, peak, accept, rng, opts);
}

Vector compensated_sum(double eps, const std::vector<JumpRecord>& jumps,
                       const std::function<Vector(double, Index)>& integrand,
                       const MarkSpace& ms, const Control& modulation) {
  if (modulation.marks() != ms.size())
    throw std::invalid_argument("compensated_sum: marks mismatch");
  // 4-point Gauss-Legendre nodes/weights on [-1, 1].
  static constexpr double kNode[4] = {-0.8611363115940526, -0.3399810435848563,
                                      0.3399810435848563, 0.8611363115940526};
  static constexpr double kWeight[4] = {0.3478548451374538, 0.6521451548625461,
                                        0.6521451548625461,
                                        0.3478548451374538};

  // Probe once for the output dimension.
  Vector total = integrand(modulation.cell_mid(0), 0);
  total.setZero();

  for (const JumpRecord& jr : jumps) total += integrand(jr.time, jr.mark);
  total *= eps;

  for (Index k = 0; k < modulation.cells(); ++k) {
    const double a = modulation.time_grid()[k];
    const double b = modulation.time_grid()[k + 1];
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    for (Index j = 0; j < ms.size(); ++j) {
      const double level = modulation.values()(k, j) * ms.nu[j];
      if (level == 0.0) continue;
      for (int q = 0; q < 4; ++q) {
        const double t = mid + half * kNode[q];
        total -= level * half * kWeight[q] * integrand(t, j);
      }
    }
  }
  return total;
}

}  // namespace ldp
