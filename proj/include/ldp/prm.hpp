#pragma once

#include "ldp/control.hpp"
#include "ldp/rng.hpp"
#include "ldp/types.hpp"

#include <functional>
#include <vector>

namespace ldp {

/// One realized jump: arrival time and the index of the mark atom.
struct JumpRecord {
  double time;
  Index mark;
};

struct PrmOptions {
  double max_expected = 1e7;  // cap on the expected dominating jump count
  double band_bound = 1e6;    // admissible modulation band [1/b, b] (or 0)
};

/// Homogeneous PRM on [0, horizon] x marks with intensity
/// rate_scale * nu(dz) dt. Per-mark counts and times come from forked
/// substreams keyed by the mark index, so output is independent of
/// evaluation order; jumps are returned sorted by (time, mark).
std::vector<JumpRecord> sample_prm(const MarkSpace& ms, double horizon,
                                   double rate_scale, StreamRng rng,
                                   const PrmOptions& opts = {});

/// Controlled PRM with intensity (1/eps) psi(t, z) nu(dz) dt, realized by
/// thinning a dominating homogeneous measure at the per-mark peak rate.
/// psi entries must be 0 exactly or lie in [1/band, band].
std::vector<JumpRecord> sample_controlled_prm(const MarkSpace& ms,
                                              const Control& psi, double eps,
                                              StreamRng rng,
                                              const PrmOptions& opts = {});

/// eps * sum over jumps of integrand(t_i, mark_i) minus the compensator
/// integral of integrand * modulation against nu(dz) dt (Gauss-Legendre in
/// time per modulation cell; exact for piecewise-constant integrands).
/// With modulation psi and jumps from intensity (1/eps) psi nu, the result
/// is a mean-zero compensated integral.
Vector compensated_sum(double eps, const std::vector<JumpRecord>& jumps,
                       const std::function<Vector(double, Index)>& integrand,
                       const MarkSpace& ms, const Control& modulation);

}  // namespace ldp
