#pragma once

#include "ldp/control.hpp"
#include "ldp/spaces.hpp"
#include "ldp/types.hpp"

#include <functional>
#include <optional>
#include <string>

namespace ldp {

/// Constants under which the drift's structural inequalities are audited.
/// big_f is the integrable budget F_t; rho the local-monotonicity modulus.
struct HypothesisConstants {
  double alpha = 2.0;
  double beta = 0.0;
  double theta = 1.0;
  double c_growth = 1.0;
  std::function<double(double)> big_f;
  std::function<double(const Vector&)> rho;
};

/// Drift A(t, v) mapping V into V*. `apply` returns pairing coordinates;
/// `jacobian` (optional) is the derivative of those coordinates in v, used to
/// accelerate implicit time steps. Finite-difference fallback is applied when
/// absent.
struct DriftOperator {
  std::string name;
  std::function<Vector(double, const Vector&)> apply;
  std::function<Matrix(double, const Vector&)> jacobian;
  HypothesisConstants hyp;
};

/// Applies the drift and wraps the result as a dual element; throws
/// numerical_error on non-finite output.
[[nodiscard]] DualVector drift_apply(const DriftOperator& op, double t,
                                     const Vector& v);

/// Componentwise linear drift A(t, v) = -a v; V = H with identity pairing.
DriftOperator make_scalar_linear(const GalerkinSpace& sp, double a,
                                 double f_const = 0.0);

/// One-dimensional p-Laplace drift d/dx(|du/dx|^{p-2} du/dx) on the periodic
/// grid, plus a lower-order damping term -damping * |v|^{p-2} v. The damping
/// keeps coercivity exact for p > 2 (the gradient part alone degenerates on
/// constants); damping = 0 is accepted for p = 2 only.
DriftOperator make_p_laplace(const GalerkinSpace& sp, double p, double damping,
                             double f_const = 0.0);

/// One-dimensional viscous Burgers drift nu u'' - u u' on the periodic grid,
/// convection in the energy-conserving skew form (D(u^2) + u Du)/3, so the
/// discrete energy identity and the local monotonicity modulus
/// rho(v) = |v|_inf^2 / (2 nu) hold exactly.
DriftOperator make_burgers(const GalerkinSpace& sp, double viscosity,
                           double f_const = 0.0);

/// Jump coefficient f(t, v, z_j) with its advertised envelopes:
/// |f(t,v,z)|_H <= growth_envelope(t,z) (1 + |v|_H) and
/// |f(t,v1,z) - f(t,v2,z)|_H <= lipschitz_envelope(t,z) |v1 - v2|_H.
struct NoiseCoefficient {
  std::string name;
  bool state_dependent = false;
  std::function<Vector(double, const Vector&, Index)> apply;
  std::function<double(double, Index)> growth_envelope;
  std::function<double(double, Index)> lipschitz_envelope;
};

NoiseCoefficient make_zero_noise(const GalerkinSpace& sp, Index marks);

/// f(t, v, z_j) = sigma_j (1 + kappa v); envelopes are exact.
NoiseCoefficient make_affine_noise(const GalerkinSpace& sp, Vector sigma,
                                   double kappa);

/// f(t, v, z_j) = sigma_j sqrt(|v|) componentwise. The growth envelope is
/// valid but the advertised Lipschitz envelope is an affine claim a
/// Hoelder-1/2 map cannot honor near zero; exists to exercise the audit's
/// failure path.
NoiseCoefficient make_sqrt_noise(const GalerkinSpace& sp, Vector sigma,
                                 double claimed_lipschitz);

struct AuditOptions {
  Index samples = 10000;
  double t_max = 1.0;
  double scale_lo = 1e-3;   // sampled state magnitudes, log-uniform
  double scale_hi = 1e2;
  double tol_rel = 1e-9;    // inequality slack relative to both sides
  int threads = 1;
  Index hemi_points = 65;   // finest line grid; refinements are nested strides
  double hemi_shrink = 0.75;
};

struct AuditWitness {
  double t = 0.0;
  Vector v1;
  Vector v2;
  Index mark = -1;
  double lhs = 0.0;
  double rhs = 0.0;
};

struct AuditReport {
  std::string hypothesis;
  bool passed = false;
  double worst_margin = 0.0;  // max over samples of lhs - rhs
  double tolerance = 0.0;     // absolute slack applied at the worst sample
  Index samples = 0;
  std::optional<AuditWitness> witness;  // populated when passed is false
};

/// Line continuity probe: s -> <A(t, v1 + s v2), v> on nested dyadic grids;
/// fails when the adjacent-point oscillation stops shrinking under
/// refinement (a jump shows up as a stalled oscillation).
AuditReport check_hemicontinuity(const GalerkinSpace& sp,
                                 const DriftOperator& op,
                                 const AuditOptions& opts, std::uint64_t seed);

/// 2<A(t,v1) - A(t,v2), v1 - v2> <= (F_t + rho(v2)) |v1 - v2|_H^2.
AuditReport check_local_monotonicity(const GalerkinSpace& sp,
                                     const DriftOperator& op,
                                     const AuditOptions& opts,
                                     std::uint64_t seed);

/// 2<A(t,v), v> + theta |v|_V^alpha <= F_t (1 + |v|_H^2).
AuditReport check_coercivity(const GalerkinSpace& sp, const DriftOperator& op,
                             const AuditOptions& opts, std::uint64_t seed);

/// |A(t,v)|_{V*}^{alpha/(alpha-1)} <= (F_t + c |v|_V^alpha)(1 + |v|_H^beta),
/// dual norm estimated from the normalized Galerkin basis probes (a lower
/// bound of the true dual norm, adequate for auditing an upper bound).
AuditReport check_growth(const GalerkinSpace& sp, const DriftOperator& op,
                         const AuditOptions& opts, std::uint64_t seed);

/// rho(v) <= c (1 + |v|_V^alpha)(1 + |v|_H^beta) on random states.
AuditReport check_rho_growth(const GalerkinSpace& sp, const DriftOperator& op,
                             const AuditOptions& opts, std::uint64_t seed);

/// |f(t,v,z)|_H <= growth_envelope (1 + |v|_H) on random (t, v, mark).
AuditReport check_noise_growth(const GalerkinSpace& sp, const MarkSpace& ms,
                               const NoiseCoefficient& noise,
                               const AuditOptions& opts, std::uint64_t seed);

/// |f(t,v1,z) - f(t,v2,z)|_H <= lipschitz_envelope |v1 - v2|_H on random
/// (t, v1, v2, mark) pairs, including near-zero states.
AuditReport check_noise_lipschitz(const GalerkinSpace& sp, const MarkSpace& ms,
                                  const NoiseCoefficient& noise,
                                  const AuditOptions& opts,
                                  std::uint64_t seed);

}  // namespace ldp
