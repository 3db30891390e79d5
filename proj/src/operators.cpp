#include "ldp/operators.hpp"

#include "ldp/parallel.hpp"
#include "ldp/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

namespace ldp {

namespace {

double log_uniform(StreamRng& rng, double lo, double hi) {
  return std::exp(std::log(lo) + rng.uniform01() * std::log(hi / lo));
}

Vector gaussian_direction(const GalerkinSpace& sp, StreamRng& rng) {
  Vector g(sp.dim());
  for (Index i = 0; i < g.size(); ++i) g[i] = rng.normal();
  const double n = sp.h_norm(g);
  if (n == 0.0) {
    Vector e = Vector::Zero(sp.dim());
    e[0] = 1.0;
    return e / sp.h_norm(e);
  }
  return g / n;
}

Vector sample_state(const GalerkinSpace& sp, StreamRng& rng, double lo,
                    double hi) {
  return gaussian_direction(sp, rng) * log_uniform(rng, lo, hi);
}

double constant_or(const std::function<double(double)>& f, double t) {
  return f ? f(t) : 0.0;
}

// p-power flux |s|^{p-2} s and its derivative; p >= 2 keeps both finite.
double p_flux(double s, double p) {
  if (s == 0.0) return 0.0;
  return std::pow(std::abs(s), p - 2.0) * s;
}
double p_flux_deriv(double s, double p) {
  if (p == 2.0) return 1.0;
  return (p - 1.0) * std::pow(std::abs(s), p - 2.0);
}

using SampleFn =
    std::function<void(StreamRng rng, double& lhs, double& rhs,
                       AuditWitness* witness)>;

// Shared audit driver: parallel margin evaluation with per-sample forked
// streams, deterministic reduction in index order, witness re-derived for the
// worst sample only (same fork, so the regeneration is exact).
AuditReport run_audit(std::string hypothesis, const AuditOptions& opts,
                      std::uint64_t seed, const SampleFn& fn) {
  const Index n = opts.samples;
  std::vector<double> lhs(n), rhs(n);
  StreamRng root(seed, 0);
  parallel_for(n, opts.threads, [&](Index i) {
    fn(root.fork(static_cast<std::uint64_t>(i)), lhs[i], rhs[i], nullptr);
  });

  AuditReport report;
  report.hypothesis = std::move(hypothesis);
  report.samples = n;
  Index worst = -1;
  double worst_excess = -std::numeric_limits<double>::infinity();
  double worst_margin = -std::numeric_limits<double>::infinity();
  double worst_tol = 0.0;
  for (Index i = 0; i < n; ++i) {
    const double allowed =
        opts.tol_rel * std::max({1.0, std::abs(lhs[i]), std::abs(rhs[i])});
    const double margin = lhs[i] - rhs[i];
    if (margin > worst_margin) worst_margin = margin;
    if (margin - allowed > worst_excess) {
      worst_excess = margin - allowed;
      worst = i;
      worst_tol = allowed;
    }
  }
  report.worst_margin = worst_margin;
  report.tolerance = worst_tol;
  report.passed = worst_excess <= 0.0;
  if (!report.passed && worst >= 0) {
    AuditWitness w;
    double l = 0.0, r = 0.0;
    fn(root.fork(static_cast<std::uint64_t>(worst)), l, r, &w);
    w.lhs = l;
    w.rhs = r;
    report.witness = std::move(w);
  }
  return report;
}

}  // namespace

DualVector drift_apply(const DriftOperator& op, double t, const Vector& v) {
  Vector coords = op.apply(t, v);
  if (!coords.allFinite())
    throw numerical_error("drift_apply: non-finite output from " + op.name);
  return DualVector{std::move(coords)};
}

DriftOperator make_scalar_linear(const GalerkinSpace& sp, double a,
                                 double f_const) {
  if (sp.v_norm_kind() != VNormKind::h)
    throw std::invalid_argument("scalar_linear: space must have V = H");
  if (!(a > 0.0)) throw std::invalid_argument("scalar_linear: need a > 0");
  if (f_const < 0.0)
    throw std::invalid_argument("scalar_linear: need F >= 0");
  DriftOperator op;
  op.name = "scalar_linear";
  op.apply = [a](double, const Vector& v) -> Vector { return -a * v; };
  const Index n = sp.dim();
  op.jacobian = [a, n](double, const Vector&) -> Matrix {
    return -a * Matrix::Identity(n, n);
  };
  op.hyp.alpha = 2.0;
  op.hyp.beta = 0.0;
  op.hyp.theta = 2.0 * a;
  op.hyp.c_growth = a * a;
  op.hyp.big_f = [f_const](double) { return f_const; };
  op.hyp.rho = [](const Vector&) { return 0.0; };
  return op;
}

DriftOperator make_p_laplace(const GalerkinSpace& sp, double p, double damping,
                             double f_const) {
  if (sp.v_norm_kind() != VNormKind::w1p || sp.alpha() != p)
    throw std::invalid_argument("p_laplace: space must carry the w1p norm");
  if (!(p >= 2.0)) throw std::invalid_argument("p_laplace: need p >= 2");
  if (damping < 0.0) throw std::invalid_argument("p_laplace: damping < 0");
  if (damping == 0.0 && p != 2.0)
    throw std::invalid_argument(
        "p_laplace: p > 2 needs damping > 0 (coercivity degenerates on "
        "constants otherwise)");
  const Index n = sp.dim();
  const double h = sp.spacing();

  DriftOperator op;
  op.name = "p_laplace";
  op.apply = [n, h, p, damping](double, const Vector& v) -> Vector {
    Vector out(n);
    for (Index i = 0; i < n; ++i) {
      const Index ip = (i + 1 == n) ? 0 : i + 1;
      const Index im = (i == 0) ? n - 1 : i - 1;
      const double d_here = (v[ip] - v[i]) / h;
      const double d_prev = (v[i] - v[im]) / h;
      out[i] = (p_flux(d_here, p) - p_flux(d_prev, p)) / h -
               damping * p_flux(v[i], p);
    }
    return out;
  };
  op.jacobian = [n, h, p, damping](double, const Vector& v) -> Matrix {
    Matrix jac = Matrix::Zero(n, n);
    for (Index i = 0; i < n; ++i) {
      const Index ip = (i + 1 == n) ? 0 : i + 1;
      const Index im = (i == 0) ? n - 1 : i - 1;
      const double dp_here = p_flux_deriv((v[ip] - v[i]) / h, p);
      const double dp_prev = p_flux_deriv((v[i] - v[im]) / h, p);
      jac(i, ip) += dp_here / (h * h);
      jac(i, i) -= (dp_here + dp_prev) / (h * h);
      jac(i, im) += dp_prev / (h * h);
      jac(i, i) -= damping * p_flux_deriv(v[i], p);
    }
    return jac;
  };
  op.hyp.alpha = p;
  op.hyp.beta = 0.0;
  op.hyp.theta = damping > 0.0 ? std::min(2.0, 2.0 * damping) : 1.0;
  op.hyp.c_growth = std::max(1.0, std::pow(damping, p / (p - 1.0)));
  const double f_min = damping == 0.0 ? op.hyp.theta : 0.0;
  const double f_val = std::max(f_const, f_min);
  op.hyp.big_f = [f_val](double) { return f_val; };
  op.hyp.rho = [](const Vector&) { return 0.0; };
  return op;
}

DriftOperator make_burgers(const GalerkinSpace& sp, double viscosity,
                           double f_const) {
  if (sp.v_norm_kind() != VNormKind::w1p || sp.alpha() != 2.0)
    throw std::invalid_argument("burgers: space must carry the w1p norm, p=2");
  if (!(viscosity > 0.0))
    throw std::invalid_argument("burgers: need viscosity > 0");
  const Index n = sp.dim();
  const double h = sp.spacing();

  DriftOperator op;
  op.name = "burgers";
  op.apply = [n, h, viscosity](double, const Vector& v) -> Vector {
    Vector out(n);
    for (Index i = 0; i < n; ++i) {
      const Index ip = (i + 1 == n) ? 0 : i + 1;
      const Index im = (i == 0) ? n - 1 : i - 1;
      const double lap = (v[ip] - 2.0 * v[i] + v[im]) / (h * h);
      const double dc = (v[ip] - v[im]) / (2.0 * h);
      const double conv =
          ((v[ip] * v[ip] - v[im] * v[im]) / (2.0 * h) + v[i] * dc) / 3.0;
      out[i] = viscosity * lap - conv;
    }
    return out;
  };
  op.jacobian = [n, h, viscosity](double, const Vector& v) -> Matrix {
    Matrix jac = Matrix::Zero(n, n);
    for (Index i = 0; i < n; ++i) {
      const Index ip = (i + 1 == n) ? 0 : i + 1;
      const Index im = (i == 0) ? n - 1 : i - 1;
      const double dc = (v[ip] - v[im]) / (2.0 * h);
      jac(i, ip) += viscosity / (h * h) -
                    (v[ip] / h + v[i] / (2.0 * h)) / 3.0;
      jac(i, i) += -2.0 * viscosity / (h * h) - dc / 3.0;
      jac(i, im) += viscosity / (h * h) +
                    (v[im] / h + v[i] / (2.0 * h)) / 3.0;
    }
    return jac;
  };
  op.hyp.alpha = 2.0;
  op.hyp.beta = 2.0;
  op.hyp.theta = std::min(2.0 * viscosity, 1.0);
  op.hyp.c_growth = std::max(2.0 * viscosity * viscosity, 4.0 / h);
  const double f_val = std::max(f_const, op.hyp.theta);
  op.hyp.big_f = [f_val](double) { return f_val; };
  op.hyp.rho = [viscosity](const Vector& v) {
    const double sup = v.size() > 0 ? v.cwiseAbs().maxCoeff() : 0.0;
    return sup * sup / (2.0 * viscosity);
  };
  return op;
}

NoiseCoefficient make_zero_noise(const GalerkinSpace& sp, Index marks) {
  (void)marks;
  NoiseCoefficient nc;
  nc.name = "zero";
  nc.state_dependent = false;
  const Index n = sp.dim();
  nc.apply = [n](double, const Vector&, Index) { return Vector::Zero(n); };
  nc.growth_envelope = [](double, Index) { return 0.0; };
  nc.lipschitz_envelope = [](double, Index) { return 0.0; };
  return nc;
}

NoiseCoefficient make_affine_noise(const GalerkinSpace& sp, Vector sigma,
                                   double kappa) {
  const Index n = sp.dim();
  const Vector ones = Vector::Ones(n);
  const double ones_norm = sp.h_norm(ones);
  NoiseCoefficient nc;
  nc.name = "affine";
  nc.state_dependent = kappa != 0.0;
  nc.apply = [sigma, kappa, ones](double, const Vector& v,
                                  Index mark) -> Vector {
    return sigma[mark] * (ones + kappa * v);
  };
  nc.growth_envelope = [sigma, kappa, ones_norm](double, Index mark) {
    return std::abs(sigma[mark]) * std::max(ones_norm, std::abs(kappa));
  };
  nc.lipschitz_envelope = [sigma, kappa](double, Index mark) {
    return std::abs(sigma[mark] * kappa);
  };
  return nc;
}

NoiseCoefficient make_sqrt_noise(const GalerkinSpace& sp, Vector sigma,
                                 double claimed_lipschitz) {
  const Index n = sp.dim();
  const double ones_norm = sp.h_norm(Vector::Ones(n));
  NoiseCoefficient nc;
  nc.name = "sqrt";
  nc.state_dependent = true;
  nc.apply = [sigma, n](double, const Vector& v, Index mark) -> Vector {
    Vector out(n);
    for (Index i = 0; i < n; ++i) out[i] = std::sqrt(std::abs(v[i]));
    return sigma[mark] * out;
  };
  nc.growth_envelope = [sigma, ones_norm](double, Index mark) {
    return std::abs(sigma[mark]) * std::max(1.0, std::sqrt(ones_norm));
  };
  nc.lipschitz_envelope = [sigma, claimed_lipschitz](double, Index mark) {
    return std::abs(sigma[mark]) * claimed_lipschitz;
  };
  return nc;
}

AuditReport check_hemicontinuity(const GalerkinSpace& sp,
                                 const DriftOperator& op,
                                 const AuditOptions& opts,
                                 std::uint64_t seed) {
  const Index pts = opts.hemi_points;
  const double shrink = opts.hemi_shrink;
  const double tol_rel = opts.tol_rel;
  const double lo = opts.scale_lo, hi = std::min(opts.scale_hi, 10.0);
  const double t_max = opts.t_max;
  auto fn = [&sp, &op, pts, shrink, tol_rel, lo, hi, t_max](
                StreamRng rng, double& lhs, double& rhs, AuditWitness* w) {
    const double t = rng.uniform01() * t_max;
    const Vector v1 = sample_state(sp, rng, lo, hi);
    const Vector v2 = sample_state(sp, rng, lo, hi);
    const Vector probe = gaussian_direction(sp, rng);
    Vector m(pts);
    double m_scale = 0.0;
    for (Index i = 0; i < pts; ++i) {
      const double s = static_cast<double>(i) / static_cast<double>(pts - 1);
      m[i] = sp.h_inner(op.apply(t, v1 + s * v2), probe);
      m_scale = std::max(m_scale, std::abs(m[i]));
    }
    // Nested refinement: oscillation at stride 2^k over the same samples.
    Index stride = (pts - 1) / 4;
    double osc_coarse = 0.0, osc_fine = 0.0;
    bool first = true;
    while (stride >= 1) {
      double osc = 0.0;
      for (Index i = 0; i + stride < pts; i += stride)
        osc = std::max(osc, std::abs(m[i + stride] - m[i]));
      if (first) osc_coarse = osc;
      first = false;
      osc_fine = osc;
      stride /= 2;
    }
    lhs = osc_fine;
    rhs = shrink * osc_coarse + tol_rel * std::max(1.0, m_scale);
    if (w) {
      w->t = t;
      w->v1 = v1;
      w->v2 = v2;
    }
  };
  return run_audit("hemicontinuity", opts, seed, fn);
}

AuditReport check_local_monotonicity(const GalerkinSpace& sp,
                                     const DriftOperator& op,
                                     const AuditOptions& opts,
                                     std::uint64_t seed) {
  auto fn = [&sp, &op, &opts](StreamRng rng, double& lhs, double& rhs,
                              AuditWitness* w) {
    const double t = rng.uniform01() * opts.t_max;
    const Vector v1 = sample_state(sp, rng, opts.scale_lo, opts.scale_hi);
    const Vector v2 = sample_state(sp, rng, opts.scale_lo, opts.scale_hi);
    const Vector diff = v1 - v2;
    const Vector a_diff = op.apply(t, v1) - op.apply(t, v2);
    const double hn = sp.h_norm(diff);
    lhs = 2.0 * sp.h_inner(a_diff, diff);
    const double modulus = op.hyp.rho ? op.hyp.rho(v2) : 0.0;
    rhs = (constant_or(op.hyp.big_f, t) + modulus) * hn * hn;
    if (w) {
      w->t = t;
      w->v1 = v1;
      w->v2 = v2;
    }
  };
  return run_audit("local_monotonicity", opts, seed, fn);
}

AuditReport check_coercivity(const GalerkinSpace& sp, const DriftOperator& op,
                             const AuditOptions& opts, std::uint64_t seed) {
  auto fn = [&sp, &op, &opts](StreamRng rng, double& lhs, double& rhs,
                              AuditWitness* w) {
    const double t = rng.uniform01() * opts.t_max;
    const Vector v = sample_state(sp, rng, opts.scale_lo, opts.scale_hi);
    const double hn = sp.h_norm(v);
    const double vn = sp.v_norm(v);
    lhs = 2.0 * sp.h_inner(op.apply(t, v), v) +
          op.hyp.theta * std::pow(vn, op.hyp.alpha);
    rhs = constant_or(op.hyp.big_f, t) * (1.0 + hn * hn);
    if (w) {
      w->t = t;
      w->v1 = v;
    }
  };
  return run_audit("coercivity", opts, seed, fn);
}

AuditReport check_growth(const GalerkinSpace& sp, const DriftOperator& op,
                         const AuditOptions& opts, std::uint64_t seed) {
  // Normalized-basis probes; pairing against e_i reads off (gram * w)_i.
  Vector probe_norm(sp.dim());
  for (Index i = 0; i < sp.dim(); ++i) {
    Vector e = Vector::Zero(sp.dim());
    e[i] = 1.0;
    probe_norm[i] = sp.v_norm(e);
  }
  auto fn = [&sp, &op, &opts, probe_norm](StreamRng rng, double& lhs,
                                          double& rhs, AuditWitness* w) {
    const double t = rng.uniform01() * opts.t_max;
    const Vector v = sample_state(sp, rng, opts.scale_lo, opts.scale_hi);
    const Vector a = op.apply(t, v);
    const Vector ga = sp.identity_gram() ? a : Vector(sp.gram() * a);
    double dual = 0.0;
    for (Index i = 0; i < sp.dim(); ++i)
      dual = std::max(dual, std::abs(ga[i]) / probe_norm[i]);
    const double expo = op.hyp.alpha / (op.hyp.alpha - 1.0);
    const double hn = sp.h_norm(v);
    const double vn = sp.v_norm(v);
    lhs = std::pow(dual, expo);
    rhs = (constant_or(op.hyp.big_f, t) +
           op.hyp.c_growth * std::pow(vn, op.hyp.alpha)) *
          (1.0 + std::pow(hn, op.hyp.beta));
    if (w) {
      w->t = t;
      w->v1 = v;
    }
  };
  return run_audit("growth", opts, seed, fn);
}

AuditReport check_rho_growth(const GalerkinSpace& sp, const DriftOperator& op,
                             const AuditOptions& opts, std::uint64_t seed) {
  auto fn = [&sp, &op, &opts](StreamRng rng, double& lhs, double& rhs,
                              AuditWitness* w) {
    const Vector v = sample_state(sp, rng, opts.scale_lo, opts.scale_hi);
    lhs = op.hyp.rho(v);
    rhs = op.hyp.c_growth *
          (1.0 + std::pow(sp.v_norm(v), op.hyp.alpha)) *
          (1.0 + std::pow(sp.h_norm(v), op.hyp.beta));
    if (w) w->v1 = v;
  };
  return run_audit("rho_growth", opts, seed, fn);
}

AuditReport check_noise_growth(const GalerkinSpace& sp, const MarkSpace& ms,
                               const NoiseCoefficient& noise,
                               const AuditOptions& opts, std::uint64_t seed) {
  auto fn = [&sp, &ms, &noise, &opts](StreamRng rng, double& lhs, double& rhs,
                                      AuditWitness* w) {
    const double t = rng.uniform01() * opts.t_max;
    const Vector v = sample_state(sp, rng, opts.scale_lo, opts.scale_hi);
    const Index mark =
        static_cast<Index>(rng.uniform_below(static_cast<std::uint64_t>(ms.size())));
    lhs = sp.h_norm(noise.apply(t, v, mark));
    rhs = noise.growth_envelope(t, mark) * (1.0 + sp.h_norm(v));
    if (w) {
      w->t = t;
      w->v1 = v;
      w->mark = mark;
    }
  };
  return run_audit("noise_growth", opts, seed, fn);
}

AuditReport check_noise_lipschitz(const GalerkinSpace& sp, const MarkSpace& ms,
                                  const NoiseCoefficient& noise,
                                  const AuditOptions& opts,
                                  std::uint64_t seed) {
  auto fn = [&sp, &ms, &noise, &opts](StreamRng rng, double& lhs, double& rhs,
                                      AuditWitness* w) {
    const double t = rng.uniform01() * opts.t_max;
    const Vector v1 = sample_state(sp, rng, opts.scale_lo, opts.scale_hi);
    Vector v2;
    if (rng.uniform_below(2) == 0) {
      v2 = sample_state(sp, rng, opts.scale_lo, opts.scale_hi);
    } else {
      // Nearby pair: catches moduli that blow up locally.
      v2 = v1 + gaussian_direction(sp, rng) * log_uniform(rng, 1e-6, 1e1);
    }
    const Index mark =
        static_cast<Index>(rng.uniform_below(static_cast<std::uint64_t>(ms.size())));
    lhs = sp.h_norm(noise.apply(t, v1, mark) - noise.apply(t, v2, mark));
    rhs = noise.lipschitz_envelope(t, mark) * sp.h_norm(v1 - v2);
    if (w) {
      w->t = t;
      w->v1 = v1;
      w->v2 = v2;
      w->mark = mark;
    }
  };
  return run_audit("noise_lipschitz", opts, seed, fn);
}

}  // namespace ldp
