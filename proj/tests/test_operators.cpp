#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ldp/operators.hpp"
#include "ldp/rng.hpp"

#include <cmath>
#include <stdexcept>

using namespace ldp;

namespace {

Vector random_vector(StreamRng& rng, Index n, double scale) {
  Vector v(n);
  for (Index i = 0; i < n; ++i) v[i] = scale * rng.normal();
  return v;
}

MarkSpace one_mark() {
  MarkSpace ms;
  ms.points = Vector::Constant(1, 1.0);
  ms.nu = Vector::Constant(1, 1.0);
  return ms;
}

AuditOptions fast_audit() {
  AuditOptions opts;
  opts.samples = 2000;
  return opts;
}

}  // namespace

TEST_CASE("scalar linear drift applies -a v with an exact jacobian") {
  const auto sp = GalerkinSpace::euclidean(3);
  const auto op = make_scalar_linear(sp, 1.7);
  Vector v(3);
  v << 1.0, -2.0, 0.5;
  const Vector av = op.apply(0.3, v);
  CHECK(av.isApprox(-1.7 * v));
  const Matrix j = op.jacobian(0.3, v);
  CHECK(j.isApprox(-1.7 * Matrix::Identity(3, 3)));
  CHECK(op.hyp.theta == doctest::Approx(2.0 * 1.7));
  CHECK(op.hyp.rho(v) == 0.0);
}

TEST_CASE("scalar linear drift rejects bad parameters") {
  const auto grid = GalerkinSpace::periodic_grid(8, 1.0, 2.0);
  CHECK_THROWS_AS(make_scalar_linear(grid, 1.0), std::invalid_argument);
  const auto sp = GalerkinSpace::euclidean(2);
  CHECK_THROWS_AS(make_scalar_linear(sp, 0.0), std::invalid_argument);
}

TEST_CASE("p laplace reduces to the periodic laplacian at p = 2") {
  const Index n = 8;
  const auto sp = GalerkinSpace::periodic_grid(n, 1.0, 2.0);
  const auto op = make_p_laplace(sp, 2.0, 0.0);
  const double h = sp.spacing();
  StreamRng rng(31, 0);
  const Vector v = random_vector(rng, n, 1.0);
  const Vector av = op.apply(0.0, v);
  for (Index i = 0; i < n; ++i) {
    const Index l = (i + n - 1) % n;
    const Index r = (i + 1) % n;
    const double lap = (v[r] - 2.0 * v[i] + v[l]) / (h * h);
    CHECK(av[i] == doctest::Approx(lap).epsilon(1e-10));
  }
}

TEST_CASE("p laplace holds a two sided energy identity") {
  // 2<A v, v> = -2 |grad v|_p^p - 2 damping |v|_p^p, so coercivity with
  // theta <= 2 min(1, damping) is exact, not just sampled
  const auto sp = GalerkinSpace::periodic_grid(12, 1.0, 3.0);
  const auto op = make_p_laplace(sp, 3.0, 1.0);
  StreamRng rng(32, 0);
  for (int rep = 0; rep < 100; ++rep) {
    const Vector v = random_vector(rng, 12, 2.0);
    const double pair = sp.h_inner(op.apply(0.0, v), v);
    const double vp = std::pow(sp.v_norm(v), 3.0);
    CHECK(2.0 * pair + op.hyp.theta * vp <= 1e-9 * std::max(1.0, vp));
  }
}

TEST_CASE("burgers convection conserves energy in skew form") {
  const auto sp = GalerkinSpace::periodic_grid(16, 1.0, 2.0);
  const auto visc = make_p_laplace(sp, 2.0, 0.0);
  const auto op = make_burgers(sp, 0.1);
  StreamRng rng(33, 0);
  for (int rep = 0; rep < 100; ++rep) {
    const Vector v = random_vector(rng, 16, 2.0);
    // subtract the viscous part; what remains is the convection term
    const Vector conv = op.apply(0.0, v) - 0.1 * visc.apply(0.0, v);
    CHECK(std::abs(sp.h_inner(conv, v)) <=
          1e-9 * std::max(1.0, sp.h_norm(v) * sp.h_norm(v)));
  }
}

TEST_CASE("burgers local monotonicity modulus") {
  const auto sp = GalerkinSpace::periodic_grid(16, 1.0, 2.0);
  const double visc = 0.2;
  const auto op = make_burgers(sp, visc);
  Vector v = Vector::Zero(16);
  v[3] = 2.0;
  v[4] = -1.0;
  CHECK(op.hyp.rho(v) == doctest::Approx(4.0 / (2.0 * visc)));
}

TEST_CASE("well posed drifts pass their audits") {
  const auto opts = fast_audit();

  const auto e1 = GalerkinSpace::euclidean(1);
  const auto lin = make_scalar_linear(e1, 1.0);
  CHECK(check_hemicontinuity(e1, lin, opts, 1).passed);
  CHECK(check_local_monotonicity(e1, lin, opts, 2).passed);
  CHECK(check_coercivity(e1, lin, opts, 3).passed);
  CHECK(check_growth(e1, lin, opts, 4).passed);
  CHECK(check_rho_growth(e1, lin, opts, 5).passed);

  const auto grid = GalerkinSpace::periodic_grid(8, 1.0, 3.0);
  const auto pl = make_p_laplace(grid, 3.0, 1.0);
  CHECK(check_hemicontinuity(grid, pl, opts, 6).passed);
  CHECK(check_local_monotonicity(grid, pl, opts, 7).passed);
  CHECK(check_coercivity(grid, pl, opts, 8).passed);
  CHECK(check_growth(grid, pl, opts, 9).passed);
  CHECK(check_rho_growth(grid, pl, opts, 10).passed);

  const auto bgrid = GalerkinSpace::periodic_grid(12, 1.0, 2.0);
  const auto bg = make_burgers(bgrid, 0.1);
  CHECK(check_hemicontinuity(bgrid, bg, opts, 11).passed);
  CHECK(check_local_monotonicity(bgrid, bg, opts, 12).passed);
  CHECK(check_coercivity(bgrid, bg, opts, 13).passed);
  CHECK(check_growth(bgrid, bg, opts, 14).passed);
  CHECK(check_rho_growth(bgrid, bg, opts, 15).passed);
}

TEST_CASE("affine noise envelopes are tight") {
  const auto sp = GalerkinSpace::euclidean(2);
  const auto ms = one_mark();
  Vector sigma = Vector::Constant(1, 0.7);
  const auto noise = make_affine_noise(sp, sigma, 0.4);
  CHECK(noise.state_dependent);
  Vector v(2);
  v << 1.0, -1.0;
  const Vector f = noise.apply(0.0, v, 0);
  CHECK(f.isApprox(0.7 * (Vector::Ones(2) + 0.4 * v)));

  const auto opts = fast_audit();
  CHECK(check_noise_growth(sp, ms, noise, opts, 41).passed);
  CHECK(check_noise_lipschitz(sp, ms, noise, opts, 42).passed);
}

TEST_CASE("state free affine noise is flagged as such") {
  const auto sp = GalerkinSpace::euclidean(1);
  const auto noise = make_affine_noise(sp, Vector::Constant(1, 1.0), 0.0);
  CHECK(!noise.state_dependent);
}

TEST_CASE("sqrt noise grows within its envelope but breaks the lipschitz claim") {
  const auto sp = GalerkinSpace::euclidean(2);
  const auto ms = one_mark();
  const auto noise = make_sqrt_noise(sp, Vector::Constant(1, 1.0), 0.5);
  const auto opts = fast_audit();
  CHECK(check_noise_growth(sp, ms, noise, opts, 51).passed);

  const auto lip = check_noise_lipschitz(sp, ms, noise, opts, 52);
  CHECK(!lip.passed);
  REQUIRE(lip.witness.has_value());
  // the witness must actually violate the claimed envelope
  const auto& w = *lip.witness;
  const double lhs = sp.h_norm(noise.apply(w.t, w.v1, w.mark) -
                               noise.apply(w.t, w.v2, w.mark));
  const double rhs = noise.lipschitz_envelope(w.t, w.mark) *
                     sp.h_norm(w.v1 - w.v2);
  CHECK(lhs > rhs);
}

TEST_CASE("zero noise vanishes identically") {
  const auto sp = GalerkinSpace::euclidean(3);
  const auto noise = make_zero_noise(sp, 2);
  CHECK(noise.apply(0.5, Vector::Ones(3), 1).norm() == 0.0);
  CHECK(noise.growth_envelope(0.5, 0) == 0.0);
}

TEST_CASE("non finite drift output is reported as a numerical error") {
  DriftOperator bad;
  bad.name = "bad";
  bad.apply = [](double, const Vector& v) {
    Vector out = v;
    out[0] = std::numeric_limits<double>::quiet_NaN();
    return out;
  };
  CHECK_THROWS_AS(static_cast<void>(drift_apply(bad, 0.0, Vector::Ones(2))),
                  numerical_error);
}
