#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ldp/rate.hpp"
#include "ldp/rng.hpp"

#include <cmath>
#include <stdexcept>

using namespace ldp;

namespace {

struct ScalarModel {
  GalerkinSpace sp = GalerkinSpace::euclidean(1);
  DriftOperator drift;
  NoiseCoefficient noise;
  MarkSpace ms;

  ScalarModel() {
    drift = make_scalar_linear(sp, 1.0);
    noise = make_affine_noise(sp, Vector::Constant(1, 1.0), 0.0);
    ms.points = Vector::Constant(1, 1.0);
    ms.nu = Vector::Constant(1, 1.0);
  }
};

// For the scalar model with one time cell, terminal threshold b upward:
// the cheapest constant control is c* = 1 + (b - e^{-T} x0) / (nu (1-e^{-T}))
// and the cost is T nu ell(c*).
double constant_control_cost(double x0, double b, double horizon, double nu) {
  const double decay = std::exp(-horizon);
  const double c = 1.0 + (b - decay * x0) / (nu * (1.0 - decay));
  return horizon * nu * ell(c);
}

}  // namespace

TEST_CASE("cost gradient matches finite differences") {
  MarkSpace ms;
  ms.points = Vector(2);
  ms.points << 1.0, -1.0;
  ms.nu = Vector(2);
  ms.nu << 1.0, 0.5;
  StreamRng rng(41, 0);
  for (int rep = 0; rep < 50; ++rep) {
    auto g = Control::constant(1.0, 3, 1.0, 2);
    for (Index k = 0; k < 3; ++k)
      for (Index j = 0; j < 2; ++j)
        g.values()(k, j) = 0.2 + 4.0 * rng.uniform01();
    const Matrix grad = q_gradient(ms, g);
    for (Index k = 0; k < 3; ++k) {
      for (Index j = 0; j < 2; ++j) {
        const double h = 1e-6 * std::max(1.0, g.values()(k, j));
        auto up = g, dn = g;
        up.values()(k, j) += h;
        dn.values()(k, j) -= h;
        const double fd = (q_cost(ms, up) - q_cost(ms, dn)) / (2.0 * h);
        CHECK(grad(k, j) == doctest::Approx(fd).epsilon(1e-5));
      }
    }
  }
}

TEST_CASE("cost gradient needs interior controls") {
  MarkSpace ms;
  ms.points = Vector::Constant(1, 1.0);
  ms.nu = Vector::Constant(1, 1.0);
  const Control g = Control::constant(0.0, 2, 1.0, 1);
  CHECK_THROWS_AS(q_gradient(ms, g), std::invalid_argument);
}

TEST_CASE("event violation measures one sided threshold misses") {
  const auto sp = GalerkinSpace::euclidean(2);
  Trajectory y;
  y.times = Vector::LinSpaced(2, 0.0, 1.0);
  y.states = Matrix(2, 2);
  y.states << 0.0, 0.4, 0.0, -0.3;

  EventSpec up;
  up.kind = EventKind::terminal_threshold;
  up.component = 0;
  up.threshold = 0.7;
  up.direction = 1;
  CHECK(event_violation(sp, up, y) == doctest::Approx(0.3));
  up.threshold = 0.2;
  CHECK(event_violation(sp, up, y) == 0.0);

  EventSpec down;
  down.kind = EventKind::terminal_threshold;
  down.component = 1;
  down.threshold = -0.5;
  down.direction = -1;
  CHECK(event_violation(sp, down, y) == doctest::Approx(0.2));

  EventSpec point;
  point.kind = EventKind::terminal_point;
  point.target = Vector(2);
  point.target << 0.4, -0.3;
  CHECK(event_violation(sp, point, y) == doctest::Approx(0.0));
  point.target << 0.4, 0.7;
  CHECK(event_violation(sp, point, y) == doctest::Approx(1.0));

  EventSpec bad;
  bad.kind = EventKind::terminal_threshold;
  bad.component = 5;
  CHECK_THROWS_AS(event_violation(sp, bad, y), std::invalid_argument);
}

TEST_CASE("single cell minimizer recovers the constant control optimum") {
  ScalarModel m;
  EventSpec event;
  event.kind = EventKind::terminal_threshold;
  event.component = 0;
  event.threshold = 0.668;
  event.direction = 1;
  const Vector grid = Vector::LinSpaced(2, 0.0, 1.0);
  MinimizeOptions opts;
  opts.solve.dt = 1e-3;
  const auto est = minimize_rate(m.sp, m.drift, m.noise, m.ms,
                                 Vector::Constant(1, 1.0), grid, event, opts);
  REQUIRE(est.feasible);
  const double oracle = constant_control_cost(1.0, 0.668, 1.0, 1.0);
  CHECK(est.value == doctest::Approx(oracle).epsilon(0.03));
  CHECK(est.constraint_residual <= opts.residual_tol);
}

TEST_CASE("downward events need thinning controls") {
  ScalarModel m;
  EventSpec event;
  event.kind = EventKind::terminal_threshold;
  event.component = 0;
  event.threshold = 0.2;  // below the uncontrolled terminal e^{-1}
  event.direction = -1;
  const Vector grid = Vector::LinSpaced(2, 0.0, 1.0);
  MinimizeOptions opts;
  opts.solve.dt = 1e-3;
  const auto est = minimize_rate(m.sp, m.drift, m.noise, m.ms,
                                 Vector::Constant(1, 1.0), grid, event, opts);
  REQUIRE(est.feasible);
  CHECK(est.value > 0.0);
  // the optimal constant control thins: c* < 1
  CHECK(est.minimizer.values().maxCoeff() < 1.0);
  const double oracle = constant_control_cost(1.0, 0.2, 1.0, 1.0);
  CHECK(est.value == doctest::Approx(oracle).epsilon(0.05));
}

TEST_CASE("events already satisfied cost nothing") {
  ScalarModel m;
  EventSpec event;
  event.kind = EventKind::terminal_threshold;
  event.component = 0;
  event.threshold = 0.2;  // e^{-1} > 0.2 holds for free
  event.direction = 1;
  const Vector grid = Vector::LinSpaced(2, 0.0, 1.0);
  MinimizeOptions opts;
  opts.solve.dt = 1e-3;
  const auto est = minimize_rate(m.sp, m.drift, m.noise, m.ms,
                                 Vector::Constant(1, 1.0), grid, event, opts);
  REQUIRE(est.feasible);
  CHECK(est.value <= 1e-6);
}

TEST_CASE("unreachable events come back infeasible") {
  ScalarModel m;
  EventSpec event;
  event.kind = EventKind::terminal_threshold;
  event.component = 0;
  event.threshold = 1e7;  // beyond the g_cap reachable range
  event.direction = 1;
  const Vector grid = Vector::LinSpaced(2, 0.0, 1.0);
  MinimizeOptions opts;
  opts.solve.dt = 2e-3;
  const auto est = minimize_rate(m.sp, m.drift, m.noise, m.ms,
                                 Vector::Constant(1, 1.0), grid, event, opts);
  CHECK(!est.feasible);
  CHECK(std::isinf(est.value));
}

TEST_CASE("level capped search respects the cap") {
  ScalarModel m;
  EventSpec event;
  event.kind = EventKind::terminal_threshold;
  event.component = 0;
  event.threshold = 0.668;
  event.direction = 1;
  const Vector grid = Vector::LinSpaced(2, 0.0, 1.0);
  MinimizeOptions opts;
  opts.solve.dt = 1e-3;

  SUBCASE("reachable inside the cap") {
    const auto est = rate_of_set(m.sp, m.drift, m.noise, m.ms,
                                 Vector::Constant(1, 1.0), grid, event, 5.0,
                                 opts);
    REQUIRE(est.feasible);
    CHECK(est.value <= 5.0 + 1e-9);
    const double oracle = constant_control_cost(1.0, 0.668, 1.0, 1.0);
    CHECK(est.value == doctest::Approx(oracle).epsilon(0.05));
  }

  SUBCASE("cap below the optimum is infeasible") {
    const double oracle = constant_control_cost(1.0, 0.668, 1.0, 1.0);
    const auto est = rate_of_set(m.sp, m.drift, m.noise, m.ms,
                                 Vector::Constant(1, 1.0), grid, event,
                                 0.25 * oracle, opts);
    CHECK(!est.feasible);
  }
}

TEST_CASE("finer grids cannot cost more") {
  ScalarModel m;
  EventSpec event;
  event.kind = EventKind::terminal_threshold;
  event.component = 0;
  event.threshold = 0.668;
  event.direction = 1;
  MinimizeOptions opts;
  opts.solve.dt = 2e-3;
  const auto coarse = minimize_rate(m.sp, m.drift, m.noise, m.ms,
                                    Vector::Constant(1, 1.0),
                                    Vector::LinSpaced(2, 0.0, 1.0), event,
                                    opts);
  const auto fine = minimize_rate(m.sp, m.drift, m.noise, m.ms,
                                  Vector::Constant(1, 1.0),
                                  Vector::LinSpaced(5, 0.0, 1.0), event, opts);
  REQUIRE(coarse.feasible);
  REQUIRE(fine.feasible);
  // the finer family contains the coarse one; allow solver slack
  CHECK(fine.value <= coarse.value * 1.05);
}
