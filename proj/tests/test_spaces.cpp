#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ldp/rng.hpp"
#include "ldp/spaces.hpp"

#include <cmath>

using namespace ldp;

namespace {

Vector random_vector(StreamRng& rng, Index n) {
  Vector v(n);
  for (Index i = 0; i < n; ++i) v[i] = rng.normal();
  return v;
}

}  // namespace

TEST_CASE("euclidean space has identity geometry") {
  const auto sp = GalerkinSpace::euclidean(5);
  CHECK(sp.dim() == 5);
  CHECK(sp.identity_gram());
  CHECK(sp.alpha() == doctest::Approx(2.0));
  CHECK(sp.v_norm_kind() == VNormKind::h);

  StreamRng rng(11, 0);
  for (int rep = 0; rep < 20; ++rep) {
    const Vector v = random_vector(rng, 5);
    CHECK(sp.h_norm(v) == doctest::Approx(v.norm()));
    CHECK(sp.v_norm(v) == doctest::Approx(v.norm()));
  }
}

TEST_CASE("periodic grid carries the lumped L2 inner product") {
  const Index n = 8;
  const double length = 2.0;
  const auto sp = GalerkinSpace::periodic_grid(n, length, 2.0);
  const double h = length / static_cast<double>(n);
  CHECK(sp.spacing() == doctest::Approx(h));
  CHECK(sp.grid_length() == doctest::Approx(length));

  StreamRng rng(12, 0);
  const Vector u = random_vector(rng, n);
  const Vector v = random_vector(rng, n);
  CHECK(sp.h_inner(u, v) == doctest::Approx(h * u.dot(v)));
  CHECK(sp.h_norm(u) == doctest::Approx(std::sqrt(h) * u.norm()));
}

TEST_CASE("w1p norm of a constant profile reduces to its flat part") {
  // gradient of a constant vanishes, so only the L^p mass remains
  const auto sp = GalerkinSpace::periodic_grid(16, 1.0, 3.0);
  const Vector c = Vector::Constant(16, 2.0);
  CHECK(sp.v_norm(c) == doctest::Approx(2.0));
}

TEST_CASE("w1p norm sees the discrete gradient") {
  const Index n = 4;
  const auto sp = GalerkinSpace::periodic_grid(n, 1.0, 2.0);
  const double h = 0.25;
  Vector v(n);
  v << 1.0, 0.0, 0.0, 0.0;
  // flat part: h * 1; gradient part (periodic): two unit jumps of size 1/h
  const double expected =
      std::sqrt(h * 1.0 + h * (2.0 / (h * h)));
  CHECK(sp.v_norm(v) == doctest::Approx(expected));
}

TEST_CASE("embedding constant bounds the h norm from below") {
  StreamRng rng(13, 0);
  for (const double p : {2.0, 3.0}) {
    const auto sp = GalerkinSpace::periodic_grid(12, 1.5, p);
    const double c = sp.embedding_constant();
    CHECK(c > 0.0);
    for (int rep = 0; rep < 200; ++rep) {
      const Vector v = random_vector(rng, 12);
      CHECK(sp.v_norm(v) >= c * sp.h_norm(v) * (1.0 - 1e-12));
    }
  }
}

TEST_CASE("dual pairing through embed reproduces the H inner product") {
  const auto sp = GalerkinSpace::periodic_grid(10, 1.0, 2.0);
  StreamRng rng(14, 0);
  for (int rep = 0; rep < 50; ++rep) {
    const Vector u = random_vector(rng, 10);
    const Vector v = random_vector(rng, 10);
    CHECK(dual_pairing(sp, embed(u), v) == doctest::Approx(sp.h_inner(u, v)));
  }
}

TEST_CASE("projection satisfies the Galerkin identity") {
  const auto sp = GalerkinSpace::periodic_grid(6, 1.0, 2.0);
  StreamRng rng(15, 0);
  const Vector w = random_vector(rng, 6);
  const Index m = 4;
  const Vector p = project(sp, embed(w), m);
  for (Index i = m; i < 6; ++i) CHECK(p[i] == 0.0);
  for (Index i = 0; i < m; ++i) {
    Vector e = Vector::Zero(6);
    e[i] = 1.0;
    CHECK(sp.h_inner(p, e) == doctest::Approx(dual_pairing(sp, embed(w), e)));
  }
}

TEST_CASE("projection is coordinate truncation for an identity gram") {
  const auto sp = GalerkinSpace::euclidean(5);
  Vector w(5);
  w << 1.0, -2.0, 3.0, -4.0, 5.0;
  const Vector p = project(sp, embed(w), 3);
  CHECK(p[0] == doctest::Approx(1.0));
  CHECK(p[1] == doctest::Approx(-2.0));
  CHECK(p[2] == doctest::Approx(3.0));
  CHECK(p[3] == 0.0);
  CHECK(p[4] == 0.0);
}

TEST_CASE("general gram constructor accepts a non-diagonal metric") {
  Matrix g(2, 2);
  g << 2.0, 0.5, 0.5, 1.0;
  const GalerkinSpace sp(g, VNormKind::h, 2.0, 2.0, 1.0);
  Vector v(2);
  v << 1.0, -1.0;
  CHECK(sp.h_norm(v) == doctest::Approx(std::sqrt(v.dot(g * v))));
  CHECK(sp.v_norm(v) == doctest::Approx(sp.h_norm(v)));
}
