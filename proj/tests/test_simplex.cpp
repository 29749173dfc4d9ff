#include "doctest.h"

#include <cmath>

#include "rcb/errors.hpp"
#include "rcb/random.hpp"
#include "rcb/simplex.hpp"

using namespace rcb;

TEST_CASE("simplex point validation") {
  CHECK_NOTHROW(SimplexPoint({0.25, 0.75}));
  CHECK_THROWS_AS(SimplexPoint({0.5, 0.6}), DomainError);
  CHECK_THROWS_AS(SimplexPoint({1.1, -0.1}), DomainError);
  CHECK_THROWS_AS(SimplexPoint(Vector{}), DomainError);
  CHECK(SimplexPoint::uniform(4)[2] == doctest::Approx(0.25));
  CHECK(SimplexPoint::vertex(3, 1).weights() == Vector{0, 1, 0});
}

TEST_CASE("log-sum-exp is shift stable") {
  const Vector y{1000.0, 1000.0};
  CHECK(log_sum_exp(y) == doctest::Approx(1000.0 + std::log(2.0)).epsilon(1e-14));
  const Vector z{0.0, 0.0, 0.0};
  CHECK(log_sum_exp(z) == doctest::Approx(1.0986122887).epsilon(1e-10));
}

TEST_CASE("softmax examples") {
  const auto p = softmax(Vector{0.0, -1.0});
  CHECK(p[0] == doctest::Approx(0.7310585786).epsilon(1e-9));
  CHECK(p[1] == doctest::Approx(0.2689414214).epsilon(1e-9));
  const auto w = softmax(Vector{0.0, 0.0}, Vector{0.2, 0.8});
  CHECK(w[0] == doctest::Approx(0.2));
}

// Brute-force reference: minimize |p - v|^2 over a fine grid on the 3-simplex.
static double grid_projection_error(const Vector& v, const SimplexPoint& p) {
  const int n = 400;
  double best = INFINITY;
  for (int i = 0; i <= n; ++i) {
    for (int j = 0; i + j <= n; ++j) {
      const Vector g{double(i) / n, double(j) / n, double(n - i - j) / n};
      best = std::min(best, squared_distance(g, v));
    }
  }
  return squared_distance(p.span(), v) - best;
}

TEST_CASE("projection matches grid search") {
  RngStream rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    Vector v{2 * rng.uniform() - 0.5, 2 * rng.uniform() - 0.5, 2 * rng.uniform() - 0.5};
    const auto p = project_to_simplex(v);
    CHECK(grid_projection_error(v, p) <= 1e-12);
  }
  const auto q = project_to_simplex(Vector{0.55, 0.45});
  CHECK(q[0] == doctest::Approx(0.55));
  const auto r = project_to_simplex(Vector{2.0, -1.0});
  CHECK(r.weights() == Vector{1.0, 0.0});
}

TEST_CASE("mix") {
  const auto p = mix(SimplexPoint::uniform(2), 0.4, SimplexPoint::vertex(2, 0));
  CHECK(p[0] == doctest::Approx(0.8));
  CHECK(p[1] == doctest::Approx(0.2));
}

TEST_CASE("derived seeds are stable and distinct") {
  CHECK(derive_seed(1, 2, "a") == derive_seed(1, 2, "a"));
  CHECK(derive_seed(1, 2, "a") != derive_seed(1, 2, "b"));
  CHECK(derive_seed(1, 2, "a") != derive_seed(1, 3, "a"));
  RngStream a(5), b(5);
  for (int i = 0; i < 100; ++i) CHECK(a.uniform() == b.uniform());
}
