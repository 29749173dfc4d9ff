#include "doctest.h"

#include <cmath>

#include "rcb/errors.hpp"
#include "rcb/evaluation.hpp"
#include "rcb/random.hpp"

using namespace rcb;

namespace {

Problem make_problem(std::size_t k, std::size_t d, double beta, const std::string& lambda,
                     const std::string& reg, std::vector<ArmSpec> arms = {}) {
  EnvironmentSpec spec;
  spec.dimension = d;
  spec.beta = beta;
  spec.arms = arms.empty() ? default_arms(k, d) : std::move(arms);
  return Problem{Environment(spec), LambdaFunction::parse(lambda), Regularizer::parse(reg)};
}

std::vector<ArmSpec> flat_arms(const Vector& means) {
  std::vector<ArmSpec> arms;
  for (double m : means) arms.push_back(ArmSpec{NoiseFamily::Bernoulli, m, 0.0, {}});
  return arms;
}

Objective regularized(const Vector& mu, double lambda, const Regularizer& r, const Vector& x) {
  return [=](std::span<const double> p) { return dot(mu, p) + lambda * r.value(p, x); };
}

Gradient regularized_grad(const Vector& mu, double lambda, const Regularizer& r, const Vector& x) {
  return [=](std::span<const double> p) {
    Vector g = r.gradient(p, x);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = mu[i] + lambda * g[i];
    return g;
  };
}

// Minimum of f over the 3-simplex grid with 140 steps per edge (10^4 points).
double grid_minimum(const Objective& f, std::size_t k) {
  const int n = k == 2 ? 10000 : 140;
  double best = INFINITY;
  if (k == 2) {
    for (int i = 0; i <= n; ++i) best = std::min(best, f(Vector{double(i) / n, double(n - i) / n}));
    return best;
  }
  for (int i = 0; i <= n; ++i) {
    for (int j = 0; i + j <= n; ++j) best = std::min(best, f(Vector{double(i) / n, double(j) / n, double(n - i - j) / n}));
  }
  return best;
}

std::vector<Regularizer> families() {
  return {Regularizer::entropy(), Regularizer::kl(ReferencePolicy::tilted(1.0)),
          Regularizer::l2(ReferencePolicy::tilted(1.0))};
}

}  // namespace

TEST_CASE("simplex_minimize examples") {
  const Vector lin{0.2, 0.8};
  auto p = simplex_minimize([&](std::span<const double> q) { return dot(lin, q); },
                            [&](std::span<const double>) { return lin; }, 2);
  CHECK(p[0] >= 1 - 1e-8);

  const auto h = Regularizer::entropy();
  p = simplex_minimize(regularized({0, 1}, 1.0, h, {}), regularized_grad({0, 1}, 1.0, h, {}), 2);
  CHECK(std::abs(p[0] - 0.7310585786) <= 1e-6);

  for (const auto& r : {Regularizer::entropy(), Regularizer::kl(ReferencePolicy::uniform()),
                        Regularizer::l2(ReferencePolicy::uniform())}) {
    const Vector mu{0.4, 0.4, 0.4};
    p = simplex_minimize(regularized(mu, 0.3, r, {0.5}), regularized_grad(mu, 0.3, r, {0.5}), 3);
    CHECK(sup_distance(p.span(), SimplexPoint::uniform(3).span()) <= 1e-9);
  }

  CHECK_THROWS_AS(simplex_minimize([](std::span<const double>) { return NAN; },
                                   [](std::span<const double>) { return Vector{0, 0}; }, 2),
                  DomainError);
}

TEST_CASE("simplex_minimize against grid refinement") {
  RngStream rng(61);
  for (const auto& r : families()) {
    for (int trial = 0; trial < 10; ++trial) {
      const std::size_t k = 2 + trial % 2;
      Vector mu(k);
      for (auto& m : mu) m = rng.uniform();
      const double lambda = 0.05 + 1.95 * rng.uniform();
      const Vector x{rng.uniform()};
      const auto f = regularized(mu, lambda, r, x);
      const auto p = simplex_minimize(f, regularized_grad(mu, lambda, r, x), k);
      INFO(r.name(), " K=", k);
      CHECK(f(p.span()) <= grid_minimum(f, k) + 1e-8);
    }
  }
}

TEST_CASE("oracle examples") {
  const auto h = Regularizer::entropy();
  auto p = oracle_pstar(Vector{0.5, 0.5, 0.5}, 0.7, h);
  CHECK(sup_distance(p.span(), SimplexPoint::uniform(3).span()) <= 1e-15);
  p = oracle_pstar(Vector{0.0, 1.0}, 1.0, h);
  CHECK(p[0] == doctest::Approx(0.7310585786).epsilon(1e-9));
  CHECK_THROWS_AS(oracle_pstar(Vector{0.0, 1.0}, 0.0, h), DomainError);
  CHECK_THROWS_AS(oracle_pstar(Vector{0.0, 1.0}, -1.0, h), DomainError);

  RngStream rng(62);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t k = 2 + trial % 4;
    Vector mu(k);
    for (auto& m : mu) m = rng.uniform();
    const double lambda = 0.05 + 2 * rng.uniform();
    CHECK(oracle_pstar(mu, lambda, h).min() >= std::exp(-1 / lambda) / static_cast<double>(k) - 1e-15);
  }
}

TEST_CASE("oracle certification against mirror descent") {
  RngStream rng(63);
  for (const auto& r : families()) {
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
      const std::size_t k = 2 + trial % 2;
      Vector mu(k);
      for (auto& m : mu) m = rng.uniform();
      const double lambda = 0.05 + 1.95 * rng.uniform();
      const Vector x{rng.uniform()};
      const auto exact = oracle_pstar(mu, lambda, r, x);
      const auto md = simplex_minimize(regularized(mu, lambda, r, x), regularized_grad(mu, lambda, r, x), k);
      worst = std::max(worst, sup_distance(exact.span(), md.span()));
    }
    INFO(r.name());
    CHECK(worst <= 1e-5);
  }
}

TEST_CASE("primal-dual identity for the entropy") {
  RngStream rng(64);
  const auto h = Regularizer::entropy();
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t k = 2 + trial % 3;
    Vector mu(k), y(k);
    for (auto& m : mu) m = rng.uniform();
    const double lambda = 0.05 + 1.95 * rng.uniform();
    for (std::size_t i = 0; i < k; ++i) y[i] = -mu[i] / lambda;
    const auto f = regularized(mu, lambda, h, {});
    const auto p = simplex_minimize(f, regularized_grad(mu, lambda, h, {}), k);
    CHECK(std::abs(f(p.span()) + lambda * h.conjugate(y)) <= 1e-7);
  }
}

TEST_CASE("loss functional examples") {
  {
    const auto pr = make_problem(1, 1, 1.0, "const:0.1", "entropy", flat_arms({0.5}));
    const Evaluator ev(pr, BinGrid(4, 1));
    const std::vector<SimplexPoint> vertex(4, SimplexPoint::vertex(1, 0));
    CHECK(ev.loss_piecewise(vertex) == doctest::Approx(0.5).epsilon(1e-14));
  }
  const Vector m{0.2, 0.5, 0.7};
  const auto pr = make_problem(3, 1, 1.0, "const:0.1", "entropy", flat_arms(m));
  const Evaluator ev(pr, BinGrid(5, 1));
  const std::vector<SimplexPoint> uniform(5, SimplexPoint::uniform(3));
  CHECK(std::abs(ev.loss_piecewise(uniform) - ((0.2 + 0.5 + 0.7) / 3 - 0.1 * std::log(3.0))) <= 1e-12);
  CHECK(std::abs(ev.loss([](Context) { return SimplexPoint::uniform(3); }) - ev.loss_piecewise(uniform)) <= 1e-12);

  // Oracle value against the conjugate integral on an x-dependent instance.
  const auto rich = make_problem(3, 1, 0.5, "cosfield:0.3,0.5", "entropy");
  const Evaluator er(rich, BinGrid(8, 1));
  const auto h = Regularizer::entropy();
  double dual = 0.0;
  const std::size_t per_bin = 64;
  const BinGrid g(8, 1);
  for (std::size_t b = 0; b < 8; ++b) {
    g.for_each_node(b, per_bin, [&](Context x) {
      const Vector mu = rich.environment.mean_losses(x);
      const double l = rich.lambda(x);
      Vector y(3);
      for (std::size_t i = 0; i < 3; ++i) y[i] = -mu[i] / l;
      dual += -l * h.conjugate(y) / 512.0;
    });
  }
  CHECK(std::abs(er.oracle_loss() - dual) <= 1e-8);
}

TEST_CASE("quadrature convergence") {
  const auto pr = make_problem(3, 1, 0.5, "cosfield:0.3,0.5", "entropy");
  const auto at = [&](std::size_t g) {
    const Evaluator ev(pr, BinGrid(1, 1), QuadratureOptions{g});
    return ev.oracle_loss();
  };
  for (std::size_t g : {64u, 128u, 256u}) {
    const double a = at(g), b = at(2 * g), c = at(4 * g);
    INFO("G=", g, " diffs ", std::abs(a - b), " ", std::abs(b - c));
    CHECK(std::abs(a - b) <= 4 * std::abs(b - c));
  }
  CHECK_THROWS_AS(Evaluator(make_problem(2, 4, 1.0, "const:0.1", "entropy"), BinGrid(2, 4)), ConfigError);
}

TEST_CASE("regret decomposition") {
  {
    const auto pr = make_problem(1, 1, 1.0, "const:0.1", "entropy");
    const Evaluator ev(pr, BinGrid(4, 1));
    const std::vector<SimplexPoint> only(4, SimplexPoint::vertex(1, 0));
    CHECK(std::abs(ev.regret(only, 1000).regret) <= 1e-10);
  }
  RngStream rng(65);
  for (const char* reg : {"entropy", "kl:tilted:1", "l2:tilted:1"}) {
    for (const char* lam : {"const:0.1", "cosfield:0.2,0.4", "ramp:0,1"}) {
      const auto pr = make_problem(3, 2, 0.6, lam, reg);
      const Evaluator ev(pr, BinGrid(4, 2));
      std::vector<SimplexPoint> policy;
      for (std::size_t b = 0; b < 16; ++b) {
        Vector w{rng.uniform() + 0.01, rng.uniform() + 0.01, rng.uniform() + 0.01};
        const double s = w[0] + w[1] + w[2];
        for (auto& v : w) v /= s;
        policy.emplace_back(w, 1e-12);
      }
      const auto r = ev.regret(policy, 5000);
      INFO(reg, " ", lam);
      CHECK(std::abs(r.regret - r.estimation_error - r.approximation_error) <= 1e-8);
      CHECK(r.approximation_error >= -1e-10);
      CHECK(r.estimation_error >= -1e-10);
      CHECK(std::abs(r.approximation_error - ev.approximation_error_conjugate()) <= 1e-8);
      CHECK(r.normalized_regret == doctest::Approx(r.regret / fast_rate(5000, 0.6, 2)));
    }
  }
}

TEST_CASE("binned oracle improves with B") {
  const auto pr = make_problem(3, 1, 0.7, "const:0.2", "entropy");
  double prev = INFINITY;
  for (std::size_t b : {4u, 8u, 16u}) {
    const BinGrid g(b, 1);
    const Evaluator ev(pr, g);
    std::vector<SimplexPoint> sampled;
    for (std::size_t i = 0; i < g.size(); ++i) sampled.push_back(pr.pstar(g.center(i)));
    const double r = ev.regret(sampled, 1000).regret;
    CHECK(r < prev);
    CHECK(r >= -1e-12);
    prev = r;
  }
}

TEST_CASE("approximation error") {
  CHECK(std::abs(approximation_error(make_problem(3, 1, 1.0, "const:0.5", "entropy", flat_arms({0.1, 0.4, 0.9})), 8)) <=
        1e-12);
  // Lipschitz means without kinks inside bins.
  const std::vector<ArmSpec> smooth{{NoiseFamily::Bernoulli, 0.15, 0.6, {0.0}},
                                    {NoiseFamily::Bernoulli, 0.15, 0.6, {1.0}},
                                    {NoiseFamily::Bernoulli, 0.45, 0.0, {0.5}}};
  const auto pr = make_problem(3, 1, 1.0, "const:0.5", "entropy", smooth);
  for (std::size_t b : {4u, 8u, 16u}) {
    const double a1 = approximation_error(pr, b, QuadratureOptions{2048});
    const double a2 = approximation_error(pr, 2 * b, QuadratureOptions{2048});
    INFO("B=", b, " ratio ", a1 / a2);
    CHECK(a1 / a2 >= 3.4);
    CHECK(a1 / a2 <= 4.6);
    CHECK(a2 >= -1e-10);
  }
}

TEST_CASE("reduction equivalence of the loss") {
  RngStream rng(66);
  for (const char* reg : {"kl:tilted:1.5", "l2:tilted:0.8", "kl:uniform", "l2:fixed:0.2,0.3,0.5"}) {
    const auto pr = make_problem(3, 1, 0.8, "ramp:0.1,0.9", reg);
    const Evaluator ev(pr, BinGrid(6, 1));
    std::vector<SimplexPoint> policy;
    for (std::size_t b = 0; b < 6; ++b) {
      Vector w{rng.uniform() + 0.01, rng.uniform() + 0.01, rng.uniform() + 0.01};
      const double s = w[0] + w[1] + w[2];
      for (auto& v : w) v /= s;
      policy.emplace_back(w, 1e-12);
    }
    CHECK(std::abs(ev.loss_piecewise(policy) - ev.reduced_loss_piecewise(policy) - ev.offset_integral()) <= 1e-8);
  }
}

TEST_CASE("eta") {
  CHECK(boundary_distance(SimplexPoint::uniform(2)) == doctest::Approx(0.7071067812).epsilon(1e-10));
  CHECK(boundary_distance(SimplexPoint::uniform(3)) == doctest::Approx(0.4082482905).epsilon(1e-10));
  CHECK_THROWS_AS(boundary_distance(SimplexPoint::vertex(1, 0)), DomainError);
  CHECK(boundary_distance(SimplexPoint({0.999, 0.0005, 0.0005})) < 1e-3);
  double prev = 0.0;
  for (double m : {0.01, 0.1, 0.2, 1.0 / 3}) {
    const double e = boundary_distance(SimplexPoint({1 - 2 * m, m, m}, 1e-12));
    CHECK(e > prev);
    prev = e;
  }

  // Geometric cross-check: distance to the sampled boundary of the triangle.
  RngStream rng(67);
  for (int trial = 0; trial < 20; ++trial) {
    Vector p{rng.uniform() + 0.05, rng.uniform() + 0.05, rng.uniform() + 0.05};
    const double s = p[0] + p[1] + p[2];
    for (auto& v : p) v /= s;
    double best = INFINITY;
    const int n = 20000;
    for (std::size_t zero = 0; zero < 3; ++zero) {
      for (int i = 0; i <= n; ++i) {
        Vector e(3, 0.0);
        e[(zero + 1) % 3] = double(i) / n;
        e[(zero + 2) % 3] = 1 - double(i) / n;
        best = std::min(best, std::sqrt(squared_distance(e, p)));
      }
    }
    CHECK(std::abs(boundary_distance(SimplexPoint(p, 1e-12)) - best) <= 1e-4);
  }
  for (int trial = 0; trial < 5; ++trial) {
    const double a = 0.05 + 0.9 * rng.uniform();
    CHECK(boundary_distance(SimplexPoint({a, 1 - a}, 1e-12)) ==
          doctest::Approx(std::sqrt(2.0) * std::min(a, 1 - a)));
  }
}

TEST_CASE("margin probe") {
  const Vector deltas{0.001, 0.002, 0.005, 0.01, 0.02, 0.05, 0.08, 0.099};
  const auto flat = margin_probe(make_problem(3, 1, 1.0, "const:0.1", "entropy"), deltas, 20000, 1);
  for (double p : flat.lambda_below) CHECK(p == 0.0);
  CHECK_FALSE(flat.lambda_exponent.has_value());

  const auto ramp = margin_probe(make_problem(3, 1, 1.0, "ramp:0,1", "entropy"), deltas, 1000000, 2);
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    CHECK(std::abs(ramp.lambda_below[i] - deltas[i]) <= 4 * std::sqrt(deltas[i] / 1e6) + 1e-12);
    if (i) {
      CHECK(ramp.lambda_below[i] >= ramp.lambda_below[i - 1]);
      CHECK(ramp.eta_below[i] >= ramp.eta_below[i - 1]);
    }
    CHECK(ramp.eta_below[i] >= 0.0);
    CHECK(ramp.eta_below[i] <= 1.0);
  }
  REQUIRE(ramp.lambda_exponent.has_value());
  CHECK(std::abs(*ramp.lambda_exponent - 1.0) <= 0.1);
  CHECK_THROWS_AS(margin_probe(make_problem(3, 1, 1.0, "ramp:0,1", "entropy"), deltas, 9999, 2), ConfigError);
}

TEST_CASE("Monte-Carlo mode") {
  const auto pr = make_problem(3, 4, 1.0, "const:0.2", "entropy");
  QuadratureOptions opt;
  opt.monte_carlo = true;
  opt.monte_carlo_nodes = 20000;
  const Evaluator ev(pr, BinGrid(2, 4), opt);
  const std::vector<SimplexPoint> uniform(16, SimplexPoint::uniform(3));
  const auto r = ev.regret(uniform, 10000);
  CHECK(r.standard_error > 0.0);
  CHECK(r.regret > 0.0);
  CHECK(std::abs(r.regret - r.estimation_error - r.approximation_error) <= 1e-8);
}

TEST_CASE("rate normalizations") {
  const double t = 100000, lt = std::log(t);
  CHECK(fast_rate(t, 0.5, 1) == doctest::Approx(std::pow(t / (lt * lt), -0.5)));
  CHECK(slow_rate(t, 0.5, 1) == doctest::Approx(std::pow(t / lt, -0.25)));
}
