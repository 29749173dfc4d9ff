#include "doctest.h"

#include <cmath>

#include "rcb/errors.hpp"
#include "rcb/orchestrator.hpp"

using namespace rcb;

namespace {

RunConfig small_config(std::uint64_t seed = 1) {
  RunConfig c;
  c.horizon = 3000;
  c.arms = 3;
  c.beta = 0.6;
  c.lambda = "const:0.2";
  c.seed = seed;
  return c;
}

RunConfig ucb_config(std::uint64_t seed) {
  RunConfig c;
  c.horizon = 10000;
  c.arms = 2;
  c.bins = 1;
  c.lambda = "const:0";
  c.arm_specs = {ArmSpec{NoiseFamily::Bernoulli, 0.2, 0.0, {}}, ArmSpec{NoiseFamily::Bernoulli, 0.8, 0.0, {}}};
  c.seed = seed;
  return c;
}

void check_same(const PolicyResult& a, const PolicyResult& b) {
  REQUIRE(a.bins.size() == b.bins.size());
  CHECK(a.steps == b.steps);
  CHECK(a.total_pulls == b.total_pulls);
  CHECK(a.presample_pulls == b.presample_pulls);
  for (std::size_t i = 0; i < a.bins.size(); ++i) {
    CHECK(a.bins[i].contexts == b.bins[i].contexts);
    CHECK(a.bins[i].pulls == b.bins[i].pulls);
    CHECK(a.bins[i].means == b.bins[i].means);
    CHECK(a.bins[i].proportion == b.bins[i].proportion);
    CHECK(a.bins[i].empty == b.bins[i].empty);
  }
}

}  // namespace

TEST_CASE("single arm") {
  RunConfig c = small_config();
  c.arms = 1;
  const auto r = run_algorithm(c);
  for (const auto& b : r.bins) CHECK(b.proportion == SimplexPoint::vertex(1, 0));
  CHECK(std::abs(evaluate(c, r).regret) <= 1e-10);
}

TEST_CASE("lambda zero recovers UCB") {
  double fraction = 0.0;
  for (std::uint64_t s = 0; s < 50; ++s) {
    const auto r = run_algorithm(ucb_config(s));
    fraction += r.bins[0].proportion[0];
  }
  CHECK(fraction / 50 >= 0.9);
}

TEST_CASE("determinism") {
  for (const char* reg : {"entropy", "kl:tilted:1", "l2:uniform"}) {
    RunConfig c = small_config(77);
    c.regularizer = reg;
    c.lambda = "cosfield:0.1,0.3";
    check_same(run_algorithm(c), run_algorithm(c));
  }
  const auto a = run_algorithm(small_config(1));
  const auto b = run_algorithm(small_config(2));
  CHECK(a.bins[0].pulls != b.bins[0].pulls);
}

TEST_CASE("budget accounting and routing replay") {
  for (auto regime : {Regime::Slow, Regime::Fast, Regime::Intermediate}) {
    RunConfig c = small_config(5);
    c.dimension = 2;
    c.regime = regime;
    c.lambda = "ramp:0.05,0.5";
    const std::size_t b = c.bins_per_axis();
    const BinGrid grid(b, 2);
    std::vector<std::size_t> routed(grid.size(), 0), replay(grid.size(), 0);
    std::size_t last = 0;
    const auto r = run_algorithm(c, [&](std::size_t step, Context x, std::size_t bin, std::size_t,
                                        const UcfwLearner& learner) {
      CHECK(step == last + 1);
      last = step;
      ++routed[bin];
      ++replay[grid.index(x)];
      CHECK(learner.steps() == routed[bin]);
    });
    INFO(to_string(regime));
    CHECK(routed == replay);
    std::size_t contexts = 0, presample = 0;
    for (const auto& rec : r.bins) {
      CHECK(rec.contexts == routed[rec.bin]);
      std::size_t pulls = 0;
      for (auto n : rec.pulls) pulls += n;
      CHECK(pulls == rec.contexts + rec.presample_pulls);
      contexts += rec.contexts;
      presample += rec.presample_pulls;
      CHECK(is_simplex_point(rec.proportion.span()));
    }
    CHECK(contexts == c.horizon);
    CHECK(presample == r.presample_pulls);
    CHECK(contexts + presample == r.total_pulls);
  }
}

TEST_CASE("sizing and validation errors") {
  RunConfig c = small_config();
  c.horizon = 20;
  c.bins = 8;
  CHECK_THROWS_AS(run_algorithm(c), SizingError);
  c = small_config();
  c.beta = 1.5;
  CHECK_THROWS_AS(run_algorithm(c), ConfigError);
  c = small_config();
  c.dimension = 4;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("sweep cardinality, ordering and isolation") {
  std::vector<RunConfig> configs;
  for (double beta : {0.3, 0.5, 0.7, 0.9}) {
    for (std::size_t t : {200u, 300u, 400u, 500u, 600u}) {
      for (std::uint64_t s = 0; s < 10; ++s) {
        RunConfig c;
        c.horizon = t;
        c.beta = beta;
        c.seed = s;
        configs.push_back(c);
      }
    }
  }
  const auto rows = run_sweep(configs, 2);
  CHECK(rows.size() == 200);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].id == i);
    CHECK(rows[i].ok());
    CHECK(rows[i].config.seed == configs[i].seed);
  }

  std::vector<RunConfig> ten(configs.begin(), configs.begin() + 10);
  ten[4].beta = 2.0;
  const auto isolated = run_sweep(ten, 3);
  std::size_t ok = 0;
  for (const auto& r : isolated) ok += r.ok();
  CHECK(ok == 9);
  CHECK_FALSE(isolated[4].ok());
  CHECK(isolated[4].error.find("beta") != std::string::npos);
}

TEST_CASE("sweep results do not depend on parallelism") {
  std::vector<RunConfig> configs;
  for (std::uint64_t s = 0; s < 12; ++s) configs.push_back(small_config(s));
  const auto a = run_sweep(configs, 1);
  const auto b = run_sweep(configs, 8);
  for (std::size_t i = 0; i < configs.size(); ++i) {
    check_same(*a[i].result, *b[i].result);
    CHECK(a[i].report->regret == b[i].report->regret);
    CHECK(a[i].report->estimation_error == b[i].report->estimation_error);
  }
}

TEST_CASE("decomposition on runs") {
  for (auto regime : {Regime::Slow, Regime::Fast, Regime::Intermediate}) {
    RunConfig c = small_config(9);
    c.regime = regime;
    c.lambda = "cosfield:0.15,0.3";
    const auto rep = evaluate(c, run_algorithm(c));
    CHECK(std::abs(rep.regret - rep.estimation_error - rep.approximation_error) <= 1e-8);
    CHECK(rep.approximation_error >= -1e-10);
  }
}
