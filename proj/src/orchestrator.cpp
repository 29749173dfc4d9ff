#include "rcb/orchestrator.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <iostream>
#include <numeric>
#include <thread>

#include "rcb/errors.hpp"
#include "rcb/random.hpp"

namespace rcb {

EnvironmentSpec RunConfig::environment_spec() const {
  EnvironmentSpec spec;
  spec.dimension = dimension;
  spec.beta = beta;
  spec.holder_constant = holder_constant;
  spec.clamp_lo = clamp_lo;
  spec.clamp_hi = clamp_hi;
  spec.arms = arm_specs.empty() ? default_arms(arms, dimension) : arm_specs;
  return spec;
}

Problem RunConfig::problem() const {
  auto reg = Regularizer::parse(regularizer);
  reg.validate_for_arms(arms);
  return Problem{Environment(environment_spec()), LambdaFunction::parse(lambda), std::move(reg)};
}

std::size_t RunConfig::bins_per_axis() const {
  if (bins) return *bins;
  return select_bin_count(horizon, beta, dimension, regime, theta_constant);
}

QuadratureOptions RunConfig::quadrature() const {
  QuadratureOptions q;
  q.nodes_per_axis = eval_nodes;
  q.monte_carlo = monte_carlo;
  q.monte_carlo_nodes = monte_carlo_nodes;
  q.monte_carlo_seed = seed;
  return q;
}

void RunConfig::validate() const {
  if (horizon < 1) throw ConfigError("T must be >= 1");
  if (arms < 1) throw ConfigError("K must be >= 1");
  if (dimension < 1) throw ConfigError("d must be >= 1");
  if (!(beta > 0.0 && beta <= 1.0)) throw ConfigError("beta must be in (0,1]");
  if (!arm_specs.empty() && arm_specs.size() != arms) {
    throw ConfigError("number of arm specs must equal K");
  }
  if (bins && *bins == 0) throw ConfigError("bins must be >= 1");
  if (!(theta_constant > 0.0)) throw ConfigError("theta_constant must be positive");
  if (quad_nodes == 0) throw ConfigError("quad_nodes must be >= 1");
  if (!(confidence_constant >= 0.0)) throw ConfigError("confidence_constant must be >= 0");
  if (!(presample_cap > 0.0 && presample_cap < 0.5)) throw ConfigError("presample_cap must be in (0, 1/2)");
  if (!(margin_alpha > 0.0)) throw ConfigError("margin_alpha must be positive");
  if (!(margin_constant > 0.0)) throw ConfigError("margin_constant must be positive");
  if (!(ill_bin_constant >= 0.0)) throw ConfigError("ill_bin_constant must be >= 0");
  (void)problem();
  if (dimension > 3 && !monte_carlo) {
    throw ConfigError("quadrature is limited to d <= 3; set monte_carlo for larger d");
  }
  const std::size_t b = bins_per_axis();
  const BinGrid grid(b, dimension);
  if (horizon < arms * grid.size()) {
    throw SizingError("T = " + std::to_string(horizon) + " is smaller than K * B^d = " +
                      std::to_string(arms * grid.size()));
  }
}

std::vector<SimplexPoint> PolicyResult::policy() const {
  std::vector<SimplexPoint> p;
  p.reserve(bins.size());
  for (const auto& b : bins) p.push_back(b.proportion);
  return p;
}

std::size_t PolicyResult::empty_bins() const {
  return static_cast<std::size_t>(
      std::count_if(bins.begin(), bins.end(), [](const BinRecord& b) { return b.empty; }));
}

PolicyResult run_algorithm(const RunConfig& config, const StepObserver& observer) {
  const auto start = std::chrono::steady_clock::now();
  config.validate();
  const Problem problem = config.problem();
  const BinGrid grid(config.bins_per_axis(), config.dimension);
  const std::size_t k = config.arms;
  const std::size_t nb = grid.size();
  const auto reduced = problem.regularizer.reduce();
  const double occupancy = std::max(1.0, static_cast<double>(config.horizon) / static_cast<double>(nb));

  std::vector<BinObjective> objectives(nb);
  for (std::size_t b = 0; b < nb; ++b) {
    objectives[b].lambda_bar = bin_average_lambda(grid, b, problem.lambda, config.quad_nodes);
    objectives[b].shift = bin_average_shift(grid, b, problem.lambda, reduced, k, config.quad_nodes);
    objectives[b].core = reduced.core;
  }

  // Intermediate regime ranks bins by lambda_bar; the agent knows lambda.
  std::vector<std::size_t> rank(nb, 0);
  ScheduleOptions sched;
  sched.cap = config.presample_cap;
  sched.margin_constant = config.margin_constant;
  sched.margin_exponent = config.margin_exponent.value_or(1.0 / (6.0 * config.margin_alpha));
  if (config.regime == Regime::Intermediate) {
    std::vector<std::size_t> order(nb);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return objectives[a].lambda_bar < objectives[b].lambda_bar;
    });
    for (std::size_t j = 0; j < nb; ++j) rank[order[j]] = j + 1;
    const double b = static_cast<double>(grid.bins_per_axis());
    const double j_hat = config.ill_bin_constant * static_cast<double>(nb) *
                         std::pow(b, -config.margin_alpha * config.beta);
    sched.ill_behaved_bins = static_cast<std::size_t>(std::floor(j_hat));
  }

  RngStream presample_rng(config.seed, 0, "presample");
  RngStream context_rng(config.seed, 0, "contexts");
  RngStream loss_rng(config.seed, 0, "losses");

  std::vector<UcfwLearner> learners;
  learners.reserve(nb);
  PolicyResult result;
  result.bins_per_axis = grid.bins_per_axis();
  result.dimension = config.dimension;
  bool warned = false;
  for (std::size_t b = 0; b < nb; ++b) {
    auto schedule = make_presample_schedule(config.regime, objectives[b], occupancy, k,
                                            config.regime == Regime::Intermediate ? rank[b] : 1, nb, sched);
    if (schedule.capped && !warned) {
      std::cerr << "warning: presampling mixture weight capped at " << config.presample_cap
                << " (lambda too large for the schedule)\n";
      warned = true;
    }
    learners.emplace_back(objectives[b], std::move(schedule), UcfwOptions{config.confidence_constant});
    // Presample draws are taken at the bin center.
    const Vector center = grid.center(b);
    const auto& counts = learners.back().schedule().per_arm_counts;
    for (std::size_t a = 0; a < k; ++a) {
      for (std::size_t n = 0; n < counts[a]; ++n) {
        learners.back().record_presample(a, problem.environment.sample_loss(a, center, presample_rng));
      }
      result.presample_pulls += counts[a];
    }
  }

  std::vector<std::size_t> contexts(nb, 0);
  for (std::size_t t = 0; t < config.horizon; ++t) {
    const Vector x = problem.environment.sample_context(context_rng);
    const std::size_t b = grid.index(x);
    ++contexts[b];
    UcfwLearner& learner = learners[b];
    const std::size_t arm = learner.step([&](std::size_t a) {
      const double y = problem.environment.sample_loss(a, x, loss_rng);
      if (!(y >= 0.0 && y <= 1.0)) throw DataError("environment emitted a loss outside [0,1]");
      return y;
    });
    if (observer) observer(t + 1, x, b, arm, learner);
  }
  result.steps = config.horizon;

  result.bins.reserve(nb);
  for (std::size_t b = 0; b < nb; ++b) {
    const UcfwLearner& l = learners[b];
    BinRecord rec;
    rec.bin = b;
    rec.contexts = contexts[b];
    rec.presample_pulls = l.schedule().total_pulls();
    rec.pulls = l.pulls();
    rec.means = l.means();
    const auto fin = l.final_proportion();
    rec.proportion = fin.proportion;
    rec.empty = fin.empty_bin;
    rec.mixture_weight = l.schedule().mixture_weight;
    rec.capped = l.schedule().capped;
    rec.lambda_bar = objectives[b].lambda_bar;
    result.total_pulls += l.total_pulls();
    result.bins.push_back(std::move(rec));
  }
  result.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

RegretReport evaluate(const RunConfig& config, const PolicyResult& result) {
  const Problem problem = config.problem();
  const BinGrid grid(result.bins_per_axis, result.dimension);
  const Evaluator evaluator(problem, grid, config.quadrature());
  const auto policy = result.policy();
  return evaluator.regret(policy, config.horizon, result.empty_bins());
}

std::vector<SweepRow> run_sweep(const std::vector<RunConfig>& configs, std::size_t parallelism) {
  std::vector<SweepRow> rows(configs.size());
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= configs.size()) return;
      SweepRow& row = rows[i];
      row.id = i;
      row.config = configs[i];
      try {
        row.result = run_algorithm(configs[i]);
        row.report = evaluate(configs[i], *row.result);
      } catch (const std::exception& e) {
        row.result.reset();
        row.report.reset();
        row.error = e.what();
        if (row.error.empty()) row.error = "unknown error";
      }
    }
  };
  const std::size_t n = std::max<std::size_t>(1, std::min(parallelism, configs.size()));
  if (n == 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    threads.reserve(n);
    for (std::size_t i = 0; i < n; ++i) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }
  return rows;
}

}  // namespace rcb
