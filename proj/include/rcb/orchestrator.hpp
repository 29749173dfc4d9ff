#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "rcb/environment.hpp"
#include "rcb/evaluation.hpp"
#include "rcb/partition.hpp"
#include "rcb/ucfw.hpp"

namespace rcb {

struct RunConfig {
  std::size_t horizon = 10000;
  std::size_t arms = 3;
  std::size_t dimension = 1;
  double beta = 1.0;
  std::optional<double> holder_constant;
  double clamp_lo = 0.05;
  double clamp_hi = 0.95;
  std::vector<ArmSpec> arm_specs;  // empty → default_arms(arms, dimension)
  Regime regime = Regime::Fast;
  std::string regularizer = "entropy";
  std::string lambda = "const:0.1";
  std::uint64_t seed = 0;

  std::optional<std::size_t> bins;  // explicit B, overrides the regime rule
  double theta_constant = 1.0;
  std::size_t quad_nodes = kDefaultAgentQuadNodes;
  std::size_t eval_nodes = 0;  // 0 → dimension default
  bool monte_carlo = false;
  std::size_t monte_carlo_nodes = 1000000;

  double confidence_constant = 2.0;
  double presample_cap = 0.49;
  double margin_alpha = 0.5;
  std::optional<double> margin_exponent;  // default 1 / (6 margin_alpha)
  double margin_constant = 1.0;            // C_gamma
  double ill_bin_constant = 1.0;           // C_I

  EnvironmentSpec environment_spec() const;
  Problem problem() const;
  std::size_t bins_per_axis() const;
  QuadratureOptions quadrature() const;
  // Throws ConfigError / SizingError.
  void validate() const;
};

struct BinRecord {
  std::size_t bin = 0;
  std::size_t contexts = 0;        // T_b
  std::size_t presample_pulls = 0;
  std::vector<std::size_t> pulls;  // N_k, presample included
  Vector means;
  SimplexPoint proportion;
  double mixture_weight = 0.0;
  double lambda_bar = 0.0;
  bool empty = false;
  bool capped = false;
};

struct PolicyResult {
  std::size_t bins_per_axis = 0;
  std::size_t dimension = 0;
  std::vector<BinRecord> bins;
  std::size_t steps = 0;
  std::size_t presample_pulls = 0;
  std::size_t total_pulls = 0;
  double wall_seconds = 0.0;

  std::vector<SimplexPoint> policy() const;
  std::size_t empty_bins() const;
};

// Called after every post-presample step.
using StepObserver = std::function<void(std::size_t step, Context x, std::size_t bin,
                                        std::size_t arm, const UcfwLearner& learner)>;

PolicyResult run_algorithm(const RunConfig& config, const StepObserver& observer = {});

RegretReport evaluate(const RunConfig& config, const PolicyResult& result);

struct SweepRow {
  std::size_t id = 0;
  RunConfig config;
  std::optional<PolicyResult> result;
  std::optional<RegretReport> report;
  std::string error;

  bool ok() const { return error.empty(); }
};

// Runs and evaluates every config; rows are ordered by input position and
// do not depend on `parallelism`. A failing run yields an error row.
std::vector<SweepRow> run_sweep(const std::vector<RunConfig>& configs, std::size_t parallelism = 1);

}  // namespace rcb
