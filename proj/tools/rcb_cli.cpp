// rcb: regularized contextual bandit sweeps and margin diagnostics.
//
//   rcb run --config sweep.json [--T 10000,20000] [--beta 0.5] [--reps 20]
//           [--seed 7] [--regime fast] [--out results.csv] [--run-log bins.jsonl]
//   rcb probe-margin --config sweep.json --out margin.csv
//
// Exit codes: 0 success, 1 invalid configuration, 2 runtime failure.
// RCB_WORKERS sets the number of sweep workers (default 1).

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "rcb/errors.hpp"
#include "rcb/evaluation.hpp"
#include "rcb/experiment.hpp"

namespace {

constexpr int kValidationError = 1;
constexpr int kRuntimeError = 2;

std::size_t worker_count() {
  const char* env = std::getenv("RCB_WORKERS");
  if (!env || !*env) return 1;
  const long v = std::strtol(env, nullptr, 10);
  return v > 0 ? static_cast<std::size_t>(v) : 1;
}

int command_run(const std::string& config_path, const rcb::ConfigOverrides& overrides,
                const std::string& run_log) {
  const rcb::SweepSpec spec = rcb::parse_config(config_path, overrides);
  const auto configs = rcb::expand(spec);
  const auto sweep = rcb::run_sweep(configs, worker_count());
  const auto rows = rcb::to_rows(spec, sweep);
  const auto summary = rcb::summarize(spec, sweep);

  if (spec.output.empty()) {
    rcb::write_csv(std::cout, spec, rows);
    rcb::write_summary(std::cerr, summary);
  } else {
    std::ofstream csv(spec.output, std::ios::binary);
    if (!csv) throw std::runtime_error("cannot write '" + spec.output + "'");
    rcb::write_csv(csv, spec, rows);
    std::ofstream side(spec.output + ".summary.txt", std::ios::binary);
    rcb::write_summary(side, summary);
    rcb::write_summary(std::cout, summary);
  }
  if (!run_log.empty()) {
    std::ofstream log(run_log, std::ios::binary);
    if (!log) throw std::runtime_error("cannot write '" + run_log + "'");
    rcb::write_run_log(log, sweep);
  }

  std::size_t failures = 0;
  for (const auto& r : rows) failures += r.error.empty() ? 0 : 1;
  if (failures > 0) {
    std::cerr << failures << " of " << rows.size() << " runs failed\n";
    return kRuntimeError;
  }
  return 0;
}

int command_probe(const std::string& config_path, const std::string& out_path, std::size_t samples,
                  const std::vector<double>& deltas) {
  const rcb::SweepSpec spec = rcb::parse_config(config_path);
  rcb::RunConfig config = spec.base;
  config.beta = spec.betas.front();
  config.horizon = spec.horizons.front();
  const rcb::Problem problem = config.problem();
  const auto probe = rcb::margin_probe(problem, deltas, samples, spec.master_seed);

  std::ostringstream out;
  out << "delta,p_lambda_below,p_eta_below\n";
  out.precision(17);
  for (std::size_t i = 0; i < probe.deltas.size(); ++i) {
    out << probe.deltas[i] << ',' << probe.lambda_below[i] << ',' << probe.eta_below[i] << '\n';
  }
  if (out_path.empty()) {
    std::cout << out.str();
  } else {
    std::ofstream f(out_path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write '" + out_path + "'");
    f << out.str();
  }
  std::cerr << "lambda tail exponent: "
            << (probe.lambda_exponent ? std::to_string(*probe.lambda_exponent) : "n/a")
            << "\neta tail exponent: "
            << (probe.eta_exponent ? std::to_string(*probe.eta_exponent) : "n/a") << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Regularized contextual bandits: bin-then-Frank-Wolfe simulation and regret sweeps"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_path;
  std::string run_log;
  std::vector<std::size_t> horizons;
  std::vector<double> betas;
  std::size_t reps = 0;
  std::uint64_t seed = 0;
  std::string regime;

  auto* run = app.add_subcommand("run", "run a (beta, T, rep) sweep and write CSV rows");
  run->add_option("--config", config_path, "JSON config file")->required();
  run->add_option("--T", horizons, "horizons (overrides the config)")->delimiter(',');
  run->add_option("--beta", betas, "Hölder exponents (overrides the config)")->delimiter(',');
  run->add_option("--reps", reps, "replications per (beta, T)");
  run->add_option("--seed", seed, "master seed");
  run->add_option("--regime", regime, "slow | fast | intermediate");
  run->add_option("--out", out_path, "output CSV (stdout if omitted)");
  run->add_option("--run-log", run_log, "per-bin JSON-lines log");

  std::size_t samples = 100000;
  std::vector<double> deltas = {0.001, 0.002, 0.005, 0.01, 0.02, 0.05, 0.1, 0.2, 0.5};
  auto* probe = app.add_subcommand("probe-margin", "estimate margin-condition tail probabilities");
  probe->add_option("--config", config_path, "JSON config file")->required();
  probe->add_option("--out", out_path, "output CSV (stdout if omitted)");
  probe->add_option("--samples", samples, "Monte-Carlo contexts");
  probe->add_option("--deltas", deltas, "ascending threshold grid")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kValidationError;
  }

  try {
    if (*run) {
      rcb::ConfigOverrides o;
      if (run->count("--T")) o.horizons = horizons;
      if (run->count("--beta")) o.betas = betas;
      if (run->count("--reps")) o.replications = reps;
      if (run->count("--seed")) o.seed = seed;
      if (run->count("--regime")) o.regime = regime;
      if (run->count("--out")) o.output = out_path;
      return command_run(config_path, o, run_log);
    }
    return command_probe(config_path, out_path, samples, deltas);
  } catch (const rcb::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kValidationError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
}
