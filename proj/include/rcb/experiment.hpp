#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "rcb/orchestrator.hpp"

namespace rcb {

struct SweepSpec {
  RunConfig base;  // horizon and beta are taken from the lists below
  std::vector<double> betas;
  std::vector<std::size_t> horizons;
  std::size_t replications = 1;
  std::uint64_t master_seed = 0;
  std::string output;
  std::vector<std::string> overrides;  // "key=value" for flags that won over the file
};

// Command-line values that take precedence over the config file.
struct ConfigOverrides {
  std::optional<std::vector<std::size_t>> horizons;
  std::optional<std::vector<double>> betas;
  std::optional<std::size_t> replications;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> regime;
  std::optional<std::string> output;
};

// Parses a JSON object. Unknown keys, wrong types and out-of-range values
// throw ConfigError naming the key.
SweepSpec parse_config_text(const std::string& json_text, const ConfigOverrides& overrides = {});
SweepSpec parse_config(const std::string& path, const ConfigOverrides& overrides = {});

// Seed of one (beta, T, rep) cell; depends only on the cell identity.
std::uint64_t run_seed(std::uint64_t master_seed, double beta, std::size_t horizon, std::size_t rep);

// Ordered by (beta, T, rep) as listed in the spec.
std::vector<RunConfig> expand(const SweepSpec& spec);

struct CsvRow {
  double beta = 0.0;
  std::size_t horizon = 0;
  std::size_t rep = 0;
  std::uint64_t seed = 0;
  std::size_t bins = 0;
  double regret = 0.0;
  double regret_times_t = 0.0;
  double normalized_regret = 0.0;
  double estimation_error = 0.0;
  double approximation_error = 0.0;
  std::size_t empty_bin_count = 0;
  std::string error;
};

inline constexpr const char* kCsvHeader =
    "beta,T,rep,seed,bins,regret,regret_times_T,normalized_regret,estimation_error,"
    "approximation_error,empty_bin_count";

std::vector<CsvRow> to_rows(const SweepSpec& spec, const std::vector<SweepRow>& sweep);
std::string format_row(const CsvRow& row);
// Full file: '#' comment header, column header, rows, then one '#' line per failed row.
void write_csv(std::ostream& out, const SweepSpec& spec, const std::vector<CsvRow>& rows);

struct SlopeFit {
  double slope = 0.0;
  double standard_error = 0.0;
  std::size_t points = 0;
  std::vector<std::size_t> dropped;  // horizons dropped for nonpositive mean regret
};

// OLS of log(mean regret) on log T. Throws ConfigError with fewer than three
// surviving points.
SlopeFit fit_rate_slope(const std::vector<std::size_t>& horizons, const std::vector<double>& mean_regret);

struct HorizonSummary {
  std::size_t horizon = 0;
  std::size_t runs = 0;
  double mean_regret = 0.0;
  double stderr_regret = 0.0;
  double mean_normalized = 0.0;  // fast-rate normalization
  double stderr_normalized = 0.0;
  double mean_slow_normalized = 0.0;
  double stderr_slow_normalized = 0.0;
};

struct BetaSummary {
  double beta = 0.0;
  std::vector<HorizonSummary> horizons;
  std::optional<SlopeFit> slope;
  std::string slope_error;
  double predicted_fast_slope = 0.0;  // -2 beta / (2 beta + d)
  double predicted_slow_slope = 0.0;  // -beta / (2 beta + d)
};

// One JSON object per line and bin: run id, bin id, T_b, N_k, mu_hat, p_T(b), flags.
void write_run_log(std::ostream& out, const std::vector<SweepRow>& sweep);

std::vector<BetaSummary> summarize(const SweepSpec& spec, const std::vector<SweepRow>& sweep);
void write_summary(std::ostream& out, const std::vector<BetaSummary>& summary);

}  // namespace rcb
