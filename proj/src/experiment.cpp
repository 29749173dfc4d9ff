#include "rcb/experiment.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "rcb/errors.hpp"
#include "rcb/random.hpp"

namespace rcb {

using nlohmann::json;

namespace {

std::string shortest(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "T", "beta", "reps", "seed", "regime", "K", "d", "regularizer", "lambda", "arms", "clamp",
      "L_beta", "bins", "theta_constant", "quad_nodes", "eval_nodes", "monte_carlo",
      "monte_carlo_nodes", "confidence_constant", "presample_cap", "margin_alpha",
      "margin_exponent", "margin_constant", "ill_bin_constant", "out"};
  return keys;
}

[[noreturn]] void bad(const std::string& key, const std::string& what) {
  throw ConfigError("config key '" + key + "': " + what);
}

double get_number(const json& j, const std::string& key) {
  if (!j.is_number()) bad(key, "expected a number");
  return j.get<double>();
}

std::size_t get_count(const json& j, const std::string& key) {
  if (!j.is_number_integer() && !j.is_number_unsigned()) bad(key, "expected a non-negative integer");
  const auto v = j.get<long long>();
  if (v < 0) bad(key, "expected a non-negative integer");
  return static_cast<std::size_t>(v);
}

std::string get_string(const json& j, const std::string& key) {
  if (!j.is_string()) bad(key, "expected a string");
  return j.get<std::string>();
}

template <class F>
auto get_list(const json& j, const std::string& key, F&& item) {
  std::vector<decltype(item(j, key))> out;
  if (j.is_array()) {
    for (const auto& e : j) out.push_back(item(e, key));
  } else {
    out.push_back(item(j, key));
  }
  return out;
}

ArmSpec parse_arm(const json& j, std::size_t dimension) {
  if (!j.is_object()) bad("arms", "each arm must be an object");
  ArmSpec a;
  for (const auto& [k, v] : j.items()) {
    if (k == "family") {
      a.family = parse_noise_family(get_string(v, "arms.family"));
    } else if (k == "offset") {
      a.offset = get_number(v, "arms.offset");
    } else if (k == "slope") {
      a.slope = get_number(v, "arms.slope");
    } else if (k == "anchor") {
      a.anchor = get_list(v, "arms.anchor", get_number);
      if (a.anchor.size() == 1 && dimension > 1) a.anchor.assign(dimension, a.anchor[0]);
    } else {
      bad("arms." + k, "unknown key");
    }
  }
  return a;
}

}  // namespace

SweepSpec parse_config_text(const std::string& json_text, const ConfigOverrides& overrides) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& [k, v] : root.items()) {
    if (!known_keys().contains(k)) bad(k, "unknown key");
  }

  SweepSpec spec;
  RunConfig& c = spec.base;
  const auto has = [&](const char* k) { return root.contains(k) && !root[k].is_null(); };

  if (has("K")) c.arms = get_count(root["K"], "K");
  if (has("d")) c.dimension = get_count(root["d"], "d");
  if (has("regime")) c.regime = parse_regime(get_string(root["regime"], "regime"));
  if (has("regularizer")) c.regularizer = get_string(root["regularizer"], "regularizer");
  if (has("lambda")) c.lambda = get_string(root["lambda"], "lambda");
  if (has("L_beta")) c.holder_constant = get_number(root["L_beta"], "L_beta");
  if (has("clamp")) {
    const auto cl = get_list(root["clamp"], "clamp", get_number);
    if (cl.size() != 2) bad("clamp", "expected [lo, hi]");
    c.clamp_lo = cl[0];
    c.clamp_hi = cl[1];
  }
  if (has("bins")) c.bins = get_count(root["bins"], "bins");
  if (has("theta_constant")) c.theta_constant = get_number(root["theta_constant"], "theta_constant");
  if (has("quad_nodes")) c.quad_nodes = get_count(root["quad_nodes"], "quad_nodes");
  if (has("eval_nodes")) c.eval_nodes = get_count(root["eval_nodes"], "eval_nodes");
  if (has("monte_carlo")) {
    if (!root["monte_carlo"].is_boolean()) bad("monte_carlo", "expected true or false");
    c.monte_carlo = root["monte_carlo"].get<bool>();
  }
  if (has("monte_carlo_nodes")) c.monte_carlo_nodes = get_count(root["monte_carlo_nodes"], "monte_carlo_nodes");
  if (has("confidence_constant")) c.confidence_constant = get_number(root["confidence_constant"], "confidence_constant");
  if (has("presample_cap")) c.presample_cap = get_number(root["presample_cap"], "presample_cap");
  if (has("margin_alpha")) c.margin_alpha = get_number(root["margin_alpha"], "margin_alpha");
  if (has("margin_exponent")) c.margin_exponent = get_number(root["margin_exponent"], "margin_exponent");
  if (has("margin_constant")) c.margin_constant = get_number(root["margin_constant"], "margin_constant");
  if (has("ill_bin_constant")) c.ill_bin_constant = get_number(root["ill_bin_constant"], "ill_bin_constant");
  if (has("arms")) {
    if (!root["arms"].is_array()) bad("arms", "expected a list of arm objects");
    for (const auto& a : root["arms"]) c.arm_specs.push_back(parse_arm(a, c.dimension));
    if (!has("K")) c.arms = c.arm_specs.size();
    if (c.arm_specs.size() != c.arms) bad("arms", "number of arms must equal K");
  }
  if (has("T")) spec.horizons = get_list(root["T"], "T", get_count);
  if (has("beta")) spec.betas = get_list(root["beta"], "beta", get_number);
  if (has("reps")) spec.replications = get_count(root["reps"], "reps");
  if (has("seed")) spec.master_seed = static_cast<std::uint64_t>(get_count(root["seed"], "seed"));
  if (has("out")) spec.output = get_string(root["out"], "out");

  if (overrides.horizons) {
    spec.horizons = *overrides.horizons;
    spec.overrides.push_back("T");
  }
  if (overrides.betas) {
    spec.betas = *overrides.betas;
    spec.overrides.push_back("beta");
  }
  if (overrides.replications) {
    spec.replications = *overrides.replications;
    spec.overrides.push_back("reps=" + std::to_string(*overrides.replications));
  }
  if (overrides.seed) {
    spec.master_seed = *overrides.seed;
    spec.overrides.push_back("seed=" + std::to_string(*overrides.seed));
  }
  if (overrides.regime) {
    c.regime = parse_regime(*overrides.regime);
    spec.overrides.push_back("regime=" + *overrides.regime);
  }
  if (overrides.output) spec.output = *overrides.output;

  if (!has("T") && !overrides.horizons) bad("T", "missing required key");
  if (!has("beta") && !overrides.betas) bad("beta", "missing required key");
  if (spec.horizons.empty()) bad("T", "list must not be empty");
  if (spec.betas.empty()) bad("beta", "list must not be empty");
  for (auto t : spec.horizons) {
    if (t < 3) bad("T", "every T must be >= 3");
  }
  for (double b : spec.betas) {
    if (!(b > 0.0 && b <= 1.0)) bad("beta", "beta must be in (0,1]");
  }
  if (spec.replications < 1) bad("reps", "must be >= 1");
  if (c.arms < 1) bad("K", "must be >= 1");
  if (c.dimension < 1) bad("d", "must be >= 1");

  // Structural checks shared by every cell (sizing is checked per run).
  RunConfig probe = c;
  probe.beta = spec.betas.front();
  probe.horizon = spec.horizons.front();
  (void)probe.problem();
  return spec;
}

SweepSpec parse_config(const std::string& path, const ConfigOverrides& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), overrides);
}

std::uint64_t run_seed(std::uint64_t master_seed, double beta, std::size_t horizon, std::size_t rep) {
  return derive_seed(master_seed, rep, "beta=" + shortest(beta) + ";T=" + std::to_string(horizon));
}

std::vector<RunConfig> expand(const SweepSpec& spec) {
  std::vector<RunConfig> out;
  out.reserve(spec.betas.size() * spec.horizons.size() * spec.replications);
  for (double beta : spec.betas) {
    for (std::size_t t : spec.horizons) {
      for (std::size_t rep = 0; rep < spec.replications; ++rep) {
        RunConfig c = spec.base;
        c.beta = beta;
        c.horizon = t;
        c.seed = run_seed(spec.master_seed, beta, t, rep);
        out.push_back(std::move(c));
      }
    }
  }
  return out;
}

std::vector<CsvRow> to_rows(const SweepSpec& spec, const std::vector<SweepRow>& sweep) {
  std::vector<CsvRow> rows;
  rows.reserve(sweep.size());
  for (const auto& s : sweep) {
    CsvRow r;
    r.beta = s.config.beta;
    r.horizon = s.config.horizon;
    r.rep = spec.replications ? s.id % spec.replications : 0;
    r.seed = s.config.seed;
    if (s.ok()) {
      r.bins = s.result->bins_per_axis;
      r.regret = s.report->regret;
      r.regret_times_t = s.report->regret * static_cast<double>(r.horizon);
      r.normalized_regret = s.report->normalized_regret;
      r.estimation_error = s.report->estimation_error;
      r.approximation_error = s.report->approximation_error;
      r.empty_bin_count = s.report->empty_bins;
    } else {
      const double nan = std::nan("");
      r.regret = r.regret_times_t = r.normalized_regret = nan;
      r.estimation_error = r.approximation_error = nan;
      r.error = s.error;
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

std::string format_row(const CsvRow& r) {
  std::string s;
  s += shortest(r.beta) + ',' + std::to_string(r.horizon) + ',' + std::to_string(r.rep) + ',' +
       std::to_string(r.seed) + ',' + std::to_string(r.bins) + ',' + shortest(r.regret) + ',' +
       shortest(r.regret_times_t) + ',' + shortest(r.normalized_regret) + ',' +
       shortest(r.estimation_error) + ',' + shortest(r.approximation_error) + ',' +
       std::to_string(r.empty_bin_count);
  return s;
}

void write_csv(std::ostream& out, const SweepSpec& spec, const std::vector<CsvRow>& rows) {
  const RunConfig& c = spec.base;
  out << "# regime=" << to_string(c.regime) << " regularizer=" << c.regularizer
      << " lambda=" << c.lambda << " K=" << c.arms << " d=" << c.dimension
      << " reps=" << spec.replications << " master_seed=" << spec.master_seed << '\n';
  for (const auto& o : spec.overrides) out << "# override " << o << '\n';
  out << kCsvHeader << '\n';
  for (const auto& r : rows) out << format_row(r) << '\n';
  for (const auto& r : rows) {
    if (r.error.empty()) continue;
    out << "# error beta=" << shortest(r.beta) << " T=" << r.horizon << " rep=" << r.rep << ": "
        << r.error << '\n';
  }
}

SlopeFit fit_rate_slope(const std::vector<std::size_t>& horizons, const std::vector<double>& mean_regret) {
  if (horizons.size() != mean_regret.size()) throw ConfigError("slope fit: size mismatch");
  SlopeFit fit;
  std::vector<double> xs;
  std::vector<double> ys;
  for (std::size_t i = 0; i < horizons.size(); ++i) {
    if (!(mean_regret[i] > 0.0) || !std::isfinite(mean_regret[i])) {
      fit.dropped.push_back(horizons[i]);
      continue;
    }
    xs.push_back(std::log(static_cast<double>(horizons[i])));
    ys.push_back(std::log(mean_regret[i]));
  }
  const std::set<double> distinct(xs.begin(), xs.end());
  if (distinct.size() < 3) throw ConfigError("slope fit needs at least 3 distinct T with positive regret");
  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  fit.slope = sxy / sxx;
  const double intercept = my - fit.slope * mx;
  double rss = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double e = ys[i] - intercept - fit.slope * xs[i];
    rss += e * e;
  }
  fit.standard_error = xs.size() > 2 ? std::sqrt(rss / (n - 2.0) / sxx) : 0.0;
  fit.points = xs.size();
  return fit;
}

void write_run_log(std::ostream& out, const std::vector<SweepRow>& sweep) {
  for (const auto& row : sweep) {
    if (!row.ok()) continue;
    for (const auto& b : row.result->bins) {
      json j;
      j["run"] = row.id;
      j["bin"] = b.bin;
      j["T_b"] = b.contexts;
      j["presample_pulls"] = b.presample_pulls;
      j["N"] = b.pulls;
      j["mu_hat"] = b.means;
      j["p"] = b.proportion.weights();
      j["mixture_weight"] = b.mixture_weight;
      j["lambda_bar"] = b.lambda_bar;
      j["empty"] = b.empty;
      j["capped"] = b.capped;
      out << j.dump() << '\n';
    }
  }
}

namespace {

std::pair<double, double> mean_stderr(const std::vector<double>& v) {
  if (v.empty()) return {std::nan(""), std::nan("")};
  double m = 0.0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  if (v.size() < 2) return {m, 0.0};
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  const double var = ss / static_cast<double>(v.size() - 1);
  return {m, std::sqrt(var / static_cast<double>(v.size()))};
}

}  // namespace

std::vector<BetaSummary> summarize(const SweepSpec& spec, const std::vector<SweepRow>& sweep) {
  std::vector<BetaSummary> out;
  const double d = static_cast<double>(spec.base.dimension);
  for (double beta : spec.betas) {
    BetaSummary bs;
    bs.beta = beta;
    bs.predicted_fast_slope = -2.0 * beta / (2.0 * beta + d);
    bs.predicted_slow_slope = -beta / (2.0 * beta + d);
    std::vector<std::size_t> ts;
    std::vector<double> means;
    for (std::size_t t : spec.horizons) {
      std::vector<double> reg, norm, slow;
      for (const auto& row : sweep) {
        if (!row.ok() || row.config.beta != beta || row.config.horizon != t) continue;
        reg.push_back(row.report->regret);
        norm.push_back(row.report->normalized_regret);
        slow.push_back(row.report->slow_normalized_regret);
      }
      HorizonSummary hs;
      hs.horizon = t;
      hs.runs = reg.size();
      std::tie(hs.mean_regret, hs.stderr_regret) = mean_stderr(reg);
      std::tie(hs.mean_normalized, hs.stderr_normalized) = mean_stderr(norm);
      std::tie(hs.mean_slow_normalized, hs.stderr_slow_normalized) = mean_stderr(slow);
      bs.horizons.push_back(hs);
      if (hs.runs > 0) {
        ts.push_back(t);
        means.push_back(hs.mean_regret);
      }
    }
    try {
      bs.slope = fit_rate_slope(ts, means);
    } catch (const ConfigError& e) {
      bs.slope_error = e.what();
    }
    out.push_back(std::move(bs));
  }
  return out;
}

void write_summary(std::ostream& out, const std::vector<BetaSummary>& summary) {
  for (const auto& bs : summary) {
    out << "beta=" << shortest(bs.beta) << '\n';
    out << "  T,runs,mean_regret,stderr,mean_normalized_fast,stderr,mean_normalized_slow,stderr\n";
    for (const auto& h : bs.horizons) {
      out << "  " << h.horizon << ',' << h.runs << ',' << shortest(h.mean_regret) << ','
          << shortest(h.stderr_regret) << ',' << shortest(h.mean_normalized) << ','
          << shortest(h.stderr_normalized) << ',' << shortest(h.mean_slow_normalized) << ','
          << shortest(h.stderr_slow_normalized) << '\n';
    }
    if (bs.slope) {
      out << "  slope=" << shortest(bs.slope->slope) << " stderr=" << shortest(bs.slope->standard_error)
          << " points=" << bs.slope->points;
      for (auto t : bs.slope->dropped) out << " dropped_T=" << t;
      out << '\n';
    } else {
      out << "  slope unavailable: " << bs.slope_error << '\n';
    }
    out << "  predicted_fast_slope=" << shortest(bs.predicted_fast_slope)
        << " predicted_slow_slope=" << shortest(bs.predicted_slow_slope) << '\n';
  }
}

}  // namespace rcb
