#include "rcb/environment.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "parse_util.hpp"
#include "rcb/errors.hpp"

namespace rcb {

double HolderMeanFunction::operator()(Context x) const {
  double dist2 = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) dist2 += (x[i] - anchor[i]) * (x[i] - anchor[i]);
  const double raw = offset + slope * std::pow(std::sqrt(dist2), beta);
  return std::clamp(raw, lo, hi);
}

double HolderMeanFunction::holder_constant() const { return std::abs(slope); }

NoiseFamily parse_noise_family(std::string_view name) {
  if (name == "bernoulli") return NoiseFamily::Bernoulli;
  if (name == "exponential" || name == "truncated_exponential") return NoiseFamily::TruncatedExponential;
  if (name == "poisson" || name == "truncated_poisson") return NoiseFamily::TruncatedPoisson;
  throw ConfigError("unknown noise family '" + std::string(name) +
                    "' (expected bernoulli, exponential or poisson)");
}

std::string to_string(NoiseFamily family) {
  switch (family) {
    case NoiseFamily::Bernoulli: return "bernoulli";
    case NoiseFamily::TruncatedExponential: return "exponential";
    case NoiseFamily::TruncatedPoisson: return "poisson";
  }
  return {};
}

// ---------------------------------------------------------------------------
// Truncated families

double truncated_exponential_mean(double rate) {
  // E[min(1, E)] = (1 - e^{-rate}) / rate
  if (rate < 1e-12) return 1.0 - 0.5 * rate;
  return -std::expm1(-rate) / rate;
}

namespace {

// P(N = n) for n = 0..cap-1 and the tail P(N >= cap).
std::vector<double> truncated_poisson_masses(double rate, int cap) {
  std::vector<double> mass(static_cast<std::size_t>(cap) + 1);
  double term = std::exp(-rate);
  double head = 0.0;
  for (int n = 0; n < cap; ++n) {
    mass[static_cast<std::size_t>(n)] = term;
    head += term;
    term *= rate / static_cast<double>(n + 1);
  }
  mass[static_cast<std::size_t>(cap)] = std::max(0.0, 1.0 - head);
  return mass;
}

template <class F>
double bisect(F&& f, double lo, double hi, double target, bool increasing) {
  for (int it = 0; it < 200 && hi - lo > 1e-13 * std::max(1.0, hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    const bool below = f(mid) < target;
    if (below == increasing) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

double truncated_poisson_mean(double rate, int cap) {
  const auto mass = truncated_poisson_masses(rate, cap);
  double m = 0.0;
  for (int n = 0; n <= cap; ++n) m += static_cast<double>(n) * mass[static_cast<std::size_t>(n)];
  return m / static_cast<double>(cap);
}

double exponential_rate_for_mean(double mean) {
  if (!(mean > 0.0 && mean < 1.0)) {
    throw DomainError("truncated exponential: mean must lie in (0, 1)");
  }
  return bisect([](double r) { return truncated_exponential_mean(r); }, 0.0, 1e4, mean, false);
}

double poisson_rate_for_mean(double mean, int cap) {
  if (!(mean > 0.0 && mean < 1.0)) {
    throw DomainError("truncated poisson: mean must lie in (0, 1)");
  }
  return bisect([cap](double r) { return truncated_poisson_mean(r, cap); }, 0.0, 1e3, mean, true);
}

// ---------------------------------------------------------------------------
// ArmModel

ArmModel::ArmModel(HolderMeanFunction mean, NoiseFamily family)
    : mean_(std::move(mean)), family_(family) {
  if (!(mean_.beta > 0.0 && mean_.beta <= 1.0)) throw ConfigError("beta must be in (0,1]");
  if (!(mean_.lo >= 0.0 && mean_.lo <= mean_.hi && mean_.hi <= 1.0)) {
    throw ConfigError("mean clamp range must satisfy 0 <= lo <= hi <= 1");
  }
  if (family_ != NoiseFamily::Bernoulli && !(mean_.lo > 0.0 && mean_.hi < 1.0)) {
    throw ConfigError(to_string(family_) +
                      " arm: clamp range must lie strictly inside (0,1) so the mean is attainable");
  }
}

double ArmModel::sample_loss(Context x, RngStream& rng) const {
  const double mu = mean_(x);
  const double u = rng.uniform();
  switch (family_) {
    case NoiseFamily::Bernoulli:
      return u < mu ? 1.0 : 0.0;
    case NoiseFamily::TruncatedExponential: {
      const double rate = exponential_rate_for_mean(mu);
      return std::min(1.0, -std::log1p(-u) / rate);
    }
    case NoiseFamily::TruncatedPoisson: {
      const auto mass = truncated_poisson_masses(poisson_rate_for_mean(mu, kPoissonCap), kPoissonCap);
      double cdf = 0.0;
      for (int n = 0; n < kPoissonCap; ++n) {
        cdf += mass[static_cast<std::size_t>(n)];
        if (u < cdf) return static_cast<double>(n) / kPoissonCap;
      }
      return 1.0;
    }
  }
  return mu;
}

// ---------------------------------------------------------------------------
// Environment

std::vector<ArmSpec> default_arms(std::size_t k, std::size_t dimension) {
  static constexpr NoiseFamily kCycle[] = {NoiseFamily::TruncatedPoisson,
                                           NoiseFamily::TruncatedExponential,
                                           NoiseFamily::Bernoulli};
  std::vector<ArmSpec> arms(k);
  for (std::size_t i = 0; i < k; ++i) {
    const double position = (static_cast<double>(i) + 0.5) / static_cast<double>(k);
    arms[i].family = kCycle[i % 3];
    arms[i].offset = 0.15 + 0.1 * static_cast<double>(i % 3);
    arms[i].slope = 0.6;
    arms[i].anchor.assign(dimension, position);
  }
  return arms;
}

Environment::Environment(const EnvironmentSpec& spec)
    : dimension_(spec.dimension), beta_(spec.beta) {
  if (dimension_ == 0) throw ConfigError("dimension d must be >= 1");
  if (!(beta_ > 0.0 && beta_ <= 1.0)) throw ConfigError("beta must be in (0,1]");
  if (spec.arms.empty()) throw ConfigError("environment needs at least one arm");
  for (const auto& a : spec.arms) {
    HolderMeanFunction mean;
    mean.beta = beta_;
    mean.slope = a.slope;
    mean.offset = a.offset;
    mean.anchor = a.anchor.empty() ? Vector(dimension_, 0.5) : a.anchor;
    mean.lo = spec.clamp_lo;
    mean.hi = spec.clamp_hi;
    if (mean.anchor.size() != dimension_) throw ConfigError("arm anchor must have d coordinates");
    if (!std::isfinite(a.slope) || !std::isfinite(a.offset)) throw ConfigError("arm parameters must be finite");
    if (spec.holder_constant && std::abs(a.slope) > *spec.holder_constant) {
      throw ConfigError("arm slope exceeds the declared Hölder constant L_beta");
    }
    arms_.emplace_back(std::move(mean), a.family);
  }
}

double Environment::holder_constant() const {
  double l = 0.0;
  for (const auto& a : arms_) l = std::max(l, a.mean().holder_constant());
  return l;
}

Vector Environment::sample_context(RngStream& rng) const {
  Vector x(dimension_);
  for (double& v : x) v = rng.uniform();
  return x;
}

Vector Environment::mean_losses(Context x) const {
  Vector m(arms_.size());
  for (std::size_t k = 0; k < arms_.size(); ++k) m[k] = arms_[k].mean_loss(x);
  return m;
}

double Environment::sample_loss(std::size_t arm, Context x, RngStream& rng) const {
  return arms_.at(arm).sample_loss(x, rng);
}

// ---------------------------------------------------------------------------
// LambdaFunction

LambdaFunction LambdaFunction::constant(double value) {
  if (!std::isfinite(value) || value < 0.0) throw ConfigError("lambda constant must be finite and >= 0");
  LambdaFunction f;
  f.kind_ = Kind::Constant;
  f.a_ = value;
  f.spec_ = "const:" + std::to_string(value);
  return f;
}

LambdaFunction LambdaFunction::cosfield(double amplitude, double offset) {
  if (!std::isfinite(amplitude) || !std::isfinite(offset) || offset - std::abs(amplitude) < 0.0) {
    throw ConfigError("cosfield lambda must satisfy offset >= |amplitude| (lambda >= 0)");
  }
  LambdaFunction f;
  f.kind_ = Kind::CosField;
  f.a_ = amplitude;
  f.b_ = offset;
  f.spec_ = "cosfield:" + std::to_string(amplitude) + "," + std::to_string(offset);
  return f;
}

LambdaFunction LambdaFunction::ramp(double lo, double hi) {
  if (!std::isfinite(lo) || !std::isfinite(hi) || lo < 0.0 || hi < 0.0) {
    throw ConfigError("ramp lambda endpoints must be finite and >= 0");
  }
  LambdaFunction f;
  f.kind_ = Kind::Ramp;
  f.a_ = lo;
  f.b_ = hi;
  f.spec_ = "ramp:" + std::to_string(lo) + "," + std::to_string(hi);
  return f;
}

LambdaFunction LambdaFunction::parse(std::string_view spec) {
  const auto [head, rest] = detail::split_head(spec);
  LambdaFunction f;
  if (head == "const") {
    f = constant(detail::parse_double(rest, "lambda"));
  } else if (head == "cosfield" || head == "ramp") {
    const auto parts = detail::split(rest, ',');
    if (parts.size() != 2) throw ConfigError("lambda '" + std::string(spec) + "' needs two parameters");
    const double p0 = detail::parse_double(parts[0], "lambda");
    const double p1 = detail::parse_double(parts[1], "lambda");
    f = head == "ramp" ? ramp(p0, p1) : cosfield(p0, p1);
  } else {
    throw ConfigError("unknown lambda spec '" + std::string(spec) +
                      "' (expected const:<v>, cosfield:<amp>,<offset> or ramp:<lo>,<hi>)");
  }
  f.spec_ = std::string(spec);
  return f;
}

double LambdaFunction::operator()(Context x) const {
  if (kind_ == Kind::Constant) return a_;
  double s = 0.0;
  for (double xi : x) {
    s += kind_ == Kind::CosField ? std::cos(2.0 * std::numbers::pi * xi) : xi;
  }
  const double m = x.empty() ? 0.0 : s / static_cast<double>(x.size());
  return kind_ == Kind::CosField ? b_ + a_ * m : a_ + (b_ - a_) * m;
}

double LambdaFunction::gradient_bound(std::size_t dimension) const {
  const double root_d = std::sqrt(static_cast<double>(std::max<std::size_t>(dimension, 1)));
  switch (kind_) {
    case Kind::Constant: return 0.0;
    case Kind::CosField: return 2.0 * std::numbers::pi * std::abs(a_) / root_d;
    case Kind::Ramp: return std::abs(b_ - a_) / root_d;
  }
  return 0.0;
}

double LambdaFunction::lower_bound() const {
  switch (kind_) {
    case Kind::Constant: return a_;
    case Kind::CosField: return b_ - std::abs(a_);
    case Kind::Ramp: return std::min(a_, b_);
  }
  return 0.0;
}

double LambdaFunction::upper_bound() const {
  switch (kind_) {
    case Kind::Constant: return a_;
    case Kind::CosField: return b_ + std::abs(a_);
    case Kind::Ramp: return std::max(a_, b_);
  }
  return 0.0;
}

}  // namespace rcb
