#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rcb/random.hpp"
#include "rcb/regularizer.hpp"
#include "rcb/simplex.hpp"

namespace rcb {

// mu(x) = clamp(offset + slope * |x - anchor|_2^beta, lo, hi).
// (beta, |slope|)-Hölder by construction.
struct HolderMeanFunction {
  double beta = 1.0;
  double slope = 0.0;
  double offset = 0.5;
  Vector anchor;
  double lo = 0.05;
  double hi = 0.95;

  double operator()(Context x) const;
  double holder_constant() const;
};

enum class NoiseFamily { Bernoulli, TruncatedExponential, TruncatedPoisson };

NoiseFamily parse_noise_family(std::string_view name);
std::string to_string(NoiseFamily family);

// Mean of min(1, Exp(rate)).
double truncated_exponential_mean(double rate);
// Mean of min(N, cap) / cap with N ~ Poisson(rate).
double truncated_poisson_mean(double rate, int cap = 3);
// Bisection inverses of the two maps above; DomainError outside (0, 1).
double exponential_rate_for_mean(double mean);
double poisson_rate_for_mean(double mean, int cap = 3);

inline constexpr int kPoissonCap = 3;

class ArmModel {
 public:
  ArmModel(HolderMeanFunction mean, NoiseFamily family);

  double mean_loss(Context x) const { return mean_(x); }
  // Draw in [0, 1] whose exact expectation is mean_loss(x).
  double sample_loss(Context x, RngStream& rng) const;

  const HolderMeanFunction& mean() const { return mean_; }
  NoiseFamily family() const { return family_; }

 private:
  HolderMeanFunction mean_;
  NoiseFamily family_;
};

struct ArmSpec {
  NoiseFamily family = NoiseFamily::Bernoulli;
  double offset = 0.5;
  double slope = 0.0;
  Vector anchor;  // empty → center of the cube
};

struct EnvironmentSpec {
  std::size_t dimension = 1;
  double beta = 1.0;
  std::optional<double> holder_constant;  // upper bound on |slope|, checked if present
  double clamp_lo = 0.05;
  double clamp_hi = 0.95;
  std::vector<ArmSpec> arms;
};

// Built-in arm set: anchors spread along the diagonal, families cycling
// poisson / exponential / bernoulli.
std::vector<ArmSpec> default_arms(std::size_t k, std::size_t dimension);

// Uniform contexts on [0,1]^d and K arm models. Immutable.
class Environment {
 public:
  explicit Environment(const EnvironmentSpec& spec);

  std::size_t dimension() const { return dimension_; }
  std::size_t arms() const { return arms_.size(); }
  double beta() const { return beta_; }
  double holder_constant() const;

  Vector sample_context(RngStream& rng) const;
  double mean_loss(std::size_t arm, Context x) const { return arms_.at(arm).mean_loss(x); }
  Vector mean_losses(Context x) const;
  double sample_loss(std::size_t arm, Context x, RngStream& rng) const;
  const ArmModel& arm(std::size_t k) const { return arms_.at(k); }

 private:
  std::size_t dimension_;
  double beta_;
  std::vector<ArmModel> arms_;
};

// lambda(x) >= 0 on [0,1]^d.
//   "const:<v>"                 constant
//   "cosfield:<amp>,<offset>"   offset + amp * mean_i cos(2π x_i)
//   "ramp:<lo>,<hi>"            lo + (hi - lo) * mean_i x_i
class LambdaFunction {
 public:
  static LambdaFunction constant(double value);
  static LambdaFunction cosfield(double amplitude, double offset);
  static LambdaFunction ramp(double lo, double hi);
  static LambdaFunction parse(std::string_view spec);

  double operator()(Context x) const;
  bool is_constant() const { return kind_ == Kind::Constant; }
  // Bound on the Euclidean norm of the gradient over [0,1]^d.
  double gradient_bound(std::size_t dimension) const;
  double lower_bound() const;
  double upper_bound() const;
  const std::string& spec() const { return spec_; }

 private:
  enum class Kind { Constant, CosField, Ramp };
  Kind kind_ = Kind::Constant;
  double a_ = 0.0;
  double b_ = 0.0;
  std::string spec_;
};

}  // namespace rcb
