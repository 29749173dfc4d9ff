#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "rcb/simplex.hpp"

namespace rcb {

using Context = std::span<const double>;

inline constexpr double kMinReferenceMass = 1e-6;

// Built-in reference policies q(x) for the KL and l2 regularizers.
//   "uniform"           q_i = 1/K
//   "tilted:<s>"        q_i(x) ∝ exp(s * cos(2π (mean(x) + i/K)))
//   "fixed:w1,...,wK"   constant policy
class ReferencePolicy {
 public:
  static ReferencePolicy parse(std::string_view spec);
  static ReferencePolicy uniform();
  static ReferencePolicy tilted(double strength);
  static ReferencePolicy fixed(Vector weights);

  SimplexPoint at(Context x, std::size_t k) const;
  // Lower bound of min_i q_i(x) over all contexts.
  double min_mass(std::size_t k) const;
  const std::string& spec() const { return spec_; }

 private:
  enum class Kind { Uniform, Tilted, Fixed };
  Kind kind_ = Kind::Uniform;
  double strength_ = 0.0;
  Vector weights_;
  std::string spec_ = "uniform";
};

enum class RegularizerKind { Entropy, KL, L2, SquaredNorm };

struct ReducedRegularizer;

// Convex regularizer rho on the simplex. Values are immutable; every member is
// a pure function. The formulas are evaluated on the ambient positive orthant
// so finite-difference checks can step off the simplex.
class Regularizer {
 public:
  static Regularizer entropy();
  static Regularizer squared_norm();
  static Regularizer kl(ReferencePolicy reference);
  static Regularizer l2(ReferencePolicy reference);
  // "entropy", "kl:<reference>", "l2:<reference>"
  static Regularizer parse(std::string_view spec);

  // Throws ConfigError if the reference policy is unusable with k arms.
  void validate_for_arms(std::size_t k) const;

  RegularizerKind kind() const { return kind_; }
  std::string name() const;
  bool context_dependent() const { return reference_.has_value(); }
  const std::optional<ReferencePolicy>& reference() const { return reference_; }

  // Strong convexity modulus (Euclidean norm).
  double strong_convexity() const;
  // Gradient Lipschitz constant on the simplex; nullopt when unbounded near
  // the boundary.
  std::optional<double> smoothness() const;

  double value(std::span<const double> p, Context x = {}) const;
  // Throws DomainError on zero coordinates for the entropy family.
  Vector gradient(std::span<const double> p, Context x = {}) const;
  // sup_{p in simplex} <p, y> - rho(p, x)
  double conjugate(std::span<const double> y, Context x = {}) const;
  // argmax of the conjugate problem; softmax for the entropy.
  SimplexPoint conjugate_gradient(std::span<const double> y, Context x = {}) const;

  // rho(p, x) = H(p) + <p, k(x)> + c(x) with H context free.
  ReducedRegularizer reduce() const;

 private:
  Regularizer(RegularizerKind kind, std::optional<ReferencePolicy> reference)
      : kind_(kind), reference_(std::move(reference)) {}

  SimplexPoint reference_at(Context x, std::size_t k) const;

  RegularizerKind kind_;
  std::optional<ReferencePolicy> reference_;
};

struct ReducedRegularizer {
  Regularizer core;
  std::optional<ReferencePolicy> reference;
  RegularizerKind source = RegularizerKind::Entropy;

  Vector shift(Context x, std::size_t k) const;
  double offset(Context x, std::size_t k) const;
};

// sum p_i log(p_i / q_i) with 0 log 0 = 0; DomainError if q_i = 0 < p_i.
double kl_divergence(std::span<const double> p, std::span<const double> q);

}  // namespace rcb
