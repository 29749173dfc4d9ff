#include "rcb/regularizer.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "parse_util.hpp"
#include "rcb/errors.hpp"

namespace rcb {

// ---------------------------------------------------------------------------
// ReferencePolicy

ReferencePolicy ReferencePolicy::uniform() { return ReferencePolicy{}; }

ReferencePolicy ReferencePolicy::tilted(double strength) {
  if (!std::isfinite(strength) || strength < 0.0) {
    throw ConfigError("tilted reference strength must be finite and >= 0");
  }
  ReferencePolicy r;
  r.kind_ = Kind::Tilted;
  r.strength_ = strength;
  r.spec_ = "tilted:" + std::to_string(strength);
  return r;
}

ReferencePolicy ReferencePolicy::fixed(Vector weights) {
  if (!is_simplex_point(weights, 1e-9)) {
    throw ConfigError("fixed reference weights must form a simplex point");
  }
  ReferencePolicy r;
  r.kind_ = Kind::Fixed;
  r.spec_ = "fixed";
  r.weights_ = std::move(weights);
  return r;
}

ReferencePolicy ReferencePolicy::parse(std::string_view spec) {
  const auto [head, rest] = detail::split_head(spec);
  if (head == "uniform" && rest.empty()) return uniform();
  if (head == "tilted") return tilted(detail::parse_double(rest, "tilted strength"));
  if (head == "fixed") {
    Vector w;
    for (auto part : detail::split(rest, ',')) w.push_back(detail::parse_double(part, "fixed weight"));
    auto r = fixed(std::move(w));
    r.spec_ = std::string(spec);
    return r;
  }
  throw ConfigError("unknown reference policy '" + std::string(spec) +
                    "' (expected uniform, tilted:<s> or fixed:w1,...,wK)");
}

SimplexPoint ReferencePolicy::at(Context x, std::size_t k) const {
  switch (kind_) {
    case Kind::Uniform:
      return SimplexPoint::uniform(k);
    case Kind::Fixed:
      if (weights_.size() != k) throw ConfigError("fixed reference has wrong number of arms");
      return SimplexPoint(weights_, 1e-9);
    case Kind::Tilted: {
      double center = 0.0;
      for (double xi : x) center += xi;
      if (!x.empty()) center /= static_cast<double>(x.size());
      Vector logits(k);
      for (std::size_t i = 0; i < k; ++i) {
        const double phase = center + static_cast<double>(i) / static_cast<double>(k);
        logits[i] = strength_ * std::cos(2.0 * std::numbers::pi * phase);
      }
      return softmax(logits);
    }
  }
  return SimplexPoint::uniform(k);
}

double ReferencePolicy::min_mass(std::size_t k) const {
  switch (kind_) {
    case Kind::Uniform:
      return k == 0 ? 1.0 : 1.0 / static_cast<double>(k);
    case Kind::Fixed:
      return *std::min_element(weights_.begin(), weights_.end());
    case Kind::Tilted:
      return std::exp(-2.0 * strength_) / static_cast<double>(std::max<std::size_t>(k, 1));
  }
  return 0.0;
}

// ---------------------------------------------------------------------------
// Regularizer

Regularizer Regularizer::entropy() { return {RegularizerKind::Entropy, std::nullopt}; }
Regularizer Regularizer::squared_norm() { return {RegularizerKind::SquaredNorm, std::nullopt}; }
Regularizer Regularizer::kl(ReferencePolicy reference) {
  // Tilted references are checked once K is known (see validate_for_arms).
  if (reference.spec().starts_with("fixed") && reference.min_mass(0) < kMinReferenceMass) {
    throw ConfigError("kl reference must put mass >= 1e-6 on every arm");
  }
  return {RegularizerKind::KL, std::move(reference)};
}
Regularizer Regularizer::l2(ReferencePolicy reference) { return {RegularizerKind::L2, std::move(reference)}; }

Regularizer Regularizer::parse(std::string_view spec) {
  const auto [head, rest] = detail::split_head(spec);
  if (head == "entropy" && rest.empty()) return entropy();
  if (head == "kl") return kl(ReferencePolicy::parse(rest.empty() ? "uniform" : rest));
  if (head == "l2") return l2(ReferencePolicy::parse(rest.empty() ? "uniform" : rest));
  throw ConfigError("unknown regularizer '" + std::string(spec) +
                    "' (expected entropy, kl:<reference> or l2:<reference>)");
}

void Regularizer::validate_for_arms(std::size_t k) const {
  if (!reference_) return;
  if (kind_ == RegularizerKind::KL && reference_->min_mass(k) < kMinReferenceMass) {
    throw ConfigError("kl reference must put mass >= 1e-6 on every arm");
  }
  (void)reference_->at({}, k);
}

std::string Regularizer::name() const {
  switch (kind_) {
    case RegularizerKind::Entropy: return "entropy";
    case RegularizerKind::SquaredNorm: return "squared_norm";
    case RegularizerKind::KL: return "kl:" + reference_->spec();
    case RegularizerKind::L2: return "l2:" + reference_->spec();
  }
  return {};
}

double Regularizer::strong_convexity() const {
  switch (kind_) {
    case RegularizerKind::Entropy:
    case RegularizerKind::KL:
      return 1.0;
    case RegularizerKind::L2:
    case RegularizerKind::SquaredNorm:
      return 2.0;
  }
  return 1.0;
}

std::optional<double> Regularizer::smoothness() const {
  if (kind_ == RegularizerKind::L2 || kind_ == RegularizerKind::SquaredNorm) return 2.0;
  return std::nullopt;
}

SimplexPoint Regularizer::reference_at(Context x, std::size_t k) const {
  return reference_->at(x, k);
}

double kl_divergence(std::span<const double> p, std::span<const double> q) {
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0) continue;
    if (q[i] <= 0.0) throw DomainError("KL divergence: reference has zero mass where p is positive");
    s += p[i] * std::log(p[i] / q[i]);
  }
  return s;
}

namespace {

double neg_entropy(std::span<const double> p) {
  double s = 0.0;
  for (double v : p) {
    if (v < 0.0) throw DomainError("entropy: negative coordinate");
    if (v > 0.0) s += v * std::log(v);
  }
  return s;
}

void require_interior(std::span<const double> p, const char* what) {
  for (double v : p) {
    if (!(v > 0.0)) {
      throw DomainError(std::string(what) + ": gradient undefined on the simplex boundary");
    }
  }
}

}  // namespace

double Regularizer::value(std::span<const double> p, Context x) const {
  switch (kind_) {
    case RegularizerKind::Entropy:
      return neg_entropy(p);
    case RegularizerKind::SquaredNorm:
      return dot(p, p);
    case RegularizerKind::KL: {
      const auto q = reference_at(x, p.size());
      return kl_divergence(p, q.span());
    }
    case RegularizerKind::L2: {
      const auto q = reference_at(x, p.size());
      return squared_distance(p, q.span());
    }
  }
  return 0.0;
}

Vector Regularizer::gradient(std::span<const double> p, Context x) const {
  const std::size_t k = p.size();
  Vector g(k);
  switch (kind_) {
    case RegularizerKind::Entropy:
      require_interior(p, "entropy");
      for (std::size_t i = 0; i < k; ++i) g[i] = 1.0 + std::log(p[i]);
      break;
    case RegularizerKind::KL: {
      require_interior(p, "kl");
      const auto q = reference_at(x, k);
      for (std::size_t i = 0; i < k; ++i) g[i] = 1.0 + std::log(p[i]) - std::log(q[i]);
      break;
    }
    case RegularizerKind::SquaredNorm:
      for (std::size_t i = 0; i < k; ++i) g[i] = 2.0 * p[i];
      break;
    case RegularizerKind::L2: {
      const auto q = reference_at(x, k);
      for (std::size_t i = 0; i < k; ++i) g[i] = 2.0 * (p[i] - q[i]);
      break;
    }
  }
  return g;
}

double Regularizer::conjugate(std::span<const double> y, Context x) const {
  switch (kind_) {
    case RegularizerKind::Entropy:
      return log_sum_exp(y);
    case RegularizerKind::KL: {
      const auto q = reference_at(x, y.size());
      return log_sum_exp(y, q.span());
    }
    case RegularizerKind::SquaredNorm:
    case RegularizerKind::L2: {
      const auto p = conjugate_gradient(y, x);
      return dot(p.span(), y) - value(p.span(), x);
    }
  }
  return 0.0;
}

SimplexPoint Regularizer::conjugate_gradient(std::span<const double> y, Context x) const {
  const std::size_t k = y.size();
  switch (kind_) {
    case RegularizerKind::Entropy:
      return softmax(y);
    case RegularizerKind::KL: {
      const auto q = reference_at(x, k);
      return softmax(y, q.span());
    }
    case RegularizerKind::SquaredNorm: {
      Vector v(k);
      for (std::size_t i = 0; i < k; ++i) v[i] = 0.5 * y[i];
      return project_to_simplex(v);
    }
    case RegularizerKind::L2: {
      const auto q = reference_at(x, k);
      Vector v(k);
      for (std::size_t i = 0; i < k; ++i) v[i] = q[i] + 0.5 * y[i];
      return project_to_simplex(v);
    }
  }
  return SimplexPoint::uniform(k);
}

ReducedRegularizer Regularizer::reduce() const {
  switch (kind_) {
    case RegularizerKind::KL:
      return {entropy(), reference_, kind_};
    case RegularizerKind::L2:
      return {squared_norm(), reference_, kind_};
    case RegularizerKind::Entropy:
    case RegularizerKind::SquaredNorm:
      break;
  }
  return {*this, std::nullopt, kind_};
}

// ---------------------------------------------------------------------------
// ReducedRegularizer

Vector ReducedRegularizer::shift(Context x, std::size_t k) const {
  Vector s(k, 0.0);
  if (!reference) return s;
  const auto q = reference->at(x, k);
  if (source == RegularizerKind::KL) {
    for (std::size_t i = 0; i < k; ++i) s[i] = -std::log(q[i]);
  } else if (source == RegularizerKind::L2) {
    for (std::size_t i = 0; i < k; ++i) s[i] = -2.0 * q[i];
  }
  return s;
}

double ReducedRegularizer::offset(Context x, std::size_t k) const {
  if (!reference || source != RegularizerKind::L2) return 0.0;
  const auto q = reference->at(x, k);
  return dot(q.span(), q.span());
}

}  // namespace rcb
