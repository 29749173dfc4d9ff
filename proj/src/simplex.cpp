#include "rcb/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <string>

#include "rcb/errors.hpp"

namespace rcb {

SimplexPoint::SimplexPoint(Vector weights, double tol) : weights_(std::move(weights)) {
  if (!is_simplex_point(weights_, tol)) {
    throw DomainError("not a simplex point (entries must be >= 0 and sum to 1)");
  }
  // Exact zeros only; tiny negative round-off is clipped.
  for (double& w : weights_) w = std::max(w, 0.0);
}

SimplexPoint SimplexPoint::uniform(std::size_t k) {
  if (k == 0) throw DomainError("simplex dimension must be positive");
  return SimplexPoint(Vector(k, 1.0 / static_cast<double>(k)), 1e-9);
}

SimplexPoint SimplexPoint::vertex(std::size_t k, std::size_t i) {
  if (i >= k) throw DomainError("vertex index out of range");
  Vector v(k, 0.0);
  v[i] = 1.0;
  return SimplexPoint(std::move(v));
}

double SimplexPoint::min() const {
  return *std::min_element(weights_.begin(), weights_.end());
}

bool is_simplex_point(std::span<const double> p, double tol) {
  if (p.empty()) return false;
  double sum = 0.0;
  for (double v : p) {
    if (!std::isfinite(v) || v < -tol) return false;
    sum += v;
  }
  // Scale the tolerance with K so sums of K rounded entries are accepted.
  return std::abs(sum - 1.0) <= tol * std::max<double>(1.0, static_cast<double>(p.size()));
}

double dot(std::span<const double> a, std::span<const double> b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s;
}

double sup_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s = std::max(s, std::abs(a[i] - b[i]));
  return s;
}

namespace {

double max_of(std::span<const double> y) {
  return *std::max_element(y.begin(), y.end());
}

}  // namespace

double log_sum_exp(std::span<const double> y) {
  const double m = max_of(y);
  double s = 0.0;
  for (double v : y) s += std::exp(v - m);
  return m + std::log(s);
}

double log_sum_exp(std::span<const double> y, std::span<const double> w) {
  const double m = max_of(y);
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) s += w[i] * std::exp(y[i] - m);
  return m + std::log(s);
}

SimplexPoint softmax(std::span<const double> y) {
  const double m = max_of(y);
  Vector out(y.size());
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    out[i] = std::exp(y[i] - m);
    s += out[i];
  }
  for (double& v : out) v /= s;
  return SimplexPoint(std::move(out), 1e-10);
}

SimplexPoint softmax(std::span<const double> y, std::span<const double> w) {
  const double m = max_of(y);
  Vector out(y.size());
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    out[i] = w[i] * std::exp(y[i] - m);
    s += out[i];
  }
  for (double& v : out) v /= s;
  return SimplexPoint(std::move(out), 1e-10);
}

SimplexPoint project_to_simplex(std::span<const double> v) {
  const std::size_t k = v.size();
  Vector sorted(v.begin(), v.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double cumulative = 0.0;
  double theta = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    cumulative += sorted[j];
    const double candidate = (cumulative - 1.0) / static_cast<double>(j + 1);
    if (sorted[j] - candidate > 0.0) theta = candidate;
  }
  Vector out(k);
  for (std::size_t i = 0; i < k; ++i) out[i] = std::max(v[i] - theta, 0.0);
  return SimplexPoint(std::move(out), 1e-10);
}

SimplexPoint mix(const SimplexPoint& base, double alpha, const SimplexPoint& q) {
  Vector out(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) out[i] = alpha * base[i] + (1.0 - alpha) * q[i];
  return SimplexPoint(std::move(out), 1e-10);
}

}  // namespace rcb
