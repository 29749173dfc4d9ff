#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace rcb {

using Vector = std::vector<double>;

inline constexpr double kSimplexTolerance = 1e-12;

// A point of the probability simplex: nonnegative entries summing to one.
class SimplexPoint {
 public:
  SimplexPoint() = default;

  // Throws DomainError unless `weights` is a valid simplex point within `tol`.
  explicit SimplexPoint(Vector weights, double tol = kSimplexTolerance);

  static SimplexPoint uniform(std::size_t k);
  static SimplexPoint vertex(std::size_t k, std::size_t i);

  std::size_t size() const { return weights_.size(); }
  double operator[](std::size_t i) const { return weights_[i]; }
  const Vector& weights() const { return weights_; }
  std::span<const double> span() const { return weights_; }
  double min() const;

  friend bool operator==(const SimplexPoint&, const SimplexPoint&) = default;

 private:
  Vector weights_;
};

bool is_simplex_point(std::span<const double> p, double tol = kSimplexTolerance);

double dot(std::span<const double> a, std::span<const double> b);
double squared_distance(std::span<const double> a, std::span<const double> b);
double sup_distance(std::span<const double> a, std::span<const double> b);

// log(sum_i w_i exp(y_i)) with a max shift; w defaults to all ones.
double log_sum_exp(std::span<const double> y);
double log_sum_exp(std::span<const double> y, std::span<const double> w);

// Normalized w_i exp(y_i), computed with the same shift.
SimplexPoint softmax(std::span<const double> y);
SimplexPoint softmax(std::span<const double> y, std::span<const double> w);

// Euclidean projection onto the simplex, O(K log K) sort-and-threshold.
SimplexPoint project_to_simplex(std::span<const double> v);

// (1 - alpha) * q + alpha * base
SimplexPoint mix(const SimplexPoint& base, double alpha, const SimplexPoint& q);

}  // namespace rcb
