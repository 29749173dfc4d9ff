#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <string_view>

#include "rcb/environment.hpp"
#include "rcb/regularizer.hpp"
#include "rcb/simplex.hpp"

namespace rcb {

enum class Regime { Slow, Fast, Intermediate };

Regime parse_regime(std::string_view name);
std::string to_string(Regime regime);

// B^d cubic cells of side 1/B over [0,1]^d, row-major with the first
// coordinate varying fastest. Points on the upper boundary of an axis belong
// to the last cell of that axis.
class BinGrid {
 public:
  BinGrid(std::size_t bins_per_axis, std::size_t dimension);

  std::size_t bins_per_axis() const { return bins_per_axis_; }
  std::size_t dimension() const { return dimension_; }
  std::size_t size() const { return size_; }
  double volume() const;
  double diameter() const;

  // Throws DomainError for coordinates outside [0,1] or the wrong dimension.
  std::size_t index(Context x) const;
  std::vector<std::size_t> cell(std::size_t bin) const;
  Vector lower_corner(std::size_t bin) const;
  Vector center(std::size_t bin) const;

  // Visits the G^d midpoint-rule nodes of one bin.
  void for_each_node(std::size_t bin, std::size_t nodes_per_axis,
                     const std::function<void(Context)>& visit) const;

 private:
  std::size_t bins_per_axis_;
  std::size_t dimension_;
  std::size_t size_;
};

// max(1, round(theta * (T / log^k T)^{1/(2 beta + d)})) with k = 1 for the
// slow regime and k = 2 otherwise; log T is floored at 2.
std::size_t select_bin_count(std::size_t horizon, double beta, std::size_t dimension,
                             Regime regime, double theta = 1.0);

inline constexpr std::size_t kDefaultAgentQuadNodes = 32;

// Midpoint-rule mean of lambda over a bin; exact for constant lambda.
double bin_average_lambda(const BinGrid& grid, std::size_t bin, const LambdaFunction& lambda,
                          std::size_t nodes_per_axis = kDefaultAgentQuadNodes);

// Midpoint-rule mean of lambda(x) * k(x) over a bin, where k is the linear
// shift of the reduced regularizer. Zero vector when rho is context free.
Vector bin_average_shift(const BinGrid& grid, std::size_t bin, const LambdaFunction& lambda,
                         const ReducedRegularizer& reduced, std::size_t arms,
                         std::size_t nodes_per_axis = kDefaultAgentQuadNodes);

}  // namespace rcb
