#include "rcb/partition.hpp"

#include <algorithm>
#include <cmath>

#include "rcb/errors.hpp"

namespace rcb {

Regime parse_regime(std::string_view name) {
  if (name == "slow") return Regime::Slow;
  if (name == "fast") return Regime::Fast;
  if (name == "intermediate") return Regime::Intermediate;
  throw ConfigError("regime must be one of slow, fast, intermediate (got '" + std::string(name) + "')");
}

std::string to_string(Regime regime) {
  switch (regime) {
    case Regime::Slow: return "slow";
    case Regime::Fast: return "fast";
    case Regime::Intermediate: return "intermediate";
  }
  return {};
}

BinGrid::BinGrid(std::size_t bins_per_axis, std::size_t dimension)
    : bins_per_axis_(bins_per_axis), dimension_(dimension), size_(1) {
  if (bins_per_axis_ == 0) throw ConfigError("bins per axis must be >= 1");
  if (dimension_ == 0) throw ConfigError("dimension must be >= 1");
  for (std::size_t i = 0; i < dimension_; ++i) {
    if (size_ > (std::size_t{1} << 40) / bins_per_axis_) throw ConfigError("bin grid too large");
    size_ *= bins_per_axis_;
  }
}

double BinGrid::volume() const { return 1.0 / static_cast<double>(size_); }

double BinGrid::diameter() const {
  return std::sqrt(static_cast<double>(dimension_)) / static_cast<double>(bins_per_axis_);
}

std::size_t BinGrid::index(Context x) const {
  if (x.size() != dimension_) throw DomainError("context has the wrong dimension");
  std::size_t idx = 0;
  std::size_t stride = 1;
  for (std::size_t i = 0; i < dimension_; ++i) {
    if (!(x[i] >= 0.0 && x[i] <= 1.0)) throw DomainError("context coordinate outside [0,1]");
    const auto c = std::min(static_cast<std::size_t>(x[i] * static_cast<double>(bins_per_axis_)),
                            bins_per_axis_ - 1);
    idx += c * stride;
    stride *= bins_per_axis_;
  }
  return idx;
}

std::vector<std::size_t> BinGrid::cell(std::size_t bin) const {
  std::vector<std::size_t> c(dimension_);
  for (std::size_t i = 0; i < dimension_; ++i) {
    c[i] = bin % bins_per_axis_;
    bin /= bins_per_axis_;
  }
  return c;
}

Vector BinGrid::lower_corner(std::size_t bin) const {
  const auto c = cell(bin);
  Vector x(dimension_);
  for (std::size_t i = 0; i < dimension_; ++i) {
    x[i] = static_cast<double>(c[i]) / static_cast<double>(bins_per_axis_);
  }
  return x;
}

Vector BinGrid::center(std::size_t bin) const {
  auto x = lower_corner(bin);
  for (double& v : x) v += 0.5 / static_cast<double>(bins_per_axis_);
  return x;
}

void BinGrid::for_each_node(std::size_t bin, std::size_t nodes_per_axis,
                            const std::function<void(Context)>& visit) const {
  const auto corner = lower_corner(bin);
  const double h = 1.0 / (static_cast<double>(bins_per_axis_) * static_cast<double>(nodes_per_axis));
  std::vector<std::size_t> counter(dimension_, 0);
  Vector x(dimension_);
  while (true) {
    for (std::size_t i = 0; i < dimension_; ++i) {
      x[i] = corner[i] + (static_cast<double>(counter[i]) + 0.5) * h;
    }
    visit(x);
    std::size_t axis = 0;
    while (axis < dimension_ && ++counter[axis] == nodes_per_axis) counter[axis++] = 0;
    if (axis == dimension_) return;
  }
}

std::size_t select_bin_count(std::size_t horizon, double beta, std::size_t dimension,
                             Regime regime, double theta) {
  if (horizon < 3) return 1;
  const double t = static_cast<double>(horizon);
  // T / log^k T dips below e^2; flooring the log keeps B monotone in T.
  const double log_t = std::max(std::log(t), 2.0);
  const double denom = regime == Regime::Slow ? log_t : log_t * log_t;
  const double exponent = 1.0 / (2.0 * beta + static_cast<double>(dimension));
  const double b = std::round(theta * std::pow(t / denom, exponent));
  return std::max<std::size_t>(1, static_cast<std::size_t>(b));
}

double bin_average_lambda(const BinGrid& grid, std::size_t bin, const LambdaFunction& lambda,
                          std::size_t nodes_per_axis) {
  if (lambda.is_constant()) return lambda(Context{});
  double sum = 0.0;
  std::size_t n = 0;
  grid.for_each_node(bin, nodes_per_axis, [&](Context x) {
    sum += lambda(x);
    ++n;
  });
  return sum / static_cast<double>(n);
}

Vector bin_average_shift(const BinGrid& grid, std::size_t bin, const LambdaFunction& lambda,
                         const ReducedRegularizer& reduced, std::size_t arms,
                         std::size_t nodes_per_axis) {
  Vector sum(arms, 0.0);
  if (!reduced.reference) return sum;
  std::size_t n = 0;
  grid.for_each_node(bin, nodes_per_axis, [&](Context x) {
    const double l = lambda(x);
    const auto k = reduced.shift(x, arms);
    for (std::size_t i = 0; i < arms; ++i) sum[i] += l * k[i];
    ++n;
  });
  for (double& v : sum) v /= static_cast<double>(n);
  return sum;
}

}  // namespace rcb
