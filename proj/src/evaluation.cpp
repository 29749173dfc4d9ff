#include "rcb/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rcb/errors.hpp"
#include "rcb/random.hpp"

namespace rcb {

namespace {

// Keeps every iterate strictly interior so entropy gradients stay finite.
constexpr double kMinLogit = -700.0;

}  // namespace

SimplexPoint simplex_minimize(const Objective& f, const Gradient& grad, std::size_t arms,
                              const MirrorDescentOptions& options) {
  if (arms == 0) throw DomainError("simplex_minimize: need at least one coordinate");
  Vector logits(arms, 0.0);
  SimplexPoint p = SimplexPoint::uniform(arms);
  SimplexPoint best = p;
  double best_value = f(p.span());
  if (!std::isfinite(best_value)) throw DomainError("simplex_minimize: non-finite objective");
  for (std::size_t t = 1; t <= options.max_iterations; ++t) {
    Vector g = grad(p.span());
    double mean = 0.0;
    for (double v : g) mean += v;
    mean /= static_cast<double>(arms);
    double scale = 1.0;
    for (double& v : g) {
      v -= mean;
      if (!std::isfinite(v)) throw DomainError("simplex_minimize: non-finite gradient");
      scale = std::max(scale, std::abs(v));
    }
    // Large gradients would overshoot: cap the logit move at step_t per iteration.
    const double step = options.step_scale / (std::sqrt(static_cast<double>(t)) * scale);
    for (std::size_t i = 0; i < arms; ++i) logits[i] -= step * g[i];
    const double m = *std::max_element(logits.begin(), logits.end());
    for (double& l : logits) l = std::max(l - m, kMinLogit);
    SimplexPoint next = softmax(logits);
    const double moved = sup_distance(next.span(), p.span());
    p = std::move(next);
    const double value = f(p.span());
    if (!std::isfinite(value)) throw DomainError("simplex_minimize: non-finite objective");
    if (value < best_value) {
      best_value = value;
      best = p;
    }
    if (moved < options.tolerance) break;
  }
  return best;
}

SimplexPoint oracle_pstar(std::span<const double> mu, double lambda, const Regularizer& reg,
                          Context x) {
  if (!(lambda > 0.0)) throw DomainError("oracle_pstar: lambda must be positive");
  Vector y(mu.size());
  for (std::size_t i = 0; i < mu.size(); ++i) y[i] = -mu[i] / lambda;
  return reg.conjugate_gradient(y, x);
}

double boundary_distance(const SimplexPoint& p) {
  const std::size_t k = p.size();
  if (k < 2) throw DomainError("boundary distance needs K >= 2");
  const double kd = static_cast<double>(k);
  return std::sqrt(kd / (kd - 1.0)) * p.min();
}

// ---------------------------------------------------------------------------
// Problem

SimplexPoint Problem::pstar(Context x) const {
  const Vector mu = environment.mean_losses(x);
  const double l = lambda(x);
  if (l > 0.0) return oracle_pstar(mu, l, regularizer, x);
  const auto it = std::min_element(mu.begin(), mu.end());
  return SimplexPoint::vertex(mu.size(), static_cast<std::size_t>(it - mu.begin()));
}

double Problem::pointwise_loss(Context x, std::span<const double> p) const {
  const Vector mu = environment.mean_losses(x);
  const double l = lambda(x);
  double v = dot(mu, p);
  if (l != 0.0) v += l * regularizer.value(p, x);
  return v;
}

double Problem::eta(Context x) const { return boundary_distance(pstar(x)); }

double fast_rate(double horizon, double beta, std::size_t dimension) {
  const double lt = std::log(horizon);
  const double d = static_cast<double>(dimension);
  return std::pow(horizon / (lt * lt), -2.0 * beta / (2.0 * beta + d));
}

double slow_rate(double horizon, double beta, std::size_t dimension) {
  const double d = static_cast<double>(dimension);
  return std::pow(horizon / std::log(horizon), -beta / (2.0 * beta + d));
}

// ---------------------------------------------------------------------------
// Evaluator

namespace {

std::size_t default_nodes(std::size_t dimension) {
  switch (dimension) {
    case 1: return 512;
    case 2: return 64;
    default: return 16;
  }
}

// lambda * H*(-v / lambda), continuous extension -min(v) at lambda = 0.
double scaled_conjugate(const Regularizer& core, std::span<const double> v, double lambda) {
  if (lambda > 0.0) {
    Vector y(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) y[i] = -v[i] / lambda;
    return lambda * core.conjugate(y);
  }
  return -*std::min_element(v.begin(), v.end());
}

SimplexPoint bin_minimizer(const Regularizer& core, std::span<const double> v, double lambda) {
  if (lambda > 0.0) {
    Vector y(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) y[i] = -v[i] / lambda;
    return core.conjugate_gradient(y);
  }
  const auto it = std::min_element(v.begin(), v.end());
  return SimplexPoint::vertex(v.size(), static_cast<std::size_t>(it - v.begin()));
}

}  // namespace

Evaluator::Evaluator(const Problem& problem, const BinGrid& grid, const QuadratureOptions& options)
    : problem_(problem),
      grid_(grid),
      monte_carlo_(options.monte_carlo),
      dimension_(problem.dimension()),
      arms_(problem.arms()) {
  if (grid.dimension() != dimension_) throw ConfigError("grid and environment dimensions differ");
  if (monte_carlo_) {
    if (options.monte_carlo_nodes == 0) throw ConfigError("Monte-Carlo mode needs at least one node");
    RngStream rng(options.monte_carlo_seed, 0, "monte-carlo-nodes");
    const double w = 1.0 / static_cast<double>(options.monte_carlo_nodes);
    for (std::size_t n = 0; n < options.monte_carlo_nodes; ++n) {
      const Vector x = problem.environment.sample_context(rng);
      coords_.insert(coords_.end(), x.begin(), x.end());
      weights_.push_back(w);
      bins_.push_back(grid.index(x));
    }
  } else {
    if (dimension_ > 3) {
      throw ConfigError("tensor quadrature is limited to d <= 3; enable monte_carlo for d > 3");
    }
    const std::size_t g = options.nodes_per_axis ? options.nodes_per_axis : default_nodes(dimension_);
    const std::size_t per_bin = (g + grid.bins_per_axis() - 1) / grid.bins_per_axis();
    const double w = grid.volume() / std::pow(static_cast<double>(per_bin), static_cast<double>(dimension_));
    for (std::size_t b = 0; b < grid.size(); ++b) {
      grid.for_each_node(b, per_bin, [&](Context x) {
        coords_.insert(coords_.end(), x.begin(), x.end());
        weights_.push_back(w);
        bins_.push_back(b);
      });
    }
  }

  const auto reduced = problem.regularizer.reduce();
  const std::size_t n = weights_.size();
  mu_.resize(n * arms_);
  lambda_.resize(n);
  shifted_.resize(n * arms_);
  oracle_values_.resize(n);
  oracle_.reserve(n);
  bin_weight_.assign(grid.size(), 0.0);
  bin_lambda_.assign(grid.size(), 0.0);
  bin_shifted_.assign(grid.size() * arms_, 0.0);
  bin_mu_.assign(grid.size() * arms_, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const Context x = node(i);
    const Vector mu = problem.environment.mean_losses(x);
    const double l = problem.lambda(x);
    const Vector k = reduced.shift(x, arms_);
    lambda_[i] = l;
    const std::size_t b = bins_[i];
    bin_weight_[b] += weights_[i];
    bin_lambda_[b] += weights_[i] * l;
    for (std::size_t a = 0; a < arms_; ++a) {
      mu_[i * arms_ + a] = mu[a];
      shifted_[i * arms_ + a] = mu[a] + l * k[a];
      bin_shifted_[b * arms_ + a] += weights_[i] * shifted_[i * arms_ + a];
      bin_mu_[b * arms_ + a] += weights_[i] * mu[a];
    }
    oracle_.push_back(problem.pstar(x));
    oracle_values_[i] = problem.pointwise_loss(x, oracle_.back().span());
  }
  for (std::size_t b = 0; b < grid.size(); ++b) {
    if (bin_weight_[b] <= 0.0) continue;
    bin_lambda_[b] /= bin_weight_[b];
    for (std::size_t a = 0; a < arms_; ++a) {
      bin_shifted_[b * arms_ + a] /= bin_weight_[b];
      bin_mu_[b * arms_ + a] /= bin_weight_[b];
    }
  }
}

Context Evaluator::node(std::size_t i) const {
  return Context(coords_.data() + i * dimension_, dimension_);
}

Vector Evaluator::bin_mean_losses(std::size_t bin) const {
  return Vector(bin_mu_.begin() + static_cast<std::ptrdiff_t>(bin * arms_),
                bin_mu_.begin() + static_cast<std::ptrdiff_t>((bin + 1) * arms_));
}

double Evaluator::loss(const std::function<SimplexPoint(Context)>& policy) const {
  double total = 0.0;
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    const Context x = node(i);
    total += weights_[i] * problem_.pointwise_loss(x, policy(x).span());
  }
  return total;
}

double Evaluator::loss_piecewise(std::span<const SimplexPoint> per_bin) const {
  if (per_bin.size() != grid_.size()) throw ConfigError("policy has the wrong number of bins");
  double total = 0.0;
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    const SimplexPoint& p = per_bin[bins_[i]];
    const Context x = node(i);
    double v = dot(std::span<const double>(mu_.data() + i * arms_, arms_), p.span());
    if (lambda_[i] != 0.0) v += lambda_[i] * problem_.regularizer.value(p.span(), x);
    total += weights_[i] * v;
  }
  return total;
}

double Evaluator::oracle_loss() const {
  double total = 0.0;
  for (std::size_t i = 0; i < weights_.size(); ++i) total += weights_[i] * oracle_values_[i];
  return total;
}

std::vector<SimplexPoint> Evaluator::best_piecewise() const {
  const auto reduced = problem_.regularizer.reduce();
  std::vector<SimplexPoint> out;
  out.reserve(grid_.size());
  for (std::size_t b = 0; b < grid_.size(); ++b) {
    if (bin_weight_[b] <= 0.0) {
      out.push_back(SimplexPoint::uniform(arms_));
      continue;
    }
    out.push_back(bin_minimizer(reduced.core,
                                std::span<const double>(bin_shifted_.data() + b * arms_, arms_),
                                bin_lambda_[b]));
  }
  return out;
}

double Evaluator::approximation_error_conjugate() const {
  const auto reduced = problem_.regularizer.reduce();
  double pointwise = 0.0;
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    pointwise += weights_[i] *
                 scaled_conjugate(reduced.core,
                                  std::span<const double>(shifted_.data() + i * arms_, arms_),
                                  lambda_[i]);
  }
  double binned = 0.0;
  for (std::size_t b = 0; b < grid_.size(); ++b) {
    if (bin_weight_[b] <= 0.0) continue;
    binned += bin_weight_[b] *
              scaled_conjugate(reduced.core,
                               std::span<const double>(bin_shifted_.data() + b * arms_, arms_),
                               bin_lambda_[b]);
  }
  return pointwise - binned;
}

double Evaluator::offset_integral() const {
  const auto reduced = problem_.regularizer.reduce();
  double total = 0.0;
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    total += weights_[i] * lambda_[i] * reduced.offset(node(i), arms_);
  }
  return total;
}

double Evaluator::reduced_loss_piecewise(std::span<const SimplexPoint> per_bin) const {
  const auto reduced = problem_.regularizer.reduce();
  double total = 0.0;
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    const SimplexPoint& p = per_bin[bins_[i]];
    double v = dot(std::span<const double>(shifted_.data() + i * arms_, arms_), p.span());
    if (lambda_[i] != 0.0) v += lambda_[i] * reduced.core.value(p.span());
    total += weights_[i] * v;
  }
  return total;
}

RegretReport Evaluator::regret(std::span<const SimplexPoint> per_bin, std::size_t horizon,
                               std::size_t empty_bins) const {
  const auto best = best_piecewise();
  const double l_policy = loss_piecewise(per_bin);
  const double l_best = loss_piecewise(best);
  const double l_star = oracle_loss();

  RegretReport r;
  r.regret = l_policy - l_star;
  r.estimation_error = l_policy - l_best;
  r.approximation_error = l_best - l_star;
  const double t = static_cast<double>(horizon);
  const double beta = problem_.environment.beta();
  if (horizon >= 3) {
    r.normalized_regret = r.regret / fast_rate(t, beta, dimension_);
    r.slow_normalized_regret = r.regret / slow_rate(t, beta, dimension_);
  }
  r.quadrature_nodes = weights_.size();
  r.empty_bins = empty_bins;
  if (monte_carlo_) {
    const std::size_t n = weights_.size();
    double mean = 0.0;
    double m2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const SimplexPoint& p = per_bin[bins_[i]];
      double v = dot(std::span<const double>(mu_.data() + i * arms_, arms_), p.span());
      if (lambda_[i] != 0.0) v += lambda_[i] * problem_.regularizer.value(p.span(), node(i));
      const double diff = v - oracle_values_[i];
      const double delta = diff - mean;
      mean += delta / static_cast<double>(i + 1);
      m2 += delta * (diff - mean);
    }
    if (n > 1) r.standard_error = std::sqrt(m2 / static_cast<double>(n - 1) / static_cast<double>(n));
  }
  return r;
}

double approximation_error(const Problem& problem, std::size_t bins_per_axis,
                           const QuadratureOptions& options) {
  Evaluator ev(problem, BinGrid(bins_per_axis, problem.dimension()), options);
  return ev.approximation_error_conjugate();
}

// ---------------------------------------------------------------------------
// Margin probe

namespace {

std::optional<double> fit_tail_exponent(std::span<const double> deltas, std::span<const double> probs) {
  std::vector<double> xs;
  std::vector<double> ys;
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    if (probs[i] >= 1e-3 && probs[i] <= 1e-1 && deltas[i] > 0.0) {
      xs.push_back(std::log(deltas[i]));
      ys.push_back(std::log(probs[i]));
    }
  }
  if (xs.size() < 2) return std::nullopt;
  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  if (sxx <= 0.0) return std::nullopt;
  return sxy / sxx;
}

}  // namespace

MarginProbe margin_probe(const Problem& problem, std::span<const double> deltas,
                         std::size_t samples, std::uint64_t seed) {
  if (samples < 10000) throw ConfigError("margin probe needs at least 10^4 samples");
  if (!std::is_sorted(deltas.begin(), deltas.end())) throw ConfigError("delta grid must be ascending");
  MarginProbe probe;
  probe.deltas.assign(deltas.begin(), deltas.end());
  Vector lambda_values(samples);
  Vector eta_values(samples);
  RngStream rng(seed, 0, "margin-probe");
  const bool has_eta = problem.arms() >= 2;
  for (std::size_t n = 0; n < samples; ++n) {
    const Vector x = problem.environment.sample_context(rng);
    lambda_values[n] = problem.lambda(x);
    eta_values[n] = has_eta ? problem.eta(x) : 0.0;
  }
  std::sort(lambda_values.begin(), lambda_values.end());
  std::sort(eta_values.begin(), eta_values.end());
  const auto fraction_below = [samples](const Vector& sorted, double d) {
    const auto it = std::lower_bound(sorted.begin(), sorted.end(), d);
    return static_cast<double>(it - sorted.begin()) / static_cast<double>(samples);
  };
  for (double d : deltas) {
    probe.lambda_below.push_back(fraction_below(lambda_values, d));
    probe.eta_below.push_back(fraction_below(eta_values, d));
  }
  probe.lambda_exponent = fit_tail_exponent(probe.deltas, probe.lambda_below);
  probe.eta_exponent = fit_tail_exponent(probe.deltas, probe.eta_below);
  return probe;
}

}  // namespace rcb
