#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "rcb/environment.hpp"
#include "rcb/partition.hpp"
#include "rcb/regularizer.hpp"
#include "rcb/simplex.hpp"

namespace rcb {

// ---------------------------------------------------------------------------
// Brute-force simplex oracle

struct MirrorDescentOptions {
  std::size_t max_iterations = 100000;
  // step_t = step_scale / (sqrt(t) max(1, |g - mean(g)|_inf))
  double step_scale = 10.0;
  double tolerance = 1e-10;  // stop once the iterate moves less than this (sup norm)
};

using Objective = std::function<double(std::span<const double>)>;
using Gradient = std::function<Vector(std::span<const double>)>;

// Entropic mirror descent from the barycenter. Returns the best iterate seen.
// Throws DomainError on non-finite objective values.
SimplexPoint simplex_minimize(const Objective& f, const Gradient& grad, std::size_t arms,
                              const MirrorDescentOptions& options = {});

// argmin_p <mu, p> + lambda rho(p, x), closed form per family.
// Throws DomainError when lambda <= 0.
SimplexPoint oracle_pstar(std::span<const double> mu, double lambda, const Regularizer& reg,
                          Context x = {});

// sqrt(K/(K-1)) min_i p_i: Euclidean distance from p to the simplex boundary
// when p is interior. Throws DomainError for K < 2.
double boundary_distance(const SimplexPoint& p);

// ---------------------------------------------------------------------------
// Ground truth for one problem instance

struct Problem {
  Environment environment;
  LambdaFunction lambda;
  Regularizer regularizer;

  std::size_t arms() const { return environment.arms(); }
  std::size_t dimension() const { return environment.dimension(); }

  // p*(x); the argmin vertex where lambda(x) = 0.
  SimplexPoint pstar(Context x) const;
  // Pointwise objective <mu(x), p> + lambda(x) rho(p, x).
  double pointwise_loss(Context x, std::span<const double> p) const;
  double eta(Context x) const;
};

struct QuadratureOptions {
  // Nodes per axis over [0,1]; 0 picks 512 / 64 / 16 for d = 1 / 2 / 3.
  std::size_t nodes_per_axis = 0;
  bool monte_carlo = false;
  std::size_t monte_carlo_nodes = 1000000;
  std::uint64_t monte_carlo_seed = 0;
};

struct RegretReport {
  double regret = 0.0;
  double estimation_error = 0.0;
  double approximation_error = 0.0;
  double normalized_regret = 0.0;       // R / (T / log^2 T)^{-2 beta / (2 beta + d)}
  double slow_normalized_regret = 0.0;  // R / (T / log T)^{-beta / (2 beta + d)}
  double standard_error = 0.0;          // Monte-Carlo integration only
  std::size_t quadrature_nodes = 0;
  std::size_t empty_bins = 0;
};

double fast_rate(double horizon, double beta, std::size_t dimension);
double slow_rate(double horizon, double beta, std::size_t dimension);

// Integrates against a fixed node set aligned with a bin grid: every bin gets
// the same number of midpoint nodes, so per-bin averages and the loss
// functional share one discretization and R = E + A holds exactly.
class Evaluator {
 public:
  Evaluator(const Problem& problem, const BinGrid& grid, const QuadratureOptions& options = {});

  std::size_t node_count() const { return weights_.size(); }
  bool monte_carlo() const { return monte_carlo_; }

  double loss(const std::function<SimplexPoint(Context)>& policy) const;
  double loss_piecewise(std::span<const SimplexPoint> per_bin) const;
  double oracle_loss() const;
  // Minimizer of each bin loss <mu_bar + avg(lambda k), p> + lambda_bar H(p).
  std::vector<SimplexPoint> best_piecewise() const;
  // Sum over bins of int lambda H*(-mu~/lambda) - lambda_bar H*(-mu~_bar/lambda_bar).
  double approximation_error_conjugate() const;
  // int lambda(x) c(x) dx
  double offset_integral() const;
  // Loss in reduced form: int <mu + lambda k, p> + lambda H(p).
  double reduced_loss_piecewise(std::span<const SimplexPoint> per_bin) const;

  double bin_lambda(std::size_t bin) const { return bin_lambda_[bin]; }
  Vector bin_mean_losses(std::size_t bin) const;

  RegretReport regret(std::span<const SimplexPoint> per_bin, std::size_t horizon,
                      std::size_t empty_bins = 0) const;

 private:
  Context node(std::size_t i) const;

  const Problem& problem_;
  BinGrid grid_;
  bool monte_carlo_ = false;
  std::size_t dimension_;
  std::size_t arms_;
  Vector coords_;
  Vector weights_;
  std::vector<std::size_t> bins_;
  Vector mu_;       // node-major K entries
  Vector lambda_;
  Vector shifted_;  // mu + lambda k
  Vector bin_weight_;
  Vector bin_lambda_;
  Vector bin_shifted_;
  Vector bin_mu_;
  std::vector<SimplexPoint> oracle_;
  Vector oracle_values_;
};

double approximation_error(const Problem& problem, std::size_t bins_per_axis,
                           const QuadratureOptions& options = {});

// ---------------------------------------------------------------------------
// Margin diagnostics

struct MarginProbe {
  Vector deltas;
  Vector lambda_below;  // P_X(lambda(x) < delta)
  Vector eta_below;     // P_X(eta(x) < delta)
  std::optional<double> lambda_exponent;
  std::optional<double> eta_exponent;
};

// Monte-Carlo tail probabilities on the delta grid plus log-log fits over the
// points whose estimate lies in [1e-3, 1e-1]. Needs samples >= 10^4.
MarginProbe margin_probe(const Problem& problem, std::span<const double> deltas,
                         std::size_t samples, std::uint64_t seed);

}  // namespace rcb
