#include "rcb/ucfw.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "rcb/errors.hpp"

namespace rcb {

double BinObjective::value(std::span<const double> mu_bar, std::span<const double> p) const {
  double v = dot(mu_bar, p) + dot(shift, p);
  if (lambda_bar > 0.0) v += lambda_bar * core.value(p);
  return v;
}

PresampleSchedule PresampleSchedule::none(std::size_t arms) {
  PresampleSchedule s;
  s.base_point = SimplexPoint::uniform(arms);
  s.per_arm_counts.assign(arms, 0);
  return s;
}

std::size_t PresampleSchedule::total_pulls() const {
  return std::accumulate(per_arm_counts.begin(), per_arm_counts.end(), std::size_t{0});
}

namespace {

bool entropy_core(const Regularizer& r) { return r.kind() == RegularizerKind::Entropy; }

// Mixture with uniform base realizing `per_arm` pulls on every arm.
PresampleSchedule uniform_schedule(double per_arm, double occupancy, std::size_t arms) {
  PresampleSchedule s = PresampleSchedule::none(arms);
  const auto count = static_cast<std::size_t>(std::ceil(per_arm));
  s.per_arm_counts.assign(arms, count);
  s.mixture_weight = static_cast<double>(arms) * per_arm / occupancy;
  return s;
}

}  // namespace

PresampleSchedule make_presample_schedule(Regime regime, const BinObjective& objective,
                                          double expected_occupancy, std::size_t arms,
                                          std::size_t rank, std::size_t total_bins,
                                          const ScheduleOptions& options) {
  if (!(expected_occupancy >= 1.0)) throw ConfigError("expected bin occupancy must be >= 1");
  if (arms == 0) throw ConfigError("need at least one arm");
  const double lambda = objective.lambda_bar;
  // Smooth cores (squared norm) and the unregularized problem need no floor.
  if (!entropy_core(objective.core) || !(lambda > 0.0)) return PresampleSchedule::none(arms);

  PresampleSchedule s = PresampleSchedule::none(arms);
  switch (regime) {
    case Regime::Slow:
      s = uniform_schedule(lambda * std::sqrt(expected_occupancy), expected_occupancy, arms);
      break;
    case Regime::Fast: {
      // p*_i ∝ w_i exp(-mu_i / lambda) with w_i = exp(-shift_i / lambda), so
      // p*_i >= exp(-1/lambda) w_i / sum(w) for mu in [0,1]^K.
      Vector logw(arms, 0.0);
      for (std::size_t i = 0; i < arms && i < objective.shift.size(); ++i) {
        logw[i] = -objective.shift[i] / lambda;
      }
      s.base_point = softmax(logw);
      s.mixture_weight = std::exp(-1.0 / lambda);
      for (std::size_t i = 0; i < arms; ++i) {
        s.per_arm_counts[i] = static_cast<std::size_t>(
            std::ceil(s.mixture_weight * s.base_point[i] * expected_occupancy));
      }
      break;
    }
    case Regime::Intermediate: {
      if (rank == 0 || rank > total_bins) throw ConfigError("bin rank must be in [1, B^d]");
      if (rank <= options.ill_behaved_bins) {
        s = uniform_schedule(lambda * std::sqrt(expected_occupancy), expected_occupancy, arms);
      } else {
        const double gamma = options.margin_constant *
                             std::pow(static_cast<double>(rank) / static_cast<double>(total_bins),
                                      options.margin_exponent);
        s = uniform_schedule(expected_occupancy * gamma / 2.0, expected_occupancy, arms);
      }
      break;
    }
  }

  if (s.mixture_weight >= 0.5) {
    if (!options.cap) {
      throw ConfigError("presampling mixture weight >= 1/2 (lambda too large for the schedule)");
    }
    s.mixture_weight = *options.cap;
    s.capped = true;
    for (std::size_t i = 0; i < arms; ++i) {
      s.per_arm_counts[i] = static_cast<std::size_t>(
          std::ceil(s.mixture_weight * s.base_point[i] * expected_occupancy));
    }
  }
  return s;
}

// ---------------------------------------------------------------------------

UcfwLearner::UcfwLearner(BinObjective objective, PresampleSchedule schedule, UcfwOptions options)
    : objective_(std::move(objective)), schedule_(std::move(schedule)), options_(options) {
  const std::size_t k = schedule_.base_point.size();
  if (k == 0) throw ConfigError("schedule has no base point");
  if (!(schedule_.mixture_weight >= 0.0 && schedule_.mixture_weight < 0.5)) {
    throw ConfigError("mixture weight must be in [0, 1/2)");
  }
  if (objective_.shift.empty()) objective_.shift.assign(k, 0.0);
  if (objective_.shift.size() != k) throw ConfigError("objective shift has the wrong size");
  if (objective_.core.context_dependent()) throw ConfigError("bin objective needs a context-free core");
  pulls_.assign(k, 0);
  inner_pulls_.assign(k, 0);
  means_.assign(k, 0.0);
}

namespace {

void check_loss(double loss) {
  if (!(loss >= 0.0 && loss <= 1.0)) throw DataError("loss outside [0,1]");
}

}  // namespace

void UcfwLearner::record_presample(std::size_t arm, double loss) {
  check_loss(loss);
  const auto n = static_cast<double>(++pulls_.at(arm));
  means_[arm] += (loss - means_[arm]) / n;
  ++total_pulls_;
}

void UcfwLearner::update(std::size_t arm, double loss) {
  check_loss(loss);
  const auto n = static_cast<double>(++pulls_.at(arm));
  means_[arm] += (loss - means_[arm]) / n;
  ++inner_pulls_[arm];
  ++steps_;
  ++total_pulls_;
}

Vector UcfwLearner::effective_weights() const {
  const std::size_t k = pulls_.size();
  const double alpha = schedule_.mixture_weight;
  Vector p(k);
  for (std::size_t i = 0; i < k; ++i) {
    const double q = steps_ == 0 ? 1.0 / static_cast<double>(k)
                                 : static_cast<double>(inner_pulls_[i]) / static_cast<double>(steps_);
    p[i] = alpha * schedule_.base_point[i] + (1.0 - alpha) * q;
  }
  return p;
}

double UcfwLearner::lcb_gradient(std::size_t arm, std::span<const double> effective) const {
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  if (pulls_[arm] == 0) return kNegInf;
  const double t = static_cast<double>(std::max<std::size_t>(total_pulls_, 1));
  const double radius =
      std::sqrt(options_.confidence_constant * std::log(t) / static_cast<double>(pulls_[arm]));
  double g = means_[arm] - radius + objective_.shift[arm];
  if (objective_.lambda_bar > 0.0) {
    // The entropy gradient is -inf on the boundary: that arm must be pulled.
    if (entropy_core(objective_.core) && !(effective[arm] > 0.0)) return kNegInf;
    Vector p(effective.begin(), effective.end());
    if (entropy_core(objective_.core)) {
      g += objective_.lambda_bar * (1.0 + std::log(effective[arm]));
    } else {
      g += objective_.lambda_bar * objective_.core.gradient(p)[arm];
    }
  }
  return (1.0 - schedule_.mixture_weight) * g;
}

double UcfwLearner::lcb_gradient(std::size_t arm) const {
  const auto p = effective_weights();
  return lcb_gradient(arm, p);
}

std::size_t UcfwLearner::select_arm() const {
  const auto p = effective_weights();
  std::size_t best = 0;
  double best_value = lcb_gradient(0, p);
  for (std::size_t k = 1; k < pulls_.size(); ++k) {
    const double v = lcb_gradient(k, p);
    if (v < best_value) {
      best = k;
      best_value = v;
    }
  }
  return best;
}

SimplexPoint UcfwLearner::inner_proportion() const {
  const std::size_t k = pulls_.size();
  if (steps_ == 0) return SimplexPoint::uniform(k);
  Vector q(k);
  for (std::size_t i = 0; i < k; ++i) {
    q[i] = static_cast<double>(inner_pulls_[i]) / static_cast<double>(steps_);
  }
  return SimplexPoint(std::move(q), 1e-10);
}

SimplexPoint UcfwLearner::effective_proportion() const {
  return SimplexPoint(effective_weights(), 1e-10);
}

FinalProportion UcfwLearner::final_proportion() const {
  if (steps_ == 0) {
    return {schedule_.empty() ? SimplexPoint::uniform(pulls_.size()) : effective_proportion(), true};
  }
  return {effective_proportion(), false};
}

}  // namespace rcb
