#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "rcb/partition.hpp"
#include "rcb/regularizer.hpp"
#include "rcb/simplex.hpp"

namespace rcb {

// Per-bin objective L_b(p) = <mu_bar(b) + shift, p> + lambda_bar * H(p), with
// mu_bar unknown to the learner. `shift` is the bin mean of lambda(x) k(x)
// from the reduced regularizer (zero for the entropy).
struct BinObjective {
  double lambda_bar = 0.0;
  Vector shift;
  Regularizer core = Regularizer::entropy();

  double value(std::span<const double> mu_bar, std::span<const double> p) const;
};

// Presampling expressed as a fixed mixture: the learner optimizes q in
// L_b(alpha p_o + (1 - alpha) q). per_arm_counts are the pulls that realize
// the mixture on a bin of expected occupancy T_b_est.
struct PresampleSchedule {
  double mixture_weight = 0.0;
  SimplexPoint base_point;
  std::vector<std::size_t> per_arm_counts;
  bool capped = false;

  static PresampleSchedule none(std::size_t arms);
  bool empty() const { return mixture_weight == 0.0; }
  std::size_t total_pulls() const;
};

struct ScheduleOptions {
  // Used instead of failing when the computed mixture weight reaches 1/2.
  std::optional<double> cap = 0.49;
  // Intermediate regime: gamma_j = margin_constant * (j / B^d)^margin_exponent
  // on well-behaved bins, slow rule on the first `ill_behaved_bins` ranks.
  double margin_exponent = 1.0 / 3.0;
  double margin_constant = 1.0;
  std::size_t ill_behaved_bins = 0;
};

// rank is 1-based over bins sorted by lambda_bar ascending (intermediate only).
PresampleSchedule make_presample_schedule(Regime regime, const BinObjective& objective,
                                          double expected_occupancy, std::size_t arms,
                                          std::size_t rank, std::size_t total_bins,
                                          const ScheduleOptions& options = {});

struct UcfwOptions {
  double confidence_constant = 2.0;
};

struct FinalProportion {
  SimplexPoint proportion;
  bool empty_bin = false;
};

// Upper-Confidence Frank-Wolfe on one bin. Each post-presample step pulls the
// arm minimizing a lower-confidence estimate of the gradient of
// q -> L_b(alpha p_o + (1 - alpha) q); the Frank-Wolfe step 1/(t+1) toward
// that vertex is exactly the running pull frequency.
class UcfwLearner {
 public:
  UcfwLearner(BinObjective objective, PresampleSchedule schedule, UcfwOptions options = {});

  // Presample draws feed the mean estimates and counts, not q.
  void record_presample(std::size_t arm, double loss);

  double lcb_gradient(std::size_t arm) const;
  std::size_t select_arm() const;
  void update(std::size_t arm, double loss);

  template <class Sampler>
  std::size_t step(Sampler&& sample_loss) {
    const std::size_t arm = select_arm();
    update(arm, sample_loss(arm));
    return arm;
  }

  std::size_t arms() const { return pulls_.size(); }
  std::size_t steps() const { return steps_; }
  std::size_t total_pulls() const { return total_pulls_; }
  const std::vector<std::size_t>& pulls() const { return pulls_; }
  const std::vector<std::size_t>& inner_pulls() const { return inner_pulls_; }
  const Vector& means() const { return means_; }
  const PresampleSchedule& schedule() const { return schedule_; }
  const BinObjective& objective() const { return objective_; }

  // Pull frequencies of post-presample steps; uniform before the first step.
  SimplexPoint inner_proportion() const;
  // alpha p_o + (1 - alpha) q_t
  SimplexPoint effective_proportion() const;
  FinalProportion final_proportion() const;

 private:
  Vector effective_weights() const;
  double lcb_gradient(std::size_t arm, std::span<const double> effective) const;

  BinObjective objective_;
  PresampleSchedule schedule_;
  UcfwOptions options_;
  std::vector<std::size_t> pulls_;
  std::vector<std::size_t> inner_pulls_;
  Vector means_;
  std::size_t steps_ = 0;
  std::size_t total_pulls_ = 0;
};

}  // namespace rcb
