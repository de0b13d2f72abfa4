#ifndef ACRE_GRPO_HPP_
#define ACRE_GRPO_HPP_

// Group-relative policy optimization with sequence-level importance ratios,
// a PPO-style clipped surrogate and a k3 KL penalty toward a frozen
// reference policy.

#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "acre/env.hpp"
#include "acre/policy.hpp"
#include "acre/rewards.hpp"

namespace acre {

struct TrainConfig {
  int group_size = 8;  // G
  double clip_eps = 0.2;
  double beta = 0.04;
  double adv_eps = 1e-6;
  double lr = 0.05;
  int inner_epochs = 1;
  int steps = 500;
  std::uint64_t seed = 0;
  RewardConfig reward;
  SampleMode second_pass_mode = SampleMode::kStochastic;

  void validate() const;  // ConfigError

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

struct GroupBatch {
  InstanceId instance_id = 0;
  std::vector<Trajectory> trajectories;
  std::vector<RewardBreakdown> rewards;
  std::vector<double> advantages;
};

using InstanceLookup = std::function<const TaskInstance&(InstanceId)>;

// A_i = (R_i - mean) / (population std + adv_eps); exactly zero when every
// reward in the group is equal. Throws ConfigError for fewer than two rewards
// or adv_eps <= 0.
std::vector<double> normalize_advantages(std::span<const double> rewards, double adv_eps);

// min(ratio * A, clip(ratio, 1 - eps, 1 + eps) * A). Throws NumericError for
// ratio <= 0.
double clipped_term(double ratio, double advantage, double clip_eps);

struct KlEstimate {
  double value = 0.0;
  Gradient grad;
};

// k3 = r - log r - 1 with r = pi_ref(o) / pi_theta(o) on the recorded
// trajectory, and its gradient with respect to params.
KlEstimate kl_value_and_grad(const PolicyParams& params, const PolicyParams& ref,
                             const TaskInstance& instance, const Trajectory& traj);

struct ObjectiveValue {
  double value = 0.0;
  Gradient grad;
};

ObjectiveValue objective_and_grad(const GroupBatch& group, const PolicyParams& params,
                                  const PolicyParams& ref, const TrainConfig& cfg,
                                  const InstanceLookup& instances);

// params + lr * grad (ascent). Throws DimensionError on a shape mismatch.
PolicyParams sgd_step(const PolicyParams& params, const Gradient& grad, double lr);

}  // namespace acre

#endif  // ACRE_GRPO_HPP_
