#ifndef ACRE_REWARDS_HPP_
#define ACRE_REWARDS_HPP_

#include <array>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "acre/env.hpp"
#include "acre/policy.hpp"

namespace acre {

struct RewardConfig {
  double alpha1 = 1.0;
  double alpha2 = 0.9;
  double alpha3 = 0.3;
  double omega = 0.2;
  int l_min = 320;
  int l_max = 512;
  bool consistency_enabled = true;

  // Throws ConfigError on l_min > l_max or non-positive bounds. The ordering
  // alpha1 >= alpha2 >= alpha3 >= 0 is only reported through warnings().
  void validate() const;
  std::vector<std::string> warnings() const;

  friend bool operator==(const RewardConfig&, const RewardConfig&) = default;
};

struct Indicators {
  bool agree = false;
  bool corr = false;
  bool corr2 = false;

  friend bool operator==(const Indicators&, const Indicators&) = default;
};

// The four branches of the consistency reward, in decreasing reward order.
enum class ConsistencyCase {
  kAgreeCorrect = 0,    // agree, both correct         -> alpha1
  kOneCorrect = 1,      // disagree, exactly one correct -> alpha2
  kAgreeWrong = 2,      // agree, both wrong           -> alpha3
  kOther = 3,           // disagree, both wrong        -> 0
};
inline constexpr int kNumConsistencyCases = 4;
std::string_view case_name(ConsistencyCase c);
ConsistencyCase classify(const Indicators& ind);

struct RewardBreakdown {
  double r_base = 0.0;
  double r_len = 0.0;
  double r_cons = 0.0;
  double total = 0.0;

  friend bool operator==(const RewardBreakdown&, const RewardBreakdown&) = default;
};

// Throws PreconditionError when the trajectory has no second pass.
Indicators compute_indicators(const Trajectory& traj, const TaskInstance& instance);

double consistency_reward(const Indicators& ind, const RewardConfig& cfg);

// omega iff the first-pass answer is correct and the trace length lies in
// [l_min, l_max].
double length_reward(const Trajectory& traj, const Indicators& ind, const RewardConfig& cfg);

// 1 iff the first answer is correct and the record is well-formed.
double base_reward(const Trajectory& traj, const TaskInstance& instance,
                   const LengthBuckets& buckets = {});

// Structural check behind the format gate of base_reward.
bool is_well_formed(const Trajectory& traj, const TaskInstance& instance,
                    const LengthBuckets& buckets);

RewardBreakdown total_reward(const Trajectory& traj, const TaskInstance& instance,
                             const RewardConfig& cfg, const LengthBuckets& buckets = {});

}  // namespace acre

#endif  // ACRE_REWARDS_HPP_
