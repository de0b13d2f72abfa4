#include "acre/rewards.hpp"

#include <cmath>

#include "acre/errors.hpp"

namespace acre {

void RewardConfig::validate() const {
  for (double a : {alpha1, alpha2, alpha3, omega}) {
    if (!std::isfinite(a)) throw ConfigError("reward coefficients must be finite");
  }
  if (l_min < 1 || l_max < 1) throw ConfigError("reward.l_min and reward.l_max must be >= 1");
  if (l_min > l_max) throw ConfigError("reward.l_min must not exceed reward.l_max");
}

std::vector<std::string> RewardConfig::warnings() const {
  std::vector<std::string> out;
  if (!(alpha1 >= alpha2 && alpha2 >= alpha3 && alpha3 >= 0.0)) {
    out.emplace_back("consistency levels are not ordered alpha1 >= alpha2 >= alpha3 >= 0");
  }
  return out;
}

std::string_view case_name(ConsistencyCase c) {
  switch (c) {
    case ConsistencyCase::kAgreeCorrect: return "agree_correct";
    case ConsistencyCase::kOneCorrect: return "one_correct";
    case ConsistencyCase::kAgreeWrong: return "agree_wrong";
    case ConsistencyCase::kOther: return "disagree_wrong";
  }
  return "unknown";
}

ConsistencyCase classify(const Indicators& ind) {
  if (ind.agree && ind.corr && ind.corr2) return ConsistencyCase::kAgreeCorrect;
  if (!ind.agree && (static_cast<int>(ind.corr) + static_cast<int>(ind.corr2) == 1)) {
    return ConsistencyCase::kOneCorrect;
  }
  if (ind.agree && !ind.corr && !ind.corr2) return ConsistencyCase::kAgreeWrong;
  return ConsistencyCase::kOther;
}

Indicators compute_indicators(const Trajectory& traj, const TaskInstance& instance) {
  if (!traj.second_pass) {
    throw PreconditionError("indicators need a second-pass answer (trajectory on instance " +
                            std::to_string(traj.instance_id) + ")");
  }
  const ContentId a = traj.answer_content;
  const ContentId a2 = traj.second_pass->answer2_content;
  return {a == a2, a == instance.correct_content, a2 == instance.correct_content};
}

double consistency_reward(const Indicators& ind, const RewardConfig& cfg) {
  if (!cfg.consistency_enabled) return 0.0;
  switch (classify(ind)) {
    case ConsistencyCase::kAgreeCorrect: return cfg.alpha1;
    case ConsistencyCase::kOneCorrect: return cfg.alpha2;
    case ConsistencyCase::kAgreeWrong: return cfg.alpha3;
    case ConsistencyCase::kOther: return 0.0;
  }
  return 0.0;
}

double length_reward(const Trajectory& traj, const Indicators& ind, const RewardConfig& cfg) {
  const int len = traj.trace.length_tokens;
  return (ind.corr && cfg.l_min <= len && len <= cfg.l_max) ? cfg.omega : 0.0;
}

bool is_well_formed(const Trajectory& traj, const TaskInstance& instance,
                    const LengthBuckets& buckets) {
  const auto& tr = traj.trace;
  if (traj.instance_id != instance.id) return false;
  if (tr.length_bucket < 0 || tr.length_bucket >= buckets.size()) return false;
  if (tr.length_tokens != buckets.midpoints[tr.length_bucket]) return false;
  if (!instance.contains(tr.supported_content)) return false;
  if (traj.answer_slot < 0 || traj.answer_slot >= instance.num_options()) return false;
  if (instance.content_at(traj.answer_slot) != traj.answer_content) return false;
  if (!std::isfinite(traj.logp_old)) return false;
  return true;
}

double base_reward(const Trajectory& traj, const TaskInstance& instance,
                   const LengthBuckets& buckets) {
  if (!is_well_formed(traj, instance, buckets)) return 0.0;
  return traj.answer_content == instance.correct_content ? 1.0 : 0.0;
}

RewardBreakdown total_reward(const Trajectory& traj, const TaskInstance& instance,
                             const RewardConfig& cfg, const LengthBuckets& buckets) {
  RewardBreakdown r;
  r.r_base = base_reward(traj, instance, buckets);
  // The length gate keys on first-pass correctness, which does not need the
  // second pass; only the consistency term does.
  Indicators ind;
  if (cfg.consistency_enabled) {
    ind = compute_indicators(traj, instance);
    r.r_cons = consistency_reward(ind, cfg);
  } else {
    ind.corr = traj.answer_content == instance.correct_content;
  }
  r.r_len = length_reward(traj, ind, cfg);
  r.total = r.r_base + r.r_len + r.r_cons;
  return r;
}

}  // namespace acre
