#include "acre/grpo.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "acre/errors.hpp"

namespace acre {

void TrainConfig::validate() const {
  if (group_size < 2) throw ConfigError("train.G must be >= 2");
  if (!(clip_eps > 0.0 && clip_eps < 1.0)) throw ConfigError("train.clip_eps must lie in (0, 1)");
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw ConfigError("train.beta must be >= 0");
  if (!(adv_eps > 0.0) || !std::isfinite(adv_eps)) throw ConfigError("train.adv_eps must be > 0");
  if (!(lr > 0.0) || !std::isfinite(lr)) throw ConfigError("train.lr must be > 0");
  if (inner_epochs < 1) throw ConfigError("train.inner_epochs must be >= 1");
  if (steps < 0) throw ConfigError("train.steps must be >= 0");
  reward.validate();
}

std::vector<double> normalize_advantages(std::span<const double> rewards, double adv_eps) {
  if (rewards.size() < 2) throw ConfigError("advantage normalization needs a group of >= 2");
  if (!(adv_eps > 0.0)) throw ConfigError("adv_eps must be > 0");
  const double n = static_cast<double>(rewards.size());
  double mean = 0.0;
  for (double r : rewards) mean += r;
  mean /= n;
  double var = 0.0;
  for (double r : rewards) var += (r - mean) * (r - mean);
  var /= n;

  std::vector<double> adv(rewards.size(), 0.0);
  const bool constant = std::all_of(rewards.begin(), rewards.end(),
                                    [&](double r) { return r == rewards[0]; });
  if (constant) return adv;
  const double denom = std::sqrt(var) + adv_eps;
  for (std::size_t i = 0; i < rewards.size(); ++i) adv[i] = (rewards[i] - mean) / denom;
  return adv;
}

double clipped_term(double ratio, double advantage, double clip_eps) {
  if (!(ratio > 0.0)) {
    throw NumericError("importance ratio must be positive, got " + std::to_string(ratio));
  }
  const double clipped = std::clamp(ratio, 1.0 - clip_eps, 1.0 + clip_eps);
  return std::min(ratio * advantage, clipped * advantage);
}

KlEstimate kl_value_and_grad(const PolicyParams& params, const PolicyParams& ref,
                             const TaskInstance& instance, const Trajectory& traj) {
  const double lp = logprob(params, instance, traj);
  const double lp_ref = logprob(ref, instance, traj);
  const double log_r = lp_ref - lp;
  const double r = std::exp(log_r);
  KlEstimate out;
  out.value = r - log_r - 1.0;
  // d/dθ (r - log r - 1) with d log r/dθ = -∇ log π_θ  →  (1 - r) ∇ log π_θ
  out.grad = grad_logprob(params, instance, traj);
  out.grad *= (1.0 - r);
  return out;
}

ObjectiveValue objective_and_grad(const GroupBatch& group, const PolicyParams& params,
                                  const PolicyParams& ref, const TrainConfig& cfg,
                                  const InstanceLookup& instances) {
  const auto g = group.trajectories.size();
  if (g == 0 || group.advantages.size() != g) {
    throw ConsistencyError("group batch has " + std::to_string(g) + " trajectories and " +
                           std::to_string(group.advantages.size()) + " advantages");
  }
  ObjectiveValue out{0.0, Gradient::zeros_like(params)};
  const double inv_g = 1.0 / static_cast<double>(g);

  for (std::size_t i = 0; i < g; ++i) {
    const Trajectory& traj = group.trajectories[i];
    if (traj.instance_id != group.instance_id) {
      throw ConsistencyError("trajectory " + std::to_string(i) + " belongs to instance " +
                             std::to_string(traj.instance_id) + ", group is for " +
                             std::to_string(group.instance_id));
    }
    const TaskInstance& inst = instances(traj.instance_id);
    const double a = group.advantages[i];

    const double lp = logprob(params, inst, traj);
    const double ratio = std::exp(lp - traj.logp_old);
    const double surrogate = clipped_term(ratio, a, cfg.clip_eps);

    // The unclipped branch is active whenever it is the minimum; otherwise
    // the min picked the constant clipped value and has zero slope.
    const bool ratio_branch = ratio * a <= std::clamp(ratio, 1.0 - cfg.clip_eps,
                                                      1.0 + cfg.clip_eps) * a;
    Gradient gi = Gradient::zeros_like(params);
    if (ratio_branch && a != 0.0) {
      gi = grad_logprob(params, inst, traj);
      gi *= ratio * a;
    }

    double kl = 0.0;
    if (cfg.beta != 0.0) {
      auto k = kl_value_and_grad(params, ref, inst, traj);
      kl = k.value;
      k.grad *= -cfg.beta;
      gi += k.grad;
    }

    out.value += inv_g * (surrogate - cfg.beta * kl);
    gi *= inv_g;
    out.grad += gi;
  }
  return out;
}

PolicyParams sgd_step(const PolicyParams& params, const Gradient& grad, double lr) {
  if (!params.same_shape(grad)) {
    throw DimensionError("gradient shape does not match policy parameters");
  }
  if (!(lr > 0.0)) throw ConfigError("learning rate must be > 0");
  PolicyParams next = params;
  next.w_ev += lr * grad.w_ev;
  next.w_match += lr * grad.w_match;
  for (std::size_t i = 0; i < next.b_pos.size(); ++i) next.b_pos[i] += lr * grad.b_pos[i];
  for (std::size_t i = 0; i < next.theta_len.size(); ++i) {
    next.theta_len[i] += lr * grad.theta_len[i];
  }
  return next;
}

}  // namespace acre
