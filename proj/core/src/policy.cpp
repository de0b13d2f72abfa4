#include "acre/policy.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "acre/errors.hpp"

namespace acre {

namespace {

std::vector<double> log_softmax(const std::vector<double>& logits) {
  for (double l : logits) {
    if (!std::isfinite(l)) throw NumericError("policy logits overflowed to non-finite values");
  }
  const double m = *std::max_element(logits.begin(), logits.end());
  double z = 0.0;
  for (double l : logits) z += std::exp(l - m);
  const double lz = m + std::log(z);
  std::vector<double> out(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) out[i] = logits[i] - lz;
  return out;
}

std::vector<double> softmax(const std::vector<double>& logits) {
  auto out = log_softmax(logits);
  for (double& v : out) v = std::exp(v);
  return out;
}

std::vector<double> rationale_logits(const PolicyParams& p, const TaskInstance& inst) {
  std::vector<double> logits(inst.evidence.size());
  for (std::size_t i = 0; i < logits.size(); ++i) logits[i] = p.w_ev * inst.evidence[i];
  return logits;
}

std::vector<double> answer_logits(const PolicyParams& p, const TaskInstance& inst,
                                  ContentId supported) {
  const int k = inst.num_options();
  std::vector<double> logits(k);
  for (int s = 0; s < k; ++s) {
    const double match = inst.content_at(s) == supported ? 1.0 : 0.0;
    logits[s] = p.w_match * match + p.b_pos[s];
  }
  return logits;
}

int argmax_first(const std::vector<double>& v) {
  return static_cast<int>(std::max_element(v.begin(), v.end()) - v.begin());
}

// Checks that the recorded choices of `traj` are valid for `inst`.
void check_choices(const PolicyParams& params, const TaskInstance& inst,
                   const Trajectory& traj) {
  const std::string where = "trajectory on instance " + std::to_string(inst.id) + ": ";
  if (traj.instance_id != inst.id) {
    throw ConsistencyError(where + "recorded for instance " +
                           std::to_string(traj.instance_id));
  }
  if (!inst.contains(traj.trace.supported_content)) {
    throw ConsistencyError(where + "supported content is not an option");
  }
  if (traj.trace.length_bucket < 0 || traj.trace.length_bucket >= params.num_buckets()) {
    throw ConsistencyError(where + "length bucket out of range");
  }
  if (traj.answer_slot < 0 || traj.answer_slot >= inst.num_options()) {
    throw ConsistencyError(where + "answer slot out of range");
  }
  if (inst.content_at(traj.answer_slot) != traj.answer_content) {
    throw ConsistencyError(where + "answer content does not match the answered slot");
  }
}

void check_shape(const PolicyParams& params, const TaskInstance& inst) {
  if (params.num_options() != inst.num_options()) {
    throw DimensionError("policy has " + std::to_string(params.num_options()) +
                         " slot biases but the instance has " +
                         std::to_string(inst.num_options()) + " options");
  }
  if (params.num_buckets() < 1) throw DimensionError("policy has no length buckets");
  if (!params.all_finite()) throw NumericError("policy parameters are not finite");
}

}  // namespace

void LengthBuckets::validate() const {
  if (midpoints.empty()) throw ConfigError("length buckets must be non-empty");
  for (int m : midpoints) {
    if (m < 1) throw ConfigError("length bucket midpoints must be positive");
  }
}

bool ParamVector::all_finite() const {
  if (!std::isfinite(w_ev) || !std::isfinite(w_match)) return false;
  for (double v : b_pos) {
    if (!std::isfinite(v)) return false;
  }
  for (double v : theta_len) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

std::vector<double> ParamVector::flatten() const {
  std::vector<double> out;
  out.reserve(flat_size());
  out.push_back(w_ev);
  out.push_back(w_match);
  out.insert(out.end(), b_pos.begin(), b_pos.end());
  out.insert(out.end(), theta_len.begin(), theta_len.end());
  return out;
}

void ParamVector::assign_flat(const std::vector<double>& flat) {
  if (flat.size() != flat_size()) {
    throw DimensionError("flat parameter vector has " + std::to_string(flat.size()) +
                         " entries, expected " + std::to_string(flat_size()));
  }
  auto it = flat.begin();
  w_ev = *it++;
  w_match = *it++;
  std::copy(it, it + b_pos.size(), b_pos.begin());
  it += static_cast<std::ptrdiff_t>(b_pos.size());
  std::copy(it, flat.end(), theta_len.begin());
}

PolicyParams PolicyParams::zeros(int k, int b) {
  PolicyParams p;
  p.b_pos.assign(k, 0.0);
  p.theta_len.assign(b, 0.0);
  return p;
}

Gradient Gradient::zeros_like(const ParamVector& shape) {
  Gradient g;
  g.b_pos.assign(shape.b_pos.size(), 0.0);
  g.theta_len.assign(shape.theta_len.size(), 0.0);
  return g;
}

Gradient& Gradient::operator+=(const Gradient& other) {
  if (!same_shape(other)) throw DimensionError("gradient shape mismatch");
  w_ev += other.w_ev;
  w_match += other.w_match;
  for (std::size_t i = 0; i < b_pos.size(); ++i) b_pos[i] += other.b_pos[i];
  for (std::size_t i = 0; i < theta_len.size(); ++i) theta_len[i] += other.theta_len[i];
  return *this;
}

Gradient& Gradient::operator*=(double s) {
  w_ev *= s;
  w_match *= s;
  for (double& v : b_pos) v *= s;
  for (double& v : theta_len) v *= s;
  return *this;
}

double Gradient::max_abs() const {
  double m = 0.0;
  for (double v : flatten()) m = std::max(m, std::abs(v));
  return m;
}

void check_params(const PolicyParams& params, const TaskInstance& instance,
                  const LengthBuckets& buckets) {
  check_shape(params, instance);
  if (params.num_buckets() != buckets.size()) {
    throw DimensionError("policy has " + std::to_string(params.num_buckets()) +
                         " length logits but " + std::to_string(buckets.size()) +
                         " buckets are configured");
  }
}

std::vector<double> rationale_probs(const PolicyParams& params, const TaskInstance& instance) {
  return softmax(rationale_logits(params, instance));
}

std::vector<double> length_probs(const PolicyParams& params) {
  return softmax(params.theta_len);
}

std::vector<double> answer_probs(const PolicyParams& params, const TaskInstance& instance,
                                 ContentId supported) {
  return softmax(answer_logits(params, instance, supported));
}

int choose_index(const std::vector<double>& probs, SampleMode mode, Rng& rng) {
  if (mode == SampleMode::kGreedy) return argmax_first(probs);
  const double u = uniform01(rng);
  double acc = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    acc += probs[i];
    if (u < acc) return static_cast<int>(i);
  }
  // u landed in the rounding gap above the last partial sum.
  for (std::size_t i = probs.size(); i-- > 0;) {
    if (probs[i] > 0.0) return static_cast<int>(i);
  }
  return 0;
}

Trajectory sample_trajectory(const PolicyParams& params, const TaskInstance& instance,
                             SampleMode mode, Rng& rng, const LengthBuckets& buckets) {
  check_params(params, instance, buckets);

  const auto rat_lp = log_softmax(rationale_logits(params, instance));
  const auto len_lp = log_softmax(params.theta_len);

  Trajectory t;
  t.instance_id = instance.id;

  auto pick = [&](const std::vector<double>& lp) {
    if (mode == SampleMode::kGreedy) return argmax_first(lp);
    std::vector<double> p(lp.size());
    for (std::size_t i = 0; i < lp.size(); ++i) p[i] = std::exp(lp[i]);
    return choose_index(p, mode, rng);
  };

  const int ci = pick(rat_lp);
  t.trace.supported_content = instance.contents[ci];
  const int bucket = pick(len_lp);
  t.trace.length_bucket = bucket;
  t.trace.length_tokens = buckets.midpoints[bucket];

  const auto ans_lp = log_softmax(answer_logits(params, instance, t.trace.supported_content));
  t.answer_slot = pick(ans_lp);
  t.answer_content = instance.content_at(t.answer_slot);

  t.head_logps = {rat_lp[ci], len_lp[bucket], ans_lp[t.answer_slot]};
  t.logp_old = t.head_logps.total();
  return t;
}

SecondAnswer second_pass_answer(const PolicyParams& params, const TaskInstance& instance,
                                const Permutation& perm, const ReasoningTrace& trace,
                                SampleMode mode, Rng& rng) {
  check_shape(params, instance);
  if (!instance.contains(trace.supported_content)) {
    throw ConsistencyError("second pass: trace supports content " +
                           std::to_string(trace.supported_content) +
                           " which is not an option of instance " +
                           std::to_string(instance.id));
  }
  const TaskInstance shuffled = shuffle(instance, perm);
  const int slot = choose_index(answer_probs(params, shuffled, trace.supported_content), mode, rng);
  return {slot, shuffled.content_at(slot)};
}

HeadLogps head_logprobs(const PolicyParams& params, const TaskInstance& instance,
                        const Trajectory& traj) {
  check_shape(params, instance);
  check_choices(params, instance, traj);
  const auto rat_lp = log_softmax(rationale_logits(params, instance));
  const auto len_lp = log_softmax(params.theta_len);
  const auto ans_lp =
      log_softmax(answer_logits(params, instance, traj.trace.supported_content));
  return {rat_lp[instance.index_of(traj.trace.supported_content)],
          len_lp[traj.trace.length_bucket], ans_lp[traj.answer_slot]};
}

double logprob(const PolicyParams& params, const TaskInstance& instance,
               const Trajectory& traj) {
  return head_logprobs(params, instance, traj).total();
}

Gradient grad_logprob(const PolicyParams& params, const TaskInstance& instance,
                      const Trajectory& traj) {
  check_shape(params, instance);
  check_choices(params, instance, traj);
  Gradient g = Gradient::zeros_like(params);

  // Rationale head: d/dw_ev = ev(chosen) - E_p[ev].
  const auto rat_p = rationale_probs(params, instance);
  const int ci = instance.index_of(traj.trace.supported_content);
  double mean_ev = 0.0;
  for (std::size_t i = 0; i < rat_p.size(); ++i) mean_ev += rat_p[i] * instance.evidence[i];
  g.w_ev = instance.evidence[ci] - mean_ev;

  const auto len_p = length_probs(params);
  for (int b = 0; b < params.num_buckets(); ++b) {
    g.theta_len[b] = (b == traj.trace.length_bucket ? 1.0 : 0.0) - len_p[b];
  }

  const auto ans_p = answer_probs(params, instance, traj.trace.supported_content);
  double mean_match = 0.0;
  for (int s = 0; s < instance.num_options(); ++s) {
    const double match = instance.content_at(s) == traj.trace.supported_content ? 1.0 : 0.0;
    mean_match += ans_p[s] * match;
    g.b_pos[s] = (s == traj.answer_slot ? 1.0 : 0.0) - ans_p[s];
  }
  const double chosen_match =
      instance.content_at(traj.answer_slot) == traj.trace.supported_content ? 1.0 : 0.0;
  g.w_match = chosen_match - mean_match;
  return g;
}

}  // namespace acre
