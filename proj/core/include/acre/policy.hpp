#ifndef ACRE_POLICY_HPP_
#define ACRE_POLICY_HPP_

// Three-head stochastic policy over the synthetic environment.
//
//   rationale head: which content the reasoning trace argues for,
//                   logit(c) = w_ev * evidence(c)
//   length head:    trace-length bucket, logit(b) = theta_len[b]
//   answer head:    which slot is answered,
//                   logit(s) = w_match * [content_at(s) == supported] + b_pos[s]
//
// The trajectory log-probability is the sum of the three chosen-category
// log-probabilities. Every gradient is the softmax identity
// (indicator - probability) times the logit's coefficient.

#include <array>
#include <optional>
#include <utility>
#include <vector>

#include "acre/env.hpp"
#include "acre/random.hpp"

namespace acre {

enum class SampleMode { kStochastic, kGreedy };

// Token counts represented by each trace-length bucket.
struct LengthBuckets {
  std::vector<int> midpoints{64, 128, 256, 384, 448, 600};

  int size() const { return static_cast<int>(midpoints.size()); }
  void validate() const;  // ConfigError unless non-empty and positive

  friend bool operator==(const LengthBuckets&, const LengthBuckets&) = default;
};

// Shared layout of PolicyParams and Gradient.
struct ParamVector {
  double w_ev = 0.0;
  double w_match = 0.0;
  std::vector<double> b_pos;      // K
  std::vector<double> theta_len;  // B

  int num_options() const { return static_cast<int>(b_pos.size()); }
  int num_buckets() const { return static_cast<int>(theta_len.size()); }
  std::size_t flat_size() const { return 2 + b_pos.size() + theta_len.size(); }

  bool all_finite() const;
  bool same_shape(const ParamVector& other) const {
    return b_pos.size() == other.b_pos.size() &&
           theta_len.size() == other.theta_len.size();
  }

  // Layout: w_ev, w_match, b_pos..., theta_len...
  std::vector<double> flatten() const;
  void assign_flat(const std::vector<double>& flat);

  friend bool operator==(const ParamVector&, const ParamVector&) = default;
};

struct PolicyParams : ParamVector {
  static PolicyParams zeros(int k, int b);
  friend bool operator==(const PolicyParams&, const PolicyParams&) = default;
};

struct Gradient : ParamVector {
  static Gradient zeros_like(const ParamVector& shape);

  Gradient& operator+=(const Gradient& other);
  Gradient& operator*=(double s);
  double max_abs() const;

  friend bool operator==(const Gradient&, const Gradient&) = default;
};

struct ReasoningTrace {
  ContentId supported_content = 0;
  int length_tokens = 0;
  int length_bucket = 0;

  friend bool operator==(const ReasoningTrace&, const ReasoningTrace&) = default;
};

struct HeadLogps {
  double rationale = 0.0;
  double length = 0.0;
  double answer = 0.0;

  double total() const { return rationale + length + answer; }
  friend bool operator==(const HeadLogps&, const HeadLogps&) = default;
};

struct SecondPass {
  Permutation perm;
  int answer2_slot = 0;
  ContentId answer2_content = 0;

  friend bool operator==(const SecondPass&, const SecondPass&) = default;
};

struct Trajectory {
  InstanceId instance_id = 0;
  ReasoningTrace trace;
  int answer_slot = 0;
  ContentId answer_content = 0;
  double logp_old = 0.0;
  HeadLogps head_logps;
  std::optional<SecondPass> second_pass;

  friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

struct SecondAnswer {
  int slot = 0;
  ContentId content = 0;
};

// Per-head probability tables for one (params, instance, supported) context.
struct HeadDistributions {
  std::vector<double> rationale;  // indexed like instance.contents
  std::vector<double> length;     // indexed by bucket
  std::vector<double> answer;     // indexed by slot
};

// Throws DimensionError on a shape mismatch with (instance K, buckets B) and
// NumericError on non-finite entries.
void check_params(const PolicyParams& params, const TaskInstance& instance,
                  const LengthBuckets& buckets);

std::vector<double> rationale_probs(const PolicyParams& params, const TaskInstance& instance);
std::vector<double> length_probs(const PolicyParams& params);
std::vector<double> answer_probs(const PolicyParams& params, const TaskInstance& instance,
                                 ContentId supported);

Trajectory sample_trajectory(const PolicyParams& params, const TaskInstance& instance,
                             SampleMode mode, Rng& rng,
                             const LengthBuckets& buckets = {});

// Answer head only, on shuffle(instance, perm), with the trace held fixed.
// Reward-only: never contributes to any gradient.
SecondAnswer second_pass_answer(const PolicyParams& params, const TaskInstance& instance,
                                const Permutation& perm, const ReasoningTrace& trace,
                                SampleMode mode, Rng& rng);

// log pi(rationale, length, answer) of the recorded choices. Throws
// ConsistencyError when the choices are not valid for the instance.
double logprob(const PolicyParams& params, const TaskInstance& instance,
               const Trajectory& traj);
HeadLogps head_logprobs(const PolicyParams& params, const TaskInstance& instance,
                        const Trajectory& traj);

Gradient grad_logprob(const PolicyParams& params, const TaskInstance& instance,
                      const Trajectory& traj);

// Index drawn from `probs` (stochastic) or its first argmax (greedy).
int choose_index(const std::vector<double>& probs, SampleMode mode, Rng& rng);

}  // namespace acre

#endif  // ACRE_POLICY_HPP_
