#ifndef ACRE_ENV_HPP_
#define ACRE_ENV_HPP_

// Synthetic multiple-choice QA environment.
//
// An instance is a set of K distinct contents (small integer ids) laid out
// over K answer slots by a presentation permutation. Evidence is attached to
// contents, never to slots, so reordering the options cannot change which
// answer the evidence supports. A single preferred slot can be planted to
// receive the correct content with a configurable probability; this is the
// positional shortcut a policy may learn under outcome-only reward.

#include <cstdint>
#include <span>
#include <vector>

#include "acre/random.hpp"

namespace acre {

using ContentId = int;
using InstanceId = std::int64_t;

// mapping()[s] is the pre-image slot whose content now appears at slot s.
class Permutation {
 public:
  Permutation() = default;
  // Throws DimensionError unless `mapping` is a bijection on {0..K-1}.
  explicit Permutation(std::vector<int> mapping);

  static Permutation identity(int k);

  int size() const { return static_cast<int>(mapping_.size()); }
  int operator[](int slot) const { return mapping_[slot]; }
  const std::vector<int>& mapping() const { return mapping_; }

  bool is_identity() const;
  Permutation inverse() const;
  // (this ∘ other)[s] = this[other[s]]
  Permutation compose(const Permutation& other) const;

  friend bool operator==(const Permutation&, const Permutation&) = default;

 private:
  std::vector<int> mapping_;
};

struct TaskInstance {
  InstanceId id = 0;
  std::vector<ContentId> contents;
  ContentId correct_content = 0;
  // evidence[i] scores contents[i].
  std::vector<double> evidence;
  // presentation[s] indexes into contents.
  Permutation presentation;

  int num_options() const { return static_cast<int>(contents.size()); }
  ContentId content_at(int slot) const;
  int slot_of(ContentId c) const;        // -1 when absent
  int index_of(ContentId c) const;       // -1 when absent
  bool contains(ContentId c) const { return index_of(c) >= 0; }
  double evidence_of(ContentId c) const;

  // Throws ConsistencyError when the structural invariants do not hold.
  void validate() const;

  friend bool operator==(const TaskInstance&, const TaskInstance&) = default;
};

struct EnvConfig {
  int num_options = 4;        // K
  int content_pool = 26;      // C
  double sigma_e = 0.5;
  int bias_index = 2;
  double bias_prob = 0.7;
  int n_train = 2000;
  int n_eval = 500;
  std::uint64_t seed = 0;

  // Throws ConfigError.
  void validate() const;

  friend bool operator==(const EnvConfig&, const EnvConfig&) = default;
};

struct Dataset {
  std::vector<TaskInstance> train;
  std::vector<TaskInstance> eval;
  EnvConfig config;

  // Linear lookup across both splits; throws ConsistencyError when missing.
  const TaskInstance& find(InstanceId id) const;
};

Dataset generate_dataset(const EnvConfig& config);

// Returns a copy whose presentation is composed with `perm`: the new content
// at slot s is the old content at slot perm[s]. Throws DimensionError when
// perm.size() != K.
TaskInstance shuffle(const TaskInstance& instance, const Permutation& perm);

// Uniform over the K! - 1 non-identity permutations. Throws ConfigError for
// K < 2.
Permutation random_nonidentity_perm(int k, Rng& rng);

// Uniform over all K! permutations.
Permutation random_perm(int k, Rng& rng);

}  // namespace acre

#endif  // ACRE_ENV_HPP_
