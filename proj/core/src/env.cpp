#include "acre/env.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "acre/errors.hpp"

namespace acre {

Permutation::Permutation(std::vector<int> mapping) : mapping_(std::move(mapping)) {
  std::vector<bool> seen(mapping_.size(), false);
  for (int v : mapping_) {
    if (v < 0 || v >= static_cast<int>(mapping_.size()) || seen[v]) {
      throw DimensionError("permutation is not a bijection on {0.." +
                           std::to_string(mapping_.size()) + "-1}");
    }
    seen[v] = true;
  }
}

Permutation Permutation::identity(int k) {
  std::vector<int> m(k);
  std::iota(m.begin(), m.end(), 0);
  return Permutation(std::move(m));
}

bool Permutation::is_identity() const {
  for (int s = 0; s < size(); ++s) {
    if (mapping_[s] != s) return false;
  }
  return true;
}

Permutation Permutation::inverse() const {
  std::vector<int> inv(mapping_.size());
  for (int s = 0; s < size(); ++s) inv[mapping_[s]] = s;
  return Permutation(std::move(inv));
}

Permutation Permutation::compose(const Permutation& other) const {
  if (other.size() != size()) {
    throw DimensionError("cannot compose permutations of sizes " +
                         std::to_string(size()) + " and " +
                         std::to_string(other.size()));
  }
  std::vector<int> out(mapping_.size());
  for (int s = 0; s < size(); ++s) out[s] = mapping_[other[s]];
  return Permutation(std::move(out));
}

ContentId TaskInstance::content_at(int slot) const {
  if (slot < 0 || slot >= num_options()) {
    throw ConsistencyError("slot " + std::to_string(slot) + " out of range");
  }
  return contents[presentation[slot]];
}

int TaskInstance::index_of(ContentId c) const {
  auto it = std::find(contents.begin(), contents.end(), c);
  return it == contents.end() ? -1 : static_cast<int>(it - contents.begin());
}

int TaskInstance::slot_of(ContentId c) const {
  const int idx = index_of(c);
  if (idx < 0) return -1;
  for (int s = 0; s < num_options(); ++s) {
    if (presentation[s] == idx) return s;
  }
  return -1;
}

double TaskInstance::evidence_of(ContentId c) const {
  const int idx = index_of(c);
  if (idx < 0) {
    throw ConsistencyError("content " + std::to_string(c) +
                           " is not an option of instance " + std::to_string(id));
  }
  return evidence[idx];
}

void TaskInstance::validate() const {
  const auto k = contents.size();
  const std::string where = "instance " + std::to_string(id) + ": ";
  if (k < 2) throw ConsistencyError(where + "fewer than two options");
  if (evidence.size() != k) throw ConsistencyError(where + "evidence size mismatch");
  if (presentation.mapping().size() != k) {
    throw ConsistencyError(where + "presentation size mismatch");
  }
  auto sorted = contents;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw ConsistencyError(where + "duplicate contents");
  }
  if (!contains(correct_content)) {
    throw ConsistencyError(where + "correct_content is not an option");
  }
}

void EnvConfig::validate() const {
  if (num_options < 2) throw ConfigError("env.K must be >= 2");
  if (content_pool < num_options) throw ConfigError("env.C must be >= K");
  if (!(sigma_e >= 0.0) || !std::isfinite(sigma_e)) {
    throw ConfigError("env.sigma_e must be finite and >= 0");
  }
  if (bias_index < 0 || bias_index >= num_options) {
    throw ConfigError("env.bias_index must lie in [0, K)");
  }
  if (!(bias_prob >= 0.0 && bias_prob <= 1.0)) {
    throw ConfigError("env.bias_prob must lie in [0, 1]");
  }
  if (n_train < 1 || n_eval < 1) {
    throw ConfigError("env.n_train and env.n_eval must be >= 1");
  }
}

const TaskInstance& Dataset::find(InstanceId id) const {
  // Ids are assigned contiguously: train first, then eval.
  if (id >= 0 && id < static_cast<InstanceId>(train.size()) && train[id].id == id) {
    return train[id];
  }
  const auto e = id - static_cast<InstanceId>(train.size());
  if (e >= 0 && e < static_cast<InstanceId>(eval.size()) && eval[e].id == id) {
    return eval[e];
  }
  for (const auto* split : {&train, &eval}) {
    for (const auto& inst : *split) {
      if (inst.id == id) return inst;
    }
  }
  throw ConsistencyError("no instance with id " + std::to_string(id));
}

namespace {

void fisher_yates(std::vector<int>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::swap(v[i - 1], v[uniform_index(rng, i)]);
  }
}

TaskInstance make_instance(InstanceId id, const EnvConfig& cfg, Rng& rng,
                           std::normal_distribution<double>& noise) {
  const int k = cfg.num_options;
  TaskInstance inst;
  inst.id = id;

  // K distinct contents by partial Fisher-Yates over the pool.
  std::vector<int> pool(cfg.content_pool);
  std::iota(pool.begin(), pool.end(), 0);
  for (int i = 0; i < k; ++i) {
    const auto j = i + uniform_index(rng, cfg.content_pool - i);
    std::swap(pool[i], pool[j]);
  }
  inst.contents.assign(pool.begin(), pool.begin() + k);
  const int correct_idx = static_cast<int>(uniform_index(rng, k));
  inst.correct_content = inst.contents[correct_idx];

  inst.evidence.resize(k);
  for (int i = 0; i < k; ++i) {
    const double base = (i == correct_idx) ? 1.0 : 0.0;
    inst.evidence[i] = cfg.sigma_e > 0.0 ? base + cfg.sigma_e * noise(rng) : base;
  }

  // Slot for the correct content: the planted slot with probability
  // bias_prob, otherwise one of the other K-1 slots uniformly. This makes
  // P(correct at bias_index) == bias_prob exactly.
  int correct_slot = cfg.bias_index;
  if (uniform01(rng) >= cfg.bias_prob) {
    const int r = static_cast<int>(uniform_index(rng, k - 1));
    correct_slot = r < cfg.bias_index ? r : r + 1;
  }

  std::vector<int> others;
  for (int i = 0; i < k; ++i) {
    if (i != correct_idx) others.push_back(i);
  }
  fisher_yates(others, rng);
  std::vector<int> presentation(k);
  for (int s = 0, o = 0; s < k; ++s) {
    presentation[s] = (s == correct_slot) ? correct_idx : others[o++];
  }
  inst.presentation = Permutation(std::move(presentation));
  return inst;
}

}  // namespace

Dataset generate_dataset(const EnvConfig& config) {
  config.validate();
  Dataset ds;
  ds.config = config;
  Rng rng(config.seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  ds.train.reserve(config.n_train);
  ds.eval.reserve(config.n_eval);
  InstanceId next = 0;
  for (int i = 0; i < config.n_train; ++i) {
    ds.train.push_back(make_instance(next++, config, rng, noise));
  }
  for (int i = 0; i < config.n_eval; ++i) {
    ds.eval.push_back(make_instance(next++, config, rng, noise));
  }
  return ds;
}

TaskInstance shuffle(const TaskInstance& instance, const Permutation& perm) {
  if (perm.size() != instance.num_options()) {
    throw DimensionError("shuffle: permutation of size " + std::to_string(perm.size()) +
                         " applied to an instance with " +
                         std::to_string(instance.num_options()) + " options");
  }
  TaskInstance out = instance;
  out.presentation = instance.presentation.compose(perm);
  return out;
}

Permutation random_perm(int k, Rng& rng) {
  if (k < 1) throw ConfigError("permutation size must be >= 1");
  std::vector<int> m(k);
  std::iota(m.begin(), m.end(), 0);
  fisher_yates(m, rng);
  return Permutation(std::move(m));
}

Permutation random_nonidentity_perm(int k, Rng& rng) {
  if (k < 2) throw ConfigError("non-identity permutation needs K >= 2");
  // Rejection keeps the draw uniform over the K! - 1 remaining permutations.
  for (;;) {
    auto p = random_perm(k, rng);
    if (!p.is_identity()) return p;
  }
}

}  // namespace acre
