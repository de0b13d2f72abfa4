#include <gtest/gtest.h>

#include <climits>
#include <set>

#include "acre/errors.hpp"
#include "acre/rewards.hpp"
#include "test_util.hpp"

namespace acre {
namespace {

using testing::make_instance;

// Trajectory on make_instance(4, correct_index) answering `first` and
// (optionally) `second`, both as content indices.
Trajectory traj_for(const TaskInstance& inst, int first, int second = -1, int bucket = 3) {
  Trajectory t;
  t.instance_id = inst.id;
  t.trace = {inst.contents[first], LengthBuckets{}.midpoints[bucket], bucket};
  t.answer_content = inst.contents[first];
  t.answer_slot = inst.slot_of(t.answer_content);
  if (second >= 0) {
    const Permutation perm({1, 0, 3, 2});
    const auto shuffled = shuffle(inst, perm);
    t.second_pass = SecondPass{perm, shuffled.slot_of(inst.contents[second]), inst.contents[second]};
  }
  return t;
}

TEST(Indicators, Examples) {
  const auto inst = make_instance(4, 0);
  EXPECT_EQ(compute_indicators(traj_for(inst, 0, 0), inst), (Indicators{true, true, true}));
  EXPECT_EQ(compute_indicators(traj_for(inst, 0, 2), inst), (Indicators{false, true, false}));
  EXPECT_EQ(compute_indicators(traj_for(inst, 3, 0), inst), (Indicators{false, false, true}));
  EXPECT_EQ(compute_indicators(traj_for(inst, 1, 1), inst), (Indicators{true, false, false}));
}

TEST(Indicators, MissingSecondPassIsPreconditionError) {
  const auto inst = make_instance(4, 0);
  EXPECT_THROW(compute_indicators(traj_for(inst, 0), inst), PreconditionError);
}

TEST(Indicators, ImpossiblePatternsNeverOccur) {
  Rng rng(21);
  for (int i = 0; i < 100000; ++i) {
    const int k = 2 + static_cast<int>(uniform_index(rng, 5));
    const auto inst = make_instance(k, static_cast<int>(uniform_index(rng, k)));
    const int a = static_cast<int>(uniform_index(rng, k));
    const int a2 = static_cast<int>(uniform_index(rng, k));
    Trajectory t;
    t.instance_id = inst.id;
    t.answer_content = inst.contents[a];
    t.second_pass = SecondPass{Permutation::identity(k), 0, inst.contents[a2]};
    const auto ind = compute_indicators(t, inst);
    ASSERT_FALSE(ind.agree && ind.corr != ind.corr2);
    ASSERT_FALSE(!ind.agree && ind.corr && ind.corr2);
  }
}

TEST(ConsistencyReward, CaseTable) {
  RewardConfig cfg;  // (1, 0.9, 0.3)
  EXPECT_EQ(consistency_reward({true, true, true}, cfg), 1.0);
  EXPECT_EQ(consistency_reward({false, true, false}, cfg), 0.9);
  EXPECT_EQ(consistency_reward({false, false, true}, cfg), 0.9);
  EXPECT_EQ(consistency_reward({true, false, false}, cfg), 0.3);
  EXPECT_EQ(consistency_reward({false, false, false}, cfg), 0.0);
  // Unreachable patterns fall through to zero.
  EXPECT_EQ(consistency_reward({false, true, true}, cfg), 0.0);
  EXPECT_EQ(consistency_reward({true, true, false}, cfg), 0.0);
  EXPECT_EQ(consistency_reward({true, false, true}, cfg), 0.0);
}

TEST(ConsistencyReward, DisabledIsZero) {
  RewardConfig cfg;
  cfg.consistency_enabled = false;
  for (int bits = 0; bits < 8; ++bits) {
    EXPECT_EQ(consistency_reward({(bits & 1) != 0, (bits & 2) != 0, (bits & 4) != 0}, cfg), 0.0);
  }
}

TEST(ConsistencyReward, OnlyFourLevelsRepresentable) {
  RewardConfig cfg{0.77, 0.41, 0.13};
  const std::set<double> allowed{0.0, cfg.alpha1, cfg.alpha2, cfg.alpha3};
  for (int bits = 0; bits < 8; ++bits) {
    const double r = consistency_reward({(bits & 1) != 0, (bits & 2) != 0, (bits & 4) != 0}, cfg);
    EXPECT_TRUE(allowed.count(r));
  }
}

TEST(LengthReward, Window) {
  RewardConfig cfg;
  Trajectory t;
  t.trace.length_tokens = 400;
  EXPECT_DOUBLE_EQ(length_reward(t, {false, true, false}, cfg), 0.2);
  EXPECT_DOUBLE_EQ(length_reward(t, {false, false, true}, cfg), 0.0);
  t.trace.length_tokens = 100;
  EXPECT_DOUBLE_EQ(length_reward(t, {true, true, true}, cfg), 0.0);
  t.trace.length_tokens = 320;
  EXPECT_DOUBLE_EQ(length_reward(t, {true, true, true}, cfg), 0.2);
  t.trace.length_tokens = 512;
  EXPECT_DOUBLE_EQ(length_reward(t, {true, true, true}, cfg), 0.2);
  t.trace.length_tokens = 513;
  EXPECT_DOUBLE_EQ(length_reward(t, {true, true, true}, cfg), 0.0);
}

TEST(BaseReward, OutcomeAndFormatGate) {
  const auto inst = make_instance(4, 2, {1, 3, 0, 2});
  EXPECT_EQ(base_reward(traj_for(inst, 2), inst), 1.0);
  EXPECT_EQ(base_reward(traj_for(inst, 1), inst), 0.0);
  auto corrupted = traj_for(inst, 2);
  corrupted.trace.length_bucket = LengthBuckets{}.size();
  EXPECT_EQ(base_reward(corrupted, inst), 0.0);
  corrupted = traj_for(inst, 2);
  corrupted.answer_slot = (corrupted.answer_slot + 1) % 4;
  EXPECT_EQ(base_reward(corrupted, inst), 0.0);
}

TEST(TotalReward, Examples) {
  const auto inst = make_instance(4, 0);
  RewardConfig cfg;
  // correct, in-window (bucket 3 = 384 tokens), both answers correct
  auto r = total_reward(traj_for(inst, 0, 0, 3), inst, cfg);
  EXPECT_DOUBLE_EQ(r.total, 2.2);
  EXPECT_EQ(r.r_base, 1.0);
  EXPECT_EQ(r.r_len, 0.2);
  EXPECT_EQ(r.r_cons, 1.0);

  r = total_reward(traj_for(inst, 1, 1, 3), inst, cfg);
  EXPECT_DOUBLE_EQ(r.total, 0.3);

  cfg.consistency_enabled = false;
  r = total_reward(traj_for(inst, 0, -1, 0), inst, cfg);
  EXPECT_EQ(r.total, 1.0);
  EXPECT_EQ(r.total, r.r_base + r.r_len + r.r_cons);
}

TEST(TotalReward, NeedsSecondPassOnlyWhenEnabled) {
  const auto inst = make_instance(4, 0);
  RewardConfig cfg;
  EXPECT_THROW(total_reward(traj_for(inst, 0), inst, cfg), PreconditionError);
  cfg.consistency_enabled = false;
  EXPECT_NO_THROW(total_reward(traj_for(inst, 0), inst, cfg));
}

TEST(TotalReward, ReducesToOutcomeRewardWithoutShaping) {
  RewardConfig cfg;
  cfg.consistency_enabled = false;
  cfg.omega = 0.0;
  cfg.l_min = 1;
  cfg.l_max = INT_MAX;
  Rng rng(22);
  for (int i = 0; i < 1000; ++i) {
    const auto inst = testing::random_instance(4, rng, i);
    const auto p = testing::random_params(4, 6, rng);
    const auto t = sample_trajectory(p, inst, SampleMode::kStochastic, rng);
    const auto r = total_reward(t, inst, cfg);
    EXPECT_EQ(r.total, t.answer_content == inst.correct_content ? 1.0 : 0.0);
  }
}

TEST(RewardConfig, ValidationAndWarnings) {
  RewardConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  EXPECT_TRUE(cfg.warnings().empty());
  cfg.alpha2 = 1.5;
  EXPECT_NO_THROW(cfg.validate());
  EXPECT_EQ(cfg.warnings().size(), 1u);
  cfg = {};
  cfg.l_min = 600;
  EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(ConsistencyCase, Names) {
  EXPECT_EQ(case_name(classify({true, true, true})), "agree_correct");
  EXPECT_EQ(case_name(classify({false, false, true})), "one_correct");
  EXPECT_EQ(case_name(classify({true, false, false})), "agree_wrong");
  EXPECT_EQ(case_name(classify({false, false, false})), "disagree_wrong");
}

}  // namespace
}  // namespace acre
