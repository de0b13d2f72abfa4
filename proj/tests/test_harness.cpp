#include <gtest/gtest.h>

#include <fstream>
#include <set>
#include <sstream>
#include <unistd.h>

#include "acre/errors.hpp"
#include "acre/harness.hpp"
#include "acre/serialize.hpp"
#include "test_util.hpp"

namespace acre {
namespace {

namespace fs = std::filesystem;

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() /
                 ("acre_test_" + std::to_string(::getpid()) + "_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

RunConfig small_config(const fs::path& out) {
  RunConfig c;
  c.env.n_train = 60;
  c.env.n_eval = 60;
  c.env.seed = 3;
  c.train.steps = 40;
  c.train.seed = 5;
  c.harness.eval_every = 10;
  c.harness.n_probes = 200;
  c.harness.out_dir = out;
  return c;
}

TEST(RunConfigJson, EmptyObjectGivesDefaults) {
  const auto c = run_config_from_json(Json::object());
  EXPECT_EQ(c.env, EnvConfig{});
  EXPECT_EQ(c.train, TrainConfig{});
  EXPECT_EQ(c.harness, HarnessConfig{});
}

TEST(RunConfigJson, RoundTrip) {
  auto c = small_config("/tmp/somewhere");
  c.reward().alpha2 = 0.55;
  c.train.second_pass_mode = SampleMode::kGreedy;
  c.harness.init.b_pos = {0.1, 0.2, 0.3, 0.4};
  const auto back = run_config_from_json(to_json(c));
  EXPECT_EQ(back.env, c.env);
  EXPECT_EQ(back.train, c.train);
  EXPECT_EQ(back.harness, c.harness);
}

TEST(RunConfigJson, RejectsUnknownKeys) {
  EXPECT_THROW(run_config_from_json(Json::parse(R"({"model": {}})")), ConfigError);
  EXPECT_THROW(run_config_from_json(Json::parse(R"({"env": {"k": 4}})")), ConfigError);
  EXPECT_THROW(run_config_from_json(Json::parse(R"({"train": {"group_size": 4}})")), ConfigError);
  EXPECT_THROW(run_config_from_json(Json::parse(R"({"reward": {"alpha4": 0}})")), ConfigError);
  EXPECT_THROW(run_config_from_json(Json::parse(R"({"harness": {"init": {"bias": 1}}})")),
               ConfigError);
}

TEST(RunConfigJson, RejectsWrongTypes) {
  EXPECT_THROW(run_config_from_json(Json::parse(R"({"env": {"K": "four"}})")), ConfigError);
  EXPECT_THROW(run_config_from_json(Json::parse(R"({"train": {"second_pass_mode": "beam"}})")),
               ConfigError);
  EXPECT_THROW(run_config_from_json(Json::parse(R"({"env": []})")), ConfigError);
}

TEST(RunConfigJson, ShippedConfigsLoad) {
  const auto acre_cfg = load_run_config(fs::path(ACRE_CONFIG_DIR) / "acre.json");
  const auto grpo_cfg = load_run_config(fs::path(ACRE_CONFIG_DIR) / "grpo.json");
  EXPECT_TRUE(acre_cfg.reward().consistency_enabled);
  EXPECT_FALSE(grpo_cfg.reward().consistency_enabled);
  EXPECT_EQ(acre_cfg.train.steps, 500);
  EXPECT_EQ(acre_cfg.env.bias_prob, 0.7);
  const auto grid = load_ablation_grid(fs::path(ACRE_CONFIG_DIR) / "ablation_grid.json");
  EXPECT_EQ(grid.points().size(), 6u);
}

TEST(RunConfig, Validation) {
  auto c = small_config("x");
  EXPECT_NO_THROW(c.validate());
  c.harness.run_id = "a/b";
  EXPECT_THROW(c.validate(), ConfigError);
  c = small_config("x");
  c.harness.init.b_pos = {0, 0};
  EXPECT_THROW(c.validate(), ConfigError);
  c = small_config("x");
  c.env.bias_index = 4;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Train, WritesRunDirectory) {
  const auto out = scratch("train");
  const auto rec = train(small_config(out));
  for (const char* f : {"config.json", "metrics.csv", "trajectories.jsonl", "checkpoint.json"}) {
    EXPECT_TRUE(fs::exists(out / f)) << f;
  }
  std::vector<int> steps;
  for (const auto& pt : rec.metric_series) steps.push_back(pt.step);
  EXPECT_EQ(steps, (std::vector<int>{0, 10, 20, 30, 40}));
  EXPECT_EQ(load_checkpoint(out / "checkpoint.json"), rec.final_params);
  const auto series = load_metric_series(out / "metrics.csv");
  ASSERT_EQ(series.size(), rec.metric_series.size());
  for (std::size_t i = 0; i < series.size(); ++i) {
    EXPECT_EQ(series[i].report, rec.metric_series[i].report);
  }
  const auto groups = read_group_log(out / "trajectories.jsonl");
  ASSERT_EQ(groups.size(), 40u);
  for (const auto& g : groups) EXPECT_EQ(g.batch.trajectories.size(), 8u);
  fs::remove_all(out);
}

TEST(Train, ZeroStepsEvaluatesInitialPolicyOnly) {
  const auto out = scratch("zero");
  auto c = small_config(out);
  c.train.steps = 0;
  const auto rec = train(c);
  ASSERT_EQ(rec.metric_series.size(), 1u);
  EXPECT_EQ(rec.metric_series[0].step, 0);
  EXPECT_EQ(rec.final_params, c.initial_params());
  EXPECT_TRUE(read_group_log(out / "trajectories.jsonl").empty());
  fs::remove_all(out);
}

TEST(Train, DeterministicAcrossRunsAndThreadCounts) {
  const auto a = scratch("det_a"), b = scratch("det_b"), t = scratch("det_t");
  train(small_config(a));
  train(small_config(b));
  auto threaded = small_config(t);
  threaded.harness.threads = 4;
  train(threaded);
  EXPECT_EQ(slurp(a / "metrics.csv"), slurp(b / "metrics.csv"));
  EXPECT_EQ(slurp(a / "trajectories.jsonl"), slurp(b / "trajectories.jsonl"));
  EXPECT_EQ(slurp(a / "metrics.csv"), slurp(t / "metrics.csv"));
  EXPECT_EQ(slurp(a / "trajectories.jsonl"), slurp(t / "trajectories.jsonl"));
  EXPECT_EQ(slurp(a / "checkpoint.json"), slurp(t / "checkpoint.json"));
  for (const auto& p : {a, b, t}) fs::remove_all(p);
}

TEST(Train, SeedChangesTheRun) {
  const auto a = scratch("seed_a"), b = scratch("seed_b");
  train(small_config(a));
  auto c = small_config(b);
  c.train.seed = 6;
  train(c);
  EXPECT_NE(slurp(a / "trajectories.jsonl"), slurp(b / "trajectories.jsonl"));
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(Train, ReplayReproducesEveryReward) {
  const auto out = scratch("replay");
  train(small_config(out));
  const auto r = replay_rewards(out);
  EXPECT_EQ(r.trajectories, 40 * 8);
  EXPECT_EQ(r.mismatches, 0);
  EXPECT_EQ(r.second_pass_fields, r.trajectories);
  for (const auto& g : read_group_log(out / "trajectories.jsonl")) {
    for (const auto& ind : g.indicators) EXPECT_TRUE(ind.has_value());
  }
  fs::remove_all(out);
}

TEST(Train, ConsistencyOffLeavesNoSecondPassFields) {
  const auto out = scratch("grpo");
  auto c = small_config(out);
  c.reward().consistency_enabled = false;
  train(c);
  const auto log = slurp(out / "trajectories.jsonl");
  EXPECT_EQ(log.find("second_pass"), std::string::npos);
  EXPECT_EQ(log.find("indicators"), std::string::npos);
  const auto r = replay_rewards(out);
  EXPECT_EQ(r.mismatches, 0);
  EXPECT_EQ(r.second_pass_fields, 0);
  for (const auto& g : read_group_log(out / "trajectories.jsonl")) {
    for (const auto& rw : g.batch.rewards) {
      EXPECT_EQ(rw.r_cons, 0.0);
      EXPECT_EQ(rw.total, rw.r_base + rw.r_len);
    }
  }
  fs::remove_all(out);
}

TEST(Train, DivergenceAbortsWithStep) {
  const auto out = scratch("nan");
  auto c = small_config(out);
  // logits w_ev * evidence overflow to inf
  c.harness.init.w_ev = 1e308;
  try {
    train(c);
    FAIL() << "expected NumericError";
  } catch (const NumericError& e) {
    EXPECT_EQ(std::string(e.what()).rfind("step 0: ", 0), 0u) << e.what();
  }
  fs::remove_all(out);
}

TEST(Train, UnwritableOutputIsIoError) {
  const auto blocker = scratch("blocker");
  { std::ofstream(blocker) << "file"; }
  EXPECT_THROW(train(small_config(blocker / "run")), IoError);
  fs::remove(blocker);
}

TEST(Persistence, CheckpointRoundTripIsBitExact) {
  const auto dir = scratch("ckpt");
  fs::create_directories(dir);
  Rng rng(61);
  for (int i = 0; i < 50; ++i) {
    const auto p = testing::random_params(4, 6, rng, 1e3);
    save_checkpoint(dir / "c.json", p);
    EXPECT_EQ(load_checkpoint(dir / "c.json"), p);
  }
  auto p = PolicyParams::zeros(4, 6);
  p.w_ev = 0.1 + 0.2;
  p.b_pos[0] = 5e-324;
  p.theta_len[1] = -1.7976931348623157e308;
  save_checkpoint(dir / "c.json", p);
  EXPECT_EQ(load_checkpoint(dir / "c.json"), p);
  fs::remove_all(dir);
}

TEST(Persistence, MalformedCheckpoint) {
  const auto dir = scratch("badckpt");
  fs::create_directories(dir);
  write_text_file(dir / "c.json", R"({"w_ev": 1, "w_match": 1, "b_pos": [0, 0], "theta": [0]})");
  EXPECT_THROW(load_checkpoint(dir / "c.json"), ParseError);
  write_text_file(dir / "c.json", R"({"w_ev": 1, "w_match": 1, "b_pos": [0, 0])");
  EXPECT_THROW(load_checkpoint(dir / "c.json"), ParseError);
  EXPECT_THROW(load_checkpoint(dir / "missing.json"), IoError);
  fs::remove_all(dir);
}

TEST(Persistence, TruncatedLogNamesTheLine) {
  const auto out = scratch("trunc");
  auto c = small_config(out);
  c.train.steps = 3;
  train(c);
  const auto log = slurp(out / "trajectories.jsonl");
  const auto second_nl = log.find('\n', log.find('\n') + 1);
  write_text_file(out / "trajectories.jsonl", log.substr(0, second_nl - 20) + "\n");
  try {
    read_group_log(out / "trajectories.jsonl");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("trajectories.jsonl:2"), std::string::npos) << e.what();
  }
  fs::remove_all(out);
}

TEST(Persistence, DatasetJsonlRoundTrip) {
  const auto dir = scratch("ds");
  fs::create_directories(dir);
  EnvConfig cfg;
  cfg.n_train = 30;
  cfg.n_eval = 5;
  const auto ds = generate_dataset(cfg);
  write_dataset_jsonl(dir / "train.jsonl", ds.train);
  EXPECT_EQ(read_dataset_jsonl(dir / "train.jsonl"), ds.train);
  fs::remove_all(dir);
}

AblationGrid tiny_grid(std::vector<AlphaSweep> sweeps, std::vector<std::uint64_t> seeds) {
  AblationGrid g;
  g.sweeps = std::move(sweeps);
  g.seeds = std::move(seeds);
  g.base = small_config("");
  g.base.train.steps = 4;
  g.base.harness.eval_every = 4;
  g.base.env.n_eval = 20;
  return g;
}

TEST(Ablation, CartesianGridIsExhaustive) {
  const auto out = scratch("ablate");
  const auto grid = tiny_grid({{{1.0}, {1.0, 0.9, 0.8, 0.7}, {0.0, 0.3, 0.5}}}, {7});
  const auto rows = ablate(grid, out, 4);
  ASSERT_EQ(rows.size(), 12u);
  std::set<std::tuple<double, double, double>> seen;
  for (const auto& r : rows) seen.insert({r.alphas.alpha1, r.alphas.alpha2, r.alphas.alpha3});
  EXPECT_EQ(seen.size(), 12u);
  const auto csv = ablation_csv(rows);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 13);
  EXPECT_TRUE(fs::exists(out / "a1_1_a2_0.9_a3_0.3_s7" / "metrics.csv"));
  fs::remove_all(out);
}

TEST(Ablation, SweepUnionDropsDuplicates) {
  const auto grid = tiny_grid({{{1.0}, {1.0, 0.9, 0.8, 0.7}, {0.3}}, {{1.0}, {0.9}, {0.0, 0.3, 0.5}}},
                              {1, 2});
  const auto pts = grid.points();
  EXPECT_EQ(pts.size(), 6u);
  EXPECT_TRUE(std::is_sorted(pts.begin(), pts.end()));
}

TEST(Ablation, ParallelMatchesSerial) {
  const auto a = scratch("abl_serial"), b = scratch("abl_par");
  const auto grid = tiny_grid({{{1.0}, {0.9, 0.5}, {0.3}}}, {1, 2});
  const auto serial = ablate(grid, a, 1);
  const auto parallel = ablate(grid, b, 4);
  EXPECT_EQ(ablation_csv(serial), ablation_csv(parallel));
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(Ablation, InvalidGrid) {
  EXPECT_THROW(tiny_grid({}, {1}).validate(), ConfigError);
  EXPECT_THROW(tiny_grid({{{1.0}, {}, {0.3}}}, {1}).validate(), ConfigError);
  EXPECT_THROW(tiny_grid({{{1.0}, {0.9}, {0.3}}}, {}).validate(), ConfigError);
}

TEST(Compare, SelfComparisonHasZeroDeltas) {
  const auto out = scratch("cmp_self");
  auto c = small_config("");
  c.train.steps = 10;
  const auto rep = compare(c, c, {1, 2}, out, 2);
  for (double d : rep.mean_delta) EXPECT_EQ(d, 0.0);
  for (int w : rep.a_wins) EXPECT_EQ(w, 0);
  for (int w : rep.b_wins) EXPECT_EQ(w, 0);
  const auto csv = rep.csv();
  // header + 2 runs per seed + summary
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1 + 2 * 2 + 1);
  EXPECT_EQ(rep.summary_json()["metrics"]["oscr"]["ties"], 2);
  EXPECT_TRUE(fs::exists(out / "a_s1" / "metrics.csv"));
  EXPECT_TRUE(fs::exists(out / "b_s2" / "metrics.csv"));
  fs::remove_all(out);
}

TEST(Compare, RewardOnlyDifferencesAllowed) {
  const auto out = scratch("cmp_bad");
  auto a = small_config("");
  auto b = a;
  b.reward().consistency_enabled = false;
  b.harness.run_id = "other";
  a.train.steps = b.train.steps = 2;
  EXPECT_NO_THROW(compare(a, b, {1}, out));
  b.train.lr = 0.1;
  EXPECT_THROW(compare(a, b, {1}, out), ConfigError);
  b = a;
  b.env.bias_prob = 0.5;
  EXPECT_THROW(compare(a, b, {1}, out), ConfigError);
  EXPECT_THROW(compare(a, a, {}, out), ConfigError);
  fs::remove_all(out);
}

TEST(Report, OneRowPerRun) {
  const auto out = scratch("report");
  const auto grid = tiny_grid({{{1.0}, {0.9, 0.5}, {0.3}}}, {1});
  ablate(grid, out);
  const auto csv = report(out);
  EXPECT_EQ(csv.rfind("run," + metrics_csv_header() + "\n", 0), 0u);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 3);
  EXPECT_NE(csv.find("a1_1_a2_0.5_a3_0.3_s1,4,"), std::string::npos);
  EXPECT_THROW(report(out / "nope"), IoError);
  fs::remove_all(out);
}

}  // namespace
}  // namespace acre
