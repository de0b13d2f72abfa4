#ifndef ACRE_HARNESS_HPP_
#define ACRE_HARNESS_HPP_

// Training orchestration, ablation grids, paired comparisons and run
// persistence. A run directory holds:
//
//   config.json         the resolved run configuration
//   metrics.csv         metric series (see metrics_csv_header)
//   trajectories.jsonl  one sampled group per line
//   checkpoint.json     final policy parameters

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "acre/env.hpp"
#include "acre/grpo.hpp"
#include "acre/metrics.hpp"
#include "acre/policy.hpp"
#include "acre/rewards.hpp"
#include "acre/serialize.hpp"

namespace acre {

// Starting point of every run; also the frozen reference policy. Defaults
// describe a policy that already reads the evidence, is weakly keyed to the
// content its trace supports and has no positional preference.
struct PolicyInit {
  double w_ev = 2.0;
  double w_match = 1.0;
  std::vector<double> b_pos;      // empty -> zeros(K)
  std::vector<double> theta_len;  // empty -> zeros(B)

  friend bool operator==(const PolicyInit&, const PolicyInit&) = default;
};

struct HarnessConfig {
  int eval_every = 50;
  std::string run_id = "run";
  std::filesystem::path out_dir;
  int n_shuffles = 1;
  int n_probes = 2000;
  // Worker threads for sampling within a group; results do not depend on it.
  int threads = 1;
  LengthBuckets buckets;
  PolicyInit init;

  friend bool operator==(const HarnessConfig&, const HarnessConfig&) = default;
};

struct RunConfig {
  EnvConfig env;
  TrainConfig train;  // train.reward is the [reward] section
  HarnessConfig harness;

  void validate() const;  // ConfigError
  const RewardConfig& reward() const { return train.reward; }
  RewardConfig& reward() { return train.reward; }
  PolicyParams initial_params() const;
  EvalOptions eval_options() const;
};

// Config file <-> RunConfig. Missing keys take defaults, unknown keys and
// sections are rejected with ConfigError.
RunConfig run_config_from_json(const Json& j);
Json to_json(const RunConfig& cfg);
RunConfig load_run_config(const std::filesystem::path& path);

struct MetricPoint {
  int step = 0;
  MetricsReport report;
};

struct RunRecord {
  RunConfig config;
  std::vector<MetricPoint> metric_series;
  PolicyParams final_params;
  double wall_time = 0.0;
  std::filesystem::path group_log_path;

  const MetricsReport& final_metrics() const { return metric_series.back().report; }
};

// Runs one GRPO/ACRE training job, writing its outputs to
// config.harness.out_dir (created if missing). Throws IoError when the
// directory is not writable and NumericError naming the step when the
// objective or parameters become non-finite.
RunRecord train(const RunConfig& config);

// Consistency-level sweeps. Each sweep is a cartesian product; the grid is
// the duplicate-free union of its sweeps.
struct AlphaSweep {
  std::vector<double> alpha1_values;
  std::vector<double> alpha2_values;
  std::vector<double> alpha3_values;
};

struct AlphaPoint {
  double alpha1 = 0.0;
  double alpha2 = 0.0;
  double alpha3 = 0.0;
  auto operator<=>(const AlphaPoint&) const = default;
};

struct AblationGrid {
  std::vector<AlphaSweep> sweeps;
  RunConfig base;
  std::vector<std::uint64_t> seeds;

  void validate() const;
  std::vector<AlphaPoint> points() const;  // sorted, unique
};

AblationGrid ablation_grid_from_json(const Json& j);
AblationGrid load_ablation_grid(const std::filesystem::path& path);

struct AblationRow {
  AlphaPoint alphas;
  std::uint64_t seed = 0;
  MetricsReport final_metrics;
};

// Runs every (point, seed) with everything else held fixed; each run goes to
// out_dir/<point>_s<seed>. Rows sorted by (alpha1, alpha2, alpha3, seed).
// `parallel_runs` distinct runs may execute concurrently.
std::vector<AblationRow> ablate(const AblationGrid& grid, const std::filesystem::path& out_dir,
                                int parallel_runs = 1);
std::string ablation_csv(const std::vector<AblationRow>& rows);

struct ComparisonSeedResult {
  std::uint64_t seed = 0;
  MetricsReport a;
  MetricsReport b;
};

// Metrics compared between two configurations, b minus a.
inline constexpr std::array<const char*, 4> kComparedMetrics = {"accuracy", "cacr", "oscr",
                                                                 "position_bias"};
double compared_metric(const MetricsReport& r, int index);

struct ComparisonReport {
  std::vector<ComparisonSeedResult> per_seed;
  std::array<double, 4> mean_delta{};  // b - a, indexed like kComparedMetrics
  std::array<int, 4> a_wins{};          // seeds where a is strictly higher
  std::array<int, 4> b_wins{};          // seeds where b is strictly higher

  // One row per run (2 per seed) plus one summary row.
  std::string csv() const;
  Json summary_json() const;
};

// Throws ConfigError when the configs differ outside the reward section
// (run_id and out_dir excepted). Seeds override both env.seed and
// train.seed. Runs are written to out_dir/{a,b}_s<seed>.
ComparisonReport compare(const RunConfig& config_a, const RunConfig& config_b,
                         const std::vector<std::uint64_t>& seeds,
                         const std::filesystem::path& out_dir, int parallel_runs = 1);

// Final metric row of every run directory below `runs_dir`, one CSV row each.
std::string report(const std::filesystem::path& runs_dir);

// Reads a run directory back.
std::vector<MetricPoint> load_metric_series(const std::filesystem::path& csv_path);

struct ReplayResult {
  long trajectories = 0;
  long mismatches = 0;
  long second_pass_fields = 0;  // trajectories carrying a second pass
};

// Recomputes every logged reward breakdown from the logged trajectory fields
// and the run's reward configuration; counts exact mismatches.
ReplayResult replay_rewards(const std::filesystem::path& run_dir);

}  // namespace acre

#endif  // ACRE_HARNESS_HPP_
