#include <benchmark/benchmark.h>

#include <filesystem>

#include "acre/harness.hpp"

namespace {

using namespace acre;

TaskInstance bench_instance() {
  EnvConfig cfg;
  cfg.n_train = 1;
  cfg.n_eval = 1;
  return generate_dataset(cfg).train.front();
}

PolicyParams bench_params() {
  auto p = PolicyParams::zeros(4, 6);
  p.w_ev = 2.0;
  p.w_match = 1.0;
  p.b_pos = {0.1, -0.2, 0.4, 0.0};
  return p;
}

void BM_SampleTrajectory(benchmark::State& state) {
  const auto inst = bench_instance();
  const auto p = bench_params();
  Rng rng(1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(sample_trajectory(p, inst, SampleMode::kStochastic, rng));
  }
}
BENCHMARK(BM_SampleTrajectory);

void BM_GradLogprob(benchmark::State& state) {
  const auto inst = bench_instance();
  const auto p = bench_params();
  Rng rng(2);
  const auto t = sample_trajectory(p, inst, SampleMode::kStochastic, rng);
  for (auto _ : state) benchmark::DoNotOptimize(grad_logprob(p, inst, t));
}
BENCHMARK(BM_GradLogprob);

void BM_ObjectiveAndGrad(benchmark::State& state) {
  const auto inst = bench_instance();
  const auto p = bench_params();
  Rng rng(3);
  GroupBatch batch;
  batch.instance_id = inst.id;
  std::vector<double> rewards;
  for (int i = 0; i < state.range(0); ++i) {
    batch.trajectories.push_back(sample_trajectory(p, inst, SampleMode::kStochastic, rng));
    rewards.push_back(static_cast<double>(i % 3));
  }
  batch.advantages = normalize_advantages(rewards, 1e-6);
  const TrainConfig cfg;
  const InstanceLookup lookup = [&](InstanceId) -> const TaskInstance& { return inst; };
  for (auto _ : state) benchmark::DoNotOptimize(objective_and_grad(batch, p, p, cfg, lookup));
}
BENCHMARK(BM_ObjectiveAndGrad)->Arg(8)->Arg(64);

void BM_Evaluate(benchmark::State& state) {
  EnvConfig cfg;
  cfg.n_train = 1;
  cfg.n_eval = 500;
  const auto ds = generate_dataset(cfg);
  const auto p = bench_params();
  for (auto _ : state) benchmark::DoNotOptimize(evaluate(p, ds.eval, {}));
}
BENCHMARK(BM_Evaluate)->Unit(benchmark::kMillisecond);

void BM_TrainRun(benchmark::State& state) {
  RunConfig cfg;
  cfg.train.steps = static_cast<int>(state.range(0));
  cfg.harness.eval_every = cfg.train.steps;
  cfg.harness.out_dir = std::filesystem::temp_directory_path() / "acre_bench_run";
  for (auto _ : state) benchmark::DoNotOptimize(train(cfg));
  std::filesystem::remove_all(cfg.harness.out_dir);
}
BENCHMARK(BM_TrainRun)->Arg(100)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
