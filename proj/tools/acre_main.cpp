// Command-line front end: train, eval, ablate, compare, report, dataset.
//
// Exit codes: 0 success, 1 validation/config error, 2 runtime/numeric error.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "acre/errors.hpp"
#include "acre/harness.hpp"
#include "acre/serialize.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

void warn_reward(const acre::RunConfig& cfg) {
  for (const auto& w : cfg.reward().warnings()) std::cerr << "warning: " << w << "\n";
}

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      std::size_t used = 0;
      seeds.push_back(std::stoull(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::logic_error&) {
      throw acre::ConfigError("bad seed '" + item + "' in --seeds");
    }
  }
  if (seeds.empty()) throw acre::ConfigError("--seeds is empty");
  return seeds;
}

void print_metrics(const acre::RunRecord& rec) {
  std::cout << acre::metrics_csv_header() << "\n";
  for (const auto& pt : rec.metric_series) {
    std::cout << acre::metrics_csv_row(pt.step, pt.report) << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"GRPO / answer-consistent RL laboratory on a synthetic multiple-choice task"};
  app.require_subcommand(1);

  std::string config_path, out_dir, checkpoint_path, grid_path, config_a, config_b, seeds_text,
      runs_dir, out_csv;
  int jobs = 1;

  auto* train_cmd = app.add_subcommand("train", "Run one training job");
  train_cmd->add_option("--config", config_path, "Run configuration (JSON)")->required()->check(CLI::ExistingFile);
  train_cmd->add_option("--out", out_dir, "Output directory")->required();

  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint on the eval split");
  eval_cmd->add_option("--checkpoint", checkpoint_path, "Checkpoint (JSON)")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--config", config_path, "Run configuration (JSON)")->required()->check(CLI::ExistingFile);

  auto* ablate_cmd = app.add_subcommand("ablate", "Run a consistency-level ablation grid");
  ablate_cmd->add_option("--grid", grid_path, "Grid file (JSON)")->required()->check(CLI::ExistingFile);
  ablate_cmd->add_option("--out", out_dir, "Output directory")->required();
  ablate_cmd->add_option("--jobs", jobs, "Runs executed in parallel")->check(CLI::PositiveNumber);

  auto* compare_cmd = app.add_subcommand("compare", "Compare two reward settings across seeds");
  compare_cmd->add_option("--config-a", config_a, "Baseline configuration")->required()->check(CLI::ExistingFile);
  compare_cmd->add_option("--config-b", config_b, "Candidate configuration")->required()->check(CLI::ExistingFile);
  compare_cmd->add_option("--seeds", seeds_text, "Comma-separated seeds")->required();
  compare_cmd->add_option("--out", out_dir, "Output directory")->required();
  compare_cmd->add_option("--jobs", jobs, "Runs executed in parallel")->check(CLI::PositiveNumber);

  auto* report_cmd = app.add_subcommand("report", "Collect final metrics of finished runs");
  report_cmd->add_option("--runs", runs_dir, "Directory containing run directories")->required();
  report_cmd->add_option("--out", out_csv, "Output CSV")->required();

  auto* dataset_cmd = app.add_subcommand("dataset", "Write the generated dataset as JSON Lines");
  dataset_cmd->add_option("--config", config_path, "Run configuration (JSON)")->required()->check(CLI::ExistingFile);
  dataset_cmd->add_option("--out", out_dir, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  try {
    if (*train_cmd) {
      auto cfg = acre::load_run_config(config_path);
      warn_reward(cfg);
      cfg.harness.out_dir = out_dir;
      const auto rec = acre::train(cfg);
      print_metrics(rec);
      std::cerr << "run " << cfg.harness.run_id << " finished in " << rec.wall_time << " s\n";
    } else if (*eval_cmd) {
      const auto cfg = acre::load_run_config(config_path);
      const auto params = acre::load_checkpoint(checkpoint_path);
      const auto ds = acre::generate_dataset(cfg.env);
      const auto rep = acre::evaluate(params, ds.eval, cfg.eval_options());
      std::cout << acre::metrics_csv_header() << "\n" << acre::metrics_csv_row(-1, rep) << "\n";
    } else if (*ablate_cmd) {
      const auto grid = acre::load_ablation_grid(grid_path);
      warn_reward(grid.base);
      const auto rows = acre::ablate(grid, out_dir, jobs);
      const auto table = acre::ablation_csv(rows);
      acre::write_text_file(fs::path(out_dir) / "ablation.csv", table);
      std::cout << table;
    } else if (*compare_cmd) {
      const auto a = acre::load_run_config(config_a);
      const auto b = acre::load_run_config(config_b);
      const auto rep = acre::compare(a, b, parse_seed_list(seeds_text), out_dir, jobs);
      acre::write_text_file(fs::path(out_dir) / "comparison.csv", rep.csv());
      acre::write_text_file(fs::path(out_dir) / "comparison_summary.json",
                            rep.summary_json().dump(2) + "\n");
      std::cout << rep.csv();
    } else if (*report_cmd) {
      const auto table = acre::report(runs_dir);
      acre::write_text_file(out_csv, table);
      std::cout << table;
    } else if (*dataset_cmd) {
      const auto cfg = acre::load_run_config(config_path);
      const auto ds = acre::generate_dataset(cfg.env);
      fs::create_directories(out_dir);
      acre::write_dataset_jsonl(fs::path(out_dir) / "train.jsonl", ds.train);
      acre::write_dataset_jsonl(fs::path(out_dir) / "eval.jsonl", ds.eval);
    }
  } catch (const acre::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.is_validation() ? kExitValidation : kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return 0;
}
