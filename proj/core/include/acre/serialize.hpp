#ifndef ACRE_SERIALIZE_HPP_
#define ACRE_SERIALIZE_HPP_

// JSON forms of every persisted object: dataset lines, checkpoints,
// trajectory log lines and the run configuration file. Readers throw
// ParseError with the offending line and field.

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "acre/env.hpp"
#include "acre/grpo.hpp"
#include "acre/policy.hpp"
#include "acre/rewards.hpp"

namespace acre {

using Json = nlohmann::ordered_json;

Json to_json(const Permutation& p);
Json to_json(const TaskInstance& inst);
Json to_json(const PolicyParams& params);
Json to_json(const Trajectory& traj);
Json to_json(const RewardBreakdown& r);
Json to_json(const Indicators& ind);

// `where` prefixes error messages, e.g. "trajectories.jsonl:12".
Permutation permutation_from_json(const Json& j, const std::string& where);
TaskInstance instance_from_json(const Json& j, const std::string& where);
PolicyParams params_from_json(const Json& j, const std::string& where);
Trajectory trajectory_from_json(const Json& j, const std::string& where);
RewardBreakdown reward_from_json(const Json& j, const std::string& where);

void write_dataset_jsonl(const std::filesystem::path& path, std::span<const TaskInstance> instances);
std::vector<TaskInstance> read_dataset_jsonl(const std::filesystem::path& path);

void save_checkpoint(const std::filesystem::path& path, const PolicyParams& params);
PolicyParams load_checkpoint(const std::filesystem::path& path);

// One logged group: the GroupBatch plus the indicators used for its rewards.
struct LoggedGroup {
  int step = 0;
  GroupBatch batch;
  std::vector<std::optional<Indicators>> indicators;
};

Json group_log_line(int step, const GroupBatch& batch, const TaskInstance& instance);
LoggedGroup parse_group_log_line(const Json& j, const std::string& where);
std::vector<LoggedGroup> read_group_log(const std::filesystem::path& path);

// Reads a whole file and parses it as JSON; throws IoError / ParseError.
Json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

std::string_view mode_name(SampleMode mode);
SampleMode parse_mode(const std::string& s, const std::string& where);

}  // namespace acre

#endif  // ACRE_SERIALIZE_HPP_
