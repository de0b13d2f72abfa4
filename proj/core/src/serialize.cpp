#include "acre/serialize.hpp"

#include <fstream>
#include <sstream>

#include "acre/errors.hpp"

namespace acre {

namespace {

const Json& require(const Json& j, const char* key, const std::string& where) {
  if (!j.is_object()) throw ParseError(where + ": expected a JSON object");
  auto it = j.find(key);
  if (it == j.end()) throw ParseError(where + ": missing field '" + key + "'");
  return *it;
}

template <typename T>
T field(const Json& j, const char* key, const std::string& where) {
  const Json& v = require(j, key, where);
  try {
    return v.get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(where + ": field '" + key + "': " + e.what());
  }
}

void reject_unknown(const Json& j, std::initializer_list<const char*> allowed,
                    const std::string& where) {
  for (const auto& [key, _] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw ParseError(where + ": unknown field '" + key + "'");
  }
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return in;
}

template <typename F>
void for_each_jsonl(const std::filesystem::path& path, F&& fn) {
  auto in = open_in(path);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const std::string where = path.filename().string() + ":" + std::to_string(lineno);
    Json j;
    try {
      j = Json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(where + ": " + e.what());
    }
    fn(j, where);
  }
}

}  // namespace

std::string_view mode_name(SampleMode mode) {
  return mode == SampleMode::kGreedy ? "greedy" : "stochastic";
}

SampleMode parse_mode(const std::string& s, const std::string& where) {
  if (s == "greedy") return SampleMode::kGreedy;
  if (s == "stochastic") return SampleMode::kStochastic;
  throw ParseError(where + ": sample mode must be 'stochastic' or 'greedy', got '" + s + "'");
}

Json to_json(const Permutation& p) { return Json(p.mapping()); }

Json to_json(const TaskInstance& inst) {
  Json ev = Json::object();
  for (std::size_t i = 0; i < inst.contents.size(); ++i) {
    ev[std::to_string(inst.contents[i])] = inst.evidence[i];
  }
  return Json{{"id", inst.id},
              {"contents", inst.contents},
              {"correct_content", inst.correct_content},
              {"evidence", ev},
              {"presentation", to_json(inst.presentation)}};
}

Json to_json(const PolicyParams& p) {
  return Json{{"w_ev", p.w_ev}, {"w_match", p.w_match}, {"b_pos", p.b_pos},
              {"theta_len", p.theta_len}};
}

Json to_json(const RewardBreakdown& r) {
  return Json{{"r_base", r.r_base}, {"r_len", r.r_len}, {"r_cons", r.r_cons}, {"total", r.total}};
}

Json to_json(const Indicators& ind) {
  return Json{{"agree", ind.agree}, {"corr", ind.corr}, {"corr2", ind.corr2}};
}

Json to_json(const Trajectory& t) {
  Json j{{"trace",
          {{"supported_content", t.trace.supported_content},
           {"length_tokens", t.trace.length_tokens},
           {"length_bucket", t.trace.length_bucket}}},
         {"answer_slot", t.answer_slot},
         {"answer_content", t.answer_content},
         {"logp_old", t.logp_old},
         {"head_logps",
          {{"rationale", t.head_logps.rationale},
           {"length", t.head_logps.length},
           {"answer", t.head_logps.answer}}}};
  if (t.second_pass) {
    j["second_pass"] = {{"perm", to_json(t.second_pass->perm)},
                        {"answer2_slot", t.second_pass->answer2_slot},
                        {"answer2_content", t.second_pass->answer2_content}};
  }
  return j;
}

Permutation permutation_from_json(const Json& j, const std::string& where) {
  if (!j.is_array()) throw ParseError(where + ": permutation must be an array");
  try {
    return Permutation(j.get<std::vector<int>>());
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(where + ": permutation: " + e.what());
  } catch (const DimensionError& e) {
    throw ParseError(where + ": " + e.what());
  }
}

TaskInstance instance_from_json(const Json& j, const std::string& where) {
  reject_unknown(j, {"id", "contents", "correct_content", "evidence", "presentation"}, where);
  TaskInstance inst;
  inst.id = field<InstanceId>(j, "id", where);
  inst.contents = field<std::vector<ContentId>>(j, "contents", where);
  inst.correct_content = field<ContentId>(j, "correct_content", where);
  const Json& ev = require(j, "evidence", where);
  if (!ev.is_object() || ev.size() != inst.contents.size()) {
    throw ParseError(where + ": field 'evidence' must map every content to a score");
  }
  inst.evidence.resize(inst.contents.size());
  for (std::size_t i = 0; i < inst.contents.size(); ++i) {
    inst.evidence[i] = field<double>(ev, std::to_string(inst.contents[i]).c_str(), where + ": evidence");
  }
  inst.presentation = permutation_from_json(require(j, "presentation", where), where + ": presentation");
  try {
    inst.validate();
  } catch (const ConsistencyError& e) {
    throw ParseError(where + ": " + e.what());
  }
  return inst;
}

PolicyParams params_from_json(const Json& j, const std::string& where) {
  reject_unknown(j, {"w_ev", "w_match", "b_pos", "theta_len"}, where);
  PolicyParams p;
  p.w_ev = field<double>(j, "w_ev", where);
  p.w_match = field<double>(j, "w_match", where);
  p.b_pos = field<std::vector<double>>(j, "b_pos", where);
  p.theta_len = field<std::vector<double>>(j, "theta_len", where);
  if (p.b_pos.size() < 2) throw ParseError(where + ": field 'b_pos' needs >= 2 entries");
  if (p.theta_len.empty()) throw ParseError(where + ": field 'theta_len' is empty");
  return p;
}

Trajectory trajectory_from_json(const Json& j, const std::string& where) {
  Trajectory t;
  const Json& tr = require(j, "trace", where);
  t.trace.supported_content = field<ContentId>(tr, "supported_content", where + ": trace");
  t.trace.length_tokens = field<int>(tr, "length_tokens", where + ": trace");
  t.trace.length_bucket = field<int>(tr, "length_bucket", where + ": trace");
  t.answer_slot = field<int>(j, "answer_slot", where);
  t.answer_content = field<ContentId>(j, "answer_content", where);
  t.logp_old = field<double>(j, "logp_old", where);
  if (j.contains("head_logps")) {
    const Json& h = j["head_logps"];
    t.head_logps = {field<double>(h, "rationale", where + ": head_logps"),
                    field<double>(h, "length", where + ": head_logps"),
                    field<double>(h, "answer", where + ": head_logps")};
  }
  if (j.contains("second_pass")) {
    const Json& sp = j["second_pass"];
    t.second_pass = SecondPass{
        permutation_from_json(require(sp, "perm", where + ": second_pass"), where + ": second_pass.perm"),
        field<int>(sp, "answer2_slot", where + ": second_pass"),
        field<ContentId>(sp, "answer2_content", where + ": second_pass")};
  }
  return t;
}

RewardBreakdown reward_from_json(const Json& j, const std::string& where) {
  return {field<double>(j, "r_base", where), field<double>(j, "r_len", where),
          field<double>(j, "r_cons", where), field<double>(j, "total", where)};
}

void write_dataset_jsonl(const std::filesystem::path& path,
                         std::span<const TaskInstance> instances) {
  auto out = open_out(path);
  for (const auto& inst : instances) out << to_json(inst).dump() << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

std::vector<TaskInstance> read_dataset_jsonl(const std::filesystem::path& path) {
  std::vector<TaskInstance> out;
  for_each_jsonl(path, [&](const Json& j, const std::string& where) {
    out.push_back(instance_from_json(j, where));
  });
  return out;
}

void save_checkpoint(const std::filesystem::path& path, const PolicyParams& params) {
  write_text_file(path, to_json(params).dump(2) + "\n");
}

PolicyParams load_checkpoint(const std::filesystem::path& path) {
  return params_from_json(read_json_file(path), path.filename().string());
}

Json group_log_line(int step, const GroupBatch& batch, const TaskInstance& instance) {
  Json trajs = Json::array();
  for (std::size_t i = 0; i < batch.trajectories.size(); ++i) {
    Json t = to_json(batch.trajectories[i]);
    if (batch.trajectories[i].second_pass) {
      t["indicators"] = to_json(compute_indicators(batch.trajectories[i], instance));
    }
    t["reward"] = to_json(batch.rewards[i]);
    t["advantage"] = batch.advantages[i];
    trajs.push_back(std::move(t));
  }
  return Json{{"step", step}, {"instance_id", batch.instance_id}, {"trajectories", trajs}};
}

LoggedGroup parse_group_log_line(const Json& j, const std::string& where) {
  LoggedGroup g;
  g.step = field<int>(j, "step", where);
  g.batch.instance_id = field<InstanceId>(j, "instance_id", where);
  const Json& trajs = require(j, "trajectories", where);
  if (!trajs.is_array()) throw ParseError(where + ": field 'trajectories' must be an array");
  for (std::size_t i = 0; i < trajs.size(); ++i) {
    const std::string w = where + ": trajectories[" + std::to_string(i) + "]";
    Trajectory t = trajectory_from_json(trajs[i], w);
    t.instance_id = g.batch.instance_id;
    g.batch.trajectories.push_back(std::move(t));
    g.batch.rewards.push_back(reward_from_json(require(trajs[i], "reward", w), w + ".reward"));
    g.batch.advantages.push_back(field<double>(trajs[i], "advantage", w));
    std::optional<Indicators> ind;
    if (trajs[i].contains("indicators") && trajs[i]["indicators"].is_object()) {
      const Json& ij = trajs[i]["indicators"];
      ind = Indicators{field<bool>(ij, "agree", w), field<bool>(ij, "corr", w),
                       field<bool>(ij, "corr2", w)};
    }
    g.indicators.push_back(ind);
  }
  return g;
}

std::vector<LoggedGroup> read_group_log(const std::filesystem::path& path) {
  std::vector<LoggedGroup> out;
  for_each_jsonl(path, [&](const Json& j, const std::string& where) {
    out.push_back(parse_group_log_line(j, where));
  });
  return out;
}

Json read_json_file(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return Json::parse(ss.str());
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path.filename().string() + ": " + e.what());
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  auto out = open_out(path);
  out << text;
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace acre
