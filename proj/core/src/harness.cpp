#include "acre/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "acre/errors.hpp"

namespace fs = std::filesystem;

namespace acre {

namespace {

template <typename T>
void read_key(const Json& section, const char* key, T& dst, const std::string& where) {
  auto it = section.find(key);
  if (it == section.end()) return;
  try {
      dst = it->get<T>();
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(where + "." + key + ": " + e.what());
    }
  }

  const Json& section_or_empty(const Json& j, const char* name) {
    static const Json kEmpty = Json::object();
    auto it = j.find(name);
    if (it == j.end()) return kEmpty;
    if (!it->is_object()) throw ConfigError(std::string("section '") + name + "' must be an object");
    return *it;
  }

  void reject_unknown_keys(const Json& section, std::initializer_list<const char*> allowed,
                           const std::string& where) {
    for (const auto& [key, _] : section.items()) {
      if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
        throw ConfigError("unknown key '" + key + "' in " + where);
      }
    }
  }

  bool filesystem_safe(const std::string& s) {
    if (s.empty() || s == "." || s == "..") return false;
    return std::all_of(s.begin(), s.end(), [](char c) {
      return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
    });
  }

  void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) {
      throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
    }
  }

  std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    return out;
  }

  // Runs fn(i) for i in [0, n) on up to `workers` threads.
  template <typename F>
  void parallel_for(int n, int workers, F&& fn) {
    if (workers <= 1 || n <= 1) {
      for (int i = 0; i < n; ++i) fn(i);
      return;
    }
    std::atomic<int> next{0};
    std::mutex err_mu;
    std::exception_ptr err;
    {
      std::vector<std::jthread> pool;
      for (int w = 0; w < std::min(workers, n); ++w) {
        pool.emplace_back([&] {
          for (int i = next++; i < n; i = next++) {
            try {
              fn(i);
            } catch (...) {
              std::lock_guard lock(err_mu);
              if (!err) err = std::current_exception();
            }
          }
        });
      }
    }
    if (err) std::rethrow_exception(err);
  }

  std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
  }

  std::string short_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
  }

  RunConfig with_seed(RunConfig cfg, std::uint64_t seed) {
    cfg.env.seed = seed;
    cfg.train.seed = seed;
    return cfg;
  }

  }  // namespace

  // ---------------------------------------------------------------------------
  // Configuration

  void RunConfig::validate() const {
    env.validate();
    train.validate();
    const auto& h = harness;
    if (h.eval_every < 1) throw ConfigError("harness.eval_every must be >= 1");
    if (!filesystem_safe(h.run_id)) {
      throw ConfigError("harness.run_id must be non-empty and use only [A-Za-z0-9._-]");
    }
    if (h.n_shuffles < 1) throw ConfigError("harness.n_shuffles must be >= 1");
    if (h.n_probes < 100) throw ConfigError("harness.n_probes must be >= 100");
    if (h.threads < 1) throw ConfigError("harness.threads must be >= 1");
    h.buckets.validate();
    if (!h.init.b_pos.empty() && static_cast<int>(h.init.b_pos.size()) != env.num_options) {
      throw ConfigError("harness.init.b_pos must have K entries");
    }
    if (!h.init.theta_len.empty() && static_cast<int>(h.init.theta_len.size()) != h.buckets.size()) {
      throw ConfigError("harness.init.theta_len must have one entry per length bucket");
    }
    if (!initial_params().all_finite()) throw ConfigError("harness.init must be finite");
  }

  PolicyParams RunConfig::initial_params() const {
    auto p = PolicyParams::zeros(env.num_options, harness.buckets.size());
    p.w_ev = harness.init.w_ev;
    p.w_match = harness.init.w_match;
    if (!harness.init.b_pos.empty()) p.b_pos = harness.init.b_pos;
    if (!harness.init.theta_len.empty()) p.theta_len = harness.init.theta_len;
    return p;
  }

  EvalOptions RunConfig::eval_options() const {
    EvalOptions o;
    o.n_shuffles = harness.n_shuffles;
    o.n_probes = harness.n_probes;
    o.seed = derive_seed(train.seed, 0xe7a1);
    o.buckets = harness.buckets;
    return o;
  }

  RunConfig run_config_from_json(const Json& j) {
    if (!j.is_object()) throw ConfigError("run configuration must be a JSON object");
    reject_unknown_keys(j, {"env", "train", "reward", "harness"}, "run configuration");
    RunConfig cfg;

    const Json& env = section_or_empty(j, "env");
    reject_unknown_keys(env, {"K", "C", "sigma_e", "bias_index", "bias_prob", "n_train", "n_eval", "seed"},
                        "section 'env'");
    read_key(env, "K", cfg.env.num_options, "env");
    read_key(env, "C", cfg.env.content_pool, "env");
    read_key(env, "sigma_e", cfg.env.sigma_e, "env");
    read_key(env, "bias_index", cfg.env.bias_index, "env");
    read_key(env, "bias_prob", cfg.env.bias_prob, "env");
    read_key(env, "n_train", cfg.env.n_train, "env");
    read_key(env, "n_eval", cfg.env.n_eval, "env");
    read_key(env, "seed", cfg.env.seed, "env");

    const Json& tr = section_or_empty(j, "train");
    reject_unknown_keys(tr, {"G", "clip_eps", "beta", "adv_eps", "lr", "inner_epochs", "steps", "seed",
                             "second_pass_mode"},
                        "section 'train'");
    read_key(tr, "G", cfg.train.group_size, "train");
    read_key(tr, "clip_eps", cfg.train.clip_eps, "train");
    read_key(tr, "beta", cfg.train.beta, "train");
    read_key(tr, "adv_eps", cfg.train.adv_eps, "train");
    read_key(tr, "lr", cfg.train.lr, "train");
    read_key(tr, "inner_epochs", cfg.train.inner_epochs, "train");
    read_key(tr, "steps", cfg.train.steps, "train");
    read_key(tr, "seed", cfg.train.seed, "train");
    std::string mode(mode_name(cfg.train.second_pass_mode));
    read_key(tr, "second_pass_mode", mode, "train");
    try {
      cfg.train.second_pass_mode = parse_mode(mode, "train.second_pass_mode");
    } catch (const ParseError& e) {
      throw ConfigError(e.what());
    }

    const Json& rw = section_or_empty(j, "reward");
    reject_unknown_keys(rw, {"alpha1", "alpha2", "alpha3", "omega", "l_min", "l_max", "consistency_enabled"},
                        "section 'reward'");
    auto& r = cfg.reward();
    read_key(rw, "alpha1", r.alpha1, "reward");
    read_key(rw, "alpha2", r.alpha2, "reward");
    read_key(rw, "alpha3", r.alpha3, "reward");
    read_key(rw, "omega", r.omega, "reward");
    read_key(rw, "l_min", r.l_min, "reward");
    read_key(rw, "l_max", r.l_max, "reward");
    read_key(rw, "consistency_enabled", r.consistency_enabled, "reward");

    const Json& hs = section_or_empty(j, "harness");
    reject_unknown_keys(hs, {"eval_every", "run_id", "out_dir", "n_shuffles", "n_probes", "threads",
                             "length_buckets", "init"},
                        "section 'harness'");
    auto& h = cfg.harness;
    read_key(hs, "eval_every", h.eval_every, "harness");
    read_key(hs, "run_id", h.run_id, "harness");
    std::string out_dir;
    read_key(hs, "out_dir", out_dir, "harness");
    h.out_dir = out_dir;
    read_key(hs, "n_shuffles", h.n_shuffles, "harness");
    read_key(hs, "n_probes", h.n_probes, "harness");
    read_key(hs, "threads", h.threads, "harness");
    read_key(hs, "length_buckets", h.buckets.midpoints, "harness");
    const Json& init = section_or_empty(hs, "init");
    reject_unknown_keys(init, {"w_ev", "w_match", "b_pos", "theta_len"}, "section 'harness.init'");
    read_key(init, "w_ev", h.init.w_ev, "harness.init");
    read_key(init, "w_match", h.init.w_match, "harness.init");
    read_key(init, "b_pos", h.init.b_pos, "harness.init");
    read_key(init, "theta_len", h.init.theta_len, "harness.init");

    cfg.validate();
    return cfg;
  }

  Json to_json(const RunConfig& cfg) {
    const auto& e = cfg.env;
    const auto& t = cfg.train;
    const auto& r = cfg.reward();
    const auto& h = cfg.harness;
    return Json{
        {"env",
         {{"K", e.num_options}, {"C", e.content_pool}, {"sigma_e", e.sigma_e},
          {"bias_index", e.bias_index}, {"bias_prob", e.bias_prob}, {"n_train", e.n_train},
          {"n_eval", e.n_eval}, {"seed", e.seed}}},
        {"train",
         {{"G", t.group_size}, {"clip_eps", t.clip_eps}, {"beta", t.beta}, {"adv_eps", t.adv_eps},
          {"lr", t.lr}, {"inner_epochs", t.inner_epochs}, {"steps", t.steps}, {"seed", t.seed},
          {"second_pass_mode", mode_name(t.second_pass_mode)}}},
        {"reward",
         {{"alpha1", r.alpha1}, {"alpha2", r.alpha2}, {"alpha3", r.alpha3}, {"omega", r.omega},
          {"l_min", r.l_min}, {"l_max", r.l_max}, {"consistency_enabled", r.consistency_enabled}}},
        {"harness",
         {{"eval_every", h.eval_every}, {"run_id", h.run_id}, {"out_dir", h.out_dir.string()},
          {"n_shuffles", h.n_shuffles}, {"n_probes", h.n_probes}, {"threads", h.threads},
          {"length_buckets", h.buckets.midpoints},
          {"init",
           {{"w_ev", h.init.w_ev}, {"w_match", h.init.w_match}, {"b_pos", h.init.b_pos},
            {"theta_len", h.init.theta_len}}}}}};
  }

  RunConfig load_run_config(const fs::path& path) {
    Json j;
    try {
      j = read_json_file(path);
    } catch (const ParseError& e) {
      throw ConfigError(e.what());
    }
    return run_config_from_json(j);
  }

  // ---------------------------------------------------------------------------
  // Training

  RunRecord train(const RunConfig& config) {
    config.validate();
    const auto started = std::chrono::steady_clock::now();
    const fs::path& out = config.harness.out_dir;
    ensure_dir(out);
    write_text_file(out / "config.json", to_json(config).dump(2) + "\n");

    const Dataset ds = generate_dataset(config.env);
    const auto& tc = config.train;
    const auto& buckets = config.harness.buckets;
    const EvalOptions eval_opts = config.eval_options();
    const int g = tc.group_size;
    const int k = config.env.num_options;

    PolicyParams params = config.initial_params();
    const PolicyParams ref = params;

    RunRecord rec;
    rec.config = config;
    rec.group_log_path = out / "trajectories.jsonl";
    auto metrics_out = open_out(out / "metrics.csv");
    auto log_out = open_out(rec.group_log_path);
    metrics_out << metrics_csv_header() << '\n';

    auto run_eval = [&](int step) {
      MetricPoint pt{step, evaluate(params, ds.eval, eval_opts)};
      metrics_out << metrics_csv_row(step, pt.report) << '\n';
      rec.metric_series.push_back(std::move(pt));
    };
    const InstanceLookup lookup = [&](InstanceId id) -> const TaskInstance& { return ds.find(id); };

    int step = 0;
    try {
    run_eval(0);
    for (; step < tc.steps; ++step) {
      const TaskInstance& inst = ds.train[step % ds.train.size()];
      GroupBatch batch;
      batch.instance_id = inst.id;
      batch.trajectories.resize(g);
      batch.rewards.resize(g);

      parallel_for(g, config.harness.threads, [&](int i) {
        Rng rng(derive_seed(tc.seed, static_cast<std::uint64_t>(step), static_cast<std::uint64_t>(i)));
        Trajectory traj = sample_trajectory(params, inst, SampleMode::kStochastic, rng, buckets);
        if (tc.reward.consistency_enabled) {
          auto perm = random_nonidentity_perm(k, rng);
          const auto second =
              second_pass_answer(params, inst, perm, traj.trace, tc.second_pass_mode, rng);
          traj.second_pass = SecondPass{std::move(perm), second.slot, second.content};
        }
        batch.rewards[i] = total_reward(traj, inst, tc.reward, buckets);
        batch.trajectories[i] = std::move(traj);
      });

      std::vector<double> totals(g);
      for (int i = 0; i < g; ++i) totals[i] = batch.rewards[i].total;
      batch.advantages = normalize_advantages(totals, tc.adv_eps);

      for (int epoch = 0; epoch < tc.inner_epochs; ++epoch) {
        const auto obj = objective_and_grad(batch, params, ref, tc, lookup);
        if (!std::isfinite(obj.value) || !obj.grad.all_finite()) {
          throw NumericError("objective or gradient is not finite");
        }
        params = sgd_step(params, obj.grad, tc.lr);
        if (!params.all_finite()) {
          throw NumericError("parameters diverged to non-finite values");
        }
      }

      log_out << group_log_line(step, batch, inst).dump() << '\n';
      const int done = step + 1;
      if (done % config.harness.eval_every == 0 || done == tc.steps) run_eval(done);
    }
  } catch (const NumericError& e) {
    throw NumericError("step " + std::to_string(step) + ": " + e.what());
  }

  save_checkpoint(out / "checkpoint.json", params);
  if (!metrics_out || !log_out) throw IoError("write failed in " + out.string());
  rec.final_params = std::move(params);
  rec.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return rec;
}

// ---------------------------------------------------------------------------
// Ablation

void AblationGrid::validate() const {
  if (sweeps.empty()) throw ConfigError("ablation grid has no sweeps");
  for (const auto& s : sweeps) {
    if (s.alpha1_values.empty() || s.alpha2_values.empty() || s.alpha3_values.empty()) {
      throw ConfigError("every ablation sweep needs non-empty alpha1, alpha2 and alpha3 values");
    }
  }
  if (seeds.empty()) throw ConfigError("ablation grid has no seeds");
  base.validate();
}

std::vector<AlphaPoint> AblationGrid::points() const {
  std::vector<AlphaPoint> pts;
  for (const auto& s : sweeps) {
    for (double a1 : s.alpha1_values) {
      for (double a2 : s.alpha2_values) {
        for (double a3 : s.alpha3_values) pts.push_back({a1, a2, a3});
      }
    }
  }
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

AblationGrid ablation_grid_from_json(const Json& j) {
  if (!j.is_object()) throw ConfigError("ablation grid must be a JSON object");
  reject_unknown_keys(j, {"base", "seeds", "sweeps"}, "ablation grid");
  AblationGrid grid;
  if (!j.contains("base")) throw ConfigError("ablation grid needs a 'base' run configuration");
  grid.base = run_config_from_json(j.at("base"));
  read_key(j, "seeds", grid.seeds, "grid");
  if (!j.contains("sweeps") || !j.at("sweeps").is_array()) {
    throw ConfigError("ablation grid needs a 'sweeps' array");
  }
  for (const auto& s : j.at("sweeps")) {
    if (!s.is_object()) throw ConfigError("each sweep must be an object");
    reject_unknown_keys(s, {"alpha1", "alpha2", "alpha3"}, "sweep");
    AlphaSweep sw;
    read_key(s, "alpha1", sw.alpha1_values, "sweep");
    read_key(s, "alpha2", sw.alpha2_values, "sweep");
    read_key(s, "alpha3", sw.alpha3_values, "sweep");
    grid.sweeps.push_back(std::move(sw));
  }
  grid.validate();
  return grid;
}

AblationGrid load_ablation_grid(const fs::path& path) {
  Json j;
  try {
    j = read_json_file(path);
  } catch (const ParseError& e) {
    throw ConfigError(e.what());
  }
  return ablation_grid_from_json(j);
}

std::vector<AblationRow> ablate(const AblationGrid& grid, const fs::path& out_dir,
                                int parallel_runs) {
  grid.validate();
  ensure_dir(out_dir);
  const auto pts = grid.points();
  auto seeds = grid.seeds;
  std::sort(seeds.begin(), seeds.end());
  seeds.erase(std::unique(seeds.begin(), seeds.end()), seeds.end());

  std::vector<AblationRow> rows;
  for (const auto& p : pts) {
    for (auto s : seeds) rows.push_back({p, s, {}});
  }
  parallel_for(static_cast<int>(rows.size()), parallel_runs, [&](int i) {
    auto& row = rows[i];
    RunConfig cfg = with_seed(grid.base, row.seed);
    cfg.reward().alpha1 = row.alphas.alpha1;
    cfg.reward().alpha2 = row.alphas.alpha2;
    cfg.reward().alpha3 = row.alphas.alpha3;
    cfg.harness.run_id = "a1_" + short_double(row.alphas.alpha1) + "_a2_" +
                         short_double(row.alphas.alpha2) + "_a3_" +
                         short_double(row.alphas.alpha3) + "_s" + std::to_string(row.seed);
    cfg.harness.out_dir = out_dir / cfg.harness.run_id;
    row.final_metrics = train(cfg).final_metrics();
  });
  return rows;
}

std::string ablation_csv(const std::vector<AblationRow>& rows) {
  std::string out = "alpha1,alpha2,alpha3,seed,accuracy,cacr,oscr,position_bias,mean_trace_length";
  for (int c = 0; c < kNumConsistencyCases; ++c) {
    out += ",case_";
    out += case_name(static_cast<ConsistencyCase>(c));
  }
  out += '\n';
  for (const auto& r : rows) {
    const auto& m = r.final_metrics;
    out += short_double(r.alphas.alpha1) + "," + short_double(r.alphas.alpha2) + "," +
           short_double(r.alphas.alpha3) + "," + std::to_string(r.seed) + "," +
           fmt_double(m.accuracy) + "," + fmt_double(m.cacr) + "," + fmt_double(m.oscr) + "," +
           fmt_double(m.position_bias) + "," + fmt_double(m.mean_trace_length);
    for (long c : m.reward_case_counts) out += "," + std::to_string(c);
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// Comparison

double compared_metric(const MetricsReport& r, int index) {
  switch (index) {
    case 0: return r.accuracy;
    case 1: return r.cacr;
    case 2: return r.oscr;
    case 3: return r.position_bias;
    default: throw DimensionError("no compared metric with index " + std::to_string(index));
  }
}

std::string ComparisonReport::csv() const {
  std::string out = "kind,seed,config";
  for (const char* m : kComparedMetrics) out += std::string(",") + m;
  out += '\n';
  for (const auto& s : per_seed) {
    for (const auto& [label, rep] : {std::pair{"a", &s.a}, std::pair{"b", &s.b}}) {
      out += "run," + std::to_string(s.seed) + "," + label;
      for (int m = 0; m < 4; ++m) out += "," + fmt_double(compared_metric(*rep, m));
      out += '\n';
    }
  }
  out += "summary,,mean_b_minus_a";
  for (double d : mean_delta) out += "," + fmt_double(d);
  out += '\n';
  return out;
}

Json ComparisonReport::summary_json() const {
  Json j = Json::object();
  Json seeds = Json::array();
  for (const auto& s : per_seed) {
    Json d = Json::object();
    d["seed"] = s.seed;
    for (int m = 0; m < 4; ++m) {
      d[std::string("delta_") + kComparedMetrics[m]] = compared_metric(s.b, m) - compared_metric(s.a, m);
    }
    seeds.push_back(std::move(d));
  }
  j["per_seed"] = std::move(seeds);
  for (int m = 0; m < 4; ++m) {
    j["metrics"][kComparedMetrics[m]] = {
        {"mean_delta_b_minus_a", mean_delta[m]}, {"a_wins", a_wins[m]}, {"b_wins", b_wins[m]},
        {"ties", static_cast<int>(per_seed.size()) - a_wins[m] - b_wins[m]}};
  }
  return j;
}

ComparisonReport compare(const RunConfig& config_a, const RunConfig& config_b,
                         const std::vector<std::uint64_t>& seeds, const fs::path& out_dir,
                         int parallel_runs) {
  config_a.validate();
  config_b.validate();
  if (seeds.empty()) throw ConfigError("compare needs at least one seed");
  {
    RunConfig aligned = config_b;
    aligned.reward() = config_a.reward();
    aligned.harness.run_id = config_a.harness.run_id;
    aligned.harness.out_dir = config_a.harness.out_dir;
    if (!(aligned.env == config_a.env && aligned.train == config_a.train &&
          aligned.harness == config_a.harness)) {
      throw ConfigError("compared configurations may differ only in their reward section");
    }
  }
  ensure_dir(out_dir);

  ComparisonReport rep;
  rep.per_seed.resize(seeds.size());
  parallel_for(static_cast<int>(2 * seeds.size()), parallel_runs, [&](int job) {
    const auto idx = static_cast<std::size_t>(job / 2);
    const bool is_b = job % 2 == 1;
    RunConfig cfg = with_seed(is_b ? config_b : config_a, seeds[idx]);
    cfg.harness.run_id = std::string(is_b ? "b" : "a") + "_s" + std::to_string(seeds[idx]);
    cfg.harness.out_dir = out_dir / cfg.harness.run_id;
    auto metrics = train(cfg).final_metrics();
    rep.per_seed[idx].seed = seeds[idx];
    (is_b ? rep.per_seed[idx].b : rep.per_seed[idx].a) = metrics;
  });

  for (int m = 0; m < 4; ++m) {
    double sum = 0.0;
    for (const auto& s : rep.per_seed) {
      const double a = compared_metric(s.a, m);
      const double b = compared_metric(s.b, m);
      sum += b - a;
      if (a > b) ++rep.a_wins[m];
      if (b > a) ++rep.b_wins[m];
    }
    rep.mean_delta[m] = sum / static_cast<double>(rep.per_seed.size());
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Reading runs back

std::vector<MetricPoint> load_metric_series(const fs::path& csv_path) {
  std::ifstream in(csv_path);
  if (!in) throw IoError("cannot open " + csv_path.string());
  std::string line;
  if (!std::getline(in, line) || line != metrics_csv_header()) {
    throw ParseError(csv_path.filename().string() + ":1: unexpected metric header");
  }
  std::vector<MetricPoint> out;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      auto [step, rep] = parse_metrics_csv_row(line);
      out.push_back({step, rep});
    } catch (const ParseError& e) {
      throw ParseError(csv_path.filename().string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

std::string report(const fs::path& runs_dir) {
  if (!fs::is_directory(runs_dir)) throw IoError("not a directory: " + runs_dir.string());
  std::vector<fs::path> found;
  for (const auto& entry : fs::recursive_directory_iterator(runs_dir)) {
    if (entry.is_regular_file() && entry.path().filename() == "metrics.csv") {
      found.push_back(entry.path());
    }
  }
  if (found.empty()) throw EmptySetError("no metrics.csv below " + runs_dir.string());
  std::sort(found.begin(), found.end());

  std::string out = "run," + metrics_csv_header() + '\n';
  for (const auto& p : found) {
    const auto series = load_metric_series(p);
    if (series.empty()) continue;
    const auto run = fs::relative(p.parent_path(), runs_dir).generic_string();
    out += (run == "." ? std::string(".") : run) + "," +
           metrics_csv_row(series.back().step, series.back().report) + '\n';
  }
  return out;
}

ReplayResult replay_rewards(const fs::path& run_dir) {
  const RunConfig cfg = load_run_config(run_dir / "config.json");
  const Dataset ds = generate_dataset(cfg.env);
  ReplayResult res;
  for (const auto& group : read_group_log(run_dir / "trajectories.jsonl")) {
    const TaskInstance& inst = ds.find(group.batch.instance_id);
    for (std::size_t i = 0; i < group.batch.trajectories.size(); ++i) {
      const auto& traj = group.batch.trajectories[i];
      ++res.trajectories;
      if (traj.second_pass) ++res.second_pass_fields;
      RewardBreakdown again;
      try {
        again = total_reward(traj, inst, cfg.reward(), cfg.harness.buckets);
      } catch (const Error&) {
        ++res.mismatches;
        continue;
      }
      if (!(again == group.batch.rewards[i])) ++res.mismatches;
    }
  }
  return res;
}

}  // namespace acre
