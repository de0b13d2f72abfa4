#include "acre/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "acre/errors.hpp"

namespace acre {

namespace {

struct ShuffleOutcome {
  Trajectory first;
  std::vector<SecondAnswer> shuffled;
};

ShuffleOutcome decode_with_shuffles(const PolicyParams& params, const TaskInstance& inst,
                                    int n_shuffles, std::uint64_t base_seed,
                                    const LengthBuckets& buckets) {
  // Per-instance stream so the outcome does not depend on evaluation order.
  Rng rng(derive_seed(base_seed, static_cast<std::uint64_t>(inst.id)));
  ShuffleOutcome out;
  out.first = sample_trajectory(params, inst, SampleMode::kGreedy, rng, buckets);
  out.shuffled.reserve(n_shuffles);
  for (int j = 0; j < n_shuffles; ++j) {
    const auto perm = random_nonidentity_perm(inst.num_options(), rng);
    out.shuffled.push_back(
        second_pass_answer(params, inst, perm, out.first.trace, SampleMode::kGreedy, rng));
  }
  return out;
}

bool shuffle_consistent(const ShuffleOutcome& o) {
  for (const auto& s : o.shuffled) {
    if (s.content != o.first.answer_content) return false;
  }
  return true;
}

}  // namespace

double cacr(std::span<const Trajectory> trajectories) {
  if (trajectories.empty()) throw EmptySetError("CACR of an empty trajectory set");
  long consistent = 0;
  for (const auto& t : trajectories) {
    if (t.answer_content == t.trace.supported_content) ++consistent;
  }
  return static_cast<double>(consistent) / static_cast<double>(trajectories.size());
}

double oscr(const PolicyParams& params, std::span<const TaskInstance> split, int n_shuffles,
            Rng& rng, const LengthBuckets& buckets) {
  if (split.empty()) throw EmptySetError("OSCR of an empty split");
  if (n_shuffles < 1) throw PreconditionError("OSCR needs n_shuffles >= 1");
  const std::uint64_t base = rng();
  long consistent = 0;
  for (const auto& inst : split) {
    if (shuffle_consistent(decode_with_shuffles(params, inst, n_shuffles, base, buckets))) {
      ++consistent;
    }
  }
  return static_cast<double>(consistent) / static_cast<double>(split.size());
}

double accuracy(const PolicyParams& params, std::span<const TaskInstance> split,
                const LengthBuckets& buckets) {
  if (split.empty()) throw EmptySetError("accuracy of an empty split");
  Rng unused(0);
  long correct = 0;
  for (const auto& inst : split) {
    const auto t = sample_trajectory(params, inst, SampleMode::kGreedy, unused, buckets);
    if (t.answer_content == inst.correct_content) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(split.size());
}

double position_bias(const PolicyParams& params, int k, int b, int n_probes, Rng& rng) {
  if (n_probes < 100) throw PreconditionError("position_bias needs n_probes >= 100");
  if (params.num_options() != k || params.num_buckets() != b) {
    throw DimensionError("position_bias: parameter shape does not match (K, B)");
  }
  if (!params.all_finite()) throw NumericError("policy parameters are not finite");

  TaskInstance probe;
  probe.contents.resize(k);
  for (int i = 0; i < k; ++i) probe.contents[i] = i;
  probe.evidence.assign(k, 0.0);

  std::vector<long> counts(k, 0);
  for (int n = 0; n < n_probes; ++n) {
    probe.presentation = random_perm(k, rng);
    const ContentId supported = static_cast<ContentId>(uniform_index(rng, k));
    const auto probs = answer_probs(params, probe, supported);
    ++counts[choose_index(probs, SampleMode::kStochastic, rng)];
  }
  double dev = 0.0;
  for (int s = 0; s < k; ++s) {
    const double freq = static_cast<double>(counts[s]) / n_probes;
    dev = std::max(dev, std::abs(freq - 1.0 / k));
  }
  return dev;
}

MetricsReport evaluate(const PolicyParams& params, std::span<const TaskInstance> split,
                       const EvalOptions& opts) {
  if (split.empty()) throw EmptySetError("evaluation on an empty split");
  if (opts.n_shuffles < 1) throw PreconditionError("evaluation needs n_shuffles >= 1");

  MetricsReport rep;
  std::vector<Trajectory> firsts;
  firsts.reserve(split.size());
  long correct = 0, consistent = 0;
  double total_len = 0.0;
  const std::uint64_t shuffle_seed = derive_seed(opts.seed, 0x05c8);

  for (const auto& inst : split) {
    auto o = decode_with_shuffles(params, inst, opts.n_shuffles, shuffle_seed, opts.buckets);
    if (o.first.answer_content == inst.correct_content) ++correct;
    if (shuffle_consistent(o)) ++consistent;
    total_len += o.first.trace.length_tokens;

    const ContentId a2 = o.shuffled.front().content;
    const Indicators ind{o.first.answer_content == a2, o.first.answer_content == inst.correct_content,
                         a2 == inst.correct_content};
    ++rep.reward_case_counts[static_cast<int>(classify(ind))];
    firsts.push_back(std::move(o.first));
  }
  const double n = static_cast<double>(split.size());
  rep.accuracy = correct / n;
  rep.cacr = cacr(firsts);
  rep.oscr = consistent / n;
  rep.mean_trace_length = total_len / n;

  Rng probe_rng(derive_seed(opts.seed, 0x9b0e));
  rep.position_bias = position_bias(params, params.num_options(), params.num_buckets(),
                                    opts.n_probes, probe_rng);
  return rep;
}

std::string metrics_csv_header() {
  std::string h = "step,accuracy,cacr,oscr,position_bias,mean_trace_length";
  for (int c = 0; c < kNumConsistencyCases; ++c) {
    h += ",case_";
    h += case_name(static_cast<ConsistencyCase>(c));
  }
  return h;
}

std::string metrics_csv_row(int step, const MetricsReport& r) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%.17g,%.17g", step, r.accuracy, r.cacr,
                r.oscr, r.position_bias, r.mean_trace_length);
  std::string row = buf;
  for (long c : r.reward_case_counts) row += "," + std::to_string(c);
  return row;
}

std::pair<int, MetricsReport> parse_metrics_csv_row(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string f;
  while (std::getline(ss, f, ',')) fields.push_back(f);
  if (fields.size() != 6 + kNumConsistencyCases) {
    throw ParseError("metric row has " + std::to_string(fields.size()) + " fields, expected " +
                     std::to_string(6 + kNumConsistencyCases));
  }
  try {
    std::pair<int, MetricsReport> out;
    out.first = std::stoi(fields[0]);
    auto& r = out.second;
    r.accuracy = std::stod(fields[1]);
    r.cacr = std::stod(fields[2]);
    r.oscr = std::stod(fields[3]);
    r.position_bias = std::stod(fields[4]);
    r.mean_trace_length = std::stod(fields[5]);
    for (int c = 0; c < kNumConsistencyCases; ++c) r.reward_case_counts[c] = std::stol(fields[6 + c]);
    return out;
  } catch (const std::logic_error& e) {
    throw ParseError("malformed metric row: " + line);
  }
}

}  // namespace acre
