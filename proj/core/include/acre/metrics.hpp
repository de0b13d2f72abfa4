#ifndef ACRE_METRICS_HPP_
#define ACRE_METRICS_HPP_

#include <array>
#include <span>
#include <string>
#include <vector>

#include "acre/env.hpp"
#include "acre/grpo.hpp"
#include "acre/policy.hpp"
#include "acre/rewards.hpp"

namespace acre {

struct MetricsReport {
  double accuracy = 0.0;
  double cacr = 0.0;
  double oscr = 0.0;
  double position_bias = 0.0;
  double mean_trace_length = 0.0;
  // Indexed by ConsistencyCase.
  std::array<long, kNumConsistencyCases> reward_case_counts{};

  friend bool operator==(const MetricsReport&, const MetricsReport&) = default;
};

// Fraction of trajectories whose answer content equals the content their
// trace supports. The trace states its supported content explicitly, so this
// judge is exact. Throws EmptySetError on empty input.
double cacr(std::span<const Trajectory> trajectories);

// Greedy trace and first answer per instance, then `n_shuffles` greedy
// answers on random non-identity shuffles with the trace held fixed. An
// instance is consistent iff every shuffled answer names the same content as
// the first answer. Throws EmptySetError on an empty split and
// PreconditionError for n_shuffles < 1.
double oscr(const PolicyParams& params, std::span<const TaskInstance> split, int n_shuffles,
            Rng& rng, const LengthBuckets& buckets = {});

// Greedy-decoded answer accuracy. Throws EmptySetError on an empty split.
double accuracy(const PolicyParams& params, std::span<const TaskInstance> split,
                const LengthBuckets& buckets = {});

// max_s |P(answer_slot = s) - 1/K| estimated from stochastic answers on
// evidence-free probes whose trace supports a uniformly random content.
// Throws PreconditionError for n_probes < 100.
double position_bias(const PolicyParams& params, int k, int b, int n_probes, Rng& rng);

struct EvalOptions {
  int n_shuffles = 1;
  int n_probes = 2000;
  std::uint64_t seed = 0;
  LengthBuckets buckets;
};

// All metrics for one parameter snapshot. The shuffles drawn for OSCR also
// supply the second answers behind reward_case_counts.
MetricsReport evaluate(const PolicyParams& params, std::span<const TaskInstance> split,
                       const EvalOptions& opts);

// Fixed CSV layout of a metric series.
std::string metrics_csv_header();
std::string metrics_csv_row(int step, const MetricsReport& report);
// Inverse of metrics_csv_row. Throws ParseError.
std::pair<int, MetricsReport> parse_metrics_csv_row(const std::string& line);

}  // namespace acre

#endif  // ACRE_METRICS_HPP_
