// Copyright 2026 The mmrl Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef MMRL_REWARD_H_
#define MMRL_REWARD_H_

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "mmrl/workload.h"

namespace mmrl {

// Local deterministic check. Score functions:
//   "pass"       always 1
//   "fail"       always 0
//   "bernoulli"  1 with probability `p`, keyed on (seed, verifier, sample)
struct RuleVerifier {
  double latency_sec = 0.0;
  std::string score_fn = "pass";
  double p = 0.5;
};

struct JudgeScore {
  enum class Kind { kBernoulli, kUniform, kTable };
  Kind kind = Kind::kBernoulli;
  double p = 0.5;
  // kTable: sample id -> score, `table_default` for ids not listed.
  std::map<std::int64_t, double> table;
  double table_default = 0.0;
};

// External scoring service with sampled latency.
struct JudgeVerifier {
  Distribution latency_sec = Distribution::Fixed(1.0);
  JudgeScore score;
};

struct VerifierSpec {
  std::string name;
  std::variant<RuleVerifier, JudgeVerifier> kind;
  double weight = 1.0;

  bool is_rule() const { return std::holds_alternative<RuleVerifier>(kind); }
};

struct WeightedSum {};
struct MinOf {};
struct ProductOf {};
// Reward is 0 when the gate verifier scores 0; otherwise the remaining
// verifiers are combined with WeightedSum.
struct VetoGate {
  std::string gate;
};
using Aggregation = std::variant<WeightedSum, MinOf, ProductOf, VetoGate>;

struct RewardConfig {
  std::vector<VerifierSpec> verifiers;
  Aggregation aggregation = WeightedSum{};
  // A sample succeeds for pass@k when its reward is >= this threshold.
  double success_threshold = 0.5;
  std::vector<std::int64_t> pass_ks{1};

  void Validate() const;
};

enum class SchedulingClass { kInline, kDispatch };

struct VerifierTask {
  std::string name;
  SchedulingClass cls = SchedulingClass::kInline;
  // Instant the task becomes runnable: the owning request's completion for
  // inline tasks, the dispatch instant for judges.
  double ready_sec = 0.0;
  double latency_sec = 0.0;
  double score = 0.0;
  double weight = 1.0;
};

// One task per verifier, in spec order. Latencies and scores are drawn from
// substreams keyed by (seed, verifier name, sample id), so the plan does not
// depend on when or in which order it is requested.
std::vector<VerifierTask> PlanVerification(std::int64_t sample_id,
                                           double trigger_sec,
                                           std::span<const VerifierSpec> specs,
                                           std::uint64_t seed);

// Reward-ready instant assuming every task starts as soon as it is ready.
double RewardReadyTime(std::span<const VerifierTask> tasks);

struct VerifierScore {
  std::string name;
  double score = 0.0;
  double weight = 1.0;
};

double Aggregate(std::span<const VerifierScore> scores, const Aggregation& strategy);

// Unbiased pass@k estimator 1 - C(n-c, k) / C(n, k).
double PassAtK(std::int64_t n, std::int64_t c, std::int64_t k);

struct VerifierOutcome {
  std::string name;
  double score = 0.0;
  double start_sec = 0.0;
  double finish_sec = 0.0;
};

struct RewardRecord {
  std::int64_t sample_id = 0;
  std::vector<VerifierOutcome> verifiers;
  double reward = 0.0;
};

struct SourceMetrics {
  std::int64_t count = 0;
  double mean_reward = 0.0;
  // Averaged over the source's groups that have at least k records.
  std::map<std::int64_t, double> pass_at_k;
  // Groups skipped for some k because they had fewer than k records.
  std::int64_t excluded_groups = 0;
};

// Throws ValidationError when a record does not resolve to a sample.
std::map<std::string, SourceMetrics> SourceReport(
    std::span<const RewardRecord> records,
    std::span<const RolloutSample> samples, std::span<const std::int64_t> ks,
    double success_threshold);

}  // namespace mmrl

#endif  // MMRL_REWARD_H_
