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

#ifndef MMRL_ENGINE_H_
#define MMRL_ENGINE_H_

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "mmrl/gym.h"
#include "mmrl/reward.h"

namespace mmrl {

// Throughputs and sizes driving the latency model. A request takes
//   context / prefill + response / decode + new ViT tokens / vit
// seconds on one rollout worker; downstream stages scale with the total
// sequence tokens of the completed trajectories.
struct Resources {
  std::int64_t rollout_workers = 8;
  // Parallel judge calls; nullopt means unlimited.
  std::optional<std::int64_t> judge_capacity;
  double transfer_bandwidth = 16e9;  // bytes/sec, host <-> device
  double prefill_tokens_per_sec = 20000;
  double decode_tokens_per_sec = 400;
  double vit_tokens_per_sec = 50000;
  double batch_build_tokens_per_sec = 2e6;
  double ref_forward_tokens_per_sec = 1e5;
  double train_tokens_per_sec = 4e4;
  std::int64_t policy_weight_bytes = 16'000'000'000;
  std::int64_t ref_weight_bytes = 16'000'000'000;

  void Validate() const;
};

enum class RewardTrigger { kPerRequestCallback, kBatchBarrier };

struct AbortNone {};
// Abort once `complete_k` trajectories have completed.
struct AbortCount {
  std::int64_t complete_k = 1;
};
// Abort at simulated time `deadline_sec`.
struct AbortTime {
  double deadline_sec = 1.0;
};
using AbortPolicy = std::variant<AbortNone, AbortCount, AbortTime>;

// What an aborted request keeps when it is picked up again.
enum class ResumeMode { kResume, kRestart };

struct Policy {
  std::string name = "default";
  RewardTrigger reward_trigger = RewardTrigger::kPerRequestCallback;
  AbortPolicy abort = AbortNone{};
  bool abort_reuse = false;
  ResumeMode resume = ResumeMode::kResume;
  bool overlap_batch_with_transfer = false;
  bool ref_prefetch = false;

  void Validate() const;

  // Batch barrier, no abort, nothing overlapped.
  static Policy Sequential();
};

// Ordered by tie-break priority.
enum class Stage { kRollout, kReward, kBatchBuild, kWeightTransfer, kRefForward, kTrainStep };
inline constexpr std::size_t kNumStages = 6;
inline constexpr std::array<Stage, kNumStages> kAllStages = {
    Stage::kRollout,        Stage::kReward,     Stage::kBatchBuild,
    Stage::kWeightTransfer, Stage::kRefForward, Stage::kTrainStep};

std::string_view StageName(Stage s);

struct StageUsage {
  double busy_sec = 0.0;
  double idle_sec = 0.0;
};

struct IterationMetrics {
  double makespan_sec = 0.0;
  std::array<StageUsage, kNumStages> stages{};
  // Trajectory counters: completed + cached + dropped == scheduled.
  std::int64_t scheduled = 0;
  std::int64_t completed = 0;
  std::int64_t cached = 0;
  std::int64_t dropped = 0;
  std::int64_t aborted_count = 0;  // cached + dropped
  std::int64_t reuse_hits = 0;
  // Ready-to-finish latency of completed requests.
  double latency_p50_sec = 0.0;
  double latency_p99_sec = 0.0;
  double bubble_fraction = 0.0;

  const StageUsage& stage(Stage s) const { return stages[static_cast<std::size_t>(s)]; }
};

struct CacheEntry {
  std::int64_t sample_id = 0;
  std::int64_t step_index = 0;
  std::int64_t tokens_generated = 0;

  friend bool operator==(const CacheEntry&, const CacheEntry&) = default;
};

// Unfinished requests saved by an abort, keyed by sample id.
using AbortCache = std::map<std::int64_t, CacheEntry>;

struct TraceEvent {
  double time = 0.0;
  Stage stage = Stage::kRollout;
  std::string kind;
  // Sample id of the owning trajectory; nullopt for stage-level events.
  std::optional<std::int64_t> request_id;
  std::string detail;
};

std::string TraceToJsonl(std::span<const TraceEvent> trace);

struct Interval {
  double begin = 0.0;
  double end = 0.0;
};

struct RequestRecord {
  enum class Status { kCompleted, kCached, kDropped };
  std::int64_t sample_id = 0;
  std::int64_t step_index = 0;
  double ready_sec = 0.0;
  // Unset when the request never reached a worker.
  std::optional<double> start_sec;
  double end_sec = 0.0;
  // Worker time the request needed from its start, given its resumed
  // progress.
  double service_sec = 0.0;
  // Decoded tokens before this iteration and at the end of it.
  std::int64_t tokens_before = 0;
  std::int64_t tokens_after = 0;
  Status status = Status::kCompleted;
};

struct IterationResult {
  IterationMetrics metrics;
  std::vector<TraceEvent> trace;
  AbortCache cache;
  std::vector<RewardRecord> rewards;
  std::vector<RequestRecord> requests;
  // Merged busy intervals per stage, in stage order.
  std::array<std::vector<Interval>, kNumStages> busy;
};

// Rows "time,stage,busy" marking every busy/idle transition.
std::string TimelineCsv(const IterationResult& result);

// One training iteration. Deterministic in its inputs. Throws ValidationError
// when reuse is enabled and `cache` names a sample with no trajectory.
IterationResult SimulateIteration(std::span<const Trajectory> trajectories,
                                  const Resources& resources, const Policy& policy,
                                  const RewardConfig& reward, std::uint64_t seed,
                                  const AbortCache& cache);

// Runs `iterations` iterations over the same trajectories, threading the
// abort cache from one to the next.
std::vector<IterationResult> SimulateIterations(std::span<const Trajectory> trajectories,
                                                const Resources& resources,
                                                const Policy& policy,
                                                const RewardConfig& reward,
                                                std::uint64_t seed, std::int64_t iterations);

IterationMetrics SequentialBaseline(std::span<const Trajectory> trajectories,
                                    const Resources& resources, const RewardConfig& reward,
                                    std::uint64_t seed);

struct PolicyRun {
  std::string name;
  std::vector<IterationResult> iterations;
};

// Every policy sees the same trajectories and seed. Throws ConfigError on
// duplicate policy names or an empty policy list.
std::vector<PolicyRun> ComparePolicies(std::span<const Trajectory> trajectories,
                                       const Resources& resources,
                                       std::span<const Policy> policies,
                                       const RewardConfig& reward, std::uint64_t seed,
                                       std::int64_t iterations = 1);

}  // namespace mmrl

#endif  // MMRL_ENGINE_H_
