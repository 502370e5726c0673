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

#ifndef MMRL_SCENARIO_H_
#define MMRL_SCENARIO_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "mmrl/balance.h"
#include "mmrl/engine.h"
#include "mmrl/gym.h"
#include "mmrl/memory.h"
#include "mmrl/partition.h"
#include "mmrl/reward.h"
#include "mmrl/workload.h"

namespace mmrl {

// Exactly one of `spec` and `trace_path` is set.
struct WorkloadSource {
  std::optional<WorkloadSpec> spec;
  std::optional<std::string> trace_path;
};

struct MemoryScenario {
  MemConfig config;
  // Identical copies of `probe_visual` are evaluated at each image count.
  VisualInput probe_visual{32, 32, 1, 2};
  std::vector<std::int64_t> image_counts{1, 2, 4, 8};
  std::vector<BufferEntry> buffers;
  // Buffers moved from the GPU communication path to the host path.
  std::vector<std::string> migrate;
};

struct PackingConfig {
  // Inline items; when empty, items come from the workload's trajectories.
  std::vector<ItemCost> items;
  std::int64_t num_bins = 4;
  PackPolicy policy = PackPolicy::kGreedyMinimax;
  std::optional<BinNorm> norm;
  // "auto" runs the exhaustive oracle when the instance is small enough.
  std::string oracle = "auto";
  // Payload bytes per sequence token when rebalancing across DP groups.
  std::int64_t bytes_per_token = 8;
};

// A head-input layout given as runs: {"text": n} adds n text tokens,
// {"visual": i, "tokens": n} adds n slots of visual i.
struct LayoutSpec {
  std::string name;
  nlohmann::json segments = nlohmann::json::array();
};

struct PartitionConfig {
  // Inline visuals; when empty, the first `max_workload_visuals` workload
  // visuals are used.
  std::vector<VisualInput> visuals;
  std::int64_t max_workload_visuals = 8;
  // "offset": shard r is produced by rank (r + producer_offset) mod R.
  // "single": every shard is produced by `producer_rank`.
  std::string producer_mode = "offset";
  std::int64_t producer_offset = 0;
  std::int64_t producer_rank = 0;
  std::vector<LayoutSpec> layouts;
};

struct SweepParameter {
  // Dotted path into the config document, e.g. "resources.judge_capacity"
  // or "policies.1.abort.deadline_sec".
  std::string path;
  std::vector<nlohmann::json> values;
};

struct Scenario {
  WorkloadSource workload;
  TaskSpec task;
  TopologySpec topology;
  Resources resources;
  std::vector<Policy> policies;
  RewardConfig reward;
  MemoryScenario memory;
  PackingConfig packing;
  PartitionConfig partition;
  std::vector<SweepParameter> sweep;
  std::string output_dir = "out";
  std::uint64_t seed = 0;
  std::int64_t iterations = 1;
  // Directory that relative paths in the document resolve against.
  std::filesystem::path base_dir;

  // Per-component seeds fanned out from the master seed.
  std::uint64_t workload_seed() const { return DeriveSeed(seed, "workload"); }
  std::uint64_t trajectory_seed() const { return DeriveSeed(seed, "trajectory"); }
  std::uint64_t engine_seed() const { return DeriveSeed(seed, "engine"); }
};

// Throws ConfigError carrying the dotted path of the first offending field.
// Unknown keys are rejected.
Scenario ParseScenario(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});
Scenario LoadScenario(const std::filesystem::path& path);
nlohmann::json ReadConfigDocument(const std::filesystem::path& path);

// The fully materialized configuration, defaults included. Parsing the
// result yields an equivalent scenario.
nlohmann::json ScenarioToJson(const Scenario& s);

// Sets `value` at a dotted path, creating intermediate objects as needed.
void SetAtPath(nlohmann::json& doc, const std::string& path, const nlohmann::json& value);

// Samples from the spec or the trace, validated.
std::vector<RolloutSample> ResolveWorkload(const Scenario& s);

MtpLayout BuildLayout(const LayoutSpec& spec, MtpOption option);

}  // namespace mmrl

#endif  // MMRL_SCENARIO_H_
