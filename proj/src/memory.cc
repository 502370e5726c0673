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

#include "mmrl/memory.h"

#include <algorithm>

#include "mmrl/errors.h"

namespace mmrl {

void MemConfig::Validate() const {
  if (act_bytes_per_token_per_layer < 0) {
    throw ConfigError("memory.act_bytes_per_token_per_layer", "must be >= 0");
  }
  if (projector_bytes_per_token < 0) {
    throw ConfigError("memory.projector_bytes_per_token", "must be >= 0");
  }
  if (offload_staging_bytes < 0) {
    throw ConfigError("memory.offload_staging_bytes", "must be >= 0");
  }
  if (vit_layers < 1) throw ConfigError("memory.vit_layers", "must be >= 1");
  if (checkpoint_interval_layers < 1 || checkpoint_interval_layers > vit_layers) {
    throw ConfigError("memory.checkpoint_interval_layers", "must be in [1, vit_layers]");
  }
}

std::int64_t PeakActivation(std::span<const VisualInput> visuals, const MemConfig& cfg) {
  cfg.Validate();
  if (visuals.empty()) return 0;

  std::int64_t sum_tokens = 0, max_tokens = 0;
  for (const VisualInput& v : visuals) {
    sum_tokens += v.merged_tokens();
    max_tokens = std::max(max_tokens, v.merged_tokens());
  }
  const std::int64_t act = cfg.act_bytes_per_token_per_layer;
  const std::int64_t interval = cfg.checkpoint_interval_layers;
  const std::int64_t checkpoints = (cfg.vit_layers + interval - 1) / interval;

  // Per-image encoder footprint.
  auto full = [&](std::int64_t t) { return t * act * cfg.vit_layers; };
  auto checkpointed = [&](std::int64_t t) { return t * act * checkpoints; };
  auto live_segment = [&](std::int64_t t) { return t * act * interval; };

  std::int64_t vit = 0;
  if (cfg.recompute_vit && cfg.offload) {
    vit = live_segment(max_tokens) + checkpointed(max_tokens) + cfg.offload_staging_bytes;
  } else if (cfg.recompute_vit) {
    vit = checkpointed(sum_tokens) + live_segment(max_tokens);
  } else if (cfg.offload) {
    vit = full(max_tokens) + cfg.offload_staging_bytes;
  } else {
    vit = full(sum_tokens);
  }
  const std::int64_t projector =
      (cfg.recompute_projector ? max_tokens : sum_tokens) * cfg.projector_bytes_per_token;
  return vit + projector;
}

std::int64_t NaivePeakActivation(std::span<const VisualInput> visuals, const MemConfig& cfg) {
  MemConfig naive = cfg;
  naive.recompute_vit = false;
  naive.recompute_projector = false;
  naive.offload = false;
  return PeakActivation(visuals, naive);
}

std::string_view BufferPathName(BufferPath p) {
  return p == BufferPath::kGpuComm ? "gpu" : "host";
}

void BufferRegistry::Add(std::string name, std::int64_t bytes, BufferPath path) {
  if (bytes < 0) throw ValidationError("buffer '" + name + "' has negative size");
  for (const BufferEntry& e : entries_) {
    if (e.name == name) throw ValidationError("duplicate buffer name '" + name + "'");
  }
  entries_.push_back({std::move(name), bytes, path});
}

void BufferRegistry::Migrate(std::string_view name, BufferPath to) {
  for (BufferEntry& e : entries_) {
    if (e.name == name) {
      e.path = to;
      return;
    }
  }
  throw LookupError("no buffer named '" + std::string(name) + "'");
}

BufferTotals BufferRegistry::Totals() const {
  BufferTotals t;
  for (const BufferEntry& e : entries_) {
    (e.path == BufferPath::kGpuComm ? t.gpu_bytes : t.host_bytes) += e.bytes;
  }
  return t;
}

BufferTotals CommBufferBytes(const BufferRegistry& registry) { return registry.Totals(); }

}  // namespace mmrl
