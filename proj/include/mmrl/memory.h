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

#ifndef MMRL_MEMORY_H_
#define MMRL_MEMORY_H_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mmrl/workload.h"

namespace mmrl {

// Activation cost model for the vision encoder and projector.
//
// Without recomputation every layer's activations stay resident for every
// image. With recomputation only one checkpoint per `checkpoint_interval_layers`
// layers is kept, plus one interval's worth of live activations while a
// segment is recomputed. Offloading processes images one at a time: finished
// images' outputs leave the device through a fixed staging buffer.
struct MemConfig {
  std::int64_t act_bytes_per_token_per_layer = 0;
  std::int64_t vit_layers = 1;
  std::int64_t projector_bytes_per_token = 0;
  bool recompute_vit = false;
  bool recompute_projector = false;
  bool offload = false;
  std::int64_t offload_staging_bytes = 0;
  std::int64_t checkpoint_interval_layers = 1;

  void Validate() const;
};

// Peak activation bytes for one micro-batch holding `visuals`.
std::int64_t PeakActivation(std::span<const VisualInput> visuals, const MemConfig& cfg);

// The same visuals under no recomputation and no offload.
std::int64_t NaivePeakActivation(std::span<const VisualInput> visuals, const MemConfig& cfg);

enum class BufferPath { kGpuComm, kHostComm };

std::string_view BufferPathName(BufferPath p);

struct BufferEntry {
  std::string name;
  std::int64_t bytes = 0;
  BufferPath path = BufferPath::kGpuComm;
};

struct BufferTotals {
  std::int64_t gpu_bytes = 0;
  std::int64_t host_bytes = 0;

  friend bool operator==(const BufferTotals&, const BufferTotals&) = default;
};

// Objects exchanged between ranks, tagged with the path they travel on.
class BufferRegistry {
 public:
  // Throws ValidationError on a duplicate name or negative size.
  void Add(std::string name, std::int64_t bytes, BufferPath path);
  // Throws LookupError for an unknown name.
  void Migrate(std::string_view name, BufferPath to);

  BufferTotals Totals() const;
  const std::vector<BufferEntry>& entries() const { return entries_; }

 private:
  std::vector<BufferEntry> entries_;
};

BufferTotals CommBufferBytes(const BufferRegistry& registry);

}  // namespace mmrl

#endif  // MMRL_MEMORY_H_
