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

#include "mmrl/partition.h"

#include <algorithm>
#include <cmath>

#include "mmrl/errors.h"

namespace mmrl {

void TopologySpec::Validate() const {
  auto at_least_one = [](std::int64_t x, const char* field) {
    if (x < 1) throw ConfigError(std::string("topology.") + field, "must be >= 1");
  };
  at_least_one(dp, "dp");
  at_least_one(cp, "cp");
  at_least_one(tp, "tp");
  at_least_one(pp, "pp");
  at_least_one(hidden_size, "hidden_size");
  at_least_one(patch_dim, "patch_dim");
  if (bytes_per_element != 1 && bytes_per_element != 2 && bytes_per_element != 4 &&
      bytes_per_element != 8) {
    throw ConfigError("topology.bytes_per_element", "must be one of 1, 2, 4, 8");
  }
  if (!(link_bandwidth > 0) || !std::isfinite(link_bandwidth)) {
    throw ConfigError("topology.link_bandwidth", "must be finite and > 0");
  }
  if (!(link_latency >= 0) || !std::isfinite(link_latency)) {
    throw ConfigError("topology.link_latency", "must be finite and >= 0");
  }
}

PartitionPlan PlanShards(const VisualInput& v, std::int64_t cp, std::int64_t tp) {
  if (cp < 1 || tp < 1) throw ArgumentError("cp and tp must be >= 1");
  PartitionPlan plan;
  plan.cp = cp;
  plan.tp = tp;
  plan.merged_tokens = v.merged_tokens();
  plan.group_size = v.group_size();
  const std::int64_t ranks = cp * tp;
  const std::int64_t padded = (plan.merged_tokens + ranks - 1) / ranks * ranks;
  plan.padding_tokens = padded - plan.merged_tokens;
  const std::int64_t per_rank = padded / ranks;
  plan.ranges.reserve(static_cast<std::size_t>(ranks));
  for (std::int64_t r = 0; r < ranks; ++r) {
    plan.ranges.push_back({r * per_rank, (r + 1) * per_rank});
  }
  return plan;
}

std::int64_t NaiveGatherVolume(const VisualInput& v, const TopologySpec& topo) {
  return v.raw_tokens() * topo.patch_dim * topo.bytes_per_element *
         (topo.sequence_ranks() - 1);
}

std::int64_t UpstreamDispatchVolume(const PartitionPlan& plan, const VisualInput& v,
                                    const TopologySpec& topo) {
  if (plan.merged_tokens != v.merged_tokens() || plan.group_size != v.group_size()) {
    throw ArgumentError("partition plan was built for a different visual input");
  }
  if (plan.ranks() != topo.sequence_ranks() ||
      static_cast<std::int64_t>(plan.ranges.size()) != plan.ranks()) {
    throw ArgumentError("partition plan rank count does not match the topology");
  }
  if (plan.ranks() == 1) return 0;
  std::int64_t bytes = 0;
  for (const TokenRange& r : plan.ranges) {
    bytes += r.size() * plan.group_size * topo.patch_dim * topo.bytes_per_element;
  }
  return bytes;
}

double DispatchPlan::SerialTime(const TopologySpec& topo) const {
  return static_cast<double>(messages.size()) * topo.link_latency +
         static_cast<double>(total_bytes) / topo.link_bandwidth;
}

DispatchPlan MakeDispatchPlan(std::span<const Message> flows) {
  std::map<std::pair<std::int64_t, std::int64_t>, std::int64_t> pairs;
  for (const Message& f : flows) {
    if (f.src_rank == f.dst_rank || f.bytes <= 0) continue;
    pairs[{f.src_rank, f.dst_rank}] += f.bytes;
  }
  DispatchPlan plan;
  for (const auto& [key, bytes] : pairs) {
    plan.messages.push_back({key.first, key.second, bytes});
    plan.total_bytes += bytes;
  }
  return plan;
}

DispatchPlan BuildDispatch(const PartitionPlan& plan,
                           std::span<const std::int64_t> producers,
                           const TopologySpec& topo) {
  const std::int64_t ranks = plan.ranks();
  if (static_cast<std::int64_t>(producers.size()) != ranks) {
    throw ValidationError("expected one producer per shard (" + std::to_string(ranks) +
                          "), got " + std::to_string(producers.size()));
  }
  std::vector<Message> flows;
  for (std::int64_t r = 0; r < ranks; ++r) {
    const std::int64_t src = producers[static_cast<std::size_t>(r)];
    if (src < 0 || src >= ranks) {
      throw ValidationError("shard " + std::to_string(r) + " has no valid producer");
    }
    const std::int64_t bytes = plan.ranges[static_cast<std::size_t>(r)].size() *
                               plan.group_size * topo.patch_dim * topo.bytes_per_element;
    flows.push_back({src, r, bytes});
  }
  return MakeDispatchPlan(flows);
}

void MtpLayout::Validate() const {
  if (slots.empty()) throw ValidationError("MTP layout must have at least one slot");
  for (const LayoutSlot& s : slots) {
    if (const auto* t = std::get_if<TextSlot>(&s)) {
      if (t->token_id < 0) throw ValidationError("text token ids must be >= 0");
    } else {
      const auto& v = std::get<VisualSlot>(s);
      if (v.visual_index < 0 || v.visual_index >= num_visuals) {
        throw ValidationError("visual slot references missing visual " +
                              std::to_string(v.visual_index));
      }
    }
  }
}

std::int64_t MtpLayout::visual_slot_count() const {
  return std::count_if(slots.begin(), slots.end(), [](const LayoutSlot& s) {
    return std::holds_alternative<VisualSlot>(s);
  });
}

MtpHeadInput MtpHeadInputFor(const MtpLayout& layout) {
  layout.Validate();
  MtpHeadInput out;
  std::int64_t next = 0;
  for (std::size_t i = 0; i < layout.slots.size(); ++i) {
    const auto pos = static_cast<std::int64_t>(i);
    if (const auto* t = std::get_if<TextSlot>(&layout.slots[i])) {
      out.slots.push_back({HeadSlot::Kind::kText, t->token_id});
      out.offsets[pos] = next++;
      continue;
    }
    const auto& v = std::get<VisualSlot>(layout.slots[i]);
    switch (layout.option) {
      case MtpOption::kImageToken:
        out.slots.push_back({HeadSlot::Kind::kImageToken, kImageTokenId});
        out.offsets[pos] = next++;
        break;
      case MtpOption::kPassEmbeddings:
        out.slots.push_back({HeadSlot::Kind::kEmbedding, v.visual_index});
        out.offsets[pos] = next++;
        break;
      case MtpOption::kMaskVisual:
        break;
    }
  }
  return out;
}

std::int64_t MtpCrossStageBytes(const MtpLayout& layout, const TopologySpec& topo) {
  if (topo.pp < 1) throw ArgumentError("pp must be >= 1");
  if (layout.option != MtpOption::kPassEmbeddings || topo.pp == 1) return 0;
  return layout.visual_slot_count() * topo.hidden_size * topo.bytes_per_element;
}

PartitionCompat PartitionCompatFor(const MtpLayout& layout, std::int64_t cp) {
  if (cp < 1) throw ArgumentError("cp must be >= 1");
  const bool has_visual = layout.visual_slot_count() > 0;
  PartitionCompat c;
  switch (layout.option) {
    case MtpOption::kMaskVisual:
      c.needs_offset_remap = has_visual;
      break;
    case MtpOption::kPassEmbeddings:
      c.needs_embedding_shard_alignment = cp > 1 && has_visual;
      break;
    case MtpOption::kImageToken:
      break;
  }
  return c;
}

}  // namespace mmrl
