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

#ifndef MMRL_PARTITION_H_
#define MMRL_PARTITION_H_

#include <cstdint>
#include <map>
#include <span>
#include <variant>
#include <vector>

#include "mmrl/workload.h"

namespace mmrl {

struct TopologySpec {
  std::int64_t dp = 1;
  std::int64_t cp = 1;
  std::int64_t tp = 1;
  std::int64_t pp = 1;
  std::int64_t hidden_size = 4096;
  // Feature width of one raw patch before the encoder.
  std::int64_t patch_dim = 1176;
  std::int64_t bytes_per_element = 2;
  double link_bandwidth = 25e9;  // bytes/sec
  double link_latency = 5e-6;    // sec/message

  std::int64_t sequence_ranks() const { return cp * tp; }
  void Validate() const;
};

// Half-open range [begin, end) over merged-token indices.
struct TokenRange {
  std::int64_t begin = 0;
  std::int64_t end = 0;

  std::int64_t size() const { return end - begin; }
  friend bool operator==(const TokenRange&, const TokenRange&) = default;
};

// Contiguous split of one visual's merged tokens over cp * tp ranks. Rank r
// is (cp_rank, tp_rank) = (r / tp, r % tp). The sequence is padded with
// `padding_tokens` so that every rank receives the same number of tokens.
struct PartitionPlan {
  std::int64_t cp = 1;
  std::int64_t tp = 1;
  std::int64_t merged_tokens = 0;
  std::int64_t group_size = 1;
  std::int64_t padding_tokens = 0;
  std::vector<TokenRange> ranges;

  std::int64_t ranks() const { return cp * tp; }
  const TokenRange& range(std::int64_t cp_rank, std::int64_t tp_rank) const {
    return ranges[static_cast<std::size_t>(cp_rank * tp + tp_rank)];
  }
};

PartitionPlan PlanShards(const VisualInput& v, std::int64_t cp, std::int64_t tp);

// Forward-pass partitioning modeled as an all-gather of the raw patch tensor:
// raw_tokens * patch_dim * bytes_per_element * (R - 1) in total.
std::int64_t NaiveGatherVolume(const VisualInput& v, const TopologySpec& topo);

// Bytes delivered when the data loader ships each rank only its own shard
// (padding included). Zero for a single rank. Throws ArgumentError when the
// plan was not produced for `v`.
std::int64_t UpstreamDispatchVolume(const PartitionPlan& plan, const VisualInput& v,
                                    const TopologySpec& topo);

struct Message {
  std::int64_t src_rank = 0;
  std::int64_t dst_rank = 0;
  std::int64_t bytes = 0;

  friend bool operator==(const Message&, const Message&) = default;
};

// All-to-all exchange. Messages are ordered by (src_rank, dst_rank).
struct DispatchPlan {
  std::vector<Message> messages;
  std::int64_t total_bytes = 0;

  std::int64_t message_count() const {
    return static_cast<std::int64_t>(messages.size());
  }
  // Modeled wall time if every message shares one link serially.
  double SerialTime(const TopologySpec& topo) const;
};

// Collapses (src, dst, bytes) flows into one message per pair, dropping
// self-flows and zero-byte flows.
DispatchPlan MakeDispatchPlan(std::span<const Message> flows);

// `producers[r]` is the data-loader rank that produces shard r. Throws
// ValidationError when a shard has no valid producer.
DispatchPlan BuildDispatch(const PartitionPlan& plan,
                           std::span<const std::int64_t> producers,
                           const TopologySpec& topo);

// Reserved id written into image slots of the head input. Vocabulary ids are
// non-negative, so it never collides with a text token.
inline constexpr std::int64_t kImageTokenId = -1;

struct TextSlot {
  std::int64_t token_id = 0;
  friend bool operator==(const TextSlot&, const TextSlot&) = default;
};

struct VisualSlot {
  std::int64_t visual_index = 0;
  friend bool operator==(const VisualSlot&, const VisualSlot&) = default;
};

using LayoutSlot = std::variant<TextSlot, VisualSlot>;

// How visual positions reach the multi-token-prediction head.
enum class MtpOption {
  kPassEmbeddings,  // forward backbone-input visual embeddings to the head
  kMaskVisual,      // drop visual positions, leaving a text-only head input
  kImageToken,      // keep positions, substitute one shared image token
};

struct MtpLayout {
  std::vector<LayoutSlot> slots;
  std::int64_t num_visuals = 0;
  MtpOption option = MtpOption::kImageToken;

  // Throws ValidationError for an empty layout, negative text ids, or visual
  // indices outside [0, num_visuals).
  void Validate() const;
  std::int64_t visual_slot_count() const;
};

struct HeadSlot {
  enum class Kind { kText, kImageToken, kEmbedding };
  Kind kind = Kind::kText;
  // Token id for kText and kImageToken, visual index for kEmbedding.
  std::int64_t value = 0;

  friend bool operator==(const HeadSlot&, const HeadSlot&) = default;
};

struct MtpHeadInput {
  std::vector<HeadSlot> slots;
  // Old position -> new position for every position that survives.
  std::map<std::int64_t, std::int64_t> offsets;
};

MtpHeadInput MtpHeadInputFor(const MtpLayout& layout);

// Visual-embedding bytes crossing a pipeline-stage boundary per sequence.
std::int64_t MtpCrossStageBytes(const MtpLayout& layout, const TopologySpec& topo);

struct PartitionCompat {
  bool needs_offset_remap = false;
  bool needs_embedding_shard_alignment = false;

  friend bool operator==(const PartitionCompat&, const PartitionCompat&) = default;
};

PartitionCompat PartitionCompatFor(const MtpLayout& layout, std::int64_t cp);

}  // namespace mmrl

#endif  // MMRL_PARTITION_H_
