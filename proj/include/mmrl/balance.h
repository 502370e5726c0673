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

#ifndef MMRL_BALANCE_H_
#define MMRL_BALANCE_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "mmrl/partition.h"

namespace mmrl {

struct ItemCost {
  std::int64_t id = 0;
  std::int64_t seq_tokens = 1;
  std::int64_t vit_tokens = 0;  // merged
};

// Per-dimension scale used to compare sequence and ViT load.
struct BinNorm {
  double seq_norm = 1.0;
  double vit_norm = 1.0;
};

// Largest item value per dimension; 1 for a dimension that is all zero.
BinNorm DefaultNorm(std::span<const ItemCost> items);

struct BinLoad {
  std::int64_t seq = 0;
  std::int64_t vit = 0;

  friend bool operator==(const BinLoad&, const BinLoad&) = default;
};

// max(seq / seq_norm, vit / vit_norm)
double NormalizedLoad(const BinLoad& load, const BinNorm& norm);

struct PackPlan {
  std::int64_t num_bins = 1;
  BinNorm norm;
  // Parallel arrays in the caller's item order.
  std::vector<std::int64_t> item_ids;
  std::vector<std::int64_t> bin_of;
  std::vector<BinLoad> loads;
  // Max over bins of NormalizedLoad.
  double objective = 0.0;

  std::int64_t BinOf(std::int64_t item_id) const;
};

enum class PackPolicy { kFirstFitDecreasing, kGreedyMinimax, kRoundRobin };

std::string_view PackPolicyName(PackPolicy p);
std::optional<PackPolicy> ParsePackPolicy(std::string_view name);

// Capacity-free minimax packing. FirstFitDecreasing and GreedyMinimax visit
// items by descending normalized size (ties: ascending id).
// FirstFitDecreasing places each item into the currently least-loaded bin;
// GreedyMinimax places it where the resulting objective is smallest, then
// where that bin's own resulting load is smallest. RoundRobin assigns the
// i-th item in caller order to bin i mod num_bins. Remaining ties go to the
// lowest bin index.
PackPlan PackJoint(std::span<const ItemCost> items, std::int64_t num_bins,
                   const BinNorm& norm, PackPolicy policy);

// Items sorted the way the greedy policies visit them.
std::vector<ItemCost> GreedyOrder(std::span<const ItemCost> items, const BinNorm& norm);

inline constexpr std::uint64_t kBruteForceLimit = std::uint64_t{1} << 24;

// Exhaustive optimum; among optimal assignments, the lexicographically
// smallest bin vector wins. Throws SizeError when num_bins^|items| exceeds
// kBruteForceLimit.
PackPlan BruteForcePack(std::span<const ItemCost> items, std::int64_t num_bins,
                        const BinNorm& norm);
bool BruteForceFeasible(std::size_t num_items, std::int64_t num_bins);

struct Imbalance {
  double seq_ratio = 1.0;
  double vit_ratio = 1.0;
};

// Per dimension, max bin load over mean bin load (empty bins count as zero).
Imbalance GetImbalance(const PackPlan& plan);

struct DpBalance {
  PackPlan plan;
  DispatchPlan dispatch;
};

// Packs trajectories into `dp` groups with GreedyMinimax and moves each
// trajectory's payload (seq_tokens * bytes_per_token) from the rank that
// produced it to the rank of its group.
DpBalance BalanceDp(std::span<const ItemCost> items, std::int64_t dp,
                    std::span<const std::int64_t> producers,
                    std::int64_t bytes_per_token);

}  // namespace mmrl

#endif  // MMRL_BALANCE_H_
