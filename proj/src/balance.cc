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

#include "mmrl/balance.h"

#include <algorithm>
#include <numeric>
#include <set>

#include "mmrl/errors.h"

namespace mmrl {
namespace {

void CheckItems(std::span<const ItemCost> items, std::int64_t num_bins) {
  if (num_bins < 1) throw ArgumentError("num_bins must be >= 1");
  if (items.empty()) throw ArgumentError("cannot pack an empty item set");
  std::set<std::int64_t> ids;
  for (const ItemCost& it : items) {
    if (!ids.insert(it.id).second) {
      throw ValidationError("duplicate item id " + std::to_string(it.id));
    }
    if (it.seq_tokens < 1 || it.vit_tokens < 0) {
      throw ValidationError("item " + std::to_string(it.id) +
                            " needs seq_tokens >= 1 and vit_tokens >= 0");
    }
  }
}

void CheckNorm(const BinNorm& norm) {
  if (!(norm.seq_norm > 0) || !(norm.vit_norm > 0)) {
    throw ArgumentError("bin normalizers must be > 0");
  }
}

BinLoad Plus(const BinLoad& load, const ItemCost& item) {
  return {load.seq + item.seq_tokens, load.vit + item.vit_tokens};
}

double Objective(const std::vector<BinLoad>& loads, const BinNorm& norm) {
  double obj = 0;
  for (const BinLoad& l : loads) obj = std::max(obj, NormalizedLoad(l, norm));
  return obj;
}

PackPlan EmptyPlan(std::span<const ItemCost> items, std::int64_t num_bins,
                   const BinNorm& norm) {
  PackPlan plan;
  plan.num_bins = num_bins;
  plan.norm = norm;
  plan.item_ids.reserve(items.size());
  for (const ItemCost& it : items) plan.item_ids.push_back(it.id);
  plan.bin_of.assign(items.size(), 0);
  plan.loads.assign(static_cast<std::size_t>(num_bins), BinLoad{});
  return plan;
}

}  // namespace

BinNorm DefaultNorm(std::span<const ItemCost> items) {
  std::int64_t seq = 0, vit = 0;
  for (const ItemCost& it : items) {
    seq = std::max(seq, it.seq_tokens);
    vit = std::max(vit, it.vit_tokens);
  }
  return {seq > 0 ? static_cast<double>(seq) : 1.0,
          vit > 0 ? static_cast<double>(vit) : 1.0};
}

double NormalizedLoad(const BinLoad& load, const BinNorm& norm) {
  return std::max(static_cast<double>(load.seq) / norm.seq_norm,
                  static_cast<double>(load.vit) / norm.vit_norm);
}

std::int64_t PackPlan::BinOf(std::int64_t item_id) const {
  for (std::size_t i = 0; i < item_ids.size(); ++i) {
    if (item_ids[i] == item_id) return bin_of[i];
  }
  throw LookupError("item " + std::to_string(item_id) + " is not in the plan");
}

std::string_view PackPolicyName(PackPolicy p) {
  switch (p) {
    case PackPolicy::kFirstFitDecreasing:
      return "first_fit_decreasing";
    case PackPolicy::kGreedyMinimax:
      return "greedy_minimax";
    case PackPolicy::kRoundRobin:
      return "round_robin";
  }
  return "";
}

std::optional<PackPolicy> ParsePackPolicy(std::string_view name) {
  for (PackPolicy p : {PackPolicy::kFirstFitDecreasing, PackPolicy::kGreedyMinimax,
                       PackPolicy::kRoundRobin}) {
    if (PackPolicyName(p) == name) return p;
  }
  return std::nullopt;
}

std::vector<ItemCost> GreedyOrder(std::span<const ItemCost> items, const BinNorm& norm) {
  std::vector<ItemCost> sorted(items.begin(), items.end());
  std::stable_sort(sorted.begin(), sorted.end(), [&](const ItemCost& a, const ItemCost& b) {
    const double sa = NormalizedLoad({a.seq_tokens, a.vit_tokens}, norm);
    const double sb = NormalizedLoad({b.seq_tokens, b.vit_tokens}, norm);
    if (sa != sb) return sa > sb;
    return a.id < b.id;
  });
  return sorted;
}

PackPlan PackJoint(std::span<const ItemCost> items, std::int64_t num_bins,
                   const BinNorm& norm, PackPolicy policy) {
  CheckItems(items, num_bins);
  CheckNorm(norm);
  PackPlan plan = EmptyPlan(items, num_bins, norm);

  std::vector<std::size_t> order(items.size());
  std::iota(order.begin(), order.end(), 0);
  if (policy != PackPolicy::kRoundRobin) {
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      const double sa = NormalizedLoad({items[a].seq_tokens, items[a].vit_tokens}, norm);
      const double sb = NormalizedLoad({items[b].seq_tokens, items[b].vit_tokens}, norm);
      if (sa != sb) return sa > sb;
      return items[a].id < items[b].id;
    });
  }

  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    const std::size_t idx = order[rank];
    const ItemCost& item = items[idx];
    std::int64_t chosen = 0;
    switch (policy) {
      case PackPolicy::kRoundRobin:
        chosen = static_cast<std::int64_t>(rank) % num_bins;
        break;
      case PackPolicy::kFirstFitDecreasing: {
        double best = NormalizedLoad(plan.loads[0], norm);
        for (std::int64_t b = 1; b < num_bins; ++b) {
          const double l = NormalizedLoad(plan.loads[static_cast<std::size_t>(b)], norm);
          if (l < best) {
            best = l;
            chosen = b;
          }
        }
        break;
      }
      case PackPolicy::kGreedyMinimax: {
        // Objective after placing into bin b = max(current max of the other
        // bins, load of b with the item). Track the two largest loads.
        double top = -1, second = -1;
        std::int64_t top_bin = -1;
        for (std::int64_t b = 0; b < num_bins; ++b) {
          const double l = NormalizedLoad(plan.loads[static_cast<std::size_t>(b)], norm);
          if (l > top) {
            second = top;
            top = l;
            top_bin = b;
          } else if (l > second) {
            second = l;
          }
        }
        double best_obj = 0, best_own = 0;
        for (std::int64_t b = 0; b < num_bins; ++b) {
          const double own =
              NormalizedLoad(Plus(plan.loads[static_cast<std::size_t>(b)], item), norm);
          const double others = b == top_bin ? std::max(second, 0.0) : top;
          const double obj = std::max(others, own);
          if (b == 0 || obj < best_obj || (obj == best_obj && own < best_own)) {
            best_obj = obj;
            best_own = own;
            chosen = b;
          }
        }
        break;
      }
    }
    plan.bin_of[idx] = chosen;
    BinLoad& load = plan.loads[static_cast<std::size_t>(chosen)];
    load = Plus(load, item);
  }
  plan.objective = Objective(plan.loads, norm);
  return plan;
}

bool BruteForceFeasible(std::size_t num_items, std::int64_t num_bins) {
  if (num_bins < 1) return false;
  std::uint64_t total = 1;
  for (std::size_t i = 0; i < num_items; ++i) {
    total *= static_cast<std::uint64_t>(num_bins);
    if (total > kBruteForceLimit) return false;
  }
  return true;
}

PackPlan BruteForcePack(std::span<const ItemCost> items, std::int64_t num_bins,
                        const BinNorm& norm) {
  CheckItems(items, num_bins);
  CheckNorm(norm);
  if (!BruteForceFeasible(items.size(), num_bins)) {
    throw SizeError("brute force needs num_bins^items <= 2^24");
  }
  const std::size_t n = items.size();
  const auto bins = static_cast<std::size_t>(num_bins);

  // Odometer over assignment vectors in lexicographic order; the first
  // strictly better objective wins, so ties keep the smallest vector.
  std::vector<std::int64_t> assign(n, 0);
  std::vector<BinLoad> loads(bins);
  for (const ItemCost& it : items) loads[0] = Plus(loads[0], it);

  std::vector<std::int64_t> best = assign;
  double best_obj = Objective(loads, norm);
  while (true) {
    std::size_t pos = n;
    while (pos > 0) {
      --pos;
      const ItemCost& it = items[pos];
      BinLoad& from = loads[static_cast<std::size_t>(assign[pos])];
      from.seq -= it.seq_tokens;
      from.vit -= it.vit_tokens;
      if (assign[pos] + 1 < num_bins) {
        ++assign[pos];
        loads[static_cast<std::size_t>(assign[pos])] =
            Plus(loads[static_cast<std::size_t>(assign[pos])], it);
        break;
      }
      assign[pos] = 0;
      loads[0] = Plus(loads[0], it);
      if (pos == 0) {
        pos = n;  // wrapped around: enumeration finished
        break;
      }
    }
    if (pos == n) break;
    const double obj = Objective(loads, norm);
    if (obj < best_obj) {
      best_obj = obj;
      best = assign;
    }
  }

  PackPlan plan = EmptyPlan(items, num_bins, norm);
  plan.bin_of = best;
  for (std::size_t i = 0; i < n; ++i) {
    BinLoad& load = plan.loads[static_cast<std::size_t>(best[i])];
    load = Plus(load, items[i]);
  }
  plan.objective = Objective(plan.loads, norm);
  return plan;
}

Imbalance GetImbalance(const PackPlan& plan) {
  auto ratio = [&](auto get) {
    std::int64_t max = 0, sum = 0;
    for (const BinLoad& l : plan.loads) {
      max = std::max(max, get(l));
      sum += get(l);
    }
    if (sum == 0) return 1.0;
    const double mean = static_cast<double>(sum) / static_cast<double>(plan.loads.size());
    return static_cast<double>(max) / mean;
  };
  return {ratio([](const BinLoad& l) { return l.seq; }),
          ratio([](const BinLoad& l) { return l.vit; })};
}

DpBalance BalanceDp(std::span<const ItemCost> items, std::int64_t dp,
                    std::span<const std::int64_t> producers,
                    std::int64_t bytes_per_token) {
  if (dp < 1) throw ArgumentError("dp must be >= 1");
  if (producers.size() != items.size()) {
    throw ValidationError("expected one producer rank per trajectory");
  }
  if (bytes_per_token < 0) throw ArgumentError("bytes_per_token must be >= 0");
  DpBalance out;
  out.plan = PackJoint(items, dp, DefaultNorm(items), PackPolicy::kGreedyMinimax);
  std::vector<Message> flows;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (producers[i] < 0 || producers[i] >= dp) {
      throw ValidationError("trajectory " + std::to_string(items[i].id) +
                            " has no valid producer rank");
    }
    flows.push_back({producers[i], out.plan.bin_of[i], items[i].seq_tokens * bytes_per_token});
  }
  out.dispatch = MakeDispatchPlan(flows);
  return out;
}

}  // namespace mmrl
