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

// Acceptance checks. Prints one line per criterion:
//   criterion N PASS|FAIL <elapsed>s <detail>
// and exits non-zero when any selected criterion fails.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "mmrl/balance.h"
#include "mmrl/engine.h"
#include "mmrl/memory.h"
#include "mmrl/partition.h"
#include "mmrl/random.h"
#include "mmrl/report.h"
#include "mmrl/reward.h"
#include "mmrl/scenario.h"
#include "test_util.h"

namespace mmrl {
namespace {

namespace fs = std::filesystem;

// Wall-clock limits per criterion, in seconds. Zero means unbounded.
constexpr double kLimitSec[] = {0, 5, 5, 2, 60, 5, 60, 1, 0, 0};
constexpr double kPassAtKTolerance = 1e-12;
constexpr double kWorstPackRatio = 2.0;
constexpr double kMeanPackRatio = 1.2;
constexpr std::int64_t kGpuReductionBytes = 7'000'000'000;

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Collects the first few failures of a check without stopping the run.
class Tally {
 public:
  void Check(bool ok, const std::string& what) {
    ++checks_;
    if (ok) return;
    if (failures_++ < 3) notes_ << (failures_ > 1 ? "; " : "") << what;
  }
  Outcome Done(const std::string& summary) const {
    std::ostringstream d;
    d << summary << " (" << checks_ << " checks";
    if (failures_ > 0) d << ", " << failures_ << " violations: " << notes_.str();
    d << ")";
    return {failures_ == 0, d.str()};
  }
  std::int64_t failures() const { return failures_; }

 private:
  std::int64_t checks_ = 0;
  std::int64_t failures_ = 0;
  std::ostringstream notes_;
};

std::vector<VisualInput> PartitionCases() {
  Rng rng(20260101);
  std::vector<VisualInput> v;
  for (int i = 0; i < 1000; ++i) v.push_back(testing::RandomVisual(rng));
  return v;
}

std::string Describe(const VisualInput& v, std::int64_t cp, std::int64_t tp) {
  std::ostringstream s;
  s << v.patches_h() << "x" << v.patches_w() << "x" << v.frames() << "/m" << v.merge() << " cp" << cp
    << " tp" << tp;
  return s.str();
}

Outcome PartitionCorrectness() {
  Tally t;
  for (const VisualInput& v : PartitionCases()) {
    for (std::int64_t cp = 1; cp <= 4; ++cp) {
      for (std::int64_t tp = 1; tp <= 4; ++tp) {
        const PartitionPlan plan = PlanShards(v, cp, tp);
        const std::int64_t r = cp * tp;
        // Independent count of merged tokens and the padded length.
        const std::int64_t m = v.merge();
        const std::int64_t merged =
            ((v.patches_h() + m - 1) / m) * ((v.patches_w() + m - 1) / m) * v.frames();
        const std::int64_t padded = (merged + r - 1) / r * r;
        std::vector<TokenRange> ranges = plan.ranges;
        std::sort(ranges.begin(), ranges.end(),
                  [](const TokenRange& a, const TokenRange& b) { return a.begin < b.begin; });
        bool ok = static_cast<std::int64_t>(ranges.size()) == r && plan.merged_tokens == merged;
        std::int64_t cursor = 0, lo = INT64_MAX, hi = 0;
        for (const TokenRange& s : ranges) {
          ok = ok && s.begin == cursor && s.end >= s.begin;
          // Boundaries in raw-patch units fall on whole downsample groups.
          ok = ok && (s.begin * plan.group_size) % (m * m) == 0;
          cursor = s.end;
          lo = std::min(lo, s.size());
          hi = std::max(hi, s.size());
        }
        ok = ok && cursor == padded && hi - lo <= 1;
        t.Check(ok, Describe(v, cp, tp));
      }
    }
  }
  return t.Done("1000 visuals x 16 layouts: disjoint, covering, aligned, balanced");
}

Outcome CommunicationDominance() {
  Tally dominance, equality;
  std::int64_t padded_cases = 0, unpadded_cases = 0;
  std::map<std::int64_t, std::int64_t> violations_by_ranks;
  for (const VisualInput& v : PartitionCases()) {
    for (std::int64_t cp = 1; cp <= 4; ++cp) {
      for (std::int64_t tp = 1; tp <= 4; ++tp) {
        const std::int64_t r = cp * tp;
        if (r < 2) continue;
        TopologySpec topo;
        topo.cp = cp;
        topo.tp = tp;
        const PartitionPlan plan = PlanShards(v, cp, tp);
        const std::int64_t up = UpstreamDispatchVolume(plan, v, topo);
        const std::int64_t naive = NaiveGatherVolume(v, topo);
        if (up > naive) ++violations_by_ranks[r];
        dominance.Check(up <= naive, Describe(v, cp, tp) + " up=" + std::to_string(up) +
                                         " naive=" + std::to_string(naive));
        const bool no_padding = v.padded_h() == v.patches_h() && v.padded_w() == v.patches_w() &&
                                plan.padding_tokens == 0;
        if (no_padding) {
          ++unpadded_cases;
          equality.Check(up * (r - 1) == naive, Describe(v, cp, tp));
        } else {
          ++padded_cases;
        }
      }
    }
  }
  Outcome dom = dominance.Done("upstream <= naive");
  Outcome eq = equality.Done("upstream*(R-1) == naive on " + std::to_string(unpadded_cases) +
                             " unpadded cases");
  std::ostringstream by_r;
  for (const auto& [r, count] : violations_by_ranks) by_r << " R=" << r << ":" << count;
  return {dom.pass && eq.pass, dom.detail + "; " + eq.detail + "; padded cases " +
                                   std::to_string(padded_cases) + "; violations by rank count" +
                                   by_r.str()};
}

Outcome MmtpAdvantage() {
  Tally t;
  Rng rng(77);
  for (int i = 0; i < 200; ++i) {
    TopologySpec topo;
    topo.pp = rng.UniformInt(2, 8);
    topo.hidden_size = rng.UniformInt(1, 8192);
    topo.bytes_per_element = rng.UniformInt(1, 4);
    MtpLayout layout = testing::RandomLayout(rng, MtpOption::kImageToken);
    std::int64_t n_visual = 0;
    for (const LayoutSlot& s : layout.slots) n_visual += std::holds_alternative<VisualSlot>(s);
    const std::string id = "layout " + std::to_string(i);

    t.Check(MtpCrossStageBytes(layout, topo) == 0, id + " image_token bytes");
    const MtpHeadInput head = MtpHeadInputFor(layout);
    bool preserved = head.slots.size() == layout.slots.size();
    for (std::size_t p = 0; preserved && p < layout.slots.size(); ++p) {
      if (const auto* text = std::get_if<TextSlot>(&layout.slots[p])) {
        preserved = head.slots[p].kind == HeadSlot::Kind::kText && head.slots[p].value == text->token_id;
      } else {
        preserved = head.slots[p].kind == HeadSlot::Kind::kImageToken;
      }
      preserved = preserved && head.offsets.at(static_cast<std::int64_t>(p)) == static_cast<std::int64_t>(p);
    }
    t.Check(preserved, id + " image_token positions");

    layout.option = MtpOption::kMaskVisual;
    t.Check(MtpCrossStageBytes(layout, topo) == 0, id + " mask_visual bytes");
    layout.option = MtpOption::kPassEmbeddings;
    t.Check(MtpCrossStageBytes(layout, topo) == n_visual * topo.hidden_size * topo.bytes_per_element,
            id + " pass_embeddings bytes");
  }
  return t.Done("200 layouts with pp >= 2");
}

Outcome PackingQuality() {
  Tally t;
  Rng rng(4242);
  double sum_ratio = 0, worst = 0;
  const int n = 200;
  for (int i = 0; i < n; ++i) {
    const auto items = testing::RandomItems(rng, 10);
    const std::int64_t bins = rng.UniformInt(2, 3);
    const BinNorm norm = DefaultNorm(items);
    const PackPlan greedy = PackJoint(items, bins, norm, PackPolicy::kGreedyMinimax);
    const PackPlan best = BruteForcePack(items, bins, norm);
    const double ratio = greedy.objective / best.objective;
    sum_ratio += ratio;
    worst = std::max(worst, ratio);
    t.Check(ratio <= kWorstPackRatio, "instance " + std::to_string(i));

    // Partition of the item set: every item in exactly one valid bin, and
    // the reported loads match a recount.
    bool partition = greedy.bin_of.size() == items.size();
    std::vector<BinLoad> loads(static_cast<std::size_t>(bins));
    std::set<std::int64_t> seen;
    for (std::size_t k = 0; partition && k < items.size(); ++k) {
      const std::int64_t b = greedy.bin_of[k];
      partition = b >= 0 && b < bins && seen.insert(greedy.item_ids[k]).second &&
                  greedy.item_ids[k] == items[k].id;
      if (partition) {
        loads[static_cast<std::size_t>(b)].seq += items[k].seq_tokens;
        loads[static_cast<std::size_t>(b)].vit += items[k].vit_tokens;
      }
    }
    for (std::size_t b = 0; partition && b < loads.size(); ++b) {
      partition = loads[b].seq == greedy.loads[b].seq && loads[b].vit == greedy.loads[b].vit;
    }
    t.Check(partition, "instance " + std::to_string(i) + " is not a partition");
  }
  const double mean = sum_ratio / n;
  t.Check(mean <= kMeanPackRatio, "mean ratio " + std::to_string(mean));
  std::ostringstream s;
  s << "200 instances: worst ratio " << worst << ", mean ratio " << mean;
  return t.Done(s.str());
}

Outcome PassAtKOracle() {
  Tally t;
  double max_err = 0;
  for (std::int64_t n = 1; n <= 8; ++n) {
    for (std::int64_t c = 0; c <= n; ++c) {
      for (std::int64_t k = 1; k <= n; ++k) {
        // Items [0, c) are correct. Count k-subsets that hit at least one.
        std::int64_t hits = 0, total = 0;
        for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
          if (__builtin_popcount(mask) != k) continue;
          ++total;
          hits += (mask & ((1u << c) - 1)) != 0;
        }
        const double exact = static_cast<double>(hits) / static_cast<double>(total);
        const double err = std::abs(PassAtK(n, c, k) - exact);
        max_err = std::max(max_err, err);
        t.Check(err < kPassAtKTolerance,
                "n=" + std::to_string(n) + " c=" + std::to_string(c) + " k=" + std::to_string(k));
      }
    }
  }
  std::ostringstream s;
  s << "n <= 8 against subset enumeration, max |error| " << max_err;
  return t.Done(s.str());
}

bool Conserved(const IterationMetrics& m) {
  return m.completed + m.cached + m.dropped == m.scheduled &&
         m.aborted_count == m.cached + m.dropped;
}

Outcome EngineDominance() {
  Tally t;
  RewardConfig reward = testing::RuleAndJudge();
  Policy overlapped;
  overlapped.name = "overlapped";
  overlapped.reward_trigger = RewardTrigger::kPerRequestCallback;
  overlapped.overlap_batch_with_transfer = true;
  overlapped.ref_prefetch = true;
  Policy callback = Policy::Sequential();
  callback.name = "callback";
  callback.reward_trigger = RewardTrigger::kPerRequestCallback;
  Policy aborting = overlapped;
  aborting.name = "aborting";
  aborting.abort = AbortTime{2.0};
  aborting.abort_reuse = true;

  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    WorkloadSpec spec = testing::SmallWorkloadSpec(seed, 24);
    spec.image_count = Distribution::Uniform(0, 2);
    TaskSpec task;
    if (seed % 2 == 1) {
      task.kind = TaskSpec::Kind::kMultiStep;
      task.max_steps = 3;
      task.observation_tokens = 32;
      task.image_probability = 0.25;
      task.termination_probability = 0.4;
    }
    const auto trajectories = ExpandAll(GenWorkload(spec), task, DeriveSeed(seed, "trajectory"));
    const Resources res = testing::FastResources();
    const std::string id = "seed " + std::to_string(seed);

    const IterationMetrics base = SequentialBaseline(trajectories, res, reward, seed);
    const IterationResult over = SimulateIteration(trajectories, res, overlapped, reward, seed, {});
    const IterationResult cb = SimulateIteration(trajectories, res, callback, reward, seed, {});
    const IterationResult ab = SimulateIteration(trajectories, res, aborting, reward, seed, {});
    t.Check(over.metrics.makespan_sec <= base.makespan_sec, id + " overlapped > sequential");
    t.Check(cb.metrics.makespan_sec <= base.makespan_sec, id + " callback > barrier");
    for (const IterationMetrics* m : {&base, &over.metrics, &cb.metrics, &ab.metrics}) {
      t.Check(Conserved(*m), id + " conservation");
    }
    const IterationResult again = SimulateIteration(trajectories, res, aborting, reward, seed, {});
    t.Check(TraceToJsonl(again.trace) == TraceToJsonl(ab.trace), id + " trace differs");
  }
  return t.Done("50 paired runs");
}

Outcome MemoryClaim() {
  Tally t;
  MemConfig cfg;
  cfg.act_bytes_per_token_per_layer = 16384;
  cfg.vit_layers = 32;
  cfg.projector_bytes_per_token = 32768;
  cfg.recompute_vit = true;
  cfg.recompute_projector = true;
  cfg.offload = true;
  cfg.offload_staging_bytes = 64 << 20;
  cfg.checkpoint_interval_layers = 4;
  for (const VisualInput probe : {VisualInput(32, 32, 1, 2), VisualInput(17, 9, 3, 2), VisualInput(64, 48, 1, 4)}) {
    const std::vector<VisualInput> one(1, probe);
    const std::int64_t flat = PeakActivation(one, cfg);
    const std::int64_t unit = NaivePeakActivation(one, cfg);
    t.Check(unit > 0, "naive peak is zero");
    for (std::int64_t n = 1; n <= 32; ++n) {
      const std::vector<VisualInput> batch(static_cast<std::size_t>(n), probe);
      t.Check(PeakActivation(batch, cfg) == flat, "configured peak moves at n=" + std::to_string(n));
      t.Check(NaivePeakActivation(batch, cfg) == n * unit, "naive peak not linear at n=" + std::to_string(n));
    }
  }
  return t.Done("image counts 1..32, three probe sizes");
}

nlohmann::json RunScenario(const std::string& command, const fs::path& config, const std::string& file,
                           Tally& t) {
  testing::TempDir dir;
  RunOptions o;
  o.command = command;
  o.config = config;
  o.out = dir.path();
  std::ostringstream log;
  const int code = RunCommand(o, log);
  t.Check(code == 0, command + " exited " + std::to_string(code) + ": " + log.str());
  if (code != 0) return nullptr;
  return nlohmann::json::parse(testing::ReadFile(dir.path() / file));
}

Outcome BufferReduction() {
  Tally t;
  const fs::path config = fs::path(MMRL_SCENARIO_DIR) / "buffer_registry.json";
  const nlohmann::json report = RunScenario("simulate", config, "report.json", t);
  if (report.is_null()) return t.Done("simulate failed");
  const nlohmann::json& buffers = report["memory"]["buffers"];
  std::int64_t migrated = 0;
  std::set<std::string> names;
  for (const auto& n : buffers["migrated"]) names.insert(n.get<std::string>());
  for (const auto& e : buffers["entries"]) {
    if (names.count(e["name"].get<std::string>())) migrated += e["bytes"].get<std::int64_t>();
  }
  const std::int64_t reduction = buffers["gpu_reduction_bytes"].get<std::int64_t>();
  t.Check(migrated == kGpuReductionBytes, "migrated " + std::to_string(migrated));
  t.Check(reduction == kGpuReductionBytes, "reported reduction " + std::to_string(reduction));
  t.Check(buffers["before"]["gpu_bytes"].get<std::int64_t>() -
                  buffers["after"]["gpu_bytes"].get<std::int64_t>() ==
              kGpuReductionBytes,
          "before - after");
  return t.Done("gpu_reduction_bytes = " + std::to_string(reduction));
}

Outcome StragglerReuse() {
  Tally t;
  const fs::path config = fs::path(MMRL_SCENARIO_DIR) / "straggler.json";
  const Scenario s = LoadScenario(config);
  if (s.policies.size() != 1 || s.iterations < 2) {
    t.Check(false, "scenario needs one policy and two iterations");
    return t.Done("bad scenario");
  }
  const Policy& policy = s.policies[0];
  const auto* deadline = std::get_if<AbortTime>(&policy.abort);
  t.Check(deadline != nullptr && policy.abort_reuse, "policy must abort on time with reuse");
  if (deadline == nullptr) return t.Done("bad scenario");
  const double d = deadline->deadline_sec;

  const auto samples = ResolveWorkload(s);
  const auto trajectories = ExpandAll(samples, s.task, s.trajectory_seed());
  // The straggler is the only sample whose service time runs past d.
  std::int64_t straggler = -1;
  double original = 0;
  for (const Trajectory& tr : trajectories) {
    const InferenceRequest& q = tr.requests.front();
    const double service = static_cast<double>(q.context_tokens) / s.resources.prefill_tokens_per_sec +
                           static_cast<double>(q.expected_response_tokens) / s.resources.decode_tokens_per_sec;
    if (service > d) {
      t.Check(straggler == -1, "more than one sample outlasts the deadline");
      straggler = tr.sample_id;
      original = service;
    }
  }
  t.Check(straggler >= 0, "no straggler in the trace");

  const auto runs = SimulateIterations(trajectories, s.resources, policy, s.reward, s.engine_seed(), 2);
  const IterationResult& first = runs[0];
  const IterationResult& second = runs[1];
  t.Check(first.metrics.aborted_count == 1, "first iteration aborted " + std::to_string(first.metrics.aborted_count));
  t.Check(first.cache.size() == 1 && first.cache.count(straggler) == 1, "straggler not cached");
  bool abort_at_d = false;
  for (const TraceEvent& e : first.trace) abort_at_d |= e.kind == "abort" && e.time == d;
  t.Check(abort_at_d, "no abort event at the deadline");
  const std::int64_t progress = first.cache.count(straggler) ? first.cache.at(straggler).tokens_generated : -1;
  t.Check(second.metrics.reuse_hits == 1, "reuse hits " + std::to_string(second.metrics.reuse_hits));
  double remaining = -1;
  for (const RequestRecord& q : second.requests) {
    if (q.sample_id == straggler) remaining = q.service_sec;
  }
  const double expected = original - static_cast<double>(progress) / s.resources.decode_tokens_per_sec;
  t.Check(remaining == expected, "remaining " + std::to_string(remaining) + " vs " + std::to_string(expected));

  // The written report agrees with the direct run.
  const nlohmann::json report = RunScenario("simulate", config, "report.json", t);
  if (!report.is_null()) {
    const auto& its = report["policies"][policy.name]["iterations"];
    t.Check(its[0]["aborted_count"] == 1 && its[1]["reuse_hits"] == 1, "report counters");
  }
  std::ostringstream msg;
  msg << "sample " << straggler << " aborted at " << d << " s with " << progress
      << " tokens; remaining service " << remaining << " = " << original << " - " << progress << "/"
      << s.resources.decode_tokens_per_sec;
  return t.Done(msg.str());
}

}  // namespace
}  // namespace mmrl

int main(int argc, char** argv) {
  CLI::App app{"mmrl acceptance checks"};
  std::vector<int> selected;
  app.add_option("--criterion", selected, "Criteria to run (default: all)")->check(CLI::Range(1, 9));
  CLI11_PARSE(app, argc, argv);
  if (selected.empty()) selected = {1, 2, 3, 4, 5, 6, 7, 8, 9};

  const std::map<int, std::function<mmrl::Outcome()>> checks = {
      {1, mmrl::PartitionCorrectness}, {2, mmrl::CommunicationDominance},
      {3, mmrl::MmtpAdvantage},        {4, mmrl::PackingQuality},
      {5, mmrl::PassAtKOracle},        {6, mmrl::EngineDominance},
      {7, mmrl::MemoryClaim},          {8, mmrl::BufferReduction},
      {9, mmrl::StragglerReuse},
  };
  bool all = true;
  for (int n : selected) {
    const auto start = std::chrono::steady_clock::now();
    mmrl::Outcome out;
    try {
      out = checks.at(n)();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const double limit = mmrl::kLimitSec[n];
    if (limit > 0 && sec >= limit) {
      out.pass = false;
      out.detail += "; over the " + std::to_string(limit) + " s budget";
    }
    std::cout << "criterion " << n << " " << (out.pass ? "PASS" : "FAIL") << " "
              << std::to_string(sec) << "s " << out.detail << "\n";
    all = all && out.pass;
  }
  return all ? 0 : 1;
}
