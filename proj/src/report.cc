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

#include "mmrl/report.h"

#include <atomic>
#include <cstdio>
#include <exception>
#include <fstream>
#include <ostream>
#include <sstream>
#include <thread>

#include "mmrl/errors.h"
#include "mmrl/gym.h"
#include "mmrl/stable_json.h"

namespace mmrl {
namespace {

using nlohmann::json;

std::string Num(double v) { return FormatNumber(v, 6); }

json VisualJson(const VisualInput& v) {
  return {{"h", v.patches_h()}, {"w", v.patches_w()}, {"frames", v.frames()}, {"merge", v.merge()}};
}

json ImbalanceJson(const Imbalance& im) {
  return {{"seq_ratio", im.seq_ratio}, {"vit_ratio", im.vit_ratio}};
}

json PlanJson(const PackPlan& plan) {
  json bins = json::array();
  for (std::int64_t b = 0; b < plan.num_bins; ++b) {
    json ids = json::array();
    for (std::size_t i = 0; i < plan.item_ids.size(); ++i) {
      if (plan.bin_of[i] == b) ids.push_back(plan.item_ids[i]);
    }
    const BinLoad& load = plan.loads[static_cast<std::size_t>(b)];
    bins.push_back({{"bin", b},
                    {"items", ids},
                    {"seq_tokens", load.seq},
                    {"vit_tokens", load.vit},
                    {"normalized_load", NormalizedLoad(load, plan.norm)}});
  }
  return {{"num_bins", plan.num_bins},
          {"norm", {{"seq_norm", plan.norm.seq_norm}, {"vit_norm", plan.norm.vit_norm}}},
          {"bins", bins},
          {"objective", plan.objective}};
}

json DispatchJson(const DispatchPlan& d, const TopologySpec& topo) {
  json messages = json::array();
  for (const Message& m : d.messages) {
    messages.push_back({{"src", m.src_rank}, {"dst", m.dst_rank}, {"bytes", m.bytes}});
  }
  return {{"messages", messages},
          {"message_count", d.message_count()},
          {"total_bytes", d.total_bytes},
          {"serial_time_sec", d.SerialTime(topo)}};
}

json SourcesJson(const std::map<std::string, SourceMetrics>& sources) {
  json out = json::object();
  for (const auto& [tag, m] : sources) {
    json pass = json::object();
    for (const auto& [k, v] : m.pass_at_k) pass[std::to_string(k)] = v;
    out[tag] = {{"count", m.count},
                {"mean_reward", m.mean_reward},
                {"pass_at_k", pass},
                {"excluded_groups", m.excluded_groups}};
  }
  return out;
}

std::string_view StatusName(RequestRecord::Status s) {
  switch (s) {
    case RequestRecord::Status::kCompleted:
      return "completed";
    case RequestRecord::Status::kCached:
      return "cached";
    case RequestRecord::Status::kDropped:
      return "dropped";
  }
  return "completed";
}

// Requests that were interrupted or that resumed earlier progress; the
// full per-request table is too large for the report.
json NotableRequests(const IterationResult& r) {
  json out = json::array();
  for (const RequestRecord& q : r.requests) {
    if (q.status == RequestRecord::Status::kCompleted && q.tokens_before == 0) continue;
    json row = {{"sample_id", q.sample_id},
                {"step_index", q.step_index},
                {"status", StatusName(q.status)},
                {"ready_sec", q.ready_sec},
                {"start_sec", nullptr},
                {"end_sec", q.end_sec},
                {"service_sec", q.service_sec},
                {"tokens_before", q.tokens_before},
                {"tokens_after", q.tokens_after}};
    if (q.start_sec) row["start_sec"] = *q.start_sec;
    out.push_back(std::move(row));
  }
  return out;
}

std::vector<ItemCost> TrajectoryItems(std::span<const Trajectory> trajectories) {
  std::vector<ItemCost> items;
  items.reserve(trajectories.size());
  for (const Trajectory& t : trajectories) {
    const TrajectoryLoad load = GetTrajectoryLoad(t);
    items.push_back({t.sample_id, std::max<std::int64_t>(load.seq_tokens, 1), load.vit_tokens});
  }
  return items;
}

std::vector<Trajectory> ResolveTrajectories(const Scenario& s,
                                            std::vector<RolloutSample>* samples_out = nullptr) {
  std::vector<RolloutSample> samples = ResolveWorkload(s);
  std::vector<Trajectory> trajs = ExpandAll(samples, s.task, s.trajectory_seed());
  if (samples_out != nullptr) *samples_out = std::move(samples);
  return trajs;
}

std::string Csv(const std::vector<std::string>& header,
                const std::vector<std::vector<std::string>>& rows) {
  std::string out;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i > 0) out += ',';
      out += cells[i];
    }
    out += '\n';
  };
  line(header);
  for (const auto& r : rows) line(r);
  return out;
}

std::string Str(std::int64_t v) { return std::to_string(v); }

json ReportHeader(const std::string& command, const json& config) {
  return {{"command", command}, {"config", config}};
}

struct SimulationOutcome {
  std::vector<PolicyRun> runs;
  IterationMetrics baseline;
  std::vector<RolloutSample> samples;
  std::vector<Trajectory> trajectories;
};

SimulationOutcome RunSimulation(const Scenario& s) {
  SimulationOutcome out;
  out.trajectories = ResolveTrajectories(s, &out.samples);
  if (out.trajectories.empty()) throw ValidationError("the workload has no samples to simulate");
  out.runs = ComparePolicies(out.trajectories, s.resources, s.policies, s.reward, s.engine_seed(),
                             s.iterations);
  out.baseline = SequentialBaseline(out.trajectories, s.resources, s.reward, s.engine_seed());
  return out;
}

}  // namespace

json MetricsToJson(const IterationMetrics& m) {
  json stages = json::object();
  for (Stage st : kAllStages) {
    stages[std::string(StageName(st))] = {{"busy_sec", m.stage(st).busy_sec},
                                          {"idle_sec", m.stage(st).idle_sec}};
  }
  return {{"makespan_sec", m.makespan_sec},
          {"stages", stages},
          {"scheduled", m.scheduled},
          {"completed", m.completed},
          {"cached", m.cached},
          {"dropped", m.dropped},
          {"aborted_count", m.aborted_count},
          {"reuse_hits", m.reuse_hits},
          {"latency_p50_sec", m.latency_p50_sec},
          {"latency_p99_sec", m.latency_p99_sec},
          {"bubble_fraction", m.bubble_fraction}};
}

json MemoryReport(const MemoryScenario& memory) {
  const MemConfig& cfg = memory.config;
  json rows = json::array();
  for (std::int64_t n : memory.image_counts) {
    std::vector<VisualInput> visuals(static_cast<std::size_t>(n), memory.probe_visual);
    rows.push_back({{"images", n},
                    {"naive_bytes", NaivePeakActivation(visuals, cfg)},
                    {"configured_bytes", PeakActivation(visuals, cfg)}});
  }

  BufferRegistry registry;
  for (const BufferEntry& b : memory.buffers) registry.Add(b.name, b.bytes, b.path);
  const BufferTotals before = CommBufferBytes(registry);
  for (const std::string& name : memory.migrate) registry.Migrate(name, BufferPath::kHostComm);
  const BufferTotals after = CommBufferBytes(registry);
  json entries = json::array();
  for (const BufferEntry& b : registry.entries()) {
    entries.push_back({{"name", b.name}, {"bytes", b.bytes}, {"path", BufferPathName(b.path)}});
  }
  auto totals = [](const BufferTotals& t) {
    return json{{"gpu_bytes", t.gpu_bytes}, {"host_bytes", t.host_bytes}};
  };
  return {{"probe_visual", VisualJson(memory.probe_visual)},
          {"peak_activation", rows},
          {"buffers",
           {{"entries", entries},
            {"migrated", memory.migrate},
            {"before", totals(before)},
            {"after", totals(after)},
            {"gpu_reduction_bytes", before.gpu_bytes - after.gpu_bytes}}}};
}

json BalanceReport(std::span<const Trajectory> trajectories, const Scenario& s) {
  const std::vector<ItemCost> items = TrajectoryItems(trajectories);
  const std::int64_t dp = s.topology.dp;
  std::vector<std::int64_t> producers(items.size());
  for (std::size_t i = 0; i < items.size(); ++i) producers[i] = static_cast<std::int64_t>(i) % dp;
  if (items.empty()) {
    return {{"dp", dp}, {"items", 0}};
  }
  const DpBalance balanced = BalanceDp(items, dp, producers, s.packing.bytes_per_token);
  const PackPlan local = PackJoint(items, dp, balanced.plan.norm, PackPolicy::kRoundRobin);
  return {{"dp", dp},
          {"items", items.size()},
          {"plan", PlanJson(balanced.plan)},
          {"imbalance", ImbalanceJson(GetImbalance(balanced.plan))},
          {"unbalanced_objective", local.objective},
          {"unbalanced_imbalance", ImbalanceJson(GetImbalance(local))},
          {"dispatch", DispatchJson(balanced.dispatch, s.topology)}};
}

json PackReport(const Scenario& s) {
  const PackingConfig& p = s.packing;
  std::vector<ItemCost> items = p.items;
  std::string source = "inline";
  if (items.empty()) {
    items = TrajectoryItems(ResolveTrajectories(s));
    source = "workload";
  }
  if (items.empty()) throw ValidationError("packing needs at least one item");
  const BinNorm norm = p.norm.value_or(DefaultNorm(items));

  const PackPlan plan = PackJoint(items, p.num_bins, norm, p.policy);
  json baselines = json::object();
  for (PackPolicy other :
       {PackPolicy::kFirstFitDecreasing, PackPolicy::kGreedyMinimax, PackPolicy::kRoundRobin}) {
    const PackPlan b = PackJoint(items, p.num_bins, norm, other);
    baselines[std::string(PackPolicyName(other))] = {
        {"objective", b.objective}, {"imbalance", ImbalanceJson(GetImbalance(b))}};
  }

  json oracle = nullptr;
  const bool feasible = BruteForceFeasible(items.size(), p.num_bins);
  if (p.oracle == "always" || (p.oracle == "auto" && feasible)) {
    const PackPlan best = BruteForcePack(items, p.num_bins, norm);
    const double ratio = best.objective > 0 ? plan.objective / best.objective : 1.0;
    oracle = {{"objective", best.objective}, {"ratio", ratio}, {"plan", PlanJson(best)}};
  }

  json item_rows = json::array();
  for (const ItemCost& c : items) {
    item_rows.push_back({{"id", c.id}, {"seq_tokens", c.seq_tokens}, {"vit_tokens", c.vit_tokens}});
  }
  return {{"item_source", source},
          {"items", item_rows},
          {"policy", PackPolicyName(p.policy)},
          {"plan", PlanJson(plan)},
          {"imbalance", ImbalanceJson(GetImbalance(plan))},
          {"baselines", baselines},
          {"oracle", oracle}};
}

json PartitionReport(const Scenario& s) {
  const PartitionConfig& p = s.partition;
  const TopologySpec& topo = s.topology;
  std::vector<VisualInput> visuals = p.visuals;
  std::string source = "inline";
  if (visuals.empty()) {
    source = "workload";
    for (const RolloutSample& sample : ResolveWorkload(s)) {
      for (const VisualInput& v : sample.visuals) {
        if (static_cast<std::int64_t>(visuals.size()) >= p.max_workload_visuals) break;
        visuals.push_back(v);
      }
    }
  }

  const std::int64_t ranks = topo.sequence_ranks();
  std::vector<std::int64_t> producers(static_cast<std::size_t>(ranks));
  for (std::int64_t r = 0; r < ranks; ++r) {
    producers[static_cast<std::size_t>(r)] =
        p.producer_mode == "single" ? p.producer_rank : ((r + p.producer_offset) % ranks + ranks) % ranks;
  }

  json rows = json::array();
  std::int64_t naive_total = 0, upstream_total = 0;
  for (const VisualInput& v : visuals) {
    const PartitionPlan plan = PlanShards(v, topo.cp, topo.tp);
    const std::int64_t naive = NaiveGatherVolume(v, topo);
    const std::int64_t upstream = UpstreamDispatchVolume(plan, v, topo);
    naive_total += naive;
    upstream_total += upstream;
    json ranges = json::array();
    for (std::int64_t c = 0; c < plan.cp; ++c) {
      for (std::int64_t t = 0; t < plan.tp; ++t) {
        const TokenRange& range = plan.range(c, t);
        ranges.push_back({{"cp_rank", c}, {"tp_rank", t}, {"begin", range.begin}, {"end", range.end}});
      }
    }
    rows.push_back({{"visual", VisualJson(v)},
                    {"raw_tokens", v.raw_tokens()},
                    {"merged_tokens", plan.merged_tokens},
                    {"padding_tokens", plan.padding_tokens},
                    {"ranges", ranges},
                    {"naive_gather_bytes", naive},
                    {"upstream_dispatch_bytes", upstream},
                    {"dispatch", DispatchJson(BuildDispatch(plan, producers, topo), topo)}});
  }

  json mmtp = json::array();
  const std::pair<MtpOption, const char*> options[] = {{MtpOption::kPassEmbeddings, "pass_embeddings"},
                                                       {MtpOption::kMaskVisual, "mask_visual"},
                                                       {MtpOption::kImageToken, "image_token"}};
  for (const LayoutSpec& spec : p.layouts) {
    json per_option = json::object();
    std::int64_t length = 0;
    for (const auto& [option, name] : options) {
      const MtpLayout layout = BuildLayout(spec, option);
      length = static_cast<std::int64_t>(layout.slots.size());
      const MtpHeadInput head = MtpHeadInputFor(layout);
      const PartitionCompat compat = PartitionCompatFor(layout, topo.cp);
      per_option[name] = {{"cross_stage_bytes", MtpCrossStageBytes(layout, topo)},
                          {"head_length", head.slots.size()},
                          {"needs_offset_remap", compat.needs_offset_remap},
                          {"needs_embedding_shard_alignment", compat.needs_embedding_shard_alignment}};
    }
    mmtp.push_back({{"name", spec.name}, {"sequence_length", length}, {"options", per_option}});
  }

  return {{"visual_source", source},
          {"sequence_ranks", ranks},
          {"producers", producers},
          {"visuals", rows},
          {"naive_gather_bytes", naive_total},
          {"upstream_dispatch_bytes", upstream_total},
          {"mmtp", mmtp}};
}

std::vector<OutputFile> CmdGen(const Scenario& s) {
  std::ostringstream out;
  WriteTrace(ResolveWorkload(s), out);
  return {{"trace.jsonl", out.str()}};
}

std::vector<OutputFile> CmdSimulate(const Scenario& s, ReportFormat format) {
  const SimulationOutcome sim = RunSimulation(s);
  std::vector<OutputFile> files;

  json policies = json::object();
  std::vector<std::vector<std::string>> csv_rows;
  for (const PolicyRun& run : sim.runs) {
    json iterations = json::array();
    std::vector<RewardRecord> rewards;
    for (std::size_t it = 0; it < run.iterations.size(); ++it) {
      const IterationResult& r = run.iterations[it];
      json row = MetricsToJson(r.metrics);
      row["iteration"] = it;
      row["notable_requests"] = NotableRequests(r);
      row["cache_after"] = json::array();
      for (const auto& [id, e] : r.cache) {
        row["cache_after"].push_back({{"sample_id", e.sample_id},
                                      {"step_index", e.step_index},
                                      {"tokens_generated", e.tokens_generated}});
      }
      iterations.push_back(std::move(row));
      rewards.insert(rewards.end(), r.rewards.begin(), r.rewards.end());

      const std::string suffix = run.name + "_" + std::to_string(it);
      files.push_back({"timeline_" + suffix + ".csv", TimelineCsv(r)});
      files.push_back({"trace_" + suffix + ".jsonl", TraceToJsonl(r.trace)});

      const IterationMetrics& m = r.metrics;
      std::vector<std::string> cells = {run.name,
                                        Str(static_cast<std::int64_t>(it)),
                                        Num(m.makespan_sec),
                                        Num(m.bubble_fraction),
                                        Str(m.scheduled),
                                        Str(m.completed),
                                        Str(m.cached),
                                        Str(m.dropped),
                                        Str(m.aborted_count),
                                        Str(m.reuse_hits),
                                        Num(m.latency_p50_sec),
                                        Num(m.latency_p99_sec)};
      for (Stage st : kAllStages) cells.push_back(Num(m.stage(st).busy_sec));
      csv_rows.push_back(std::move(cells));
    }
    policies[run.name] = {
        {"iterations", iterations},
        {"sources", SourcesJson(SourceReport(rewards, sim.samples, s.reward.pass_ks,
                                             s.reward.success_threshold))}};
  }

  if (format == ReportFormat::kCsv) {
    std::vector<std::string> header = {"policy",        "iteration",       "makespan_sec",
                                       "bubble_fraction", "scheduled",     "completed",
                                       "cached",        "dropped",         "aborted_count",
                                       "reuse_hits",    "latency_p50_sec", "latency_p99_sec"};
    for (Stage st : kAllStages) header.push_back(std::string(StageName(st)) + "_busy_sec");
    files.push_back({"report.csv", Csv(header, csv_rows)});
  } else {
    json report = ReportHeader("simulate", ScenarioToJson(s));
    report["policies"] = policies;
    report["sequential_baseline"] = MetricsToJson(sim.baseline);
    report["memory"] = MemoryReport(s.memory);
    report["balance"] = BalanceReport(sim.trajectories, s);
    files.push_back({"report.json", DumpStable(report) + "\n"});
  }
  return files;
}

std::vector<OutputFile> CmdPack(const Scenario& s, ReportFormat format) {
  const json pack = PackReport(s);
  if (format == ReportFormat::kCsv) {
    std::vector<std::vector<std::string>> rows;
    for (const json& bin : pack["plan"]["bins"]) {
      for (const json& id : bin["items"]) {
        rows.push_back({Str(id.get<std::int64_t>()), Str(bin["bin"].get<std::int64_t>())});
      }
    }
    return {{"pack.csv", Csv({"item_id", "bin"}, rows)}};
  }
  json report = ReportHeader("pack", ScenarioToJson(s));
  report["pack"] = pack;
  return {{"pack.json", DumpStable(report) + "\n"}};
}

std::vector<OutputFile> CmdPartition(const Scenario& s, ReportFormat format) {
  const json part = PartitionReport(s);
  if (format == ReportFormat::kCsv) {
    std::vector<std::vector<std::string>> rows;
    std::int64_t index = 0;
    for (const json& v : part["visuals"]) {
      rows.push_back({Str(index++),
                      Str(v["visual"]["h"].get<std::int64_t>()),
                      Str(v["visual"]["w"].get<std::int64_t>()),
                      Str(v["visual"]["frames"].get<std::int64_t>()),
                      Str(v["visual"]["merge"].get<std::int64_t>()),
                      Str(v["merged_tokens"].get<std::int64_t>()),
                      Str(v["padding_tokens"].get<std::int64_t>()),
                      Str(v["naive_gather_bytes"].get<std::int64_t>()),
                      Str(v["upstream_dispatch_bytes"].get<std::int64_t>()),
                      Str(v["dispatch"]["message_count"].get<std::int64_t>())});
    }
    return {{"partition.csv",
             Csv({"visual", "h", "w", "frames", "merge", "merged_tokens", "padding_tokens",
                  "naive_gather_bytes", "upstream_dispatch_bytes", "message_count"},
                 rows)}};
  }
  json report = ReportHeader("partition", ScenarioToJson(s));
  report["partition"] = part;
  return {{"partition.json", DumpStable(report) + "\n"}};
}

std::vector<OutputFile> CmdSweep(const json& doc, const std::filesystem::path& base_dir,
                                 std::int64_t parallel, ReportFormat format) {
  const Scenario base = ParseScenario(doc, base_dir);
  if (base.sweep.empty()) throw ConfigError("sweep.parameters", "at least one parameter is required");

  // Row-major grid: the first parameter varies slowest.
  std::vector<std::vector<std::size_t>> grid = {{}};
  for (const SweepParameter& p : base.sweep) {
    std::vector<std::vector<std::size_t>> next;
    for (const auto& prefix : grid) {
      for (std::size_t i = 0; i < p.values.size(); ++i) {
        auto point = prefix;
        point.push_back(i);
        next.push_back(std::move(point));
      }
    }
    grid = std::move(next);
  }

  struct PointResult {
    json row;
    std::vector<std::vector<std::string>> csv;
    std::exception_ptr error;
  };
  std::vector<PointResult> results(grid.size());

  auto run_point = [&](std::size_t index) {
    PointResult& out = results[index];
    try {
      json point_doc = doc;
      json params = json::object();
      for (std::size_t k = 0; k < base.sweep.size(); ++k) {
        const SweepParameter& p = base.sweep[k];
        const json& value = p.values[grid[index][k]];
        SetAtPath(point_doc, p.path, value);
        params[p.path] = value;
      }
      const Scenario s = ParseScenario(point_doc, base_dir);
      const SimulationOutcome sim = RunSimulation(s);
      json policies = json::object();
      for (const PolicyRun& run : sim.runs) {
        const IterationMetrics& m = run.iterations.back().metrics;
        double makespan = 0;
        std::int64_t aborted = 0, hits = 0;
        for (const IterationResult& r : run.iterations) {
          makespan += r.metrics.makespan_sec;
          aborted += r.metrics.aborted_count;
          hits += r.metrics.reuse_hits;
        }
        makespan /= static_cast<double>(run.iterations.size());
        policies[run.name] = {{"mean_makespan_sec", makespan},
                              {"bubble_fraction", m.bubble_fraction},
                              {"aborted_count", aborted},
                              {"reuse_hits", hits},
                              {"latency_p99_sec", m.latency_p99_sec}};
        std::vector<std::string> cells = {Str(static_cast<std::int64_t>(index))};
        for (std::size_t k = 0; k < base.sweep.size(); ++k) {
          cells.push_back(base.sweep[k].values[grid[index][k]].dump());
        }
        cells.insert(cells.end(), {run.name, Num(makespan), Num(m.bubble_fraction), Str(aborted),
                                   Str(hits), Num(m.latency_p99_sec)});
        out.csv.push_back(std::move(cells));
      }
      const json balance = BalanceReport(sim.trajectories, s);
      out.row = {{"index", index},
                 {"parameters", params},
                 {"policies", policies},
                 {"sequential_makespan_sec", sim.baseline.makespan_sec},
                 {"dp_imbalance", balance.contains("imbalance") ? balance["imbalance"] : json(nullptr)}};
    } catch (...) {
      out.error = std::current_exception();
    }
  };

  const std::size_t workers =
      std::max<std::size_t>(1, std::min<std::size_t>(static_cast<std::size_t>(std::max<std::int64_t>(parallel, 1)), grid.size()));
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < grid.size(); i = next++) run_point(i);
    });
  }
  for (std::size_t i = next++; i < grid.size(); i = next++) run_point(i);
  for (std::thread& t : pool) t.join();

  for (const PointResult& r : results) {
    if (r.error) std::rethrow_exception(r.error);
  }

  if (format == ReportFormat::kCsv) {
    std::vector<std::string> header = {"index"};
    for (const SweepParameter& p : base.sweep) header.push_back(p.path);
    header.insert(header.end(), {"policy", "mean_makespan_sec", "bubble_fraction", "aborted_count",
                                 "reuse_hits", "latency_p99_sec"});
    std::vector<std::vector<std::string>> rows;
    for (const PointResult& r : results) rows.insert(rows.end(), r.csv.begin(), r.csv.end());
    // Parameter values are JSON; quote any that contain a comma.
    for (auto& row : rows) {
      for (auto& cell : row) {
        if (cell.find(',') != std::string::npos || cell.find('"') != std::string::npos) {
          std::string quoted = "\"";
          for (char c : cell) quoted += c == '"' ? std::string("\"\"") : std::string(1, c);
          cell = quoted + "\"";
        }
      }
    }
    return {{"sweep.csv", Csv(header, rows)}};
  }
  json report = ReportHeader("sweep", ScenarioToJson(base));
  report["points"] = json::array();
  for (PointResult& r : results) report["points"].push_back(std::move(r.row));
  return {{"sweep.json", DumpStable(report) + "\n"}};
}

int RunCommand(const RunOptions& options, std::ostream& log) {
  std::vector<std::filesystem::path> written;
  bool created_dir = false;
  std::filesystem::path dir;
  auto cleanup = [&] {
    std::error_code ec;
    for (const auto& f : written) std::filesystem::remove(f, ec);
    if (created_dir) std::filesystem::remove(dir, ec);
  };

  try {
    ReportFormat format;
    if (options.format == "json") {
      format = ReportFormat::kJson;
    } else if (options.format == "csv") {
      format = ReportFormat::kCsv;
    } else {
      throw ConfigError("--format", "expected json or csv");
    }
    if (options.parallel < 1) throw ConfigError("--parallel", "must be >= 1");
    if (options.parallel != 1 && options.command != "sweep") {
      throw ConfigError("--parallel", "only applies to sweep");
    }

    json doc = ReadConfigDocument(options.config);
    if (options.seed) doc["seed"] = *options.seed;
    const std::filesystem::path base_dir = options.config.parent_path();
    const Scenario scenario = ParseScenario(doc, base_dir);

    std::vector<OutputFile> files;
    if (options.command == "gen") {
      if (format != ReportFormat::kJson) throw ConfigError("--format", "gen always writes JSON lines");
      files = CmdGen(scenario);
    } else if (options.command == "simulate") {
      files = CmdSimulate(scenario, format);
    } else if (options.command == "pack") {
      files = CmdPack(scenario, format);
    } else if (options.command == "partition") {
      files = CmdPartition(scenario, format);
    } else if (options.command == "sweep") {
      files = CmdSweep(doc, base_dir, options.parallel, format);
    } else {
      throw ConfigError("command", "unknown subcommand '" + options.command + "'");
    }

    dir = options.out.value_or(std::filesystem::path(scenario.output_dir));
    if (!std::filesystem::exists(dir)) {
      std::filesystem::create_directories(dir);
      created_dir = true;
    }
    for (const OutputFile& f : files) {
      const std::filesystem::path path = dir / f.name;
      std::ofstream out(path, std::ios::binary);
      if (!out) throw Error("cannot write " + path.string());
      written.push_back(path);
      out << f.content;
      if (!out.flush()) throw Error("cannot write " + path.string());
    }
    log << "wrote " << files.size() << " file(s) to " << dir.string() << "\n";
    return 0;
  } catch (const ConfigError& e) {
    cleanup();
    log << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    cleanup();
    log << "error: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace mmrl
