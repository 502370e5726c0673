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

#include "mmrl/engine.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <set>
#include <sstream>
#include <tuple>

#include "mmrl/errors.h"
#include "mmrl/stable_json.h"

namespace mmrl {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};

std::size_t Idx(Stage s) { return static_cast<std::size_t>(s); }

// Rollout events at one timestamp are handled finishes first, then newly
// ready requests, then an abort, so that work ending exactly at the abort
// instant counts as completed.
enum class EventType { kFinish = 0, kReady = 1, kAbort = 2 };

struct Event {
  double time = 0.0;
  EventType type = EventType::kReady;
  std::int64_t sample_id = 0;
  std::size_t traj = 0;
  std::int64_t worker = 0;
};

struct EventLater {
  bool operator()(const Event& a, const Event& b) const {
    return std::tie(a.time, a.type, a.sample_id) > std::tie(b.time, b.type, b.sample_id);
  }
};

struct TrajState {
  std::size_t step = 0;
  // Progress restored from the abort cache for request `resume_step`.
  std::int64_t resume_step = -1;
  std::int64_t resume_tokens = 0;
  bool running = false;
  bool done = false;
  double ready_sec = 0.0;
  double start_sec = 0.0;
  double fixed_sec = 0.0;  // prefill + vit part of the running request
  std::int64_t worker = -1;
  std::size_t record = 0;
  double completion_sec = 0.0;
};

struct ServiceTime {
  double fixed_sec = 0.0;   // prefill + encoder
  double decode_sec = 0.0;  // remaining decode
  double total() const { return fixed_sec + decode_sec; }
};

ServiceTime RequestService(const InferenceRequest& r, std::int64_t tokens_done,
                           const Resources& res) {
  std::int64_t vit = 0;
  for (const VisualInput& v : r.new_visuals) vit += v.merged_tokens();
  ServiceTime t;
  t.fixed_sec = static_cast<double>(r.context_tokens) / res.prefill_tokens_per_sec +
                static_cast<double>(vit) / res.vit_tokens_per_sec;
  t.decode_sec = static_cast<double>(r.expected_response_tokens - tokens_done) /
                 res.decode_tokens_per_sec;
  return t;
}

std::vector<Interval> MergeIntervals(std::vector<Interval> v) {
  std::sort(v.begin(), v.end(), [](const Interval& a, const Interval& b) {
    return std::tie(a.begin, a.end) < std::tie(b.begin, b.end);
  });
  std::vector<Interval> out;
  for (const Interval& i : v) {
    if (!(i.end > i.begin)) continue;
    if (!out.empty() && i.begin <= out.back().end) {
      out.back().end = std::max(out.back().end, i.end);
    } else {
      out.push_back(i);
    }
  }
  return out;
}

double Percentile(std::vector<double> v, double p) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  // Nearest rank.
  auto rank = static_cast<std::size_t>(std::ceil(p * static_cast<double>(v.size())));
  rank = std::clamp<std::size_t>(rank, 1, v.size());
  return v[rank - 1];
}

std::string Num(double v) { return FormatNumber(v, 9); }

class TraceLog {
 public:
  void Add(double time, Stage stage, std::string kind, std::optional<std::int64_t> id,
           std::string detail = {}) {
    events_.push_back({time, stage, std::move(kind), id, std::move(detail)});
  }

  // Orders by (time, stage, request id); insertion order breaks the rest.
  std::vector<TraceEvent> Finish() {
    std::stable_sort(events_.begin(), events_.end(), [](const TraceEvent& a, const TraceEvent& b) {
      const std::int64_t ia = a.request_id.value_or(-1);
      const std::int64_t ib = b.request_id.value_or(-1);
      return std::tie(a.time, a.stage, ia) < std::tie(b.time, b.stage, ib);
    });
    return std::move(events_);
  }

 private:
  std::vector<TraceEvent> events_;
};

void CheckTrajectories(std::span<const Trajectory> trajectories) {
  if (trajectories.empty()) throw ArgumentError("no trajectories to simulate");
  std::set<std::int64_t> ids;
  for (const Trajectory& t : trajectories) {
    if (!ids.insert(t.sample_id).second) {
      throw ValidationError("duplicate trajectory for sample " + std::to_string(t.sample_id));
    }
    if (t.requests.empty()) {
      throw ValidationError("trajectory " + std::to_string(t.sample_id) + " has no requests");
    }
  }
}

}  // namespace

void Resources::Validate() const {
  if (rollout_workers < 1) throw ConfigError("resources.rollout_workers", "must be >= 1");
  if (judge_capacity && *judge_capacity < 1) {
    throw ConfigError("resources.judge_capacity", "must be >= 1 (omit for unlimited)");
  }
  auto positive = [](double x, const char* field) {
    if (!(x > 0) || !std::isfinite(x)) {
      throw ConfigError(std::string("resources.") + field, "must be finite and > 0");
    }
  };
  positive(transfer_bandwidth, "transfer_bandwidth");
  positive(prefill_tokens_per_sec, "prefill_tokens_per_sec");
  positive(decode_tokens_per_sec, "decode_tokens_per_sec");
  positive(vit_tokens_per_sec, "vit_tokens_per_sec");
  positive(batch_build_tokens_per_sec, "batch_build_tokens_per_sec");
  positive(ref_forward_tokens_per_sec, "ref_forward_tokens_per_sec");
  positive(train_tokens_per_sec, "train_tokens_per_sec");
  if (policy_weight_bytes < 0) throw ConfigError("resources.policy_weight_bytes", "must be >= 0");
  if (ref_weight_bytes < 0) throw ConfigError("resources.ref_weight_bytes", "must be >= 0");
}

void Policy::Validate() const {
  if (const auto* c = std::get_if<AbortCount>(&abort); c && c->complete_k < 1) {
    throw ConfigError("policies." + name + ".abort.complete_k", "must be >= 1");
  }
  if (const auto* t = std::get_if<AbortTime>(&abort);
      t && (!(t->deadline_sec > 0) || !std::isfinite(t->deadline_sec))) {
    throw ConfigError("policies." + name + ".abort.deadline_sec", "must be finite and > 0");
  }
}

Policy Policy::Sequential() {
  Policy p;
  p.name = "sequential";
  p.reward_trigger = RewardTrigger::kBatchBarrier;
  return p;
}

std::string_view StageName(Stage s) {
  switch (s) {
    case Stage::kRollout:
      return "rollout";
    case Stage::kReward:
      return "reward";
    case Stage::kBatchBuild:
      return "batch_build";
    case Stage::kWeightTransfer:
      return "weight_transfer";
    case Stage::kRefForward:
      return "ref_forward";
    case Stage::kTrainStep:
      return "train_step";
  }
  return "";
}

std::string TraceToJsonl(std::span<const TraceEvent> trace) {
  std::string out;
  for (const TraceEvent& e : trace) {
    nlohmann::json j = {{"time", e.time},
                        {"stage", StageName(e.stage)},
                        {"event_kind", e.kind},
                        {"request_id", nullptr},
                        {"detail", e.detail}};
    if (e.request_id) j["request_id"] = *e.request_id;
    out += DumpStable(j, -1, 9);
    out += '\n';
  }
  return out;
}

std::string TimelineCsv(const IterationResult& result) {
  struct Row {
    double time;
    Stage stage;
    int busy;
  };
  std::vector<Row> rows;
  for (Stage s : kAllStages) {
    const auto& busy = result.busy[Idx(s)];
    if (busy.empty() || busy.front().begin > 0) rows.push_back({0.0, s, 0});
    for (const Interval& i : busy) {
      rows.push_back({i.begin, s, 1});
      rows.push_back({i.end, s, 0});
    }
  }
  std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    return std::tie(a.time, a.stage) < std::tie(b.time, b.stage);
  });
  std::string out = "time,stage,busy\n";
  for (const Row& r : rows) {
    out += Num(r.time) + "," + std::string(StageName(r.stage)) + "," + std::to_string(r.busy) + "\n";
  }
  return out;
}

IterationResult SimulateIteration(std::span<const Trajectory> trajectories,
                                  const Resources& resources, const Policy& policy,
                                  const RewardConfig& reward, std::uint64_t seed,
                                  const AbortCache& cache) {
  CheckTrajectories(trajectories);
  resources.Validate();
  policy.Validate();
  reward.Validate();

  IterationResult result;
  TraceLog trace;
  IterationMetrics& m = result.metrics;
  m.scheduled = static_cast<std::int64_t>(trajectories.size());

  std::vector<TrajState> state(trajectories.size());
  result.cache = cache;
  if (policy.abort_reuse) {
    std::map<std::int64_t, std::size_t> index;
    for (std::size_t i = 0; i < trajectories.size(); ++i) index[trajectories[i].sample_id] = i;
    for (const auto& [id, entry] : cache) {
      auto it = index.find(id);
      if (it == index.end()) {
        throw ValidationError("abort cache references sample " + std::to_string(id) +
                              " which is not in this workload");
      }
      const Trajectory& t = trajectories[it->second];
      if (entry.step_index < 0 ||
          entry.step_index >= static_cast<std::int64_t>(t.requests.size()) ||
          entry.tokens_generated < 0 ||
          entry.tokens_generated >=
              t.requests[static_cast<std::size_t>(entry.step_index)].expected_response_tokens) {
        throw ValidationError("abort cache entry for sample " + std::to_string(id) +
                              " does not fit its trajectory");
      }
      TrajState& st = state[it->second];
      st.step = static_cast<std::size_t>(entry.step_index);
      st.resume_step = entry.step_index;
      st.resume_tokens = policy.resume == ResumeMode::kResume ? entry.tokens_generated : 0;
      ++m.reuse_hits;
      trace.Add(0.0, Stage::kRollout, "cache_resume", id,
                "step=" + std::to_string(entry.step_index) +
                    " tokens=" + std::to_string(st.resume_tokens));
    }
    result.cache.clear();
  }

  // ---- Rollout ----
  std::priority_queue<Event, std::vector<Event>, EventLater> events;
  std::set<std::tuple<double, std::int64_t, std::size_t>> ready;
  std::set<std::int64_t> free_workers;
  for (std::int64_t w = 0; w < resources.rollout_workers; ++w) free_workers.insert(w);
  for (std::size_t i = 0; i < trajectories.size(); ++i) {
    events.push({0.0, EventType::kReady, trajectories[i].sample_id, i, -1});
  }
  if (const auto* t = std::get_if<AbortTime>(&policy.abort)) {
    events.push({t->deadline_sec, EventType::kAbort, -1, 0, -1});
  }

  std::vector<double> latencies;
  std::vector<Interval> rollout_busy;
  double last_completion = 0.0;
  std::optional<double> abort_at;

  auto tokens_before = [&](const TrajState& st) {
    return st.resume_step == static_cast<std::int64_t>(st.step) ? st.resume_tokens
                                                                 : std::int64_t{0};
  };

  auto dispatch = [&](double now) {
    while (!free_workers.empty() && !ready.empty()) {
      const auto [ready_sec, id, i] = *ready.begin();
      ready.erase(ready.begin());
      const std::int64_t worker = *free_workers.begin();
      free_workers.erase(free_workers.begin());

      TrajState& st = state[i];
      const InferenceRequest& req = trajectories[i].requests[st.step];
      const std::int64_t before = tokens_before(st);
      const ServiceTime svc = RequestService(req, before, resources);
      st.running = true;
      st.start_sec = now;
      st.fixed_sec = svc.fixed_sec;
      st.worker = worker;

      RequestRecord rec;
      rec.sample_id = id;
      rec.step_index = static_cast<std::int64_t>(st.step);
      rec.ready_sec = ready_sec;
      rec.start_sec = now;
      rec.service_sec = svc.total();
      rec.tokens_before = before;
      st.record = result.requests.size();
      result.requests.push_back(rec);

      trace.Add(now, Stage::kRollout, "request_start", id,
                "step=" + std::to_string(st.step) + " worker=" + std::to_string(worker) +
                    " service=" + Num(svc.total()));
      events.push({now + svc.total(), EventType::kFinish, id, i, worker});
    }
  };

  auto abort_unfinished = [&](double now) {
    bool any = false;
    for (std::size_t i = 0; i < trajectories.size(); ++i) any = any || !state[i].done;
    if (!any) return;
    abort_at = now;
    trace.Add(now, Stage::kRollout, "abort", std::nullopt,
              std::holds_alternative<AbortTime>(policy.abort) ? "time" : "count");
    for (std::size_t i = 0; i < trajectories.size(); ++i) {
      TrajState& st = state[i];
      if (st.done) continue;
      const InferenceRequest& req = trajectories[i].requests[st.step];
      const std::int64_t before = tokens_before(st);
      std::int64_t generated = before;
      if (st.running) {
        const double decoding = now - st.start_sec - st.fixed_sec;
        if (decoding > 0) {
          generated += static_cast<std::int64_t>(
              std::floor(decoding * resources.decode_tokens_per_sec));
        }
        generated = std::clamp(generated, before, req.expected_response_tokens - 1);
        rollout_busy.push_back({st.start_sec, now});
      } else {
        RequestRecord rec;
        rec.sample_id = trajectories[i].sample_id;
        rec.step_index = static_cast<std::int64_t>(st.step);
        rec.ready_sec = st.ready_sec;
        rec.service_sec = RequestService(req, before, resources).total();
        rec.tokens_before = before;
        st.record = result.requests.size();
        result.requests.push_back(rec);
      }
      RequestRecord& rec = result.requests[st.record];
      rec.end_sec = now;
      rec.tokens_after = generated;
      const std::int64_t id = trajectories[i].sample_id;
      if (policy.abort_reuse) {
        rec.status = RequestRecord::Status::kCached;
        result.cache[id] = {id, static_cast<std::int64_t>(st.step), generated};
        ++m.cached;
      } else {
        rec.status = RequestRecord::Status::kDropped;
        ++m.dropped;
      }
      trace.Add(now, Stage::kRollout, "request_aborted", id,
                "step=" + std::to_string(st.step) + " tokens=" + std::to_string(generated) +
                    (policy.abort_reuse ? " cached" : " dropped"));
    }
  };

  while (!events.empty() && !abort_at) {
    const double now = events.top().time;
    bool abort_now = false;
    while (!events.empty() && events.top().time == now) {
      const Event ev = events.top();
      events.pop();
      TrajState& st = state[ev.traj];
      switch (ev.type) {
        case EventType::kReady:
          st.ready_sec = now;
          ready.insert({now, ev.sample_id, ev.traj});
          break;
        case EventType::kAbort:
          abort_now = true;
          break;
        case EventType::kFinish: {
          const Trajectory& t = trajectories[ev.traj];
          RequestRecord& rec = result.requests[st.record];
          rec.end_sec = now;
          rec.tokens_after = t.requests[st.step].expected_response_tokens;
          rec.status = RequestRecord::Status::kCompleted;
          latencies.push_back(now - rec.ready_sec);
          rollout_busy.push_back({st.start_sec, now});
          free_workers.insert(ev.worker);
          st.running = false;
          trace.Add(now, Stage::kRollout, "request_finish", ev.sample_id,
                    "step=" + std::to_string(st.step));
          ++st.step;
          if (st.step < t.requests.size()) {
            events.push({now, EventType::kReady, ev.sample_id, ev.traj, -1});
          } else {
            st.done = true;
            st.completion_sec = now;
            last_completion = std::max(last_completion, now);
            ++m.completed;
            trace.Add(now, Stage::kRollout, "trajectory_complete", ev.sample_id);
            if (const auto* c = std::get_if<AbortCount>(&policy.abort);
                c && m.completed == c->complete_k) {
              events.push({now, EventType::kAbort, -1, 0, -1});
            }
          }
          break;
        }
      }
    }
    if (abort_now) {
      abort_unfinished(now);
      break;
    }
    dispatch(now);
  }
  m.aborted_count = m.cached + m.dropped;
  const double rollout_end = abort_at.value_or(last_completion);

  // ---- Reward ----
  const std::uint64_t reward_seed = DeriveSeed(seed, "reward");
  struct PendingReward {
    std::int64_t sample_id;
    std::vector<VerifierTask> tasks;
    std::vector<VerifierOutcome> outcomes;
  };
  std::vector<PendingReward> pending;
  for (std::size_t i = 0; i < trajectories.size(); ++i) {
    if (!state[i].done) continue;
    const double trigger = policy.reward_trigger == RewardTrigger::kPerRequestCallback
                               ? state[i].completion_sec
                               : rollout_end;
    PendingReward p;
    p.sample_id = trajectories[i].sample_id;
    p.tasks = PlanVerification(p.sample_id, trigger, reward.verifiers, reward_seed);
    p.outcomes.resize(p.tasks.size());
    pending.push_back(std::move(p));
  }

  // Judge calls queue FIFO by (ready time, sample id, verifier order).
  struct JudgeJob {
    double ready;
    std::int64_t sample_id;
    std::size_t verifier;
    std::size_t pending;
  };
  std::vector<JudgeJob> jobs;
  for (std::size_t p = 0; p < pending.size(); ++p) {
    for (std::size_t v = 0; v < pending[p].tasks.size(); ++v) {
      const VerifierTask& task = pending[p].tasks[v];
      VerifierOutcome& out = pending[p].outcomes[v];
      out.name = task.name;
      out.score = task.score;
      out.start_sec = task.ready_sec;
      out.finish_sec = task.ready_sec + task.latency_sec;
      if (task.cls == SchedulingClass::kDispatch) {
        jobs.push_back({task.ready_sec, pending[p].sample_id, v, p});
      }
    }
  }
  if (resources.judge_capacity) {
    std::sort(jobs.begin(), jobs.end(), [](const JudgeJob& a, const JudgeJob& b) {
      return std::tie(a.ready, a.sample_id, a.verifier) < std::tie(b.ready, b.sample_id, b.verifier);
    });
    std::priority_queue<double, std::vector<double>, std::greater<>> slots;
    for (std::int64_t c = 0; c < *resources.judge_capacity; ++c) slots.push(0.0);
    for (const JudgeJob& job : jobs) {
      VerifierOutcome& out = pending[job.pending].outcomes[job.verifier];
      const double start = std::max(job.ready, slots.top());
      slots.pop();
      out.start_sec = start;
      out.finish_sec = start + pending[job.pending].tasks[job.verifier].latency_sec;
      slots.push(out.finish_sec);
    }
  }

  std::vector<Interval> reward_busy;
  double rewards_done = rollout_end;
  for (PendingReward& p : pending) {
    RewardRecord rec;
    rec.sample_id = p.sample_id;
    std::vector<VerifierScore> scores;
    double ready_at = 0.0;
    for (std::size_t v = 0; v < p.tasks.size(); ++v) {
      const VerifierOutcome& out = p.outcomes[v];
      scores.push_back({out.name, out.score, p.tasks[v].weight});
      reward_busy.push_back({out.start_sec, out.finish_sec});
      ready_at = std::max(ready_at, out.finish_sec);
      trace.Add(out.start_sec, Stage::kReward, "verify_start", p.sample_id, out.name);
      trace.Add(out.finish_sec, Stage::kReward, "verify_finish", p.sample_id,
                out.name + " score=" + Num(out.score));
    }
    rec.verifiers = p.outcomes;
    rec.reward = Aggregate(scores, reward.aggregation);
    trace.Add(ready_at, Stage::kReward, "reward_ready", p.sample_id, "reward=" + Num(rec.reward));
    rewards_done = std::max(rewards_done, ready_at);
    result.rewards.push_back(std::move(rec));
  }

  // ---- Batch construction, weight transfer, reference forward, train ----
  std::int64_t tokens = 0;
  for (std::size_t i = 0; i < trajectories.size(); ++i) {
    if (state[i].done) tokens += GetTrajectoryLoad(trajectories[i]).seq_tokens;
  }
  const double t_batch = static_cast<double>(tokens) / resources.batch_build_tokens_per_sec;
  const double t_weights =
      static_cast<double>(resources.policy_weight_bytes) / resources.transfer_bandwidth;
  const double t_ref_weights =
      static_cast<double>(resources.ref_weight_bytes) / resources.transfer_bandwidth;
  const double t_ref = static_cast<double>(tokens) / resources.ref_forward_tokens_per_sec;
  const double t_train = static_cast<double>(tokens) / resources.train_tokens_per_sec;

  const double batch_start = rewards_done;
  const double batch_end = batch_start + t_batch;
  const double weights_start = policy.overlap_batch_with_transfer ? batch_start : batch_end;
  const double weights_end = weights_start + t_weights;
  const double inputs_ready = std::max(batch_end, weights_end);
  // A prefetch is issued when the preceding stage begins and runs on its own
  // copy stream; otherwise the reference weights load on demand.
  const double ref_weights_start = policy.ref_prefetch ? batch_start : inputs_ready;
  const double ref_weights_end = ref_weights_start + t_ref_weights;
  const double ref_start = std::max(inputs_ready, ref_weights_end);
  const double ref_end = ref_start + t_ref;
  const double train_start = ref_end;
  const double train_end = train_start + t_train;

  trace.Add(batch_start, Stage::kBatchBuild, "start", std::nullopt, "tokens=" + std::to_string(tokens));
  trace.Add(batch_end, Stage::kBatchBuild, "finish", std::nullopt);
  trace.Add(weights_start, Stage::kWeightTransfer, "start", std::nullopt, "policy");
  trace.Add(weights_end, Stage::kWeightTransfer, "finish", std::nullopt, "policy");
  trace.Add(ref_weights_start, Stage::kWeightTransfer, "start", std::nullopt,
            policy.ref_prefetch ? "reference prefetch" : "reference");
  trace.Add(ref_weights_end, Stage::kWeightTransfer, "finish", std::nullopt, "reference");
  trace.Add(ref_start, Stage::kRefForward, "start", std::nullopt);
  trace.Add(ref_end, Stage::kRefForward, "finish", std::nullopt, "release reference weights");
  trace.Add(train_start, Stage::kTrainStep, "start", std::nullopt);
  trace.Add(train_end, Stage::kTrainStep, "finish", std::nullopt);

  result.busy[Idx(Stage::kRollout)] = MergeIntervals(std::move(rollout_busy));
  result.busy[Idx(Stage::kReward)] = MergeIntervals(std::move(reward_busy));
  result.busy[Idx(Stage::kBatchBuild)] = MergeIntervals({{batch_start, batch_end}});
  result.busy[Idx(Stage::kWeightTransfer)] =
      MergeIntervals({{weights_start, weights_end}, {ref_weights_start, ref_weights_end}});
  result.busy[Idx(Stage::kRefForward)] = MergeIntervals({{ref_start, ref_end}});
  result.busy[Idx(Stage::kTrainStep)] = MergeIntervals({{train_start, train_end}});

  m.makespan_sec = train_end;
  double busy_total = 0.0;
  for (Stage s : kAllStages) {
    double busy = 0.0;
    for (const Interval& i : result.busy[Idx(s)]) busy += i.end - i.begin;
    busy = std::min(busy, m.makespan_sec);
    m.stages[Idx(s)] = {busy, m.makespan_sec - busy};
    busy_total += busy;
  }
  m.bubble_fraction = m.makespan_sec > 0
                          ? 1.0 - busy_total / (static_cast<double>(kNumStages) * m.makespan_sec)
                          : 0.0;
  m.latency_p50_sec = Percentile(latencies, 0.50);
  m.latency_p99_sec = Percentile(latencies, 0.99);
  result.trace = trace.Finish();
  return result;
}

std::vector<IterationResult> SimulateIterations(std::span<const Trajectory> trajectories,
                                                const Resources& resources,
                                                const Policy& policy,
                                                const RewardConfig& reward,
                                                std::uint64_t seed, std::int64_t iterations) {
  if (iterations < 1) throw ConfigError("iterations", "must be >= 1");
  std::vector<IterationResult> out;
  AbortCache cache;
  for (std::int64_t it = 0; it < iterations; ++it) {
    const std::uint64_t it_seed =
        it == 0 ? seed : DeriveSeed(seed, "iteration", static_cast<std::uint64_t>(it));
    out.push_back(SimulateIteration(trajectories, resources, policy, reward, it_seed, cache));
    cache = out.back().cache;
  }
  return out;
}

IterationMetrics SequentialBaseline(std::span<const Trajectory> trajectories,
                                    const Resources& resources, const RewardConfig& reward,
                                    std::uint64_t seed) {
  return SimulateIteration(trajectories, resources, Policy::Sequential(), reward, seed, {})
      .metrics;
}

std::vector<PolicyRun> ComparePolicies(std::span<const Trajectory> trajectories,
                                       const Resources& resources,
                                       std::span<const Policy> policies,
                                       const RewardConfig& reward, std::uint64_t seed,
                                       std::int64_t iterations) {
  if (policies.empty()) throw ConfigError("policies", "at least one policy is required");
  std::set<std::string> names;
  for (const Policy& p : policies) {
    if (!names.insert(p.name).second) {
      throw ConfigError("policies", "duplicate policy name '" + p.name + "'");
    }
  }
  std::vector<PolicyRun> runs;
  for (const Policy& p : policies) {
    runs.push_back({p.name, SimulateIterations(trajectories, resources, p, reward, seed, iterations)});
  }
  return runs;
}

}  // namespace mmrl
