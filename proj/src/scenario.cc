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

#include "mmrl/scenario.h"

#include <algorithm>
#include <fstream>
#include <set>

#include "mmrl/errors.h"

namespace mmrl {
namespace {

using nlohmann::json;

// Typed, path-aware view over one config object. Every key must be read
// before Finish(), which rejects whatever is left.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_, "expected an object");
  }

  std::string Path(const std::string& key) const {
    if (key.empty()) return path_;
    return path_.empty() ? key : path_ + "." + key;
  }

  bool Has(const char* key) const { return j_.contains(key); }

  const json* Raw(const char* key) {
    used_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  std::int64_t Int(const char* key, std::int64_t def) {
    const json* v = Raw(key);
    if (v == nullptr) return def;
    if (!v->is_number_integer()) throw ConfigError(Path(key), "expected an integer");
    return v->get<std::int64_t>();
  }

  double Real(const char* key, double def) {
    const json* v = Raw(key);
    if (v == nullptr) return def;
    if (!v->is_number()) throw ConfigError(Path(key), "expected a number");
    return v->get<double>();
  }

  bool Bool(const char* key, bool def) {
    const json* v = Raw(key);
    if (v == nullptr) return def;
    if (!v->is_boolean()) throw ConfigError(Path(key), "expected true or false");
    return v->get<bool>();
  }

  std::string Str(const char* key, const std::string& def) {
    const json* v = Raw(key);
    if (v == nullptr) return def;
    if (!v->is_string()) throw ConfigError(Path(key), "expected a string");
    return v->get<std::string>();
  }

  const json& Array(const char* key) {
    static const json kEmpty = json::array();
    const json* v = Raw(key);
    if (v == nullptr) return kEmpty;
    if (!v->is_array()) throw ConfigError(Path(key), "expected an array");
    return *v;
  }

  void Finish() const {
    for (const auto& [key, _] : j_.items()) {
      if (!used_.contains(key)) throw ConfigError(Path(key), "unknown field");
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

template <class F>
auto WithSection(Section& parent, const char* key, F&& f) {
  static const json kEmpty = json::object();
  const json* v = parent.Raw(key);
  Section s(v ? *v : kEmpty, parent.Path(key));
  auto out = f(s);
  s.Finish();
  return out;
}

VisualInput ParseVisual(Section& s) {
  const std::int64_t h = s.Int("h", 16), w = s.Int("w", 16), f = s.Int("frames", 1),
                     m = s.Int("merge", 2);
  try {
    return VisualInput(h, w, f, m);
  } catch (const ValidationError& e) {
    throw ConfigError(s.Path(""), e.what());
  }
}

json VisualToJson(const VisualInput& v) {
  return {{"h", v.patches_h()}, {"w", v.patches_w()}, {"frames", v.frames()}, {"merge", v.merge()}};
}

Distribution ParseDist(Section& s, const char* key, const Distribution& def) {
  const json* v = s.Raw(key);
  if (v == nullptr) return def;
  return DistributionFromJson(*v, s.Path(key));
}

WorkloadSpec ParseWorkloadSpec(Section& s) {
  WorkloadSpec spec;
  spec.num_samples = s.Int("num_samples", 64);
  if (const json* mix = s.Raw("mixture")) {
    if (!mix->is_object()) throw ConfigError(s.Path("mixture"), "expected tag -> probability");
    spec.mixture.clear();
    for (const auto& [tag, p] : mix->items()) {
      if (!p.is_number()) throw ConfigError(s.Path("mixture." + tag), "expected a number");
      spec.mixture[tag] = p.get<double>();
    }
  }
  spec.prompt_tokens = ParseDist(s, "prompt_tokens", spec.prompt_tokens);
  spec.response_tokens = ParseDist(s, "response_tokens", spec.response_tokens);
  spec.image_count = ParseDist(s, "image_count", spec.image_count);
  spec.visual = WithSection(s, "visual", [&](Section& v) {
    VisualSizeSpec vs;
    vs.patches_h = ParseDist(v, "patches_h", vs.patches_h);
    vs.patches_w = ParseDist(v, "patches_w", vs.patches_w);
    vs.frames = ParseDist(v, "frames", vs.frames);
    vs.merge = v.Int("merge", vs.merge);
    return vs;
  });
  spec.group_size = s.Int("group_size", spec.group_size);
  try {
    spec.Validate();
  } catch (const ConfigError& e) {
    // Re-anchor the library's "workload.<field>" at this section's path.
    const std::string prefix = "workload.";
    std::string field = e.field();
    if (field.rfind(prefix, 0) == 0) field = s.Path(field.substr(prefix.size()));
    std::string msg = e.what();
    msg = msg.substr(std::min(msg.size(), e.field().size() + 2));
    throw ConfigError(field, msg);
  }
  return spec;
}

TaskSpec ParseTask(Section& s) {
  TaskSpec t;
  const std::string kind = s.Str("kind", "single_step");
  if (kind == "single_step") {
    t.kind = TaskSpec::Kind::kSingleStep;
  } else if (kind == "multi_step") {
    t.kind = TaskSpec::Kind::kMultiStep;
  } else {
    throw ConfigError(s.Path("kind"), "expected single_step or multi_step");
  }
  t.max_steps = s.Int("max_steps", t.max_steps);
  t.observation_tokens = s.Int("observation_tokens", t.observation_tokens);
  t.image_probability = s.Real("image_probability", t.image_probability);
  t.termination_probability = s.Real("termination_probability", t.termination_probability);
  if (s.Has("observation_visual")) {
    t.observation_visual = WithSection(s, "observation_visual", ParseVisual);
  } else {
    s.Raw("observation_visual");
  }
  t.Validate();
  return t;
}

TopologySpec ParseTopology(Section& s) {
  TopologySpec t;
  t.dp = s.Int("dp", t.dp);
  t.cp = s.Int("cp", t.cp);
  t.tp = s.Int("tp", t.tp);
  t.pp = s.Int("pp", t.pp);
  t.hidden_size = s.Int("hidden_size", t.hidden_size);
  t.patch_dim = s.Int("patch_dim", t.patch_dim);
  t.bytes_per_element = s.Int("bytes_per_element", t.bytes_per_element);
  t.link_bandwidth = s.Real("link_bandwidth", t.link_bandwidth);
  t.link_latency = s.Real("link_latency", t.link_latency);
  t.Validate();
  return t;
}

Resources ParseResources(Section& s) {
  Resources r;
  r.rollout_workers = s.Int("rollout_workers", r.rollout_workers);
  if (const json* cap = s.Raw("judge_capacity"); cap != nullptr && !cap->is_null()) {
    if (!cap->is_number_integer()) {
      throw ConfigError(s.Path("judge_capacity"), "expected an integer or null");
    }
    r.judge_capacity = cap->get<std::int64_t>();
  }
  r.transfer_bandwidth = s.Real("transfer_bandwidth", r.transfer_bandwidth);
  r.prefill_tokens_per_sec = s.Real("prefill_tokens_per_sec", r.prefill_tokens_per_sec);
  r.decode_tokens_per_sec = s.Real("decode_tokens_per_sec", r.decode_tokens_per_sec);
  r.vit_tokens_per_sec = s.Real("vit_tokens_per_sec", r.vit_tokens_per_sec);
  r.batch_build_tokens_per_sec = s.Real("batch_build_tokens_per_sec", r.batch_build_tokens_per_sec);
  r.ref_forward_tokens_per_sec = s.Real("ref_forward_tokens_per_sec", r.ref_forward_tokens_per_sec);
  r.train_tokens_per_sec = s.Real("train_tokens_per_sec", r.train_tokens_per_sec);
  r.policy_weight_bytes = s.Int("policy_weight_bytes", r.policy_weight_bytes);
  r.ref_weight_bytes = s.Int("ref_weight_bytes", r.ref_weight_bytes);
  r.Validate();
  return r;
}

Policy ParsePolicy(Section& s) {
  Policy p;
  p.name = s.Str("name", "");
  if (p.name.empty()) throw ConfigError(s.Path("name"), "every policy needs a name");
  const std::string trigger = s.Str("reward_trigger", "callback");
  if (trigger == "callback") {
    p.reward_trigger = RewardTrigger::kPerRequestCallback;
  } else if (trigger == "barrier") {
    p.reward_trigger = RewardTrigger::kBatchBarrier;
  } else {
    throw ConfigError(s.Path("reward_trigger"), "expected callback or barrier");
  }
  p.abort = WithSection(s, "abort", [](Section& a) -> AbortPolicy {
    const std::string mode = a.Str("mode", "none");
    if (mode == "none") return AbortNone{};
    if (mode == "count") {
      const std::int64_t k = a.Int("complete_k", 1);
      if (k < 1) throw ConfigError(a.Path("complete_k"), "must be >= 1");
      return AbortCount{k};
    }
    if (mode == "time") {
      const double d = a.Real("deadline_sec", 1.0);
      if (!(d > 0)) throw ConfigError(a.Path("deadline_sec"), "must be > 0");
      return AbortTime{d};
    }
    throw ConfigError(a.Path("mode"), "expected none, count, or time");
  });
  p.abort_reuse = s.Bool("abort_reuse", false);
  const std::string resume = s.Str("resume", "resume");
  if (resume == "resume") {
    p.resume = ResumeMode::kResume;
  } else if (resume == "restart") {
    p.resume = ResumeMode::kRestart;
  } else {
    throw ConfigError(s.Path("resume"), "expected resume or restart");
  }
  p.overlap_batch_with_transfer = s.Bool("overlap_batch_with_transfer", false);
  p.ref_prefetch = s.Bool("ref_prefetch", false);
  p.Validate();
  return p;
}

std::vector<Policy> DefaultPolicies() {
  Policy overlapped;
  overlapped.name = "overlapped";
  overlapped.overlap_batch_with_transfer = true;
  overlapped.ref_prefetch = true;
  return {Policy::Sequential(), overlapped};
}

VerifierSpec ParseVerifier(Section& s) {
  VerifierSpec v;
  v.name = s.Str("name", "");
  if (v.name.empty()) throw ConfigError(s.Path("name"), "every verifier needs a name");
  v.weight = s.Real("weight", 1.0);
  const std::string kind = s.Str("kind", "rule");
  if (kind == "rule") {
    RuleVerifier rule;
    rule.latency_sec = s.Real("latency_sec", 0.0);
    rule.score_fn = s.Str("score_fn", rule.score_fn);
    rule.p = s.Real("p", rule.p);
    v.kind = rule;
  } else if (kind == "judge") {
    JudgeVerifier judge;
    judge.latency_sec = ParseDist(s, "latency", judge.latency_sec);
    judge.score = WithSection(s, "score", [](Section& sc) {
      JudgeScore score;
      const std::string k = sc.Str("kind", "bernoulli");
      if (k == "bernoulli") {
        score.kind = JudgeScore::Kind::kBernoulli;
        score.p = sc.Real("p", score.p);
      } else if (k == "uniform") {
        score.kind = JudgeScore::Kind::kUniform;
      } else if (k == "table") {
        score.kind = JudgeScore::Kind::kTable;
        score.table_default = sc.Real("default", 0.0);
        if (const json* t = sc.Raw("table")) {
          if (!t->is_object()) throw ConfigError(sc.Path("table"), "expected sample id -> score");
          for (const auto& [id, val] : t->items()) {
            if (!val.is_number()) throw ConfigError(sc.Path("table." + id), "expected a number");
            try {
              score.table[std::stoll(id)] = val.get<double>();
            } catch (const std::logic_error&) {
              throw ConfigError(sc.Path("table." + id), "keys must be sample ids");
            }
          }
        }
      } else {
        throw ConfigError(sc.Path("kind"), "expected bernoulli, uniform, or table");
      }
      return score;
    });
    v.kind = judge;
  } else {
    throw ConfigError(s.Path("kind"), "expected rule or judge");
  }
  return v;
}

std::vector<VerifierSpec> DefaultVerifiers() {
  VerifierSpec rule{"format_check", RuleVerifier{0.01, "pass", 0.5}, 1.0};
  JudgeVerifier judge;
  judge.latency_sec = Distribution::LogNormal(0.5, 0.5);
  judge.score.p = 0.6;
  VerifierSpec model{"model_judge", judge, 1.0};
  return {rule, model};
}

RewardConfig ParseReward(Section& s) {
  RewardConfig r;
  if (s.Has("verifiers")) {
    const json& list = s.Array("verifiers");
    for (std::size_t i = 0; i < list.size(); ++i) {
      Section v(list[i], s.Path("verifiers." + std::to_string(i)));
      r.verifiers.push_back(ParseVerifier(v));
      v.Finish();
    }
  } else {
    s.Raw("verifiers");
    r.verifiers = DefaultVerifiers();
  }
  r.aggregation = WithSection(s, "aggregation", [](Section& a) -> Aggregation {
    const std::string strategy = a.Str("strategy", "weighted_sum");
    if (strategy == "weighted_sum") return WeightedSum{};
    if (strategy == "min") return MinOf{};
    if (strategy == "product") return ProductOf{};
    if (strategy == "veto_gate") return VetoGate{a.Str("gate", "")};
    throw ConfigError(a.Path("strategy"), "expected weighted_sum, min, product, or veto_gate");
  });
  r.success_threshold = s.Real("success_threshold", r.success_threshold);
  if (s.Has("pass_k")) {
    r.pass_ks.clear();
    for (const json& k : s.Array("pass_k")) {
      if (!k.is_number_integer()) throw ConfigError(s.Path("pass_k"), "expected integers");
      r.pass_ks.push_back(k.get<std::int64_t>());
    }
  } else {
    s.Raw("pass_k");
    r.pass_ks = {1, 2, 4};
  }
  r.Validate();
  return r;
}

BufferPath ParseBufferPath(const std::string& s, const std::string& field) {
  if (s == "gpu") return BufferPath::kGpuComm;
  if (s == "host") return BufferPath::kHostComm;
  throw ConfigError(field, "expected gpu or host");
}

MemoryScenario ParseMemory(Section& s) {
  MemoryScenario m;
  MemConfig& c = m.config;
  c.act_bytes_per_token_per_layer = s.Int("act_bytes_per_token_per_layer", 16384);
  c.vit_layers = s.Int("vit_layers", 32);
  c.projector_bytes_per_token = s.Int("projector_bytes_per_token", 32768);
  c.recompute_vit = s.Bool("recompute_vit", true);
  c.recompute_projector = s.Bool("recompute_projector", true);
  c.offload = s.Bool("offload", true);
  c.offload_staging_bytes = s.Int("offload_staging_bytes", 64 << 20);
  c.checkpoint_interval_layers = s.Int("checkpoint_interval_layers", 4);
  c.Validate();
  if (s.Has("probe_visual")) {
    m.probe_visual = WithSection(s, "probe_visual", ParseVisual);
  } else {
    s.Raw("probe_visual");
  }
  if (s.Has("image_counts")) {
    m.image_counts.clear();
    for (const json& n : s.Array("image_counts")) {
      if (!n.is_number_integer() || n.get<std::int64_t>() < 0) {
        throw ConfigError(s.Path("image_counts"), "expected non-negative integers");
      }
      m.image_counts.push_back(n.get<std::int64_t>());
    }
  } else {
    s.Raw("image_counts");
  }
  const json& buffers = s.Array("buffers");
  std::set<std::string> names;
  for (std::size_t i = 0; i < buffers.size(); ++i) {
    Section b(buffers[i], s.Path("buffers." + std::to_string(i)));
    BufferEntry e;
    e.name = b.Str("name", "");
    e.bytes = b.Int("bytes", 0);
    e.path = ParseBufferPath(b.Str("path", "gpu"), b.Path("path"));
    b.Finish();
    if (e.name.empty() || !names.insert(e.name).second) {
      throw ConfigError(b.Path("name"), "buffer names must be unique and non-empty");
    }
    if (e.bytes < 0) throw ConfigError(b.Path("bytes"), "must be >= 0");
    m.buffers.push_back(std::move(e));
  }
  for (const json& name : s.Array("migrate")) {
    if (!name.is_string() || !names.contains(name.get<std::string>())) {
      throw ConfigError(s.Path("migrate"), "every entry must name a buffer");
    }
    m.migrate.push_back(name.get<std::string>());
  }
  return m;
}

PackingConfig ParsePacking(Section& s) {
  PackingConfig p;
  const json& items = s.Array("items");
  for (std::size_t i = 0; i < items.size(); ++i) {
    Section it(items[i], s.Path("items." + std::to_string(i)));
    ItemCost c;
    c.id = it.Int("id", static_cast<std::int64_t>(i));
    c.seq_tokens = it.Int("seq_tokens", 1);
    c.vit_tokens = it.Int("vit_tokens", 0);
    it.Finish();
    if (c.seq_tokens < 1 || c.vit_tokens < 0) {
      throw ConfigError(it.Path(""), "needs seq_tokens >= 1 and vit_tokens >= 0");
    }
    p.items.push_back(c);
  }
  p.num_bins = s.Int("num_bins", p.num_bins);
  if (p.num_bins < 1) throw ConfigError(s.Path("num_bins"), "must be >= 1");
  const std::string policy = s.Str("policy", std::string(PackPolicyName(p.policy)));
  auto parsed = ParsePackPolicy(policy);
  if (!parsed) {
    throw ConfigError(s.Path("policy"),
                      "expected first_fit_decreasing, greedy_minimax, or round_robin");
  }
  p.policy = *parsed;
  if (const json* norm = s.Raw("norm"); norm != nullptr && !norm->is_null()) {
    Section n(*norm, s.Path("norm"));
    BinNorm bn{n.Real("seq_norm", 1.0), n.Real("vit_norm", 1.0)};
    n.Finish();
    if (!(bn.seq_norm > 0) || !(bn.vit_norm > 0)) {
      throw ConfigError(s.Path("norm"), "normalizers must be > 0");
    }
    p.norm = bn;
  }
  p.oracle = s.Str("oracle", p.oracle);
  if (p.oracle != "auto" && p.oracle != "always" && p.oracle != "never") {
    throw ConfigError(s.Path("oracle"), "expected auto, always, or never");
  }
  p.bytes_per_token = s.Int("bytes_per_token", p.bytes_per_token);
  if (p.bytes_per_token < 0) throw ConfigError(s.Path("bytes_per_token"), "must be >= 0");
  return p;
}

PartitionConfig ParsePartition(Section& s) {
  PartitionConfig p;
  const json& visuals = s.Array("visuals");
  for (std::size_t i = 0; i < visuals.size(); ++i) {
    Section v(visuals[i], s.Path("visuals." + std::to_string(i)));
    p.visuals.push_back(ParseVisual(v));
    v.Finish();
  }
  p.max_workload_visuals = s.Int("max_workload_visuals", p.max_workload_visuals);
  p.producer_mode = s.Str("producer_mode", p.producer_mode);
  if (p.producer_mode != "offset" && p.producer_mode != "single") {
    throw ConfigError(s.Path("producer_mode"), "expected offset or single");
  }
  p.producer_offset = s.Int("producer_offset", p.producer_offset);
  p.producer_rank = s.Int("producer_rank", p.producer_rank);
  const json& layouts = s.Array("layouts");
  for (std::size_t i = 0; i < layouts.size(); ++i) {
    Section l(layouts[i], s.Path("layouts." + std::to_string(i)));
    LayoutSpec spec;
    spec.name = l.Str("name", "layout" + std::to_string(i));
    spec.segments = l.Array("segments");
    l.Finish();
    try {
      BuildLayout(spec, MtpOption::kImageToken);
    } catch (const Error& e) {
      throw ConfigError(l.Path("segments"), e.what());
    }
    p.layouts.push_back(std::move(spec));
  }
  if (!s.Has("layouts")) {
    p.layouts.push_back({"text_image_text",
                         json::array({{{"text", 16}}, {{"visual", 0}, {"tokens", 64}}, {{"text", 16}}})});
  }
  return p;
}

std::vector<SweepParameter> ParseSweep(Section& s) {
  std::vector<SweepParameter> out;
  const json& params = s.Array("parameters");
  for (std::size_t i = 0; i < params.size(); ++i) {
    Section p(params[i], s.Path("parameters." + std::to_string(i)));
    SweepParameter sp;
    sp.path = p.Str("path", "");
    if (sp.path.empty()) throw ConfigError(p.Path("path"), "must name a config field");
    const json& values = p.Array("values");
    if (values.empty()) throw ConfigError(p.Path("values"), "must not be empty");
    sp.values.assign(values.begin(), values.end());
    p.Finish();
    out.push_back(std::move(sp));
  }
  return out;
}

json DistJson(const Distribution& d) { return DistributionToJson(d); }

}  // namespace

MtpLayout BuildLayout(const LayoutSpec& spec, MtpOption option) {
  MtpLayout layout;
  layout.option = option;
  std::int64_t next_text = 1;
  if (!spec.segments.is_array()) throw ValidationError("layout segments must be an array");
  for (const json& seg : spec.segments) {
    if (seg.contains("text") && seg.size() == 1 && seg["text"].is_number_integer()) {
      for (std::int64_t i = 0; i < seg["text"].get<std::int64_t>(); ++i) {
        layout.slots.push_back(TextSlot{next_text++});
      }
    } else if (seg.contains("visual") && seg.contains("tokens") && seg.size() == 2 &&
               seg["visual"].is_number_integer() && seg["tokens"].is_number_integer()) {
      const std::int64_t index = seg["visual"].get<std::int64_t>();
      for (std::int64_t i = 0; i < seg["tokens"].get<std::int64_t>(); ++i) {
        layout.slots.push_back(VisualSlot{index});
      }
      layout.num_visuals = std::max(layout.num_visuals, index + 1);
    } else {
      throw ValidationError("segment must be {\"text\": n} or {\"visual\": i, \"tokens\": n}");
    }
  }
  layout.Validate();
  return layout;
}

Scenario ParseScenario(const json& doc, const std::filesystem::path& base_dir) {
  Scenario sc;
  sc.base_dir = base_dir;
  Section root(doc, "");

  const json* seed = root.Raw("seed");
  if (seed != nullptr) {
    if (!seed->is_number_unsigned() && !seed->is_number_integer()) {
      throw ConfigError("seed", "expected a non-negative integer");
    }
    if (seed->is_number_integer() && seed->get<std::int64_t>() < 0) {
      throw ConfigError("seed", "expected a non-negative integer");
    }
    sc.seed = seed->get<std::uint64_t>();
  }
  sc.iterations = root.Int("iterations", 1);
  if (sc.iterations < 1) throw ConfigError("iterations", "must be >= 1");

  {
    static const json kEmpty = json::object();
    const json* w = root.Raw("workload");
    Section ws(w ? *w : kEmpty, "workload");
    const bool has_trace = ws.Has("trace");
    const bool has_spec = ws.Has("spec");
    if (has_trace == has_spec) {
      throw ConfigError("workload", "exactly one of 'spec' and 'trace' is required");
    }
    if (has_trace) {
      sc.workload.trace_path = ws.Str("trace", "");
    } else {
      sc.workload.spec = WithSection(ws, "spec", ParseWorkloadSpec);
    }
    ws.Finish();
  }

  sc.task = WithSection(root, "task", ParseTask);
  sc.topology = WithSection(root, "topology", ParseTopology);
  sc.resources = WithSection(root, "resources", ParseResources);

  if (root.Has("policies")) {
    const json& list = root.Array("policies");
    if (list.empty()) throw ConfigError("policies", "at least one policy is required");
    std::set<std::string> names;
    for (std::size_t i = 0; i < list.size(); ++i) {
      Section p(list[i], "policies." + std::to_string(i));
      Policy policy = ParsePolicy(p);
      p.Finish();
      if (!names.insert(policy.name).second) {
        throw ConfigError(p.Path("name"), "duplicate policy name '" + policy.name + "'");
      }
      sc.policies.push_back(std::move(policy));
    }
  } else {
    root.Raw("policies");
    sc.policies = DefaultPolicies();
  }

  sc.reward = WithSection(root, "reward", ParseReward);
  sc.memory = WithSection(root, "memory", ParseMemory);
  sc.packing = WithSection(root, "packing", ParsePacking);
  sc.partition = WithSection(root, "partition", ParsePartition);
  sc.sweep = WithSection(root, "sweep", ParseSweep);
  sc.output_dir = WithSection(root, "output", [](Section& o) { return o.Str("dir", "out"); });
  root.Finish();
  return sc;
}

json ReadConfigDocument(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("--config", "cannot open " + path.string());
  try {
    return json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::exception& e) {
    throw ConfigError("--config", std::string("not valid JSON: ") + e.what());
  }
}

Scenario LoadScenario(const std::filesystem::path& path) {
  return ParseScenario(ReadConfigDocument(path), path.parent_path());
}

json ScenarioToJson(const Scenario& s) {
  json j;
  j["seed"] = s.seed;
  j["iterations"] = s.iterations;

  if (s.workload.trace_path) {
    j["workload"] = {{"trace", *s.workload.trace_path}};
  } else {
    const WorkloadSpec& w = *s.workload.spec;
    json mix = json::object();
    for (const auto& [tag, p] : w.mixture) mix[tag] = p;
    j["workload"]["spec"] = {
        {"num_samples", w.num_samples},
        {"mixture", mix},
        {"prompt_tokens", DistJson(w.prompt_tokens)},
        {"response_tokens", DistJson(w.response_tokens)},
        {"image_count", DistJson(w.image_count)},
        {"visual",
         {{"patches_h", DistJson(w.visual.patches_h)},
          {"patches_w", DistJson(w.visual.patches_w)},
          {"frames", DistJson(w.visual.frames)},
          {"merge", w.visual.merge}}},
        {"group_size", w.group_size}};
  }

  const TaskSpec& t = s.task;
  j["task"] = {{"kind", t.kind == TaskSpec::Kind::kSingleStep ? "single_step" : "multi_step"},
               {"max_steps", t.max_steps},
               {"observation_tokens", t.observation_tokens},
               {"image_probability", t.image_probability},
               {"termination_probability", t.termination_probability},
               {"observation_visual", VisualToJson(t.observation_visual)}};

  const TopologySpec& topo = s.topology;
  j["topology"] = {{"dp", topo.dp},
                   {"cp", topo.cp},
                   {"tp", topo.tp},
                   {"pp", topo.pp},
                   {"hidden_size", topo.hidden_size},
                   {"patch_dim", topo.patch_dim},
                   {"bytes_per_element", topo.bytes_per_element},
                   {"link_bandwidth", topo.link_bandwidth},
                   {"link_latency", topo.link_latency}};

  const Resources& r = s.resources;
  j["resources"] = {{"rollout_workers", r.rollout_workers},
                    {"judge_capacity", nullptr},
                    {"transfer_bandwidth", r.transfer_bandwidth},
                    {"prefill_tokens_per_sec", r.prefill_tokens_per_sec},
                    {"decode_tokens_per_sec", r.decode_tokens_per_sec},
                    {"vit_tokens_per_sec", r.vit_tokens_per_sec},
                    {"batch_build_tokens_per_sec", r.batch_build_tokens_per_sec},
                    {"ref_forward_tokens_per_sec", r.ref_forward_tokens_per_sec},
                    {"train_tokens_per_sec", r.train_tokens_per_sec},
                    {"policy_weight_bytes", r.policy_weight_bytes},
                    {"ref_weight_bytes", r.ref_weight_bytes}};
  if (r.judge_capacity) j["resources"]["judge_capacity"] = *r.judge_capacity;

  j["policies"] = json::array();
  for (const Policy& p : s.policies) {
    json abort = std::visit(
        [](const auto& a) -> json {
          using T = std::decay_t<decltype(a)>;
          if constexpr (std::is_same_v<T, AbortNone>) {
            return {{"mode", "none"}};
          } else if constexpr (std::is_same_v<T, AbortCount>) {
            return {{"mode", "count"}, {"complete_k", a.complete_k}};
          } else {
            return {{"mode", "time"}, {"deadline_sec", a.deadline_sec}};
          }
        },
        p.abort);
    j["policies"].push_back(
        {{"name", p.name},
         {"reward_trigger",
          p.reward_trigger == RewardTrigger::kPerRequestCallback ? "callback" : "barrier"},
         {"abort", abort},
         {"abort_reuse", p.abort_reuse},
         {"resume", p.resume == ResumeMode::kResume ? "resume" : "restart"},
         {"overlap_batch_with_transfer", p.overlap_batch_with_transfer},
         {"ref_prefetch", p.ref_prefetch}});
  }

  json verifiers = json::array();
  for (const VerifierSpec& v : s.reward.verifiers) {
    json e = {{"name", v.name}, {"weight", v.weight}};
    if (const auto* rule = std::get_if<RuleVerifier>(&v.kind)) {
      e["kind"] = "rule";
      e["latency_sec"] = rule->latency_sec;
      e["score_fn"] = rule->score_fn;
      e["p"] = rule->p;
    } else {
      const auto& judge = std::get<JudgeVerifier>(v.kind);
      e["kind"] = "judge";
      e["latency"] = DistJson(judge.latency_sec);
      switch (judge.score.kind) {
        case JudgeScore::Kind::kBernoulli:
          e["score"] = {{"kind", "bernoulli"}, {"p", judge.score.p}};
          break;
        case JudgeScore::Kind::kUniform:
          e["score"] = {{"kind", "uniform"}};
          break;
        case JudgeScore::Kind::kTable: {
          json table = json::object();
          for (const auto& [id, val] : judge.score.table) table[std::to_string(id)] = val;
          e["score"] = {{"kind", "table"}, {"table", table}, {"default", judge.score.table_default}};
          break;
        }
      }
    }
    verifiers.push_back(std::move(e));
  }
  json aggregation = std::visit(
      [](const auto& a) -> json {
        using T = std::decay_t<decltype(a)>;
        if constexpr (std::is_same_v<T, WeightedSum>) {
          return {{"strategy", "weighted_sum"}};
        } else if constexpr (std::is_same_v<T, MinOf>) {
          return {{"strategy", "min"}};
        } else if constexpr (std::is_same_v<T, ProductOf>) {
          return {{"strategy", "product"}};
        } else {
          return {{"strategy", "veto_gate"}, {"gate", a.gate}};
        }
      },
      s.reward.aggregation);
  j["reward"] = {{"verifiers", verifiers},
                 {"aggregation", aggregation},
                 {"success_threshold", s.reward.success_threshold},
                 {"pass_k", s.reward.pass_ks}};

  const MemConfig& mc = s.memory.config;
  json buffers = json::array();
  for (const BufferEntry& b : s.memory.buffers) {
    buffers.push_back({{"name", b.name}, {"bytes", b.bytes}, {"path", BufferPathName(b.path)}});
  }
  j["memory"] = {{"act_bytes_per_token_per_layer", mc.act_bytes_per_token_per_layer},
                 {"vit_layers", mc.vit_layers},
                 {"projector_bytes_per_token", mc.projector_bytes_per_token},
                 {"recompute_vit", mc.recompute_vit},
                 {"recompute_projector", mc.recompute_projector},
                 {"offload", mc.offload},
                 {"offload_staging_bytes", mc.offload_staging_bytes},
                 {"checkpoint_interval_layers", mc.checkpoint_interval_layers},
                 {"probe_visual", VisualToJson(s.memory.probe_visual)},
                 {"image_counts", s.memory.image_counts},
                 {"buffers", buffers},
                 {"migrate", s.memory.migrate}};

  json items = json::array();
  for (const ItemCost& c : s.packing.items) {
    items.push_back({{"id", c.id}, {"seq_tokens", c.seq_tokens}, {"vit_tokens", c.vit_tokens}});
  }
  j["packing"] = {{"items", items},
                  {"num_bins", s.packing.num_bins},
                  {"policy", PackPolicyName(s.packing.policy)},
                  {"norm", nullptr},
                  {"oracle", s.packing.oracle},
                  {"bytes_per_token", s.packing.bytes_per_token}};
  if (s.packing.norm) {
    j["packing"]["norm"] = {{"seq_norm", s.packing.norm->seq_norm},
                            {"vit_norm", s.packing.norm->vit_norm}};
  }

  json visuals = json::array();
  for (const VisualInput& v : s.partition.visuals) visuals.push_back(VisualToJson(v));
  json layouts = json::array();
  for (const LayoutSpec& l : s.partition.layouts) {
    layouts.push_back({{"name", l.name}, {"segments", l.segments}});
  }
  j["partition"] = {{"visuals", visuals},
                    {"max_workload_visuals", s.partition.max_workload_visuals},
                    {"producer_mode", s.partition.producer_mode},
                    {"producer_offset", s.partition.producer_offset},
                    {"producer_rank", s.partition.producer_rank},
                    {"layouts", layouts}};

  json params = json::array();
  for (const SweepParameter& p : s.sweep) params.push_back({{"path", p.path}, {"values", p.values}});
  j["sweep"] = {{"parameters", params}};
  j["output"] = {{"dir", s.output_dir}};
  return j;
}

void SetAtPath(json& doc, const std::string& path, const json& value) {
  json* node = &doc;
  std::size_t pos = 0;
  while (true) {
    const std::size_t dot = path.find('.', pos);
    const std::string key = path.substr(pos, dot == std::string::npos ? std::string::npos : dot - pos);
    if (key.empty()) throw ConfigError(path, "malformed path");
    json* child = nullptr;
    if (node->is_array()) {
      std::size_t index = 0;
      try {
        index = std::stoul(key);
      } catch (const std::logic_error&) {
        throw ConfigError(path, "'" + key + "' is not an array index");
      }
      if (index >= node->size()) throw ConfigError(path, "index " + key + " out of range");
      child = &(*node)[index];
    } else {
      if (node->is_null()) *node = json::object();
      if (!node->is_object()) throw ConfigError(path, "'" + key + "' is not inside an object");
      child = &(*node)[key];
    }
    if (dot == std::string::npos) {
      *child = value;
      return;
    }
    node = child;
    pos = dot + 1;
  }
}

std::vector<RolloutSample> ResolveWorkload(const Scenario& s) {
  if (s.workload.trace_path) {
    std::filesystem::path p = *s.workload.trace_path;
    if (p.is_relative() && !s.base_dir.empty()) p = s.base_dir / p;
    return LoadTrace(p);
  }
  WorkloadSpec spec = *s.workload.spec;
  spec.seed = s.workload_seed();
  return GenWorkload(spec);
}

}  // namespace mmrl
