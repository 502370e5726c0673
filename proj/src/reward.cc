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

#include "mmrl/reward.h"

#include <algorithm>
#include <cmath>
#include <set>

#include "mmrl/errors.h"

namespace mmrl {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};

void CheckUnique(std::span<const VerifierSpec> specs) {
  std::set<std::string> names;
  for (const VerifierSpec& s : specs) {
    if (!names.insert(s.name).second) {
      throw ConfigError("reward.verifiers", "duplicate verifier name '" + s.name + "'");
    }
  }
}

double WeightedMean(std::span<const VerifierScore> scores) {
  double num = 0, den = 0;
  for (const VerifierScore& s : scores) {
    num += s.weight * s.score;
    den += s.weight;
  }
  if (den <= 0) {
    throw ConfigError("reward.aggregation", "weighted sum needs a positive total weight");
  }
  return num / den;
}

double RuleScore(const VerifierSpec& spec, const RuleVerifier& rule,
                 std::int64_t sample_id, std::uint64_t seed) {
  if (rule.score_fn == "pass") return 1.0;
  if (rule.score_fn == "fail") return 0.0;
  Rng rng(DeriveSeed(seed, "rule:" + spec.name, static_cast<std::uint64_t>(sample_id)));
  return rng.Bernoulli(rule.p) ? 1.0 : 0.0;
}

}  // namespace

void RewardConfig::Validate() const {
  if (verifiers.empty()) throw ConfigError("reward.verifiers", "must not be empty");
  CheckUnique(verifiers);
  for (std::size_t i = 0; i < verifiers.size(); ++i) {
    const VerifierSpec& v = verifiers[i];
    const std::string field = "reward.verifiers." + std::to_string(i);
    if (!std::isfinite(v.weight) || v.weight < 0) {
      throw ConfigError(field + ".weight", "must be finite and >= 0");
    }
    if (const auto* rule = std::get_if<RuleVerifier>(&v.kind)) {
      if (!(rule->latency_sec >= 0) || !std::isfinite(rule->latency_sec)) {
        throw ConfigError(field + ".latency_sec", "must be finite and >= 0");
      }
      if (rule->score_fn != "pass" && rule->score_fn != "fail" &&
          rule->score_fn != "bernoulli") {
        throw ConfigError(field + ".score_fn", "unknown score function '" + rule->score_fn + "'");
      }
      if (!(rule->p >= 0 && rule->p <= 1)) throw ConfigError(field + ".p", "must be in [0, 1]");
    } else {
      const auto& judge = std::get<JudgeVerifier>(v.kind);
      judge.latency_sec.Validate(field + ".latency");
      if (judge.latency_sec.name != "lognormal") {
        const double lo = judge.latency_sec.name == "fixed"
                              ? judge.latency_sec.params.at("value")
                              : judge.latency_sec.params.at("lo");
        if (lo < 0) throw ConfigError(field + ".latency", "latency must be >= 0");
      }
      const JudgeScore& score = judge.score;
      auto in_unit = [](double x) { return x >= 0 && x <= 1; };
      if (!in_unit(score.p) || !in_unit(score.table_default)) {
        throw ConfigError(field + ".score", "scores and probabilities must be in [0, 1]");
      }
      for (const auto& [id, s] : score.table) {
        if (!in_unit(s)) {
          throw ConfigError(field + ".score.table." + std::to_string(id), "must be in [0, 1]");
        }
      }
    }
  }
  if (const auto* veto = std::get_if<VetoGate>(&aggregation)) {
    const bool found = std::any_of(verifiers.begin(), verifiers.end(),
                                   [&](const VerifierSpec& v) { return v.name == veto->gate; });
    if (!found) {
      throw ConfigError("reward.aggregation.gate", "unknown verifier '" + veto->gate + "'");
    }
  }
  if (!(success_threshold >= 0 && success_threshold <= 1)) {
    throw ConfigError("reward.success_threshold", "must be in [0, 1]");
  }
  for (std::int64_t k : pass_ks) {
    if (k < 1) throw ConfigError("reward.pass_k", "every k must be >= 1");
  }
}

std::vector<VerifierTask> PlanVerification(std::int64_t sample_id,
                                           double trigger_sec,
                                           std::span<const VerifierSpec> specs,
                                           std::uint64_t seed) {
  if (specs.empty()) throw ConfigError("reward.verifiers", "must not be empty");
  CheckUnique(specs);
  std::vector<VerifierTask> tasks;
  tasks.reserve(specs.size());
  for (const VerifierSpec& spec : specs) {
    VerifierTask task;
    task.name = spec.name;
    task.ready_sec = trigger_sec;
    task.weight = spec.weight;
    if (const auto* rule = std::get_if<RuleVerifier>(&spec.kind)) {
      task.cls = SchedulingClass::kInline;
      task.latency_sec = rule->latency_sec;
      task.score = RuleScore(spec, *rule, sample_id, seed);
    } else {
      const auto& judge = std::get<JudgeVerifier>(spec.kind);
      Rng rng(DeriveSeed(seed, "judge:" + spec.name, static_cast<std::uint64_t>(sample_id)));
      task.cls = SchedulingClass::kDispatch;
      task.latency_sec = std::max(0.0, judge.latency_sec.Sample(rng));
      switch (judge.score.kind) {
        case JudgeScore::Kind::kBernoulli:
          task.score = rng.Bernoulli(judge.score.p) ? 1.0 : 0.0;
          break;
        case JudgeScore::Kind::kUniform:
          task.score = rng.Uniform();
          break;
        case JudgeScore::Kind::kTable: {
          auto it = judge.score.table.find(sample_id);
          task.score = it == judge.score.table.end() ? judge.score.table_default : it->second;
          break;
        }
      }
    }
    tasks.push_back(std::move(task));
  }
  return tasks;
}

double RewardReadyTime(std::span<const VerifierTask> tasks) {
  double ready = 0;
  for (const VerifierTask& t : tasks) ready = std::max(ready, t.ready_sec + t.latency_sec);
  return ready;
}

double Aggregate(std::span<const VerifierScore> scores, const Aggregation& strategy) {
  if (scores.empty()) throw ConfigError("reward.verifiers", "nothing to aggregate");
  for (const VerifierScore& s : scores) {
    if (!(s.score >= 0 && s.score <= 1)) {
      throw ArgumentError("score of '" + s.name + "' is outside [0, 1]");
    }
  }
  return std::visit(
      Overloaded{
          [&](const WeightedSum&) { return WeightedMean(scores); },
          [&](const MinOf&) {
            double m = 1;
            for (const VerifierScore& s : scores) m = std::min(m, s.score);
            return m;
          },
          [&](const ProductOf&) {
            double p = 1;
            for (const VerifierScore& s : scores) p *= s.score;
            return p;
          },
          [&](const VetoGate& veto) {
            std::vector<VerifierScore> rest;
            const VerifierScore* gate = nullptr;
            for (const VerifierScore& s : scores) {
              if (s.name == veto.gate) {
                gate = &s;
              } else {
                rest.push_back(s);
              }
            }
            if (gate == nullptr) {
              throw ConfigError("reward.aggregation.gate", "gate '" + veto.gate + "' has no score");
            }
            if (gate->score == 0) return 0.0;
            // A lone gate passes its own score through.
            return rest.empty() ? gate->score : WeightedMean(rest);
          },
      },
      strategy);
}

double PassAtK(std::int64_t n, std::int64_t c, std::int64_t k) {
  if (n < 1 || c < 0 || c > n) {
    throw ArgumentError("pass@k requires 0 <= c <= n and n >= 1");
  }
  if (k < 1 || k > n) throw ArgumentError("pass@k requires 1 <= k <= n");
  if (n - c < k) return 1.0;
  // C(n-c, k) / C(n, k) = prod_{i=n-c+1}^{n} (1 - k/i)
  double miss = 1.0;
  for (std::int64_t i = n - c + 1; i <= n; ++i) {
    miss *= 1.0 - static_cast<double>(k) / static_cast<double>(i);
  }
  return 1.0 - miss;
}

std::map<std::string, SourceMetrics> SourceReport(
    std::span<const RewardRecord> records,
    std::span<const RolloutSample> samples, std::span<const std::int64_t> ks,
    double success_threshold) {
  std::map<std::int64_t, const RolloutSample*> by_id;
  for (const RolloutSample& s : samples) by_id[s.id] = &s;

  struct GroupTally {
    std::int64_t n = 0;
    std::int64_t successes = 0;
  };
  std::map<std::string, std::map<std::int64_t, GroupTally>> groups;
  std::map<std::string, double> reward_sum;
  std::map<std::string, SourceMetrics> out;

  for (const RewardRecord& r : records) {
    auto it = by_id.find(r.sample_id);
    if (it == by_id.end()) {
      throw ValidationError("reward record for unknown sample " + std::to_string(r.sample_id));
    }
    const RolloutSample& s = *it->second;
    SourceMetrics& m = out[s.source_tag];
    ++m.count;
    reward_sum[s.source_tag] += r.reward;
    GroupTally& g = groups[s.source_tag][s.group_id];
    ++g.n;
    if (r.reward >= success_threshold) ++g.successes;
  }

  for (auto& [tag, m] : out) {
    m.mean_reward = reward_sum[tag] / static_cast<double>(m.count);
    for (std::int64_t k : ks) {
      double sum = 0;
      std::int64_t used = 0;
      for (const auto& [gid, g] : groups[tag]) {
        if (g.n < k) {
          ++m.excluded_groups;
          continue;
        }
        sum += PassAtK(g.n, g.successes, k);
        ++used;
      }
      if (used > 0) m.pass_at_k[k] = sum / static_cast<double>(used);
    }
  }
  return out;
}

}  // namespace mmrl
