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

#include "mmrl/workload.h"

#include <cmath>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include "mmrl/errors.h"

namespace mmrl {
namespace {

using nlohmann::json;

std::int64_t RoundUp(std::int64_t x, std::int64_t m) {
  return (x + m - 1) / m * m;
}

void RequireKeys(const json& j, std::initializer_list<const char*> allowed,
                 const std::string& what) {
  if (!j.is_object()) {
    throw std::invalid_argument(what + " must be an object");
  }
  for (const auto& [key, _] : j.items()) {
    bool known = false;
    for (const char* a : allowed) known = known || key == a;
    if (!known) throw std::invalid_argument("unknown field '" + key + "' in " + what);
  }
}

const json& Field(const json& j, const char* key, const std::string& what) {
  auto it = j.find(key);
  if (it == j.end()) {
    throw std::invalid_argument("missing field '" + std::string(key) + "' in " + what);
  }
  return *it;
}

std::int64_t IntField(const json& j, const char* key, const std::string& what) {
  const json& v = Field(j, key, what);
  if (!v.is_number_integer()) {
    throw std::invalid_argument("field '" + std::string(key) + "' in " + what +
                                " must be an integer");
  }
  return v.get<std::int64_t>();
}

double Param(const Distribution& d, const std::string& key,
             const std::string& field) {
  auto it = d.params.find(key);
  if (it == d.params.end()) {
    throw ConfigError(field + ".params." + key, "missing parameter");
  }
  if (!std::isfinite(it->second)) {
    throw ConfigError(field + ".params." + key, "must be finite");
  }
  return it->second;
}

// Group members must agree on everything but id and response length.
auto PromptDescriptor(const RolloutSample& s) {
  return std::tie(s.source_tag, s.prompt_tokens, s.visuals);
}

}  // namespace

VisualInput::VisualInput(std::int64_t patches_h, std::int64_t patches_w,
                         std::int64_t frames, std::int64_t merge)
    : patches_h_(patches_h), patches_w_(patches_w), frames_(frames),
      merge_(merge) {
  if (patches_h < 1 || patches_w < 1 || frames < 1 || merge < 1) {
    throw ValidationError(
        "visual input requires h, w, frames, merge >= 1 (got " +
        std::to_string(patches_h) + ", " + std::to_string(patches_w) + ", " +
        std::to_string(frames) + ", " + std::to_string(merge) + ")");
  }
}

std::int64_t VisualInput::padded_h() const { return RoundUp(patches_h_, merge_); }
std::int64_t VisualInput::padded_w() const { return RoundUp(patches_w_, merge_); }

std::int64_t VisualInput::merged_tokens() const {
  return (padded_h() / merge_) * (padded_w() / merge_) * frames_;
}

VitTokens VitTokenCount(const VisualInput& v) {
  return {v.raw_tokens(), v.merged_tokens()};
}

Distribution Distribution::Fixed(double value) {
  return {"fixed", {{"value", value}}};
}

Distribution Distribution::Uniform(double lo, double hi) {
  return {"uniform", {{"lo", lo}, {"hi", hi}}};
}

Distribution Distribution::LogNormal(double mu, double sigma) {
  return {"lognormal", {{"mu", mu}, {"sigma", sigma}}};
}

void Distribution::Validate(const std::string& field) const {
  std::set<std::string> expected;
  if (name == "fixed") {
    expected = {"value"};
    Param(*this, "value", field);
  } else if (name == "uniform") {
    expected = {"lo", "hi"};
    if (Param(*this, "lo", field) > Param(*this, "hi", field)) {
      throw ConfigError(field, "uniform requires lo <= hi");
    }
  } else if (name == "lognormal") {
    expected = {"mu", "sigma"};
    Param(*this, "mu", field);
    if (Param(*this, "sigma", field) < 0) {
      throw ConfigError(field + ".params.sigma", "must be >= 0");
    }
  } else {
    throw ConfigError(field + ".dist", "unknown distribution '" + name + "'");
  }
  for (const auto& [key, _] : params) {
    if (!expected.contains(key)) {
      throw ConfigError(field + ".params." + key, "unknown parameter");
    }
  }
}

double Distribution::Mean() const {
  if (name == "fixed") return params.at("value");
  if (name == "uniform") return 0.5 * (params.at("lo") + params.at("hi"));
  const double sigma = params.at("sigma");
  return std::exp(params.at("mu") + 0.5 * sigma * sigma);
}

double Distribution::Sample(Rng& rng) const {
  if (name == "fixed") return params.at("value");
  if (name == "uniform") {
    const double lo = params.at("lo");
    return lo + (params.at("hi") - lo) * rng.Uniform();
  }
  return rng.LogNormal(params.at("mu"), params.at("sigma"));
}

std::int64_t Distribution::SampleCount(Rng& rng, std::int64_t min) const {
  std::int64_t v;
  if (name == "uniform") {
    // Integer-valued uniform over the closed range.
    v = rng.UniformInt(std::llround(std::ceil(params.at("lo"))),
                       std::llround(std::floor(params.at("hi"))));
  } else {
    v = std::llround(Sample(rng));
  }
  return std::max(v, min);
}

void WorkloadSpec::Validate() const {
  if (num_samples < 0) throw ConfigError("workload.num_samples", "must be >= 0");
  if (group_size < 1) throw ConfigError("workload.group_size", "must be >= 1");
  if (mixture.empty()) throw ConfigError("workload.mixture", "must not be empty");
  double total = 0;
  for (const auto& [tag, p] : mixture) {
    if (!std::isfinite(p) || p < 0) {
      throw ConfigError("workload.mixture." + tag, "probability must be finite and >= 0");
    }
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw ConfigError("workload.mixture", "probabilities must sum to 1");
  }
  prompt_tokens.Validate("workload.prompt_tokens");
  response_tokens.Validate("workload.response_tokens");
  image_count.Validate("workload.image_count");
  visual.patches_h.Validate("workload.visual.patches_h");
  visual.patches_w.Validate("workload.visual.patches_w");
  visual.frames.Validate("workload.visual.frames");
  if (visual.merge < 1) throw ConfigError("workload.visual.merge", "must be >= 1");
}

std::vector<RolloutSample> GenWorkload(const WorkloadSpec& spec) {
  spec.Validate();
  Rng rng(DeriveSeed(spec.seed, "workload"));
  std::vector<RolloutSample> out;
  out.reserve(static_cast<std::size_t>(spec.num_samples));

  std::int64_t group = 0;
  while (static_cast<std::int64_t>(out.size()) < spec.num_samples) {
    const double u = rng.Uniform();
    std::string tag = spec.mixture.rbegin()->first;
    double acc = 0;
    for (const auto& [t, p] : spec.mixture) {
      acc += p;
      if (u < acc) {
        tag = t;
        break;
      }
    }
    const std::int64_t prompt = spec.prompt_tokens.SampleCount(rng, 1);
    const std::int64_t images = spec.image_count.SampleCount(rng, 0);
    std::vector<VisualInput> visuals;
    for (std::int64_t i = 0; i < images; ++i) {
      const std::int64_t h = spec.visual.patches_h.SampleCount(rng, 1);
      const std::int64_t w = spec.visual.patches_w.SampleCount(rng, 1);
      const std::int64_t f = spec.visual.frames.SampleCount(rng, 1);
      visuals.emplace_back(h, w, f, spec.visual.merge);
    }
    for (std::int64_t j = 0;
         j < spec.group_size &&
         static_cast<std::int64_t>(out.size()) < spec.num_samples;
         ++j) {
      RolloutSample s;
      s.id = static_cast<std::int64_t>(out.size());
      s.source_tag = tag;
      s.group_id = group;
      s.prompt_tokens = prompt;
      s.visuals = visuals;
      s.response_tokens = spec.response_tokens.SampleCount(rng, 1);
      out.push_back(std::move(s));
    }
    ++group;
  }
  return out;
}

void ValidateWorkload(const std::vector<RolloutSample>& samples) {
  std::set<std::int64_t> ids;
  std::map<std::int64_t, const RolloutSample*> group_head;
  for (const RolloutSample& s : samples) {
    if (!ids.insert(s.id).second) {
      throw ValidationError("duplicate sample id " + std::to_string(s.id));
    }
    if (s.prompt_tokens < 1) {
      throw ValidationError("sample " + std::to_string(s.id) +
                            ": prompt_tokens must be >= 1");
    }
    if (const auto* n = std::get_if<std::int64_t>(&s.response_tokens);
        n != nullptr && *n < 1) {
      throw ValidationError("sample " + std::to_string(s.id) +
                            ": response_tokens must be >= 1");
    }
    auto [it, inserted] = group_head.emplace(s.group_id, &s);
    if (!inserted && PromptDescriptor(*it->second) != PromptDescriptor(s)) {
      throw ValidationError("sample " + std::to_string(s.id) +
                            " differs from its group " +
                            std::to_string(s.group_id) + " prompt");
    }
  }
}

json DistributionToJson(const Distribution& d) {
  json params = json::object();
  for (const auto& [k, v] : d.params) params[k] = v;
  return {{"dist", d.name}, {"params", params}};
}

Distribution DistributionFromJson(const json& j, const std::string& field) {
  if (!j.is_object()) throw ConfigError(field, "expected {\"dist\", \"params\"}");
  for (const auto& [key, _] : j.items()) {
    if (key != "dist" && key != "params") {
      throw ConfigError(field + "." + key, "unknown field");
    }
  }
  auto dist = j.find("dist");
  if (dist == j.end() || !dist->is_string()) {
    throw ConfigError(field + ".dist", "expected a distribution name");
  }
  Distribution d;
  d.name = dist->get<std::string>();
  if (auto params = j.find("params"); params != j.end()) {
    if (!params->is_object()) throw ConfigError(field + ".params", "expected an object");
    for (const auto& [k, v] : params->items()) {
      if (!v.is_number()) throw ConfigError(field + ".params." + k, "expected a number");
      d.params[k] = v.get<double>();
    }
  }
  d.Validate(field);
  return d;
}

json SampleToJson(const RolloutSample& s) {
  json visuals = json::array();
  for (const VisualInput& v : s.visuals) {
    visuals.push_back({{"h", v.patches_h()},
                       {"w", v.patches_w()},
                       {"frames", v.frames()},
                       {"merge", v.merge()}});
  }
  json response;
  if (const auto* n = std::get_if<std::int64_t>(&s.response_tokens)) {
    response = *n;
  } else {
    response = DistributionToJson(std::get<Distribution>(s.response_tokens));
  }
  return {{"id", s.id},
          {"source_tag", s.source_tag},
          {"group_id", s.group_id},
          {"prompt_tokens", s.prompt_tokens},
          {"response_tokens", response},
          {"visuals", visuals}};
}

RolloutSample SampleFromJson(const json& j) {
  const std::string what = "record";
  RequireKeys(j,
              {"id", "source_tag", "group_id", "prompt_tokens",
               "response_tokens", "visuals"},
              what);
  RolloutSample s;
  s.id = IntField(j, "id", what);
  const json& tag = Field(j, "source_tag", what);
  if (!tag.is_string()) throw std::invalid_argument("source_tag must be a string");
  s.source_tag = tag.get<std::string>();
  s.group_id = IntField(j, "group_id", what);
  s.prompt_tokens = IntField(j, "prompt_tokens", what);

  const json& response = Field(j, "response_tokens", what);
  if (response.is_number_integer()) {
    s.response_tokens = response.get<std::int64_t>();
  } else {
    try {
      s.response_tokens = DistributionFromJson(response, "response_tokens");
    } catch (const ConfigError& e) {
      throw std::invalid_argument(e.what());
    }
  }

  const json& visuals = Field(j, "visuals", what);
  if (!visuals.is_array()) throw std::invalid_argument("visuals must be an array");
  for (const json& v : visuals) {
    RequireKeys(v, {"h", "w", "frames", "merge"}, "visual");
    try {
      s.visuals.emplace_back(IntField(v, "h", "visual"), IntField(v, "w", "visual"),
                             IntField(v, "frames", "visual"),
                             IntField(v, "merge", "visual"));
    } catch (const ValidationError& e) {
      throw std::invalid_argument(e.what());
    }
  }
  return s;
}

void WriteTrace(const std::vector<RolloutSample>& samples, std::ostream& out) {
  for (const RolloutSample& s : samples) out << SampleToJson(s).dump() << '\n';
}

std::vector<RolloutSample> ReadTrace(std::istream& in) {
  std::vector<RolloutSample> samples;
  std::set<std::int64_t> ids;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    RolloutSample s;
    try {
      s = SampleFromJson(json::parse(line));
    } catch (const json::exception& e) {
      throw ParseError(lineno, e.what());
    } catch (const std::invalid_argument& e) {
      throw ParseError(lineno, e.what());
    }
    if (!ids.insert(s.id).second) {
      throw ValidationError("line " + std::to_string(lineno) +
                            ": duplicate sample id " + std::to_string(s.id));
    }
    samples.push_back(std::move(s));
  }
  ValidateWorkload(samples);
  return samples;
}

void SaveTrace(const std::vector<RolloutSample>& samples,
               const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  WriteTrace(samples, out);
  if (!out) throw Error("failed writing " + path.string());
}

std::vector<RolloutSample> LoadTrace(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  return ReadTrace(in);
}

}  // namespace mmrl
