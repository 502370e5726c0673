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

#include "mmrl/gym.h"

#include "mmrl/errors.h"

namespace mmrl {
namespace {

std::int64_t MergedTokens(const std::vector<VisualInput>& visuals) {
  std::int64_t n = 0;
  for (const VisualInput& v : visuals) n += v.merged_tokens();
  return n;
}

std::int64_t DrawResponse(const RolloutSample& sample, Rng& rng) {
  if (const auto* n = std::get_if<std::int64_t>(&sample.response_tokens)) {
    return *n;
  }
  return std::get<Distribution>(sample.response_tokens).SampleCount(rng, 1);
}

}  // namespace

void TaskSpec::Validate() const {
  if (max_steps < 1) throw ConfigError("task.max_steps", "must be >= 1");
  if (observation_tokens < 0) {
    throw ConfigError("task.observation_tokens", "must be >= 0");
  }
  if (!(image_probability >= 0 && image_probability <= 1)) {
    throw ConfigError("task.image_probability", "must be in [0, 1]");
  }
  if (!(termination_probability >= 0 && termination_probability <= 1)) {
    throw ConfigError("task.termination_probability", "must be in [0, 1]");
  }
}

Trajectory ExpandTrajectory(const RolloutSample& sample, const TaskSpec& task,
                            std::uint64_t seed) {
  task.Validate();
  Rng rng(DeriveSeed(seed, "trajectory", static_cast<std::uint64_t>(sample.id)));

  Trajectory t;
  t.sample_id = sample.id;

  InferenceRequest first;
  first.step_index = 0;
  first.context_tokens = sample.prompt_tokens + MergedTokens(sample.visuals);
  first.new_visuals = sample.visuals;
  first.expected_response_tokens = DrawResponse(sample, rng);
  t.requests.push_back(std::move(first));

  if (task.kind == TaskSpec::Kind::kSingleStep) return t;

  for (std::int64_t step = 1; step < task.max_steps; ++step) {
    // Draw order per step is fixed: termination, image, response.
    if (rng.Bernoulli(task.termination_probability)) break;
    const InferenceRequest& prev = t.requests.back();
    InferenceRequest next;
    next.step_index = step;
    next.context_tokens = prev.context_tokens + prev.expected_response_tokens +
                          task.observation_tokens;
    if (rng.Bernoulli(task.image_probability)) {
      next.new_visuals.push_back(task.observation_visual);
      next.context_tokens += task.observation_visual.merged_tokens();
    }
    next.expected_response_tokens = DrawResponse(sample, rng);
    t.requests.push_back(std::move(next));
  }
  return t;
}

std::vector<Trajectory> ExpandAll(const std::vector<RolloutSample>& samples,
                                  const TaskSpec& task, std::uint64_t seed) {
  std::vector<Trajectory> out;
  out.reserve(samples.size());
  for (const RolloutSample& s : samples) {
    out.push_back(ExpandTrajectory(s, task, seed));
  }
  return out;
}

TrajectoryLoad GetTrajectoryLoad(const Trajectory& t) {
  TrajectoryLoad load;
  for (const InferenceRequest& r : t.requests) {
    load.seq_tokens += r.context_tokens + r.expected_response_tokens;
    load.vit_tokens += MergedTokens(r.new_visuals);
  }
  return load;
}

}  // namespace mmrl
