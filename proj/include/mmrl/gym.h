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

#ifndef MMRL_GYM_H_
#define MMRL_GYM_H_

#include <cstdint>
#include <vector>

#include "mmrl/workload.h"

namespace mmrl {

// Scripted environment description. A single-step task issues one inference
// request. A multi-step task keeps issuing requests until it draws
// termination or reaches `max_steps`; each later step appends the previous
// response plus an observation (text tokens, and with `image_probability` one
// `observation_visual`) to the context.
struct TaskSpec {
  enum class Kind { kSingleStep, kMultiStep };

  Kind kind = Kind::kSingleStep;
  std::int64_t max_steps = 1;
  std::int64_t observation_tokens = 0;
  double image_probability = 0.0;
  double termination_probability = 0.0;
  VisualInput observation_visual{16, 16, 1, 2};

  void Validate() const;
};

struct InferenceRequest {
  std::int64_t step_index = 0;
  // Text plus merged visual tokens visible to the model at this step.
  std::int64_t context_tokens = 0;
  // Visuals introduced at this step; the encoder sees each visual once.
  std::vector<VisualInput> new_visuals;
  std::int64_t expected_response_tokens = 0;
  friend bool operator==(const InferenceRequest&, const InferenceRequest&) = default;
};

// Chain of requests; request k may only start after request k-1 finishes.
struct Trajectory {
  std::int64_t sample_id = 0;
  std::vector<InferenceRequest> requests;

  friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

// Randomness comes from a substream keyed by (seed, sample id), so adding
// samples never perturbs another sample's trajectory.
Trajectory ExpandTrajectory(const RolloutSample& sample, const TaskSpec& task,
                            std::uint64_t seed);

std::vector<Trajectory> ExpandAll(const std::vector<RolloutSample>& samples,
                                  const TaskSpec& task, std::uint64_t seed);

struct TrajectoryLoad {
  std::int64_t seq_tokens = 0;
  std::int64_t vit_tokens = 0;

  friend bool operator==(const TrajectoryLoad&, const TrajectoryLoad&) = default;
};

// Sum of context + response tokens over all requests, and merged ViT tokens
// over all visuals the trajectory introduces.
TrajectoryLoad GetTrajectoryLoad(const Trajectory& t);

}  // namespace mmrl

#endif  // MMRL_GYM_H_
