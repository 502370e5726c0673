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

#ifndef MMRL_WORKLOAD_H_
#define MMRL_WORKLOAD_H_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "mmrl/random.h"

namespace mmrl {

// A patch grid fed to the vision encoder. `merge` is the spatial downsample
// factor: each merged token covers a merge x merge block of raw patches in a
// single frame. Construction rejects non-positive fields.
class VisualInput {
 public:
  VisualInput(std::int64_t patches_h, std::int64_t patches_w,
              std::int64_t frames, std::int64_t merge);

  std::int64_t patches_h() const { return patches_h_; }
  std::int64_t patches_w() const { return patches_w_; }
  std::int64_t frames() const { return frames_; }
  std::int64_t merge() const { return merge_; }

  // Raw patches per merged token.
  std::int64_t group_size() const { return merge_ * merge_; }
  // Spatial dimensions rounded up to the next multiple of `merge`.
  std::int64_t padded_h() const;
  std::int64_t padded_w() const;

  std::int64_t raw_tokens() const { return patches_h_ * patches_w_ * frames_; }
  std::int64_t merged_tokens() const;

  friend bool operator==(const VisualInput&, const VisualInput&) = default;

 private:
  std::int64_t patches_h_;
  std::int64_t patches_w_;
  std::int64_t frames_;
  std::int64_t merge_;
};

struct VitTokens {
  std::int64_t raw = 0;
  std::int64_t merged = 0;

  friend bool operator==(const VitTokens&, const VitTokens&) = default;
};

VitTokens VitTokenCount(const VisualInput& v);

// A named parametric distribution, serialized as
// {"dist": name, "params": {...}}. Supported names and parameters:
//   fixed      value
//   uniform    lo, hi        (closed range)
//   lognormal  mu, sigma     (parameters of the underlying normal)
struct Distribution {
  std::string name;
  std::map<std::string, double> params;

  static Distribution Fixed(double value);
  static Distribution Uniform(double lo, double hi);
  static Distribution LogNormal(double mu, double sigma);

  // Throws ConfigError naming `field` when the name is unknown or a
  // parameter is missing, non-finite, or out of range.
  void Validate(const std::string& field) const;

  double Mean() const;
  double Sample(Rng& rng) const;
  // Sample rounded to the nearest integer and clamped to at least `min`.
  std::int64_t SampleCount(Rng& rng, std::int64_t min) const;

  friend bool operator==(const Distribution&, const Distribution&) = default;
};

// Either a fixed response length or a distribution resolved at simulation
// time.
using ResponseLength = std::variant<std::int64_t, Distribution>;

struct RolloutSample {
  std::int64_t id = 0;
  std::string source_tag;
  std::int64_t group_id = 0;
  std::int64_t prompt_tokens = 1;
  std::vector<VisualInput> visuals;
  ResponseLength response_tokens = std::int64_t{1};

  friend bool operator==(const RolloutSample&, const RolloutSample&) = default;
};

struct VisualSizeSpec {
  Distribution patches_h = Distribution::Uniform(8, 32);
  Distribution patches_w = Distribution::Uniform(8, 32);
  Distribution frames = Distribution::Fixed(1);
  std::int64_t merge = 2;
};

struct WorkloadSpec {
  std::int64_t num_samples = 0;
  // Keyed by tag, so iteration order is fixed.
  std::map<std::string, double> mixture{{"default", 1.0}};
  Distribution prompt_tokens = Distribution::Uniform(64, 512);
  Distribution response_tokens = Distribution::LogNormal(6.0, 0.8);
  Distribution image_count = Distribution::Uniform(0, 2);
  VisualSizeSpec visual;
  // Samples per pass@k group; members share one prompt.
  std::int64_t group_size = 1;
  std::uint64_t seed = 0;

  // Throws ConfigError with a "workload.<field>" path.
  void Validate() const;
};

// Deterministic in `spec` (including its seed). Ids are dense and assigned in
// generation order; consecutive runs of `group_size` samples share a group.
std::vector<RolloutSample> GenWorkload(const WorkloadSpec& spec);

// Throws ValidationError on duplicate ids, non-positive prompts, or group
// members whose prompt descriptors differ.
void ValidateWorkload(const std::vector<RolloutSample>& samples);

nlohmann::json SampleToJson(const RolloutSample& sample);
// Throws std::invalid_argument with a field description on schema mismatch.
RolloutSample SampleFromJson(const nlohmann::json& j);

void WriteTrace(const std::vector<RolloutSample>& samples, std::ostream& out);
std::vector<RolloutSample> ReadTrace(std::istream& in);

void SaveTrace(const std::vector<RolloutSample>& samples,
               const std::filesystem::path& path);
std::vector<RolloutSample> LoadTrace(const std::filesystem::path& path);

nlohmann::json DistributionToJson(const Distribution& d);
Distribution DistributionFromJson(const nlohmann::json& j,
                                  const std::string& field);

}  // namespace mmrl

#endif  // MMRL_WORKLOAD_H_
