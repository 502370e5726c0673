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
#include <map>
#include <sstream>

#include "gtest/gtest.h"
#include "mmrl/errors.h"
#include "test_util.h"

namespace mmrl {
namespace {

TEST(VitTokenCountTest, SquareImageMergesByFour) {
  EXPECT_EQ(VitTokenCount(VisualInput(16, 16, 1, 2)), (VitTokens{256, 64}));
}

TEST(VitTokenCountTest, SinglePatchIdentity) {
  EXPECT_EQ(VitTokenCount(VisualInput(1, 1, 1, 1)), (VitTokens{1, 1}));
}

TEST(VitTokenCountTest, OddSidesArePaddedPerFrame) {
  const VisualInput v(15, 15, 2, 2);
  EXPECT_EQ(v.padded_h(), 16);
  EXPECT_EQ(v.padded_w(), 16);
  EXPECT_EQ(VitTokenCount(v), (VitTokens{450, 128}));
}

TEST(VisualInputTest, RejectsNonPositiveFields) {
  EXPECT_THROW(VisualInput(0, 4, 1, 2), ValidationError);
  EXPECT_THROW(VisualInput(4, 0, 1, 2), ValidationError);
  EXPECT_THROW(VisualInput(4, 4, 0, 2), ValidationError);
  EXPECT_THROW(VisualInput(4, 4, 1, 0), ValidationError);
}

TEST(VisualInputTest, PaddingBoundsHoldForRandomInputs) {
  Rng rng(101);
  for (int i = 0; i < 2000; ++i) {
    const VisualInput v = testing::RandomVisual(rng);
    const std::int64_t m2 = v.merge() * v.merge();
    EXPECT_LE(v.merged_tokens(), v.raw_tokens());
    EXPECT_GE(v.merged_tokens() * m2, v.raw_tokens());
    EXPECT_LT(v.padded_h() - v.patches_h(), v.merge());
    EXPECT_LT(v.padded_w() - v.patches_w(), v.merge());
    EXPECT_EQ(v.padded_h() % v.merge(), 0);
    EXPECT_EQ(v.merged_tokens(),
              (v.padded_h() / v.merge()) * (v.padded_w() / v.merge()) * v.frames());
  }
}

TEST(GenWorkloadTest, ZeroSamplesIsEmpty) {
  WorkloadSpec spec;
  spec.num_samples = 0;
  EXPECT_TRUE(GenWorkload(spec).empty());
}

TEST(GenWorkloadTest, SameSeedSameList) {
  const WorkloadSpec spec = testing::SmallWorkloadSpec(42, 50);
  EXPECT_EQ(GenWorkload(spec), GenWorkload(spec));
  WorkloadSpec other = spec;
  other.seed = 43;
  EXPECT_NE(GenWorkload(spec), GenWorkload(other));
}

TEST(GenWorkloadTest, ExactCountDenseIdsAndSharedGroupPrompts) {
  WorkloadSpec spec = testing::SmallWorkloadSpec(5, 37);
  spec.group_size = 4;
  const auto samples = GenWorkload(spec);
  ASSERT_EQ(samples.size(), 37u);
  std::map<std::int64_t, const RolloutSample*> first;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    EXPECT_EQ(samples[i].id, static_cast<std::int64_t>(i));
    auto [it, inserted] = first.emplace(samples[i].group_id, &samples[i]);
    if (!inserted) {
      EXPECT_EQ(it->second->prompt_tokens, samples[i].prompt_tokens);
      EXPECT_EQ(it->second->visuals, samples[i].visuals);
      EXPECT_EQ(it->second->source_tag, samples[i].source_tag);
    }
  }
  EXPECT_EQ(first.size(), 10u);
  EXPECT_NO_THROW(ValidateWorkload(samples));
}

TEST(GenWorkloadTest, LogNormalResponseMeanMatchesConfiguredMean) {
  const double sigma = 0.8;
  WorkloadSpec spec;
  spec.num_samples = 10000;
  spec.seed = 9;
  spec.response_tokens = Distribution::LogNormal(std::log(512.0) - sigma * sigma / 2, sigma);
  ASSERT_NEAR(spec.response_tokens.Mean(), 512.0, 1e-9);
  double sum = 0;
  for (const RolloutSample& s : GenWorkload(spec)) {
    sum += static_cast<double>(std::get<std::int64_t>(s.response_tokens));
  }
  EXPECT_NEAR(sum / 10000.0, 512.0, 0.05 * 512.0);
}

TEST(GenWorkloadTest, TagFrequenciesConvergeToMixture) {
  WorkloadSpec spec;
  spec.num_samples = 20000;
  spec.mixture = {{"x", 0.7}, {"y", 0.2}, {"z", 0.1}};
  spec.seed = 3;
  std::map<std::string, double> counts;
  for (const RolloutSample& s : GenWorkload(spec)) counts[s.source_tag] += 1;
  for (const auto& [tag, p] : spec.mixture) EXPECT_NEAR(counts[tag] / 20000.0, p, 0.015) << tag;
}

TEST(WorkloadSpecTest, InvalidFieldsNameTheField) {
  auto field_of = [](const WorkloadSpec& spec) -> std::string {
    try {
      spec.Validate();
    } catch (const ConfigError& e) {
      return e.field();
    }
    return "";
  };
  WorkloadSpec bad_mix;
  bad_mix.mixture = {{"a", 0.5}, {"b", 0.4}};
  EXPECT_EQ(field_of(bad_mix), "workload.mixture");

  WorkloadSpec bad_group;
  bad_group.group_size = 0;
  EXPECT_EQ(field_of(bad_group), "workload.group_size");

  WorkloadSpec bad_dist;
  bad_dist.response_tokens = Distribution::LogNormal(std::nan(""), 1.0);
  EXPECT_EQ(field_of(bad_dist).rfind("workload.response_tokens", 0), 0u);

  WorkloadSpec bad_name;
  bad_name.prompt_tokens = {"zipf", {}};
  EXPECT_EQ(field_of(bad_name).rfind("workload.prompt_tokens", 0), 0u);

  WorkloadSpec negative;
  negative.num_samples = -1;
  EXPECT_EQ(field_of(negative), "workload.num_samples");
}

TEST(TraceTest, RoundTripIsIdentity) {
  const auto samples = GenWorkload(testing::SmallWorkloadSpec(17, 100));
  std::stringstream ss;
  WriteTrace(samples, ss);
  EXPECT_EQ(ReadTrace(ss), samples);
}

TEST(TraceTest, DistributionResponseRoundTrips) {
  RolloutSample s;
  s.id = 4;
  s.source_tag = "ocr";
  s.group_id = 2;
  s.prompt_tokens = 30;
  s.visuals = {VisualInput(3, 5, 2, 2)};
  s.response_tokens = Distribution::Uniform(10, 20);
  std::stringstream ss;
  WriteTrace({s}, ss);
  const auto back = ReadTrace(ss);
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(back[0], s);
}

TEST(TraceTest, FileRoundTrip) {
  testing::TempDir dir;
  const auto samples = GenWorkload(testing::SmallWorkloadSpec(1, 20));
  SaveTrace(samples, dir.path() / "t.jsonl");
  EXPECT_EQ(LoadTrace(dir.path() / "t.jsonl"), samples);
}

TEST(TraceTest, EmptyInputIsEmptyList) {
  std::stringstream ss;
  EXPECT_TRUE(ReadTrace(ss).empty());
}

TEST(TraceTest, MissingSourceTagReportsLine) {
  std::stringstream ss;
  ss << R"({"id":0,"source_tag":"a","group_id":0,"prompt_tokens":1,"response_tokens":2,"visuals":[]})"
     << "\n"
     << R"({"id":1,"group_id":0,"prompt_tokens":1,"response_tokens":2,"visuals":[]})" << "\n";
  try {
    ReadTrace(ss);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
}

TEST(TraceTest, UnknownFieldAndBadJsonAreParseErrors) {
  std::stringstream unknown(
      R"({"id":0,"source_tag":"a","group_id":0,"prompt_tokens":1,"response_tokens":2,"visuals":[],"extra":1})");
  EXPECT_THROW(ReadTrace(unknown), ParseError);
  std::stringstream garbage("{not json\n");
  EXPECT_THROW(ReadTrace(garbage), ParseError);
  std::stringstream bad_visual(
      R"({"id":0,"source_tag":"a","group_id":0,"prompt_tokens":1,"response_tokens":2,"visuals":[{"h":0,"w":1,"frames":1,"merge":1}]})");
  EXPECT_THROW(ReadTrace(bad_visual), ParseError);
}

TEST(TraceTest, DuplicateIdIsValidationError) {
  std::stringstream ss;
  const char* rec =
      R"({"id":7,"source_tag":"a","group_id":0,"prompt_tokens":1,"response_tokens":2,"visuals":[]})";
  ss << rec << "\n" << rec << "\n";
  EXPECT_THROW(ReadTrace(ss), ValidationError);
}

}  // namespace
}  // namespace mmrl
