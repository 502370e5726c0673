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

#include "mmrl/memory.h"

#include <vector>

#include "gtest/gtest.h"
#include "mmrl/errors.h"
#include "test_util.h"

namespace mmrl {
namespace {

// 10 x 10 patches with merge 1: exactly 100 merged tokens.
const VisualInput kHundred(10, 10, 1, 1);

MemConfig Naive() {
  MemConfig c;
  c.act_bytes_per_token_per_layer = 10;
  c.vit_layers = 4;
  return c;
}

MemConfig RecomputeOffload(std::int64_t staging) {
  MemConfig c = Naive();
  c.recompute_vit = true;
  c.recompute_projector = true;
  c.offload = true;
  c.offload_staging_bytes = staging;
  c.checkpoint_interval_layers = 1;
  return c;
}

TEST(PeakActivationTest, NaiveSingleImage) {
  const std::vector<VisualInput> one = {kHundred};
  EXPECT_EQ(PeakActivation(one, Naive()), 4000);
}

TEST(PeakActivationTest, NaiveIsLinear) {
  const std::vector<VisualInput> four(4, kHundred);
  EXPECT_EQ(PeakActivation(four, Naive()), 16000);
}

TEST(PeakActivationTest, RecomputeOffloadIsFlatInImageCount) {
  for (int n = 1; n <= 8; ++n) {
    const std::vector<VisualInput> images(static_cast<std::size_t>(n), kHundred);
    EXPECT_EQ(PeakActivation(images, RecomputeOffload(500)), 5500) << n;
  }
}

TEST(PeakActivationTest, EmptyIsZero) {
  EXPECT_EQ(PeakActivation({}, Naive()), 0);
  EXPECT_EQ(PeakActivation({}, RecomputeOffload(500)), 0);
}

TEST(PeakActivationTest, ProjectorTermFollowsRecomputeFlag) {
  MemConfig c = RecomputeOffload(0);
  c.projector_bytes_per_token = 3;
  const std::vector<VisualInput> images = {kHundred, VisualInput(5, 5, 1, 1)};
  const std::int64_t vit = 100 * 10 * 1 + 4 * 100 * 10;
  EXPECT_EQ(PeakActivation(images, c), vit + 100 * 3);
  c.recompute_projector = false;
  EXPECT_EQ(PeakActivation(images, c), vit + 125 * 3);
}

TEST(PeakActivationTest, PartialModes) {
  MemConfig recompute = Naive();
  recompute.recompute_vit = true;
  recompute.checkpoint_interval_layers = 2;
  const std::vector<VisualInput> two(2, kHundred);
  // Checkpoints for both images (2 each) plus one live two-layer segment.
  EXPECT_EQ(PeakActivation(two, recompute), 2 * 100 * 10 * 2 + 100 * 10 * 2);
  MemConfig offload = Naive();
  offload.offload = true;
  offload.offload_staging_bytes = 7;
  EXPECT_EQ(PeakActivation(two, offload), 100 * 10 * 4 + 7);
}

TEST(PeakActivationTest, InvalidConfigIsConfigError) {
  MemConfig c = Naive();
  c.checkpoint_interval_layers = 5;
  const std::vector<VisualInput> one = {kHundred};
  EXPECT_THROW(PeakActivation(one, c), ConfigError);
  c = Naive();
  c.act_bytes_per_token_per_layer = -1;
  EXPECT_THROW(PeakActivation(one, c), ConfigError);
}

TEST(PeakActivationTest, PropertiesOverRandomConfigs) {
  Rng rng(12);
  for (int trial = 0; trial < 300; ++trial) {
    MemConfig c;
    c.act_bytes_per_token_per_layer = rng.UniformInt(0, 4096);
    c.vit_layers = rng.UniformInt(1, 48);
    c.projector_bytes_per_token = rng.UniformInt(0, 8192);
    c.checkpoint_interval_layers = rng.UniformInt(1, c.vit_layers);
    const VisualInput v = testing::RandomVisual(rng, 40, 2, 3);
    const std::vector<VisualInput> one = {v};
    const std::int64_t single_naive = NaivePeakActivation(one, c);
    c.recompute_vit = c.recompute_projector = c.offload = true;
    c.offload_staging_bytes = rng.UniformInt(0, single_naive);

    const std::int64_t flat = PeakActivation(one, c);
    for (int n = 1; n <= 12; ++n) {
      const std::vector<VisualInput> images(static_cast<std::size_t>(n), v);
      EXPECT_EQ(PeakActivation(images, c), flat);
      EXPECT_EQ(NaivePeakActivation(images, c), n * single_naive);
      if (n >= 3) EXPECT_LE(PeakActivation(images, c), NaivePeakActivation(images, c));
    }
  }
}

TEST(PeakActivationTest, TwoImagesCanExceedNaiveWithShallowCheckpoints) {
  // Interval 1 on 4 layers keeps 4 checkpoints plus a live layer, so two
  // images under a full staging buffer cost more than the naive sum.
  MemConfig c = RecomputeOffload(4000);
  c.recompute_projector = true;
  const std::vector<VisualInput> two(2, kHundred);
  EXPECT_EQ(PeakActivation(two, c), 9000);
  EXPECT_EQ(NaivePeakActivation(two, c), 8000);
}

TEST(BufferRegistryTest, EmptyIsZero) {
  EXPECT_EQ(CommBufferBytes(BufferRegistry{}), (BufferTotals{0, 0}));
}

TEST(BufferRegistryTest, MigratingSevenGigabytes) {
  BufferRegistry r;
  r.Add("a", 3'000'000'000, BufferPath::kGpuComm);
  r.Add("b", 4'000'000'000, BufferPath::kGpuComm);
  r.Add("c", 1'000'000'000, BufferPath::kGpuComm);
  const BufferTotals before = CommBufferBytes(r);
  r.Migrate("a", BufferPath::kHostComm);
  r.Migrate("b", BufferPath::kHostComm);
  const BufferTotals after = CommBufferBytes(r);
  EXPECT_EQ(before.gpu_bytes - after.gpu_bytes, 7'000'000'000);
  EXPECT_EQ(after.host_bytes - before.host_bytes, 7'000'000'000);
}

TEST(BufferRegistryTest, MigrateBackRestoresTotals) {
  BufferRegistry r;
  r.Add("x", 123, BufferPath::kGpuComm);
  r.Add("y", 77, BufferPath::kHostComm);
  const BufferTotals before = CommBufferBytes(r);
  r.Migrate("x", BufferPath::kHostComm);
  EXPECT_EQ(CommBufferBytes(r).gpu_bytes + CommBufferBytes(r).host_bytes, 200);
  r.Migrate("x", BufferPath::kGpuComm);
  EXPECT_EQ(CommBufferBytes(r), before);
}

TEST(BufferRegistryTest, Errors) {
  BufferRegistry r;
  r.Add("x", 1, BufferPath::kGpuComm);
  EXPECT_THROW(r.Add("x", 2, BufferPath::kGpuComm), ValidationError);
  EXPECT_THROW(r.Add("neg", -1, BufferPath::kGpuComm), ValidationError);
  EXPECT_THROW(r.Migrate("nope", BufferPath::kHostComm), LookupError);
}

TEST(BufferRegistryTest, ConservationUnderRandomMigrations) {
  Rng rng(3);
  BufferRegistry r;
  std::int64_t total = 0;
  for (int i = 0; i < 20; ++i) {
    const std::int64_t b = rng.UniformInt(0, 1'000'000'000);
    total += b;
    r.Add("b" + std::to_string(i), b, rng.Bernoulli(0.5) ? BufferPath::kGpuComm : BufferPath::kHostComm);
  }
  for (int step = 0; step < 200; ++step) {
    const std::size_t i = static_cast<std::size_t>(rng.UniformInt(0, 19));
    const BufferTotals before = CommBufferBytes(r);
    const BufferEntry e = r.entries()[i];
    const BufferPath to = rng.Bernoulli(0.5) ? BufferPath::kGpuComm : BufferPath::kHostComm;
    r.Migrate(e.name, to);
    const BufferTotals after = CommBufferBytes(r);
    EXPECT_EQ(after.gpu_bytes + after.host_bytes, total);
    if (e.path == BufferPath::kGpuComm && to == BufferPath::kHostComm) {
      EXPECT_EQ(before.gpu_bytes - after.gpu_bytes, e.bytes);
    }
  }
}

}  // namespace
}  // namespace mmrl
