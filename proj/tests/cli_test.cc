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

#include <filesystem>
#include <sstream>
#include <string>

#include "gtest/gtest.h"
#include "json.hpp"
#include "mmrl/report.h"
#include "mmrl/scenario.h"
#include "test_util.h"

namespace mmrl {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

fs::path Scenario(const char* name) { return fs::path(MMRL_SCENARIO_DIR) / name; }

int RunCli(const std::string& command, const fs::path& config, const fs::path& out,
        std::string* log_text = nullptr, std::int64_t parallel = 1,
        const std::string& format = "json") {
  RunOptions o;
  o.command = command;
  o.config = config;
  o.out = out;
  o.parallel = parallel;
  o.format = format;
  std::ostringstream log;
  const int code = RunCommand(o, log);
  if (log_text != nullptr) *log_text = log.str();
  return code;
}

fs::path WriteConfig(const testing::TempDir& dir, const json& doc, const char* name = "c.json") {
  const fs::path p = dir.path() / name;
  testing::WriteFile(p, doc.dump());
  return p;
}

TEST(RunCommandTest, SimulateIsByteIdentical) {
  testing::TempDir a, b;
  ASSERT_EQ(RunCli("simulate", Scenario("example.json"), a.path() / "o"), 0);
  ASSERT_EQ(RunCli("simulate", Scenario("example.json"), b.path() / "o"), 0);
  const std::string ra = testing::ReadFile(a.path() / "o" / "report.json");
  EXPECT_FALSE(ra.empty());
  EXPECT_EQ(ra, testing::ReadFile(b.path() / "o" / "report.json"));
  const json report = json::parse(ra);
  for (const char* key : {"command", "config", "policies", "sequential_baseline", "memory", "balance"}) {
    EXPECT_TRUE(report.contains(key)) << key;
  }
  EXPECT_EQ(report["policies"].size(), 4u);
  EXPECT_TRUE(fs::exists(a.path() / "o" / "timeline_overlapped_0.csv"));
  EXPECT_TRUE(fs::exists(a.path() / "o" / "trace_overlapped_0.jsonl"));
}

TEST(RunCommandTest, CsvReport) {
  testing::TempDir dir;
  ASSERT_EQ(RunCli("simulate", Scenario("example.json"), dir.path(), nullptr, 1, "csv"), 0);
  const std::string csv = testing::ReadFile(dir.path() / "report.csv");
  EXPECT_NE(csv.find("makespan_sec"), std::string::npos);
}

TEST(RunCommandTest, ConfigErrorsExitTwoAndNameTheField) {
  testing::TempDir dir;
  std::string log;
  const fs::path bad = WriteConfig(dir, {{"workload", {{"spec", {{"num_samples", 4}}}}},
                                         {"resources", {{"rollout_workers", 0}}}});
  EXPECT_EQ(RunCli("simulate", bad, dir.path() / "o", &log), 2);
  EXPECT_NE(log.find("resources.rollout_workers"), std::string::npos) << log;
  EXPECT_FALSE(fs::exists(dir.path() / "o"));

  EXPECT_EQ(RunCli("simulate", dir.path() / "missing.json", dir.path() / "o"), 2);
  EXPECT_EQ(RunCli("simulate", Scenario("example.json"), dir.path() / "o", nullptr, 2), 2);
  EXPECT_EQ(RunCli("gen", Scenario("example.json"), dir.path() / "o", nullptr, 1, "csv"), 2);
  EXPECT_EQ(RunCli("simulate", Scenario("example.json"), dir.path() / "o", nullptr, 1, "xml"), 2);
}

TEST(RunCommandTest, RuntimeErrorsExitThree) {
  testing::TempDir dir;
  // Nothing to pack: no inline items and an empty workload.
  const fs::path empty = WriteConfig(dir, {{"workload", {{"spec", {{"num_samples", 0}}}}}});
  std::string log;
  EXPECT_EQ(RunCli("pack", empty, dir.path() / "o", &log), 3);
  EXPECT_NE(log.find("error"), std::string::npos);
  EXPECT_FALSE(fs::exists(dir.path() / "o"));
}

TEST(RunCommandTest, PartialOutputsAreRemoved) {
  testing::TempDir dir;
  const json doc = {{"workload", {{"spec", {{"num_samples", 4}}}}},
                    {"policies", json::array({{{"name", "seq"}, {"reward_trigger", "barrier"}}})}};
  const fs::path config = WriteConfig(dir, doc);
  const fs::path out = dir.path() / "o";
  // A directory squatting on a later output file makes that write fail.
  fs::create_directories(out / "timeline_seq_0.csv");
  EXPECT_EQ(RunCli("simulate", config, out), 3);
  EXPECT_FALSE(fs::exists(out / "report.json"));
  EXPECT_TRUE(fs::exists(out));  // pre-existing directory is kept
}

TEST(RunCommandTest, GenWithNoSamplesWritesAnEmptyTrace) {
  testing::TempDir dir;
  const fs::path config = WriteConfig(dir, {{"workload", {{"spec", {{"num_samples", 0}}}}}});
  ASSERT_EQ(RunCli("gen", config, dir.path()), 0);
  EXPECT_EQ(testing::ReadFile(dir.path() / "trace.jsonl"), "");
}

TEST(RunCommandTest, GenTraceReplaysThroughSimulate) {
  testing::TempDir dir;
  ASSERT_EQ(RunCli("gen", Scenario("example.json"), dir.path()), 0);
  const fs::path config = WriteConfig(dir, {{"workload", {{"trace", "trace.jsonl"}}}});
  ASSERT_EQ(RunCli("simulate", config, dir.path() / "o"), 0);
}

TEST(RunCommandTest, SeedOverrideChangesTheRun) {
  testing::TempDir a, b;
  RunOptions o;
  o.command = "simulate";
  o.config = Scenario("example.json");
  o.out = a.path();
  std::ostringstream log;
  ASSERT_EQ(RunCommand(o, log), 0);
  o.out = b.path();
  o.seed = 99;
  ASSERT_EQ(RunCommand(o, log), 0);
  EXPECT_NE(testing::ReadFile(a.path() / "report.json"), testing::ReadFile(b.path() / "report.json"));
}

TEST(RunCommandTest, PackReportsBothObjectives) {
  testing::TempDir dir;
  ASSERT_EQ(RunCli("pack", Scenario("pack_adversarial.json"), dir.path()), 0);
  const json pack = json::parse(testing::ReadFile(dir.path() / "pack.json"))["pack"];
  const double greedy = pack["plan"]["objective"];
  const double best = pack["oracle"]["objective"];
  EXPECT_NEAR(best, 1.1, 1e-9);
  EXPECT_LE(greedy, 2 * best);
  EXPECT_NEAR(pack["oracle"]["ratio"].get<double>(), greedy / best, 1e-5);
}

TEST(RunCommandTest, PartitionReport) {
  testing::TempDir dir;
  ASSERT_EQ(RunCli("partition", Scenario("partition_example.json"), dir.path()), 0);
  const json report = json::parse(testing::ReadFile(dir.path() / "partition.json"));
  EXPECT_FALSE(report["visuals"].empty());
  ASSERT_EQ(RunCli("partition", Scenario("partition_example.json"), dir.path() / "csv", nullptr, 1, "csv"), 0);
  EXPECT_TRUE(fs::exists(dir.path() / "csv" / "partition.csv"));
}

TEST(RunCommandTest, SweepOrderDoesNotDependOnThreads) {
  testing::TempDir a, b;
  ASSERT_EQ(RunCli("sweep", Scenario("sweep_deadline.json"), a.path(), nullptr, 1), 0);
  ASSERT_EQ(RunCli("sweep", Scenario("sweep_deadline.json"), b.path(), nullptr, 3), 0);
  const std::string sa = testing::ReadFile(a.path() / "sweep.json");
  EXPECT_EQ(sa, testing::ReadFile(b.path() / "sweep.json"));
  const json sweep = json::parse(sa);
  ASSERT_EQ(sweep["points"].size(), 8u);
  // Row-major: the last parameter varies fastest.
  EXPECT_TRUE(sweep["points"][0]["parameters"]["resources.judge_capacity"].is_null());
  EXPECT_EQ(sweep["points"][1]["parameters"]["resources.judge_capacity"], 2);
  EXPECT_EQ(sweep["points"][2]["parameters"]["policies.0.abort.deadline_sec"], 2.0);
}

TEST(RunCommandTest, SweepPointErrorsSurface) {
  testing::TempDir dir;
  json doc = ReadConfigDocument(Scenario("sweep_deadline.json"));
  doc["sweep"]["parameters"][0]["values"] = json::array({1.0, -1.0});
  const fs::path config = WriteConfig(dir, doc);
  EXPECT_EQ(RunCli("sweep", config, dir.path() / "o", nullptr, 2), 2);
  EXPECT_FALSE(fs::exists(dir.path() / "o"));
}

}  // namespace
}  // namespace mmrl
