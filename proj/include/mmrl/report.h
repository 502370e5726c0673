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

#ifndef MMRL_REPORT_H_
#define MMRL_REPORT_H_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "mmrl/engine.h"
#include "mmrl/scenario.h"

namespace mmrl {

enum class ReportFormat { kJson, kCsv };

// A file a command wants written, relative to the output directory.
struct OutputFile {
  std::string name;
  std::string content;
};

nlohmann::json MetricsToJson(const IterationMetrics& m);

// Report sections. Each takes a fully parsed scenario and is deterministic.
nlohmann::json MemoryReport(const MemoryScenario& memory);
nlohmann::json BalanceReport(std::span<const Trajectory> trajectories, const Scenario& s);
nlohmann::json PackReport(const Scenario& s);
nlohmann::json PartitionReport(const Scenario& s);

std::vector<OutputFile> CmdGen(const Scenario& s);
std::vector<OutputFile> CmdSimulate(const Scenario& s, ReportFormat format);
std::vector<OutputFile> CmdPack(const Scenario& s, ReportFormat format);
std::vector<OutputFile> CmdPartition(const Scenario& s, ReportFormat format);
// `doc` is the raw config document; each grid point is re-parsed after its
// overrides are applied. Points run on up to `parallel` threads.
std::vector<OutputFile> CmdSweep(const nlohmann::json& doc, const std::filesystem::path& base_dir,
                                 std::int64_t parallel, ReportFormat format);

struct RunOptions {
  std::string command;
  std::filesystem::path config;
  std::optional<std::filesystem::path> out;
  std::optional<std::uint64_t> seed;
  std::int64_t parallel = 1;
  std::string format = "json";
};

// Runs one subcommand end to end and returns the process exit code: 0 on
// success, 2 for configuration errors, 3 for runtime errors. Files already
// written are removed on failure.
int RunCommand(const RunOptions& options, std::ostream& log);

}  // namespace mmrl

#endif  // MMRL_REPORT_H_
