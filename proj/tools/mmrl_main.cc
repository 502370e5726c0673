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

// Command-line entry point: mmrl <gen|simulate|pack|partition|sweep> --config PATH.

#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "mmrl/report.h"

int main(int argc, char** argv) {
  CLI::App app{"Multimodal RL pipeline simulator and planners"};
  app.require_subcommand(1);

  mmrl::RunOptions options;
  std::string config;
  std::string out;
  std::uint64_t seed = 0;

  const std::pair<const char*, const char*> commands[] = {
      {"gen", "Generate a workload trace"},
      {"simulate", "Simulate one RL iteration per policy and write reports"},
      {"pack", "Pack items into balanced bins"},
      {"partition", "Plan encoder shards, dispatch volumes and MTP head inputs"},
      {"sweep", "Run simulations over a parameter grid"},
  };
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config, "Scenario config (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out, "Output directory (overrides output.dir)");
    sub->add_option("--seed", seed, "Master seed (overrides the config)");
    sub->add_option("--format", options.format, "Report format")
        ->check(CLI::IsMember({"json", "csv"}));
    if (std::string(name) == "sweep") {
      sub->add_option("--parallel", options.parallel, "Grid points run concurrently")
          ->check(CLI::PositiveNumber);
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  CLI::App* chosen = app.get_subcommands().front();
  options.command = chosen->get_name();
  options.config = config;
  if (chosen->count("--out") > 0) options.out = out;
  if (chosen->count("--seed") > 0) options.seed = seed;
  return mmrl::RunCommand(options, std::cerr);
}
