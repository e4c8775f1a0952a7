// Copyright 2026 The tlqg Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "tlqg/config.hpp"
#include "tlqg/montecarlo.hpp"

namespace tlqg {

/// Command-line overrides and run settings shared by every command.
struct CommandOptions {
  std::filesystem::path out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<double> epsilon;
  std::optional<int> samples;
  int threads = 1;
  std::ostream* log = nullptr;  // progress and diagnostics; nullptr silences them
};

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitAborted = 3;

/// Solves the planning problem; writes plan.csv, plan.svg and report.json.
int cmd_plan(const ScenarioConfig& config, const CommandOptions& options);
/// Executes one closed-loop rollout of <out>/plan.csv; writes exec.csv, estimate.csv, exec.svg.
int cmd_simulate(const ScenarioConfig& config, const CommandOptions& options);
/// First-order cost error statistics per epsilon; writes theorem3.csv and theorem3.json.
int cmd_validate(const ScenarioConfig& config, const CommandOptions& options);
/// Exit probabilities and cost gaps over the epsilon grid; writes sweep.csv, sweep.svg, sweep.json.
int cmd_sweep(const ScenarioConfig& config, const CommandOptions& options);

/// Reads a plan written by cmd_plan and re-derives it from its controls.
NominalPlan load_plan_csv(const std::filesystem::path& path, const PlanProblem& problem);

/// Writes via a temporary file and rename, so readers never see partial output.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

/// 17 significant digits; round-trips every double.
std::string format_double(double v);

}  // namespace tlqg
