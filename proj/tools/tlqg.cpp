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

#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <utility>

#include <CLI11.hpp>

#include "tlqg/commands.hpp"
#include "tlqg/config.hpp"
#include "tlqg/parallel.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Belief-space planning with trajectory-optimized LQG"};
  app.require_subcommand(1, 1);

  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<double> epsilon;
  std::optional<int> samples;

  const std::pair<const char*, const char*> commands[] = {
      {"plan", "Optimize the nominal trajectory; writes plan.csv, plan.svg, report.json"},
      {"simulate", "Run one closed-loop rollout of <out>/plan.csv; writes exec.csv, estimate.csv, exec.svg"},
      {"validate", "First-order cost error statistics; writes theorem3.csv, theorem3.json"},
      {"sweep", "Exit probability and cost gap over the epsilon grid; writes sweep.csv, sweep.svg, sweep.json"},
  };
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "Scenario JSON file")->required();
    sub->add_option("--out", out_dir, "Output directory")->required();
    sub->add_option("--seed", seed, "Master random seed");
    sub->add_option("--epsilon", epsilon, "Noise scale override")->check(CLI::NonNegativeNumber);
    sub->add_option("--samples", samples, "Monte Carlo sample count");
  }

  CLI11_PARSE(app, argc, argv);
  const std::string command = app.get_subcommands().front()->get_name();

  tlqg::CommandOptions options;
  options.out_dir = out_dir;
  options.seed = seed;
  options.epsilon = epsilon;
  options.samples = samples;
  options.threads = tlqg::default_thread_count();
  options.log = &std::cerr;

  try {
    const tlqg::ScenarioConfig config = tlqg::parse_config(config_path);
    if (command == "plan") return tlqg::cmd_plan(config, options);
    if (command == "simulate") return tlqg::cmd_simulate(config, options);
    if (command == "validate") return tlqg::cmd_validate(config, options);
    return tlqg::cmd_sweep(config, options);
  } catch (const tlqg::ConfigError& e) {
    std::cerr << e.what() << '\n';
    return tlqg::kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "tlqg " << command << ": " << e.what() << '\n';
    return tlqg::kExitAborted;
  }
}
