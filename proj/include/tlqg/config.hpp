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
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tlqg/lqr.hpp"
#include "tlqg/planner.hpp"

namespace tlqg {

inline constexpr int kSchemaVersion = 1;

struct ValidateParams {
  std::vector<double> epsilons = {0.05};
  int n_samples = 2000;
  // Skewness/kurtosis are only judged with at least this many samples.
  int gaussianity_min_samples = 5000;
  double max_abs_skewness = 0.15;
  double max_abs_excess_kurtosis = 0.3;
  double zero_mean_sigmas = 3.0;
};

struct SweepParams {
  std::vector<double> epsilons = {0.16, 0.08, 0.04, 0.02};
  int n_samples = 1000;
  double delta = 0.1;
  double slope_min = 1.6;
  double slope_max = 2.4;
};

struct ExperimentParams {
  std::uint64_t seed = 1;
  ValidateParams validate;
  SweepParams sweep;
};

struct ScenarioConfig {
  PlanProblem problem;
  CostWeights feedback;
  ExperimentParams experiment;
};

/// Every schema violation found in a config, one message per bad field.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> violations);
  const std::vector<std::string>& violations() const { return violations_; }

 private:
  std::vector<std::string> violations_;
};

ScenarioConfig parse_config(const std::filesystem::path& path);
ScenarioConfig parse_config_json(const nlohmann::json& doc);
nlohmann::json to_json(const ScenarioConfig& config);

}  // namespace tlqg
