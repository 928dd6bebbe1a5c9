// Copyright 2026 The NNMPC Authors
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

#ifndef NNMPC_CORE_HARNESS_HPP_
#define NNMPC_CORE_HARNESS_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "core/config.hpp"
#include "core/dataset.hpp"
#include "core/metrics.hpp"
#include "core/network.hpp"

namespace nnmpc {

// Runs the excitation episodes on the plant and logs clean transitions.
// Episodes whose integration fails are dropped and counted.
Dataset collect_data(const ExcitationConfig& plan, const DynamicsParams& plant,
                     const SimConfig& sim, std::uint64_t seed);

struct Scenario {
  std::string name;
  PayloadSpec payload;
  JointState initial;
  Vec4 reference = Vec4::Zero();
  Vec4 reference_qd = Vec4::Zero();
  double duration = 10.0;  // s
  std::uint64_t seed = 1;
  // Config JSON merged over the run config, same keys as a config file.
  std::string overrides;
};

void validate(const Scenario& s, const Limits& limits);

// Scenario file (JSON): name, payload {mass, volume, offset, label}, initial
// {q, qd}, reference, reference_qd, duration, seed, overrides. Missing keys
// keep the defaults above.
Scenario parse_scenario(const std::string& json_text);
Scenario load_scenario(const std::filesystem::path& path);
std::string dump_scenario(const Scenario& s);

// Built-in name or path to a scenario file.
Scenario resolve_scenario(const std::string& name_or_path);

// The run config with the scenario overrides applied.
Config scenario_config(const Scenario& s, const Config& base);

// wrench, weights, weights_caption, nominal, hold.
std::vector<std::string> builtin_scenario_names();
Scenario builtin_scenario(const std::string& name);

struct RunResult {
  Trajectory trajectory;
  RunMetrics metrics;
  bool aborted = false;
  std::string message;
};

// Closed loop at the control period: sensed_state -> control_step -> step.
// More than 10 consecutive fail-safe steps abort the run.
RunResult run_scenario(const Scenario& scenario, const DeltaModel& model,
                       const Config& cfg);
RunResult run_scenario(const Scenario& scenario, const NetworkParams& net,
                       const Config& cfg);

inline constexpr int kMaxConsecutiveFailsafe = 10;

}  // namespace nnmpc

#endif  // NNMPC_CORE_HARNESS_HPP_
