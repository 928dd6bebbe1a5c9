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

#ifndef NNMPC_CORE_CONFIG_HPP_
#define NNMPC_CORE_CONFIG_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "core/controller.hpp"
#include "core/dynamics.hpp"
#include "core/training.hpp"

namespace nnmpc {

// Episode plan for excitation data. Kinds are cycled over the episodes:
//   piecewise  uniform torques in the torque box, resampled every hold_period
//   multisine  sum of sines around the hold torque
//   targets    PD tracking of random setpoints plus uniform torque noise
struct ExcitationConfig {
  int episodes = 20;
  double duration = 30.0;  // s
  std::vector<std::string> kinds = {"targets", "piecewise", "targets", "multisine"};
  double hold_period = 0.25;
  double piecewise_fraction = 0.3;  // of the torque half-range
  bool piecewise_around_hold = false;  // offset by the static hold torque
  int sine_components = 4;
  double sine_max_frequency = 1.0;  // Hz
  double sine_fraction = 0.5;
  double target_period = 2.0;  // s between setpoints
  double target_kp = 8.0;
  double target_kd = 1.0;
  double target_noise = 1.0;  // N m
  double limit_margin = 0.2;  // rad, 0 disables the joint-limit guard
  double limit_kp = 20.0;
  double limit_kd = 2.0;
};

void validate(const ExcitationConfig& cfg);

struct MetricsConfig {
  double band = 0.02;            // fraction of the step size
  double band_floor = 0.01;      // rad
  double steady_fraction = 0.2;  // tail of the run for steady-state error
  double budget_ms = 50.0;       // solve time flag threshold
};

void validate(const MetricsConfig& cfg);

struct Config {
  DynamicsParams plant = default_dynamics_params();
  SimConfig sim;
  ControllerConfig controller;
  TrainingConfig training;
  ExcitationConfig excitation;
  MetricsConfig metrics;
};

void validate(const Config& cfg);

// Sections present in `json_text` replace the corresponding defaults key by
// key. Unknown keys and wrong types throw Error(kSchema) naming the key.
Config parse_config(const std::string& json_text);
// Same, merging onto `base` instead of the defaults.
Config parse_config(const std::string& json_text, const Config& base);
Config load_config(const std::filesystem::path& path);

// Complete, canonical form. Equal configs give equal text.
std::string dump_config(const Config& cfg);

}  // namespace nnmpc

#endif  // NNMPC_CORE_CONFIG_HPP_
