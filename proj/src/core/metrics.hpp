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

#ifndef NNMPC_CORE_METRICS_HPP_
#define NNMPC_CORE_METRICS_HPP_

#include <array>
#include <string>
#include <vector>

#include "core/config.hpp"
#include "core/controller.hpp"
#include "core/types.hpp"

namespace nnmpc {

// One control period: the true plant state at time t, the command
// held over [t, t + period) and the solve diagnostics that produced it.
struct TrajectoryRow {
  double t = 0.0;
  JointState state;
  Vec4 u = Vec4::Zero();
  Vec4 r = Vec4::Zero();
  double cost = 0.0;
  int evaluations = 0;
  std::string termination;
  double objective_before = 0.0;
  double objective_after = 0.0;
  bool failsafe = false;
  int clamp_events = 0;
};

struct Trajectory {
  std::vector<TrajectoryRow> rows;
  std::vector<double> solve_ms;  // per row when known, kept out of the CSV
};

// CSV with t,q1..q4,qd1..qd4,u1..u4,r1..r4,cost followed by the diagnostic
// columns, 9 significant digits.
std::string format_trajectory(const Trajectory& traj);

// Diagnostic columns are optional. Missing core columns throw Error(kSchema).
Trajectory parse_trajectory(const std::string& csv);

std::string format_timing(const Trajectory& traj);
void parse_timing(const std::string& csv, Trajectory& traj);

struct RunMetrics {
  std::array<double, kJoints> settling_time{};  // s, NaN when unsettled
  std::array<bool, kJoints> settled{};
  std::array<double, kJoints> overshoot{};      // % of the step
  std::array<double, kJoints> steady_state_error{};  // rad
  double duration = 0.0;
  int steps = 0;
  double mean_solve_ms = 0.0;  // NaN without timing
  double max_solve_ms = 0.0;
  int over_budget_steps = 0;
  int violation_count = 0;     // applied commands outside the torque box
  int failsafe_steps = 0;
  int clamp_events = 0;

  bool all_settled() const;
  double max_settling_time() const;
};

RunMetrics compute_metrics(const Trajectory& traj, const MetricsConfig& cfg,
                           const Limits& limits);

// key=value lines.
std::string format_metrics(const RunMetrics& m);
std::string metrics_csv_header();
std::string metrics_csv_row(const RunMetrics& m);

}  // namespace nnmpc

#endif  // NNMPC_CORE_METRICS_HPP_
