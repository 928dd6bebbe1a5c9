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

#ifndef NNMPC_CORE_CONTROLLER_HPP_
#define NNMPC_CORE_CONTROLLER_HPP_

#include <limits>
#include <span>
#include <string>
#include <vector>

#include "core/cobyla.hpp"
#include "core/dynamics.hpp"
#include "core/network.hpp"
#include "core/types.hpp"

namespace nnmpc {

// Diagonal weights of the tracking cost.
struct CostWeights {
  Vec4 q1 = Vec4::Constant(10.0);  // position error
  Vec4 q2 = Vec4::Constant(0.5);   // velocity error
  Vec4 r = Vec4::Constant(0.1);    // command increments
  Vec4 p = Vec4::Constant(50.0);   // integral error
  int horizon = 7;
  double integral_step = 0.05;     // s

  CostWeights scaled(double factor) const;

  friend bool operator==(const CostWeights&, const CostWeights&) = default;
};

void validate(const CostWeights& w);

// A rule applies when the controller time lies in [t_min, t_max) and the
// largest absolute position error lies in [error_min, error_max).
struct WeightRule {
  double t_min = 0.0;
  double t_max = std::numeric_limits<double>::infinity();
  double error_min = 0.0;
  double error_max = std::numeric_limits<double>::infinity();
  CostWeights weights;
};

// First matching rule wins, otherwise `base`.
struct WeightSchedule {
  CostWeights base;
  std::vector<WeightRule> rules;

  const CostWeights& resolve(double time, double max_abs_error) const;
  WeightSchedule scaled(double factor) const;
};

void validate(const WeightSchedule& schedule);

struct Limits {
  Vec4 q_min = Vec4::Zero();
  Vec4 q_max = Vec4::Constant(3.5);
  Vec4 tau_min = Vec4::Constant(-6.0);
  Vec4 tau_max = Vec4::Constant(6.0);

  static Limits from(const DynamicsParams& params);
};

struct OptimizerConfig {
  double rho_begin = 0.1;
  double rho_end = 1e-3;
  int max_evaluations = 60;
};

struct ControllerConfig {
  WeightSchedule schedule;
  int blocking = 3;                  // distinct moves, the rest repeat the last
  double windup_limit = 2.0;         // |e| bound per joint (rad s)
  double integral_zone = 0.6;        // rad
  double integral_speed_zone = 0.2;  // rad/s
  bool integral_continuation = true;
  double control_period = 0.05;      // s
  OptimizerConfig optimizer;
};

void validate(const ControllerConfig& cfg);

struct ControllerState {
  Vec4 integral_error = Vec4::Zero();
  Vec4 u_prev = Vec4::Zero();
  std::vector<Vec4> plan;            // last solution, empty before the first step
  Vec4 r_q = Vec4::Zero();
  Vec4 r_qd = Vec4::Zero();
  double time = 0.0;
  int consecutive_failsafe = 0;
};

ControllerState initial_controller_state(const Vec4& r_q, const Vec4& u_prev,
                                         const Limits& limits);

// Throws Error(kBounds) and leaves `ctl` untouched when r_q leaves the box.
void set_reference(ControllerState& ctl, const Vec4& r_q, const Vec4& r_qd,
                   const Limits& limits, bool reset_integral = false);

double stage_cost(const JointState& predicted, const Vec4& r_q, const Vec4& r_qd,
                  const Vec4& u_k, const Vec4& u_prev, const CostWeights& w);

// Integral error after one period. A joint integrates only while its
// position error is inside `zone` and its speed inside `speed_zone`.
Vec4 integrate_error(const Vec4& e, const Vec4& r, const JointState& s, double dl,
                     double windup_limit, double zone, double speed_zone);

struct CostBreakdown {
  double integral = 0.0;  // current accumulated error
  double continuation = 0.0;
  double stages = 0.0;
  double total() const { return integral + continuation + stages; }
};

// Cost of a plan given already predicted states (one per move).
CostBreakdown plan_cost(const ControllerState& ctl,
                        std::span<const JointState> predicted,
                        std::span<const Vec4> u_seq, const CostWeights& w,
                        const ControllerConfig& cfg);

// Rolls the model out over u_seq and evaluates plan_cost. Returns +inf when
// the rollout diverges.
double horizon_cost(const DeltaModel& model, const ControllerState& ctl,
                    const JointState& state, std::span<const Vec4> u_seq,
                    const CostWeights& w, const ControllerConfig& cfg);

struct ControlDiagnostics {
  int evaluations = 0;
  Termination reason = Termination::kRadiusConverged;
  double objective_before = 0.0;
  double objective_after = 0.0;
  double max_violation = 0.0;
  bool failsafe = false;
  std::string message;
  double solve_ms = 0.0;
};

struct ControlOutput {
  Vec4 u = Vec4::Zero();
  ControllerState state;
  ControlDiagnostics diagnostics;
  std::vector<Vec4> plan;
  std::vector<JointState> predicted;
};

// One receding-horizon step: integral update, constrained solve, first move.
// Solver failures hold the previous command and set diagnostics.failsafe.
ControlOutput control_step(const DeltaModel& model, const ControllerState& ctl,
                           const JointState& measured, const ControllerConfig& cfg,
                           const Limits& limits);

}  // namespace nnmpc

#endif  // NNMPC_CORE_CONTROLLER_HPP_
