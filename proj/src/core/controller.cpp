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

#include "core/controller.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "core/error.hpp"

namespace nnmpc {
namespace {

bool all_nonneg(const Vec4& v) { return v.allFinite() && (v.array() >= 0.0).all(); }

double weighted_sq(const Vec4& v, const Vec4& w) { return (w.array() * v.array().square()).sum(); }

struct Blocking {
  int horizon;
  int moves;
  Vec4 mid;
  Vec4 half;

  std::vector<Vec4> expand(std::span<const double> z) const {
    std::vector<Vec4> u(horizon);
    for (int k = 0; k < horizon; ++k) {
      const int j = std::min(k, moves - 1);
      for (int i = 0; i < kJoints; ++i) u[k](i) = mid(i) + half(i) * z[j * kJoints + i];
    }
    return u;
  }

  std::vector<double> encode(const std::vector<Vec4>& u) const {
    std::vector<double> z(moves * kJoints);
    for (int j = 0; j < moves; ++j) {
      for (int i = 0; i < kJoints; ++i) {
        const double v = (u[j](i) - mid(i)) / half(i);
        z[j * kJoints + i] = std::clamp(v, -1.0, 1.0);
      }
    }
    return z;
  }
};

}  // namespace

CostWeights CostWeights::scaled(double factor) const {
  CostWeights w = *this;
  w.q1 *= factor;
  w.q2 *= factor;
  w.r *= factor;
  w.p *= factor;
  return w;
}

void validate(const CostWeights& w) {
  if (!(w.q1.allFinite() && (w.q1.array() > 0.0).all())) {
    throw Error(ErrorCode::kInvalidArgument, "weights: q1 entries must be positive");
  }
  if (!(w.q2.allFinite() && (w.q2.array() > 0.0).all())) {
    throw Error(ErrorCode::kInvalidArgument, "weights: q2 entries must be positive");
  }
  if (!all_nonneg(w.r)) {
    throw Error(ErrorCode::kInvalidArgument, "weights: r entries must be non-negative");
  }
  if (!all_nonneg(w.p)) {
    throw Error(ErrorCode::kInvalidArgument, "weights: p entries must be non-negative");
  }
  if (w.horizon < 1) throw Error(ErrorCode::kInvalidArgument, "weights: horizon must be >= 1");
  if (!(w.integral_step > 0.0 && std::isfinite(w.integral_step))) {
    throw Error(ErrorCode::kInvalidArgument, "weights: integral_step must be positive");
  }
}

const CostWeights& WeightSchedule::resolve(double time, double max_abs_error) const {
  for (const WeightRule& rule : rules) {
    if (time >= rule.t_min && time < rule.t_max && max_abs_error >= rule.error_min &&
        max_abs_error < rule.error_max) {
      return rule.weights;
    }
  }
  return base;
}

WeightSchedule WeightSchedule::scaled(double factor) const {
  WeightSchedule s = *this;
  s.base = base.scaled(factor);
  for (WeightRule& rule : s.rules) rule.weights = rule.weights.scaled(factor);
  return s;
}

void validate(const WeightSchedule& schedule) {
  validate(schedule.base);
  for (const WeightRule& rule : schedule.rules) {
    validate(rule.weights);
    if (rule.weights.horizon != schedule.base.horizon) {
      throw Error(ErrorCode::kInvalidArgument, "schedule: every rule must share the base horizon");
    }
    if (!(rule.t_min <= rule.t_max) || !(rule.error_min <= rule.error_max)) {
      throw Error(ErrorCode::kInvalidArgument, "schedule: empty rule interval");
    }
  }
}

Limits Limits::from(const DynamicsParams& params) {
  return Limits{params.q_min, params.q_max, params.tau_min, params.tau_max};
}

void validate(const ControllerConfig& cfg) {
  validate(cfg.schedule);
  if (cfg.blocking < 1) throw Error(ErrorCode::kInvalidArgument, "controller: blocking must be >= 1");
  if (!(cfg.windup_limit > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "controller: windup_limit must be positive");
  }
  if (!(cfg.integral_zone > 0.0) || !(cfg.integral_speed_zone > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "controller: integral zones must be positive");
  }
  if (!(cfg.control_period > 0.0 && std::isfinite(cfg.control_period))) {
    throw Error(ErrorCode::kInvalidArgument, "controller: control_period must be positive");
  }
  const OptimizerConfig& o = cfg.optimizer;
  if (!(o.rho_begin > o.rho_end && o.rho_end > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "optimizer: need rho_begin > rho_end > 0");
  }
  if (o.max_evaluations < 1) {
    throw Error(ErrorCode::kInvalidArgument, "optimizer: max_evaluations must be >= 1");
  }
}

ControllerState initial_controller_state(const Vec4& r_q, const Vec4& u_prev,
                                         const Limits& limits) {
  ControllerState ctl;
  ctl.u_prev = u_prev.cwiseMax(limits.tau_min).cwiseMin(limits.tau_max);
  set_reference(ctl, r_q, Vec4::Zero(), limits);
  return ctl;
}

void set_reference(ControllerState& ctl, const Vec4& r_q, const Vec4& r_qd,
                   const Limits& limits, bool reset_integral) {
  if (!r_q.allFinite() || !r_qd.allFinite()) {
    throw Error(ErrorCode::kBounds, "set_reference: reference is not finite");
  }
  for (int i = 0; i < kJoints; ++i) {
    if (r_q(i) < limits.q_min(i) || r_q(i) > limits.q_max(i)) {
      throw Error(ErrorCode::kBounds,
                  "set_reference: joint " + std::to_string(i + 1) + " reference outside the joint box");
    }
  }
  ctl.r_q = r_q;
  ctl.r_qd = r_qd;
  if (reset_integral) ctl.integral_error.setZero();
}

double stage_cost(const JointState& predicted, const Vec4& r_q, const Vec4& r_qd,
                  const Vec4& u_k, const Vec4& u_prev, const CostWeights& w) {
  return weighted_sq(r_q - predicted.q, w.q1) + weighted_sq(r_qd - predicted.qd, w.q2) +
         weighted_sq(u_k - u_prev, w.r);
}

Vec4 integrate_error(const Vec4& e, const Vec4& r, const JointState& s, double dl,
                     double windup_limit, double zone, double speed_zone) {
  Vec4 out = e;
  for (int i = 0; i < kJoints; ++i) {
    const double err = r(i) - s.q(i);
    if (std::abs(err) < zone && std::abs(s.qd(i)) < speed_zone) out(i) += err * dl;
    out(i) = std::clamp(out(i), -windup_limit, windup_limit);
  }
  return out;
}

CostBreakdown plan_cost(const ControllerState& ctl,
                        std::span<const JointState> predicted,
                        std::span<const Vec4> u_seq, const CostWeights& w,
                        const ControllerConfig& cfg) {
  if (predicted.size() != u_seq.size()) {
    throw Error(ErrorCode::kInvalidArgument, "plan_cost: one predicted state per move");
  }
  CostBreakdown c;
  c.integral = weighted_sq(ctl.integral_error, w.p);
  Vec4 e = ctl.integral_error;
  Vec4 before = ctl.u_prev;
  for (std::size_t k = 0; k < u_seq.size(); ++k) {
    c.stages += stage_cost(predicted[k], ctl.r_q, ctl.r_qd, u_seq[k], before, w);
    before = u_seq[k];
    if (cfg.integral_continuation) {
      e = integrate_error(e, ctl.r_q, predicted[k], w.integral_step, cfg.windup_limit,
                          cfg.integral_zone, std::numeric_limits<double>::infinity());
      c.continuation += weighted_sq(e, w.p);
    }
  }
  return c;
}

double horizon_cost(const DeltaModel& model, const ControllerState& ctl,
                    const JointState& state, std::span<const Vec4> u_seq,
                    const CostWeights& w, const ControllerConfig& cfg) {
  if (static_cast<int>(u_seq.size()) != w.horizon) {
    throw Error(ErrorCode::kInvalidArgument, "horizon_cost: u_seq length must equal the horizon");
  }
  std::vector<JointState> predicted;
  try {
    predicted = rollout(model, state, u_seq);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kRolloutDiverged || e.code() == ErrorCode::kInputDomain) {
      return std::numeric_limits<double>::infinity();
    }
    throw;
  }
  const double total = plan_cost(ctl, predicted, u_seq, w, cfg).total();
  return std::isfinite(total) ? total : std::numeric_limits<double>::infinity();
}

ControlOutput control_step(const DeltaModel& model, const ControllerState& ctl,
                           const JointState& measured, const ControllerConfig& cfg,
                           const Limits& limits) {
  if (!measured.finite()) {
    throw Error(ErrorCode::kInputDomain, "control_step: measured state is not finite");
  }
  const Vec4 err = ctl.r_q - measured.q;
  const CostWeights& w = cfg.schedule.resolve(ctl.time, err.cwiseAbs().maxCoeff());
  const int horizon = w.horizon;

  ControlOutput out;
  out.state = ctl;
  ControllerState& next = out.state;
  next.integral_error =
      integrate_error(ctl.integral_error, ctl.r_q, measured, w.integral_step, cfg.windup_limit,
                      cfg.integral_zone, cfg.integral_speed_zone);

  Blocking block{horizon, std::min(cfg.blocking, horizon),
                 0.5 * (limits.tau_max + limits.tau_min),
                 0.5 * (limits.tau_max - limits.tau_min)};

  std::vector<Vec4> warm(horizon, ctl.u_prev);
  if (!ctl.plan.empty()) {
    for (int k = 0; k < horizon; ++k) {
      const std::size_t src = std::min<std::size_t>(k + 1, ctl.plan.size() - 1);
      warm[k] = ctl.plan[src];
    }
  }

  // The objective and the constraints see the same points, so one rollout
  // serves both.
  std::vector<double> cached_z;
  std::vector<JointState> cached_pred;
  bool cached_ok = false;
  auto predict = [&](std::span<const double> z) -> const std::vector<JointState>* {
    if (cached_z.size() == z.size() && std::equal(z.begin(), z.end(), cached_z.begin())) {
      return cached_ok ? &cached_pred : nullptr;
    }
    cached_z.assign(z.begin(), z.end());
    const std::vector<Vec4> u = block.expand(z);
    try {
      cached_pred = rollout(model, measured, u);
      cached_ok = true;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kRolloutDiverged && e.code() != ErrorCode::kInputDomain) throw;
      cached_ok = false;
    }
    return cached_ok ? &cached_pred : nullptr;
  };

  OptProblem problem;
  problem.dimension = block.moves * kJoints;
  problem.x0 = block.encode(warm);
  problem.rho_begin = cfg.optimizer.rho_begin;
  problem.rho_end = cfg.optimizer.rho_end;
  problem.max_evaluations = cfg.optimizer.max_evaluations;
  problem.objective = [&](std::span<const double> z) {
    const std::vector<JointState>* pred = predict(z);
    if (pred == nullptr) return std::numeric_limits<double>::infinity();
    const std::vector<Vec4> u = block.expand(z);
    return plan_cost(next, *pred, u, w, cfg).total();
  };
  problem.num_constraints = 2 * problem.dimension + 2 * kJoints * horizon;
  problem.constraints = [&](std::span<const double> z, std::span<double> c) {
    std::size_t row = 0;
    for (double zi : z) {
      c[row++] = 1.0 - zi;
      c[row++] = 1.0 + zi;
    }
    const std::vector<JointState>* pred = predict(z);
    for (int k = 0; k < horizon; ++k) {
      for (int i = 0; i < kJoints; ++i) {
        if (pred == nullptr) {
          c[row++] = std::numeric_limits<double>::quiet_NaN();
          c[row++] = std::numeric_limits<double>::quiet_NaN();
        } else {
          c[row++] = (*pred)[k].q(i) - limits.q_min(i);
          c[row++] = limits.q_max(i) - (*pred)[k].q(i);
        }
      }
    }
  };

  const auto start = std::chrono::steady_clock::now();
  bool failed = false;
  try {
    const OptResult res = minimize(problem);
    out.diagnostics.evaluations = res.evaluations;
    out.diagnostics.reason = res.reason;
    out.diagnostics.objective_before = res.initial_objective;
    out.diagnostics.objective_after = res.objective;
    out.diagnostics.max_violation = res.max_violation;
    out.plan = block.expand(res.x);
    const std::vector<JointState>* pred = predict(res.x);
    if (pred != nullptr) out.predicted = *pred;
    if (!std::isfinite(res.objective) || !out.plan.front().allFinite()) {
      failed = true;
      out.diagnostics.message = "solver returned a non-finite plan";
    }
  } catch (const Error& e) {
    failed = true;
    out.diagnostics.message = e.what();
  }
  out.diagnostics.solve_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();

  if (failed) {
    out.diagnostics.failsafe = true;
    out.u = ctl.u_prev;
    out.plan = warm;
    out.predicted.clear();
    next.consecutive_failsafe = ctl.consecutive_failsafe + 1;
  } else {
    out.u = out.plan.front();
    next.consecutive_failsafe = 0;
  }
  out.u = out.u.cwiseMax(limits.tau_min).cwiseMin(limits.tau_max);
  next.u_prev = out.u;
  next.plan = out.plan;
  next.time = ctl.time + cfg.control_period;
  return out;
}

}  // namespace nnmpc
