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

// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.
//
//   acceptance <work dir>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "core/cobyla.hpp"
#include "core/config.hpp"
#include "core/controller.hpp"
#include "core/dataset.hpp"
#include "core/dynamics.hpp"
#include "core/error.hpp"
#include "core/harness.hpp"
#include "core/io.hpp"
#include "core/jobs.hpp"
#include "core/metrics.hpp"
#include "core/network.hpp"
#include "core/training.hpp"

namespace nnmpc {
namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string num(double v, int digits = 4) {
  std::ostringstream out;
  out.precision(digits);
  out << v;
  return out.str();
}

// Collects failed checks of one criterion.
class Checks {
 public:
  void expect(bool ok, const std::string& what) {
    if (!ok) failures_.push_back(what);
  }
  void note(const std::string& what) { notes_.push_back(what); }
  bool ok() const { return failures_.empty(); }

  std::string detail() const {
    std::string out;
    for (const std::string& n : notes_) out += (out.empty() ? "" : "; ") + n;
    for (const std::string& f : failures_) out += (out.empty() ? "FAILED " : "; FAILED ") + f;
    return out;
  }

 private:
  std::vector<std::string> notes_;
  std::vector<std::string> failures_;
};

int failed_criteria = 0;

void report(const char* name, const std::function<void(Checks&)>& body) {
  Checks checks;
  const auto start = Clock::now();
  try {
    body(checks);
  } catch (const std::exception& e) {
    checks.expect(false, std::string("exception: ") + e.what());
  }
  const double wall = seconds_since(start);
  if (!checks.ok()) ++failed_criteria;
  std::printf("%s %s (%.1f s) %s\n", checks.ok() ? "PASS" : "FAIL", name, wall,
              checks.detail().c_str());
  std::fflush(stdout);
}

// ------------------------------ dynamics ---------------------------------------

JointState random_state(std::mt19937_64& rng, const DynamicsParams& p) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> vel(-2.0, 2.0);
  JointState s;
  for (int i = 0; i < kJoints; ++i) {
    s.q(i) = p.q_min(i) + (p.q_max(i) - p.q_min(i)) * unit(rng);
    s.qd(i) = vel(rng);
  }
  return s;
}

// Joint 1 pitches and carries the only mass; a driven pendulum with drag.
DynamicsParams pendulum_params() {
  DynamicsParams p = default_dynamics_params();
  for (int i = 1; i < kJoints; ++i) {
    p.links[i].mass = 0.0;
    p.links[i].added_mass = 0.0;
    p.links[i].volume = 0.0;
    p.links[i].inertia.setZero();
  }
  LinkParams& l = p.links[0];
  l.axis = -Vec3::UnitY();
  l.mass = 0.8;
  l.added_mass = 0.3;
  l.volume = 2.0e-4;
  l.offset = Vec3(0.3, 0.0, 0.0);
  l.com = Vec3(0.14, 0.0, 0.0);
  l.cob = Vec3(0.16, 0.0, 0.0);
  l.inertia = Vec3(1e-4, 6e-3, 6e-3).asDiagonal();
  p.rotor_inertia = Vec4(0.02, 1.0, 1.0, 1.0);
  p.drag_linear = Vec4::Constant(0.3);
  p.drag_quadratic = Vec4::Constant(0.2);
  p.friction_viscous = Vec4::Constant(0.5);
  p.friction_coulomb = Vec4::Constant(0.05);
  p.q_min = Vec4::Constant(-100.0);
  p.q_max = Vec4::Constant(100.0);
  return p;
}

void dynamics_suite(Checks& c) {
  const DynamicsParams p = default_dynamics_params();
  std::mt19937_64 rng(1);

  double min_eig = std::numeric_limits<double>::infinity(), asym = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const Mat4 m = mass_matrix(random_state(rng, p).q, p);
    asym = std::max(asym, (m - m.transpose()).cwiseAbs().maxCoeff());
    min_eig = std::min(min_eig, Eigen::SelfAdjointEigenSolver<Mat4>(m).eigenvalues().minCoeff());
  }
  c.expect(min_eig > 0.0 && asym < 1e-12, "M(q) SPD");
  c.note("min eig(M)=" + num(min_eig));

  double worst_power = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const Vec4 qd = random_state(rng, p).qd;
    worst_power = std::min(worst_power, qd.dot(damping_torque(qd, p) + friction_torque(qd, p)));
  }
  c.expect(worst_power >= 0.0, "damping passivity");

  double skew = 0.0;
  for (int k = 0; k < 50; ++k) {
    const JointState s = random_state(rng, p);
    const double h = 1e-6;
    const Mat4 mdot =
        (mass_matrix(s.q + h * s.qd, p) - mass_matrix(s.q - h * s.qd, p)) / (2.0 * h);
    const Mat4 n = mdot - 2.0 * coriolis_matrix(s, p);
    skew = std::max(skew, (n + n.transpose()).cwiseAbs().maxCoeff());
  }
  c.expect(skew < 1e-6, "Mdot - 2C skew (" + num(skew) + ")");

  const DynamicsParams one = pendulum_params();
  const LinkParams& l = one.links[0];
  const double inertia = one.rotor_inertia(0) + (l.mass + l.added_mass) * l.com.squaredNorm() +
                         l.inertia(1, 1);
  const double moment = l.mass * l.com.x() - one.fluid_density * l.volume * l.cob.x();
  std::uniform_real_distribution<double> angle(-3.0, 3.0), speed(-4.0, 4.0), torque(-2.0, 2.0);
  double oracle = 0.0;
  for (int k = 0; k < 200; ++k) {
    JointState s;
    Vec4 tau;
    for (int i = 0; i < kJoints; ++i) {
      s.q(i) = angle(rng);
      s.qd(i) = speed(rng);
      tau(i) = torque(rng);
    }
    const double w = s.qd(0);
    const double resist = one.drag_linear(0) * w + one.drag_quadratic(0) * std::abs(w) * w +
                          one.friction_viscous(0) * w +
                          one.friction_coulomb(0) * std::tanh(w / one.coulomb_velocity);
    const double expected = (tau(0) - resist - one.gravity * moment * std::cos(s.q(0))) / inertia;
    oracle = std::max(oracle, std::abs(forward_dynamics(s, tau, one)(0) - expected));
  }
  c.expect(oracle < 1e-9, "1-link oracle (" + num(oracle) + ")");
  c.note("oracle err=" + num(oracle));

  DynamicsParams free = one;
  free.drag_linear.setZero();
  free.drag_quadratic.setZero();
  free.friction_viscous.setZero();
  free.friction_coulomb.setZero();
  SimConfig sim;
  sim.inner_step = 1e-3;
  JointState s{Vec4(0.3, 0.0, 0.0, 0.0), Vec4(1.5, 0.0, 0.0, 0.0)};
  const double e0 = mechanical_energy(s, free);
  double drift = 0.0;
  for (int k = 0; k < 200; ++k) {
    s = step(s, Vec4::Zero(), free, sim, k * sim.control_period);
    drift = std::max(drift, std::abs(mechanical_energy(s, free) - e0) / std::abs(e0));
  }
  c.expect(drift < 1e-3, "energy drift over 10 s (" + num(drift) + ")");
  c.note("energy drift=" + num(100.0 * drift) + "%");
}

// ------------------------------ training ---------------------------------------

struct TrainedModel {
  fs::path path;
  NetworkParams net;
  bool ok = false;
};

// Independent one-row episodes of delta = A x + B u.
Dataset linear_dataset(int rows, std::uint64_t seed) {
  std::mt19937_64 plant_rng(99);
  std::uniform_real_distribution<double> coef(-0.05, 0.05);
  Eigen::Matrix<double, 8, 12> ab;
  for (int r = 0; r < 8; ++r) {
    for (int k = 0; k < 12; ++k) ab(r, k) = coef(plant_rng);
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> pos(0.0, 3.5), vel(-1.0, 1.0), tau(-6.0, 6.0);
  Dataset data;
  for (int k = 0; k < rows; ++k) {
    Transition t;
    for (int i = 0; i < kJoints; ++i) {
      t.state.q(i) = pos(rng);
      t.state.qd(i) = vel(rng);
      t.u(i) = tau(rng);
    }
    const Eigen::Matrix<double, 8, 1> d = ab * network_input(t.state, t.u);
    const JointState next{t.state.q + d.head<4>(), t.state.qd + d.tail<4>()};
    t.delta = StateDelta{next.q - t.state.q, next.qd - t.state.qd};
    data.rows.push_back(t);
    data.episodes.push_back(EpisodeInfo{"linear", 1, next, 0});
  }
  return data;
}

void training_suite(Checks& c, const Config& cfg, const fs::path& work, TrainedModel& model) {
  // Gradient against central differences.
  const Dataset small = linear_dataset(10, 5);
  const Batch batch = make_batch(small);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> dist(-0.6, 0.6);
  NetworkParams net;
  std::vector<double> theta(NetworkParams::kParameterCount);
  for (double& t : theta) t = dist(rng);
  net.unflatten(theta);
  net.input_mean.head<4>().setConstant(1.75);
  net.input_scale.tail<4>().setConstant(3.5);
  net.output_scale.setConstant(0.4);
  std::vector<double> grad;
  loss_and_gradient(net, batch, &grad);
  double worst = 0.0;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    std::vector<double> plus = theta, minus = theta;
    plus[i] += 1e-6;
    minus[i] -= 1e-6;
    NetworkParams a = net, b = net;
    a.unflatten(plus);
    b.unflatten(minus);
    const double fd =
        (loss_and_gradient(a, batch, nullptr) - loss_and_gradient(b, batch, nullptr)) / 2e-6;
    worst = std::max(worst, std::abs(fd - grad[i]) /
                                std::max({std::abs(fd), std::abs(grad[i]), 1e-7}));
  }
  c.expect(worst < 1e-5, "gradient check (" + num(worst) + ")");
  c.note("grad rel err=" + num(worst));

  // Linear plant oracle.
  const TrainingResult lin = train(linear_dataset(3000, 6), TrainingConfig{});
  const PredictionError lin_err = prediction_error(lin.net, linear_dataset(1000, 7));
  const double lin_ratio = lin_err.mse.cwiseQuotient(lin_err.target_variance).maxCoeff();
  c.expect(lin_ratio < 0.01, "linear oracle (" + num(lin_ratio) + ")");
  c.note("linear mse/var=" + num(lin_ratio));

  // Default model on held-out excitation data.
  const auto start = Clock::now();
  collect_job(cfg, 1, work / "data");
  train_job(cfg, work / "data" / "data.csv", work / "model");
  const double train_wall = seconds_since(start);
  model.path = work / "model" / "model.json";
  model.net = load_model(model.path);
  const Dataset held_out = collect_data(cfg.excitation, cfg.plant, cfg.sim, 1001);
  const PredictionError err = prediction_error(model.net, held_out);
  const OutputVec ratio = err.mse.cwiseQuotient(err.target_variance);
  c.expect(ratio.maxCoeff() < 0.05, "default model held-out mse/var " + num(ratio.maxCoeff()));
  c.expect(train_wall < 300.0, "collect+train wall time");
  c.note("default held-out max mse/var=" + num(ratio.maxCoeff()) + " (" +
         std::to_string(held_out.rows.size()) + " rows), collect+train " + num(train_wall, 3) +
         " s");
  model.ok = true;
}

// ------------------------------ optimizer --------------------------------------

OptProblem quadratic_problem(double x_max) {
  OptProblem p;
  p.dimension = 2;
  p.objective = [](std::span<const double> x) {
    return (x[0] - 1.0) * (x[0] - 1.0) + (x[1] - 2.0) * (x[1] - 2.0);
  };
  p.num_constraints = 1;
  p.constraints = [x_max](std::span<const double> x, std::span<double> out) {
    out[0] = x_max - x[0];
  };
  p.x0 = {0.0, 0.0};
  p.rho_begin = 0.5;
  p.rho_end = 1e-6;
  p.max_evaluations = 2000;
  return p;
}

void optimizer_suite(Checks& c) {
  const OptResult free = minimize(quadratic_problem(1e9));
  const double e_free = std::max(std::abs(free.x[0] - 1.0), std::abs(free.x[1] - 2.0));
  c.expect(e_free < 1e-4, "quadratic (" + num(e_free) + ")");

  const OptResult kkt = minimize(quadratic_problem(0.5));
  const double e_kkt = std::max(std::abs(kkt.x[0] - 0.5), std::abs(kkt.x[1] - 2.0));
  c.expect(e_kkt < 1e-3 && kkt.max_violation <= kFeasibilityTolerance,
           "active constraint (" + num(e_kkt) + ")");

  auto toy = [](double u1, double u2) {
    const double x1 = 0.5 * std::tanh(u1);
    const double x2 = x1 + 0.5 * std::tanh(u2);
    return 4.0 * (0.6 - x1) * (0.6 - x1) + 4.0 * (0.6 - x2) * (0.6 - x2) + 0.3 * u1 * u1 +
           0.3 * (u2 - u1) * (u2 - u1);
  };
  double grid = std::numeric_limits<double>::infinity();
  for (int a = 0; a <= 2000; ++a) {
    for (int b = 0; b <= 2000; ++b) grid = std::min(grid, toy(-1.0 + a / 1000.0, -1.0 + b / 1000.0));
  }
  OptProblem p;
  p.dimension = 2;
  p.objective = [&](std::span<const double> u) { return toy(u[0], u[1]); };
  p.num_constraints = 4;
  p.constraints = [](std::span<const double> u, std::span<double> out) {
    out[0] = 1.0 - u[0];
    out[1] = 1.0 + u[0];
    out[2] = 1.0 - u[1];
    out[3] = 1.0 + u[1];
  };
  p.x0 = {0.0, 0.0};
  p.rho_begin = 0.5;
  p.rho_end = 1e-6;
  p.max_evaluations = 1000;
  const OptResult mpc = minimize(p);
  const double gap = mpc.objective - grid;
  c.expect(gap <= 1e-3 && mpc.max_violation <= kFeasibilityTolerance,
           "toy MPC gap (" + num(gap) + ")");
  c.note("toy MPC gap=" + num(gap));

  const OptResult again = minimize(quadratic_problem(0.5));
  c.expect(again.x == kkt.x && again.evaluations == kkt.evaluations, "determinism");
  for (int budget : {1, 5, 17}) {
    OptProblem q = quadratic_problem(0.5);
    int calls = 0;
    const ObjectiveFn f = q.objective;
    q.objective = [&](std::span<const double> x) {
      ++calls;
      return f(x);
    };
    q.max_evaluations = budget;
    const OptResult r = minimize(q);
    c.expect(calls == budget && r.evaluations == budget && r.reason == Termination::kEvalBudget,
             "budget " + std::to_string(budget));
    c.expect(r.objective <= r.initial_objective, "incumbent monotone");
  }
}

// ------------------------------ closed loop ------------------------------------

struct LoopStats {
  std::vector<double> solve_ms;
  int over_budget = 0;
  int steps = 0;
};

RunResult closed_loop(const Scenario& s, const TrainedModel& model, const Config& cfg,
                      LoopStats& stats) {
  const RunResult r = run_scenario(s, model.net, cfg);
  stats.solve_ms.insert(stats.solve_ms.end(), r.trajectory.solve_ms.begin(),
                        r.trajectory.solve_ms.end());
  stats.over_budget += r.metrics.over_budget_steps;
  stats.steps += r.metrics.steps;
  return r;
}

std::string settling(const RunMetrics& m) {
  std::string out = "settling=[";
  for (int i = 0; i < kJoints; ++i) {
    out += (i ? "," : "") + (m.settled[i] ? num(m.settling_time[i], 3) : std::string("unsettled"));
  }
  return out + "]";
}

void wrench(Checks& c, const TrainedModel& model, const Config& cfg, LoopStats& stats) {
  const auto start = Clock::now();
  const RunResult r = closed_loop(builtin_scenario("wrench"), model, cfg, stats);
  const double wall = seconds_since(start);
  c.expect(!r.aborted, "run aborted: " + r.message);
  c.expect(r.metrics.all_settled() && r.metrics.max_settling_time() <= 3.0, "settling <= 3 s");
  c.expect(r.metrics.violation_count == 0, "torque box violations");
  c.expect(wall < 60.0, "wall time");
  c.note(settling(r.metrics) + " violations=" + std::to_string(r.metrics.violation_count) +
         " wall=" + num(wall, 3) + " s");
}

void weights(Checks& c, const TrainedModel& model, const Config& cfg, LoopStats& stats) {
  const RunResult r = closed_loop(builtin_scenario("weights"), model, cfg, stats);
  c.expect(!r.aborted, "run aborted: " + r.message);
  const RunMetrics& m = r.metrics;
  c.expect(m.all_settled() && m.max_settling_time() <= 6.0, "settling <= 6 s");
  if (m.all_settled()) {
    const double slow = std::min(m.settling_time[1], m.settling_time[3]);
    const double fast = std::max(m.settling_time[0], m.settling_time[2]);
    c.expect(slow > fast, "joints 2 and 4 slowest");
  }
  c.note(settling(m));
}

void payloads(Checks& c, const TrainedModel& model, const Config& cfg, LoopStats& stats) {
  for (double mass : {0.0, 0.5, 1.0}) {
    Scenario s = builtin_scenario("nominal");
    s.duration = 10.0;
    s.payload.mass = mass;
    s.payload.volume = mass * 1.27e-4;
    s.payload.offset = Vec3(0.05, 0.0, 0.0);
    const RunResult r = closed_loop(s, model, cfg, stats);
    c.expect(!r.aborted && r.metrics.all_settled(), "payload " + num(mass) + " kg settles");
    c.note(num(mass) + " kg " + settling(r.metrics));
  }
}

void realtime(Checks& c, const LoopStats& stats, const Config& cfg) {
  c.expect(!stats.solve_ms.empty(), "no closed-loop steps recorded");
  if (stats.solve_ms.empty()) return;
  double sum = 0.0, peak = 0.0;
  for (double ms : stats.solve_ms) {
    sum += ms;
    peak = std::max(peak, ms);
  }
  const double mean = sum / static_cast<double>(stats.solve_ms.size());
  const double fraction = static_cast<double>(stats.over_budget) / stats.steps;
  c.expect(mean < cfg.metrics.budget_ms, "mean solve time");
  c.expect(fraction < 0.05, "over-budget fraction");
  c.note("steps=" + std::to_string(stats.steps) + " mean=" + num(mean, 3) + " ms max=" +
         num(peak, 3) + " ms over_budget=" + std::to_string(stats.over_budget));
}

void argmin_invariance(Checks& c, const TrainedModel& model, const Config& cfg) {
  const Limits limits = Limits::from(cfg.plant);
  const DeltaModel g = as_delta_model(model.net);
  const Scenario s = builtin_scenario("weights");
  double worst = 0.0;
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> pos(0.3, 3.2), vel(-0.5, 0.5);
  for (int trial = 0; trial < 20; ++trial) {
    JointState x;
    for (int i = 0; i < kJoints; ++i) {
      x.q(i) = pos(rng);
      x.qd(i) = vel(rng);
    }
    ControllerState ctl = initial_controller_state(s.reference, Vec4::Zero(), limits);
    ctl.integral_error = Vec4::Constant(0.01 * trial);
    const ControlOutput base = control_step(g, ctl, x, cfg.controller, limits);
    for (double factor : {0.1, 0.5, 2.0, 10.0}) {
      ControllerConfig scaled = cfg.controller;
      scaled.schedule = cfg.controller.schedule.scaled(factor);
      const ControlOutput other = control_step(g, ctl, x, scaled, limits);
      worst = std::max(worst, (other.u - base.u).cwiseAbs().maxCoeff());
    }
  }
  c.expect(worst < 1e-6, "max |du| " + num(worst));
  c.note("max |du|=" + num(worst) + " over 20 states x 4 factors");
}

void determinism(Checks& c, const TrainedModel& model, const Config& cfg, const fs::path& work) {
  Scenario s = builtin_scenario("wrench");
  s.duration = 4.0;
  run_job(cfg, s, model.path, work / "det" / "run");
  const fs::path manifest = work / "det" / "run" / "run.manifest.json";
  replay_job(manifest, work / "det" / "replay1");
  replay_job(manifest, work / "det" / "replay2");
  const std::string a = read_text_file(work / "det" / "replay1" / "trajectory.csv");
  const std::string b = read_text_file(work / "det" / "replay2" / "trajectory.csv");
  const std::string orig = read_text_file(work / "det" / "run" / "trajectory.csv");
  c.expect(a == b, "replays differ");
  c.expect(a == orig, "replay differs from the recorded run");
  c.note(std::to_string(a.size()) + " bytes identical");
}

int run(const fs::path& work) {
  fs::remove_all(work);
  fs::create_directories(work);
  const Config cfg;
  TrainedModel model;
  LoopStats stats;

  report("dynamics-invariants", dynamics_suite);
  report("nn-training", [&](Checks& c) { training_suite(c, cfg, work, model); });
  report("optimizer", optimizer_suite);
  auto needs_model = [&](Checks& c) {
    c.expect(model.ok, "no trained model");
    return model.ok;
  };
  report("closed-loop-wrench", [&](Checks& c) {
    if (needs_model(c)) wrench(c, model, cfg, stats);
  });
  report("closed-loop-weights", [&](Checks& c) {
    if (needs_model(c)) weights(c, model, cfg, stats);
  });
  report("payload-robustness", [&](Checks& c) {
    if (needs_model(c)) payloads(c, model, cfg, stats);
  });
  report("real-time", [&](Checks& c) { realtime(c, stats, cfg); });
  report("argmin-invariance", [&](Checks& c) {
    if (needs_model(c)) argmin_invariance(c, model, cfg);
  });
  report("end-to-end-determinism", [&](Checks& c) {
    if (needs_model(c)) determinism(c, model, cfg, work);
  });
  std::printf("%d criteria failed\n", failed_criteria);
  return failed_criteria == 0 ? 0 : 1;
}

}  // namespace
}  // namespace nnmpc

int main(int argc, char** argv) {
  if (argc != 2) {
    std::fprintf(stderr, "usage: acceptance <work dir>\n");
    return 2;
  }
  return nnmpc::run(argv[1]);
}
