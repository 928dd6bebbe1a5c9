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

#include "core/harness.hpp"

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <random>

#include "core/error.hpp"
#include "core/io.hpp"
#include <nlohmann/json.hpp>

namespace nnmpc {
namespace {

using json = nlohmann::ordered_json;

[[noreturn]] void bad_scenario(const std::string& where, const std::string& what) {
  throw Error(ErrorCode::kSchema, "scenario: " + where + ": " + what);
}

void check_keys(const json& obj, const std::string& where,
                std::initializer_list<const char*> keys) {
  if (!obj.is_object()) bad_scenario(where, "expected an object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (std::find_if(keys.begin(), keys.end(), [&](const char* k) { return it.key() == k; }) ==
        keys.end()) {
      bad_scenario(where + "." + it.key(), "unknown key");
    }
  }
}

double number_at(const json& obj, const char* key, const std::string& where, double fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number()) bad_scenario(where + "." + key, "expected a number");
  return v.get<double>();
}

template <int N>
Eigen::Matrix<double, N, 1> vector_at(const json& obj, const char* key, const std::string& where,
                                      const Eigen::Matrix<double, N, 1>& fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  Eigen::Matrix<double, N, 1> out;
  if (v.is_number()) return out.setConstant(v.get<double>());
  if (!v.is_array() || v.size() != N) {
    bad_scenario(where + "." + key, "expected " + std::to_string(N) + " numbers");
  }
  for (int i = 0; i < N; ++i) {
    if (!v[i].is_number()) bad_scenario(where + "." + key, "expected a number");
    out(i) = v[i].get<double>();
  }
  return out;
}

template <int N>
json array_of(const Eigen::Matrix<double, N, 1>& v) {
  json a = json::array();
  for (int i = 0; i < N; ++i) a.push_back(v(i));
  return a;
}

constexpr double kTwoPi = 6.28318530717958647692;

std::uint64_t mix(std::uint64_t seed, std::uint64_t k) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (k + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

class Excitation {
 public:
  Excitation(const std::string& kind, const ExcitationConfig& plan, const DynamicsParams& plant,
             std::mt19937_64& rng)
      : kind_(kind), plan_(plan), plant_(plant), rng_(rng) {
    mid_ = 0.5 * (plant.tau_max + plant.tau_min);
    half_ = 0.5 * (plant.tau_max - plant.tau_min);
    if (kind_ == "multisine") {
      std::uniform_real_distribution<double> freq(0.05, plan.sine_max_frequency);
      std::uniform_real_distribution<double> phase(0.0, kTwoPi);
      for (int i = 0; i < kJoints; ++i) {
        for (int c = 0; c < plan.sine_components; ++c) {
          sines_.push_back({i, freq(rng_), phase(rng_)});
        }
      }
    }
  }

  Vec4 torque(const JointState& s, double t) {
    Vec4 u = Vec4::Zero();
    if (kind_ == "piecewise") {
      if (t >= next_change_) {
        std::uniform_real_distribution<double> unit(-1.0, 1.0);
        for (int i = 0; i < kJoints; ++i) held_(i) = mid_(i) + plan_.piecewise_fraction * half_(i) * unit(rng_);
        next_change_ += plan_.hold_period;
      }
      u = held_;
      if (plan_.piecewise_around_hold) u += restoring_torque(s.q, plant_);
    } else if (kind_ == "multisine") {
      u = restoring_torque(s.q, plant_);
      const double amp = plan_.sine_fraction / plan_.sine_components;
      for (const Sine& w : sines_) u(w.joint) += amp * half_(w.joint) * std::sin(kTwoPi * w.freq * t + w.phase);
    } else {
      if (t >= next_change_) {
        const Vec4 range = plant_.q_max - plant_.q_min;
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        for (int i = 0; i < kJoints; ++i) target_(i) = plant_.q_min(i) + range(i) * (0.1 + 0.8 * unit(rng_));
        next_change_ += plan_.target_period;
      }
      std::uniform_real_distribution<double> noise(-plan_.target_noise, plan_.target_noise);
      u = plan_.target_kp * (target_ - s.q) - plan_.target_kd * s.qd + restoring_torque(s.q, plant_);
      for (int i = 0; i < kJoints; ++i) u(i) += noise(rng_);
    }
    guard(s, u);
    return u.cwiseMax(plant_.tau_min).cwiseMin(plant_.tau_max);
  }

 private:
  // Inside the margin next to a joint limit, a PD law pushes the joint back.
  void guard(const JointState& s, Vec4& u) const {
    if (plan_.limit_margin <= 0.0) return;
    const Vec4 hold = restoring_torque(s.q, plant_);
    for (int i = 0; i < kJoints; ++i) {
      const double low = plant_.q_min(i) + plan_.limit_margin;
      const double high = plant_.q_max(i) - plan_.limit_margin;
      double target;
      if (s.q(i) < low) {
        target = low;
      } else if (s.q(i) > high) {
        target = high;
      } else {
        continue;
      }
      u(i) = hold(i) + plan_.limit_kp * (target - s.q(i)) - plan_.limit_kd * s.qd(i);
    }
  }

  struct Sine {
    int joint;
    double freq;
    double phase;
  };

  std::string kind_;
  const ExcitationConfig& plan_;
  const DynamicsParams& plant_;
  std::mt19937_64& rng_;
  Vec4 mid_;
  Vec4 half_;
  Vec4 held_ = Vec4::Zero();
  Vec4 target_ = Vec4::Zero();
  double next_change_ = 0.0;
  std::vector<Sine> sines_;
};

Scenario make(const std::string& name, double mass, double volume, double x,
              const Vec4& reference, double duration) {
  Scenario s;
  s.name = name;
  s.payload.mass = mass;
  s.payload.volume = volume;
  s.payload.offset = Vec3(x, 0.0, 0.0);
  s.payload.label = name;
  s.initial.q = Vec4::Constant(0.5);
  s.initial.qd = Vec4::Zero();
  s.reference = reference;
  s.duration = duration;
  return s;
}

}  // namespace

Dataset collect_data(const ExcitationConfig& plan, const DynamicsParams& plant,
                     const SimConfig& sim, std::uint64_t seed) {
  validate(plan);
  validate(plant);
  validate(sim);
  Dataset data;
  data.sample_period = sim.control_period;
  data.scenario = "excitation";
  data.seed = seed;
  const int samples = static_cast<int>(std::llround(plan.duration / sim.control_period));
  for (int e = 0; e < plan.episodes; ++e) {
    std::mt19937_64 rng(mix(seed, static_cast<std::uint64_t>(e)));
    const std::string& kind = plan.kinds[e % plan.kinds.size()];
    JointState s;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int i = 0; i < kJoints; ++i) {
      s.q(i) = plant.q_min(i) + (plant.q_max(i) - plant.q_min(i)) * (0.1 + 0.8 * unit(rng));
    }
    Excitation policy(kind, plan, plant, rng);
    std::vector<Transition> rows;
    StepLog log;
    bool ok = true;
    try {
      for (int k = 0; k + 1 < samples; ++k) {
        const double t = k * sim.control_period;
        const Vec4 u = policy.torque(s, t);
        const JointState next = step(s, u, plant, sim, t, &log);
        rows.push_back(Transition{s, u, StateDelta{next.q - s.q, next.qd - s.qd}});
        s = next;
      }
    } catch (const Error& err) {
      if (err.code() != ErrorCode::kIntegrationDiverged &&
          err.code() != ErrorCode::kSingularDynamics) {
        throw;
      }
      ok = false;
    }
    if (!ok) {
      ++data.discarded_episodes;
      continue;
    }
    data.episodes.push_back(EpisodeInfo{kind, static_cast<int>(rows.size()), s, log.clamp_events});
    data.rows.insert(data.rows.end(), rows.begin(), rows.end());
  }
  validate(data);
  return data;
}

void validate(const Scenario& s, const Limits& limits) {
  if (!(s.duration > 0.0 && std::isfinite(s.duration))) {
    throw Error(ErrorCode::kInvalidArgument, "scenario " + s.name + ": duration must be positive");
  }
  if (!s.initial.finite()) {
    throw Error(ErrorCode::kInvalidArgument, "scenario " + s.name + ": initial state is not finite");
  }
  for (int i = 0; i < kJoints; ++i) {
    if (!(s.reference(i) >= limits.q_min(i) && s.reference(i) <= limits.q_max(i))) {
      throw Error(ErrorCode::kBounds, "scenario " + s.name + ": reference outside the joint box");
    }
  }
}

std::vector<std::string> builtin_scenario_names() {
  return {"wrench", "weights", "weights_caption", "nominal", "hold"};
}

Scenario builtin_scenario(const std::string& name) {
  const Vec4 caption(1.7, 1.8, 1.6, 1.6);
  if (name == "wrench") return make(name, 0.5, 6.37e-5, 0.06, caption, 8.0);
  if (name == "weights") return make(name, 1.0, 1.27e-4, 0.05, Vec4(2.5, 2.0, 1.6, 2.2), 10.0);
  if (name == "weights_caption") return make(name, 1.0, 1.27e-4, 0.05, caption, 10.0);
  if (name == "nominal") return make(name, 0.0, 0.0, 0.0, caption, 8.0);
  if (name == "hold") return make(name, 0.0, 0.0, 0.0, Vec4::Constant(0.5), 5.0);
  throw Error(ErrorCode::kInvalidArgument, "unknown scenario \"" + name + "\"");
}

Scenario parse_scenario(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kSchema, std::string("scenario: not valid JSON: ") + e.what());
  }
  check_keys(root, "scenario",
             {"name", "payload", "initial", "reference", "reference_qd", "duration", "seed",
              "overrides"});
  Scenario s;
  if (root.contains("name")) {
    if (!root["name"].is_string()) bad_scenario("scenario.name", "expected a string");
    s.name = root["name"].get<std::string>();
  }
  if (root.contains("payload")) {
    const json& p = root["payload"];
    check_keys(p, "scenario.payload", {"mass", "volume", "offset", "label"});
    s.payload.mass = number_at(p, "mass", "scenario.payload", 0.0);
    s.payload.volume = number_at(p, "volume", "scenario.payload", 0.0);
    s.payload.offset = vector_at<3>(p, "offset", "scenario.payload", Vec3::Zero());
    if (p.contains("label")) {
      if (!p["label"].is_string()) bad_scenario("scenario.payload.label", "expected a string");
      s.payload.label = p["label"].get<std::string>();
    }
  }
  if (root.contains("initial")) {
    const json& i = root["initial"];
    check_keys(i, "scenario.initial", {"q", "qd"});
    s.initial.q = vector_at<4>(i, "q", "scenario.initial", Vec4::Zero());
    s.initial.qd = vector_at<4>(i, "qd", "scenario.initial", Vec4::Zero());
  }
  s.reference = vector_at<4>(root, "reference", "scenario", s.reference);
  s.reference_qd = vector_at<4>(root, "reference_qd", "scenario", s.reference_qd);
  s.duration = number_at(root, "duration", "scenario", s.duration);
  if (root.contains("seed")) {
    if (!root["seed"].is_number_unsigned()) bad_scenario("scenario.seed", "expected a non-negative integer");
    s.seed = root["seed"].get<std::uint64_t>();
  }
  if (root.contains("overrides")) {
    if (!root["overrides"].is_object()) bad_scenario("scenario.overrides", "expected an object");
    s.overrides = root["overrides"].dump();
    parse_config(s.overrides);
  }
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  return parse_scenario(read_text_file(path));
}

std::string dump_scenario(const Scenario& s) {
  json root;
  root["name"] = s.name;
  root["payload"] = json{{"mass", s.payload.mass},
                         {"volume", s.payload.volume},
                         {"offset", array_of<3>(s.payload.offset)},
                         {"label", s.payload.label}};
  root["initial"] = json{{"q", array_of<4>(s.initial.q)}, {"qd", array_of<4>(s.initial.qd)}};
  root["reference"] = array_of<4>(s.reference);
  root["reference_qd"] = array_of<4>(s.reference_qd);
  root["duration"] = s.duration;
  root["seed"] = s.seed;
  root["overrides"] = s.overrides.empty() ? json::object() : json::parse(s.overrides);
  return root.dump(2) + "\n";
}

Scenario resolve_scenario(const std::string& name_or_path) {
  const std::vector<std::string> names = builtin_scenario_names();
  if (std::find(names.begin(), names.end(), name_or_path) != names.end()) {
    return builtin_scenario(name_or_path);
  }
  if (std::filesystem::is_regular_file(name_or_path)) return load_scenario(name_or_path);
  throw Error(ErrorCode::kInvalidArgument,
              "unknown scenario \"" + name_or_path + "\" (not built in and not a file)");
}

Config scenario_config(const Scenario& s, const Config& base) {
  if (s.overrides.empty() || s.overrides == "{}") return base;
  return parse_config(s.overrides, base);
}

RunResult run_scenario(const Scenario& scenario, const DeltaModel& model, const Config& base) {
  const Config cfg = scenario_config(scenario, base);
  validate(cfg);
  const Limits limits = Limits::from(cfg.plant);
  validate(scenario, limits);
  const DynamicsParams plant = attach_payload(cfg.plant, scenario.payload);
  ControllerConfig ctl_cfg = cfg.controller;
  ctl_cfg.control_period = cfg.sim.control_period;

  ControllerState ctl = initial_controller_state(scenario.reference, Vec4::Zero(), limits);
  set_reference(ctl, scenario.reference, scenario.reference_qd, limits);

  RunResult result;
  JointState truth = scenario.initial;
  const int steps = static_cast<int>(std::llround(scenario.duration / cfg.sim.control_period));
  for (int k = 0; k < steps; ++k) {
    const double t = k * cfg.sim.control_period;
    const JointState measured = sensed_state(truth, cfg.sim, mix(scenario.seed, k));
    const ControlOutput out = control_step(model, ctl, measured, ctl_cfg, limits);
    TrajectoryRow row;
    row.t = t;
    row.state = truth;
    row.u = out.u;
    row.r = ctl.r_q;
    row.cost = out.diagnostics.objective_after;
    row.evaluations = out.diagnostics.evaluations;
    row.termination = out.diagnostics.failsafe ? "failsafe" : termination_name(out.diagnostics.reason);
    row.objective_before = out.diagnostics.objective_before;
    row.objective_after = out.diagnostics.objective_after;
    row.failsafe = out.diagnostics.failsafe;
    StepLog log;
    try {
      truth = step(truth, out.u, plant, cfg.sim, t, &log);
    } catch (const Error& e) {
      row.clamp_events = log.clamp_events;
      result.trajectory.rows.push_back(row);
      result.trajectory.solve_ms.push_back(out.diagnostics.solve_ms);
      result.aborted = true;
      result.message = std::string("plant: ") + e.what();
      break;
    }
    row.clamp_events = log.clamp_events;
    result.trajectory.rows.push_back(row);
    result.trajectory.solve_ms.push_back(out.diagnostics.solve_ms);
    ctl = out.state;
    if (ctl.consecutive_failsafe > kMaxConsecutiveFailsafe) {
      result.aborted = true;
      result.message = "controller fail-safe engaged for " +
                       std::to_string(ctl.consecutive_failsafe) +
                       " consecutive steps at t=" + std::to_string(t) + ": " +
                       out.diagnostics.message;
      break;
    }
  }
  result.metrics = compute_metrics(result.trajectory, cfg.metrics, limits);
  return result;
}

RunResult run_scenario(const Scenario& scenario, const NetworkParams& net, const Config& cfg) {
  validate(net);
  return run_scenario(scenario, as_delta_model(net), cfg);
}

}  // namespace nnmpc
