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

#include "core/config.hpp"

#include <cmath>
#include <initializer_list>
#include <limits>

#include "core/error.hpp"
#include "core/io.hpp"
#include <nlohmann/json.hpp>

namespace nnmpc {
namespace {

using json = nlohmann::ordered_json;

[[noreturn]] void schema(const std::string& where, const std::string& what) {
  throw Error(ErrorCode::kSchema, "config: " + where + ": " + what);
}

const json& object_at(const json& j, const std::string& where) {
  if (!j.is_object()) schema(where, "expected an object");
  return j;
}

void check_keys(const json& obj, const std::string& where,
                std::initializer_list<const char*> keys) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* k : keys) known = known || it.key() == k;
    if (!known) schema(where + "." + it.key(), "unknown key");
  }
}

std::string join(const std::string& where, const char* key) { return where + "." + key; }

double as_double(const json& v, const std::string& where) {
  if (v.is_null()) return std::numeric_limits<double>::infinity();
  if (!v.is_number()) schema(where, "expected a number");
  return v.get<double>();
}

void read(const json& obj, const char* key, const std::string& where, double& out) {
  if (obj.contains(key)) out = as_double(obj.at(key), join(where, key));
}

void read(const json& obj, const char* key, const std::string& where, int& out) {
  if (!obj.contains(key)) return;
  const json& v = obj.at(key);
  if (!v.is_number_integer()) schema(join(where, key), "expected an integer");
  out = v.get<int>();
}

void read(const json& obj, const char* key, const std::string& where, std::uint64_t& out) {
  if (!obj.contains(key)) return;
  const json& v = obj.at(key);
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
    schema(join(where, key), "expected a non-negative integer");
  }
  out = v.get<std::uint64_t>();
}

void read(const json& obj, const char* key, const std::string& where, bool& out) {
  if (!obj.contains(key)) return;
  const json& v = obj.at(key);
  if (!v.is_boolean()) schema(join(where, key), "expected true or false");
  out = v.get<bool>();
}

void read(const json& obj, const char* key, const std::string& where, std::string& out) {
  if (!obj.contains(key)) return;
  const json& v = obj.at(key);
  if (!v.is_string()) schema(join(where, key), "expected a string");
  out = v.get<std::string>();
}

void read(const json& obj, const char* key, const std::string& where,
          std::vector<std::string>& out) {
  if (!obj.contains(key)) return;
  const json& v = obj.at(key);
  if (!v.is_array()) schema(join(where, key), "expected an array of strings");
  out.clear();
  for (const json& e : v) {
    if (!e.is_string()) schema(join(where, key), "expected an array of strings");
    out.push_back(e.get<std::string>());
  }
}

template <int N>
void read(const json& obj, const char* key, const std::string& where,
          Eigen::Matrix<double, N, 1>& out) {
  if (!obj.contains(key)) return;
  const json& v = obj.at(key);
  const std::string at = join(where, key);
  if (v.is_number()) {
    out.setConstant(v.get<double>());
    return;
  }
  if (!v.is_array() || v.size() != N) schema(at, "expected " + std::to_string(N) + " numbers");
  for (int i = 0; i < N; ++i) out(i) = as_double(v[i], at);
}

// Inertia: 3 numbers (principal) or 9 numbers (row-major).
void read(const json& obj, const char* key, const std::string& where, Mat3& out) {
  if (!obj.contains(key)) return;
  const json& v = obj.at(key);
  const std::string at = join(where, key);
  if (v.is_array() && v.size() == 3) {
    out.setZero();
    for (int i = 0; i < 3; ++i) out(i, i) = as_double(v[i], at);
  } else if (v.is_array() && v.size() == 9) {
    for (int i = 0; i < 9; ++i) out(i / 3, i % 3) = as_double(v[i], at);
  } else {
    schema(at, "expected 3 or 9 numbers");
  }
}

json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

template <int N>
json vec(const Eigen::Matrix<double, N, 1>& v) {
  json a = json::array();
  for (int i = 0; i < N; ++i) a.push_back(number(v(i)));
  return a;
}

json mat(const Mat3& m) {
  json a = json::array();
  for (int i = 0; i < 9; ++i) a.push_back(m(i / 3, i % 3));
  return a;
}

void read_link(const json& j, const std::string& where, LinkParams& link) {
  object_at(j, where);
  check_keys(j, where, {"mass", "axis", "offset", "com", "inertia", "added_mass", "volume", "cob"});
  read(j, "mass", where, link.mass);
  read(j, "axis", where, link.axis);
  read(j, "offset", where, link.offset);
  read(j, "com", where, link.com);
  read(j, "inertia", where, link.inertia);
  read(j, "added_mass", where, link.added_mass);
  read(j, "volume", where, link.volume);
  read(j, "cob", where, link.cob);
}

void read_plant(const json& j, DynamicsParams& p) {
  const std::string w = "plant";
  object_at(j, w);
  check_keys(j, w, {"links", "rotor_inertia", "drag_linear", "drag_quadratic",
                    "friction_viscous", "friction_coulomb", "coulomb_velocity",
                    "fluid_density", "gravity", "q_min", "q_max", "tau_min", "tau_max",
                    "base"});
  if (j.contains("links")) {
    const json& links = j.at("links");
    if (!links.is_array() || links.size() != kJoints) schema("plant.links", "expected 4 links");
    for (int i = 0; i < kJoints; ++i) {
      read_link(links[i], "plant.links[" + std::to_string(i) + "]", p.links[i]);
    }
  }
  read(j, "rotor_inertia", w, p.rotor_inertia);
  read(j, "drag_linear", w, p.drag_linear);
  read(j, "drag_quadratic", w, p.drag_quadratic);
  read(j, "friction_viscous", w, p.friction_viscous);
  read(j, "friction_coulomb", w, p.friction_coulomb);
  read(j, "coulomb_velocity", w, p.coulomb_velocity);
  read(j, "fluid_density", w, p.fluid_density);
  read(j, "gravity", w, p.gravity);
  read(j, "q_min", w, p.q_min);
  read(j, "q_max", w, p.q_max);
  read(j, "tau_min", w, p.tau_min);
  read(j, "tau_max", w, p.tau_max);
  if (j.contains("base")) {
    const json& b = object_at(j.at("base"), "plant.base");
    check_keys(b, "plant.base", {"amplitude", "frequency"});
    read(b, "amplitude", "plant.base", p.base.amplitude);
    read(b, "frequency", "plant.base", p.base.frequency);
  }
}

void read_sim(const json& j, SimConfig& s) {
  const std::string w = "sim";
  object_at(j, w);
  check_keys(j, w, {"inner_step", "control_period", "integrator", "noise_q", "noise_qd"});
  read(j, "inner_step", w, s.inner_step);
  read(j, "control_period", w, s.control_period);
  if (j.contains("integrator")) {
    std::string name;
    read(j, "integrator", w, name);
    if (name == "rk4") {
      s.integrator = Integrator::kRk4;
    } else if (name == "euler") {
      s.integrator = Integrator::kEuler;
    } else {
      schema("sim.integrator", "expected \"rk4\" or \"euler\"");
    }
  }
  read(j, "noise_q", w, s.noise_q);
  read(j, "noise_qd", w, s.noise_qd);
}

void read_weights(const json& j, const std::string& w, CostWeights& c) {
  object_at(j, w);
  check_keys(j, w, {"q1", "q2", "r", "p", "horizon", "integral_step"});
  read(j, "q1", w, c.q1);
  read(j, "q2", w, c.q2);
  read(j, "r", w, c.r);
  read(j, "p", w, c.p);
  read(j, "horizon", w, c.horizon);
  read(j, "integral_step", w, c.integral_step);
}

void read_controller(const json& j, ControllerConfig& c) {
  const std::string w = "controller";
  object_at(j, w);
  check_keys(j, w, {"weights", "schedule", "blocking", "windup_limit", "integral_zone",
                    "integral_speed_zone", "integral_continuation"});
  if (j.contains("weights")) read_weights(j.at("weights"), "controller.weights", c.schedule.base);
  if (j.contains("schedule")) {
    const json& rules = j.at("schedule");
    if (!rules.is_array()) schema("controller.schedule", "expected an array of rules");
    c.schedule.rules.clear();
    for (std::size_t i = 0; i < rules.size(); ++i) {
      const std::string rw = "controller.schedule[" + std::to_string(i) + "]";
      const json& r = object_at(rules[i], rw);
      check_keys(r, rw, {"t_min", "t_max", "error_min", "error_max", "weights"});
      WeightRule rule;
      rule.weights = c.schedule.base;
      read(r, "t_min", rw, rule.t_min);
      read(r, "t_max", rw, rule.t_max);
      read(r, "error_min", rw, rule.error_min);
      read(r, "error_max", rw, rule.error_max);
      if (r.contains("weights")) read_weights(r.at("weights"), rw + ".weights", rule.weights);
      c.schedule.rules.push_back(rule);
    }
  }
  read(j, "blocking", w, c.blocking);
  read(j, "windup_limit", w, c.windup_limit);
  read(j, "integral_zone", w, c.integral_zone);
  read(j, "integral_speed_zone", w, c.integral_speed_zone);
  read(j, "integral_continuation", w, c.integral_continuation);
}

void read_optimizer(const json& j, OptimizerConfig& o) {
  const std::string w = "optimizer";
  object_at(j, w);
  check_keys(j, w, {"rho_begin", "rho_end", "max_evaluations"});
  read(j, "rho_begin", w, o.rho_begin);
  read(j, "rho_end", w, o.rho_end);
  read(j, "max_evaluations", w, o.max_evaluations);
}

void read_training(const json& j, TrainingConfig& t) {
  const std::string w = "training";
  object_at(j, w);
  check_keys(j, w, {"learning_rate", "beta1", "beta2", "epsilon", "batch_size", "epochs",
                    "validation_fraction", "seed"});
  read(j, "learning_rate", w, t.learning_rate);
  read(j, "beta1", w, t.beta1);
  read(j, "beta2", w, t.beta2);
  read(j, "epsilon", w, t.epsilon);
  read(j, "batch_size", w, t.batch_size);
  read(j, "epochs", w, t.epochs);
  read(j, "validation_fraction", w, t.validation_fraction);
  read(j, "seed", w, t.seed);
}

void read_excitation(const json& j, ExcitationConfig& e) {
  const std::string w = "excitation";
  object_at(j, w);
  check_keys(j, w, {"episodes", "duration", "kinds", "hold_period", "piecewise_fraction",
                    "piecewise_around_hold",
                    "sine_components", "sine_max_frequency", "sine_fraction", "target_period",
                    "target_kp", "target_kd", "target_noise", "limit_margin", "limit_kp",
                    "limit_kd"});
  read(j, "episodes", w, e.episodes);
  read(j, "duration", w, e.duration);
  read(j, "kinds", w, e.kinds);
  read(j, "hold_period", w, e.hold_period);
  read(j, "piecewise_fraction", w, e.piecewise_fraction);
  read(j, "piecewise_around_hold", w, e.piecewise_around_hold);
  read(j, "sine_components", w, e.sine_components);
  read(j, "sine_max_frequency", w, e.sine_max_frequency);
  read(j, "sine_fraction", w, e.sine_fraction);
  read(j, "target_period", w, e.target_period);
  read(j, "target_kp", w, e.target_kp);
  read(j, "target_kd", w, e.target_kd);
  read(j, "target_noise", w, e.target_noise);
  read(j, "limit_margin", w, e.limit_margin);
  read(j, "limit_kp", w, e.limit_kp);
  read(j, "limit_kd", w, e.limit_kd);
}

void read_metrics(const json& j, MetricsConfig& m) {
  const std::string w = "metrics";
  object_at(j, w);
  check_keys(j, w, {"band", "band_floor", "steady_fraction", "budget_ms"});
  read(j, "band", w, m.band);
  read(j, "band_floor", w, m.band_floor);
  read(j, "steady_fraction", w, m.steady_fraction);
  read(j, "budget_ms", w, m.budget_ms);
}

json weights_json(const CostWeights& c) {
  return json{{"q1", vec(c.q1)}, {"q2", vec(c.q2)}, {"r", vec(c.r)}, {"p", vec(c.p)},
              {"horizon", c.horizon}, {"integral_step", c.integral_step}};
}

}  // namespace

void validate(const ExcitationConfig& e) {
  auto bad = [](const std::string& what) {
    throw Error(ErrorCode::kInvalidArgument, "excitation: " + what);
  };
  if (e.episodes < 1) bad("episodes must be >= 1");
  if (!(e.duration > 0.0)) bad("duration must be positive");
  if (e.kinds.empty()) bad("kinds must not be empty");
  for (const std::string& k : e.kinds) {
    if (k != "piecewise" && k != "multisine" && k != "targets") bad("unknown kind \"" + k + "\"");
  }
  if (!(e.hold_period > 0.0) || !(e.target_period > 0.0)) bad("periods must be positive");
  if (!(e.piecewise_fraction >= 0.0 && e.piecewise_fraction <= 1.0)) {
    bad("piecewise_fraction must lie in [0, 1]");
  }
  if (!(e.sine_fraction >= 0.0 && e.sine_fraction <= 1.0)) bad("sine_fraction must lie in [0, 1]");
  if (e.sine_components < 1 || !(e.sine_max_frequency > 0.0)) bad("bad multisine settings");
  if (!(e.target_kp >= 0.0 && e.target_kd >= 0.0 && e.target_noise >= 0.0)) {
    bad("target gains must be >= 0");
  }
  if (!(e.limit_margin >= 0.0 && e.limit_kp >= 0.0 && e.limit_kd >= 0.0)) {
    bad("limit guard settings must be >= 0");
  }
}

void validate(const MetricsConfig& m) {
  if (!(m.band > 0.0 && m.band < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "metrics: band must lie in (0, 1)");
  }
  if (!(m.band_floor >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "metrics: band_floor must be >= 0");
  }
  if (!(m.steady_fraction > 0.0 && m.steady_fraction <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "metrics: steady_fraction must lie in (0, 1]");
  }
  if (!(m.budget_ms > 0.0)) throw Error(ErrorCode::kInvalidArgument, "metrics: budget_ms must be > 0");
}

void validate(const Config& cfg) {
  validate(cfg.plant);
  validate(cfg.sim);
  validate(cfg.controller);
  validate(cfg.training);
  validate(cfg.excitation);
  validate(cfg.metrics);
}

Config parse_config(const std::string& json_text) { return parse_config(json_text, Config{}); }

Config parse_config(const std::string& json_text, const Config& base) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kSchema, std::string("config: not valid JSON: ") + e.what());
  }
  Config cfg = base;
  object_at(root, "config");
  check_keys(root, "config",
             {"plant", "sim", "controller", "optimizer", "training", "excitation", "metrics"});
  if (root.contains("plant")) read_plant(root.at("plant"), cfg.plant);
  if (root.contains("sim")) read_sim(root.at("sim"), cfg.sim);
  if (root.contains("controller")) read_controller(root.at("controller"), cfg.controller);
  if (root.contains("optimizer")) read_optimizer(root.at("optimizer"), cfg.controller.optimizer);
  if (root.contains("training")) read_training(root.at("training"), cfg.training);
  if (root.contains("excitation")) read_excitation(root.at("excitation"), cfg.excitation);
  if (root.contains("metrics")) read_metrics(root.at("metrics"), cfg.metrics);
  cfg.controller.control_period = cfg.sim.control_period;
  validate(cfg);
  return cfg;
}

Config load_config(const std::filesystem::path& path) { return parse_config(read_text_file(path)); }

std::string dump_config(const Config& cfg) {
  const DynamicsParams& p = cfg.plant;
  json links = json::array();
  for (const LinkParams& l : p.links) {
    links.push_back(json{{"mass", l.mass}, {"axis", vec(l.axis)}, {"offset", vec(l.offset)},
                         {"com", vec(l.com)}, {"inertia", mat(l.inertia)},
                         {"added_mass", l.added_mass}, {"volume", l.volume},
                         {"cob", vec(l.cob)}});
  }
  json root;
  root["plant"] = json{{"links", links},
                       {"rotor_inertia", vec(p.rotor_inertia)},
                       {"drag_linear", vec(p.drag_linear)},
                       {"drag_quadratic", vec(p.drag_quadratic)},
                       {"friction_viscous", vec(p.friction_viscous)},
                       {"friction_coulomb", vec(p.friction_coulomb)},
                       {"coulomb_velocity", p.coulomb_velocity},
                       {"fluid_density", p.fluid_density},
                       {"gravity", p.gravity},
                       {"q_min", vec(p.q_min)},
                       {"q_max", vec(p.q_max)},
                       {"tau_min", vec(p.tau_min)},
                       {"tau_max", vec(p.tau_max)},
                       {"base", json{{"amplitude", p.base.amplitude},
                                     {"frequency", p.base.frequency}}}};
  const SimConfig& s = cfg.sim;
  root["sim"] = json{{"inner_step", s.inner_step},
                     {"control_period", s.control_period},
                     {"integrator", s.integrator == Integrator::kRk4 ? "rk4" : "euler"},
                     {"noise_q", s.noise_q},
                     {"noise_qd", s.noise_qd}};
  const ControllerConfig& c = cfg.controller;
  json rules = json::array();
  for (const WeightRule& r : c.schedule.rules) {
    rules.push_back(json{{"t_min", number(r.t_min)}, {"t_max", number(r.t_max)},
                         {"error_min", number(r.error_min)}, {"error_max", number(r.error_max)},
                         {"weights", weights_json(r.weights)}});
  }
  root["controller"] = json{{"weights", weights_json(c.schedule.base)},
                            {"schedule", rules},
                            {"blocking", c.blocking},
                            {"windup_limit", c.windup_limit},
                            {"integral_zone", number(c.integral_zone)},
                            {"integral_speed_zone", number(c.integral_speed_zone)},
                            {"integral_continuation", c.integral_continuation}};
  root["optimizer"] = json{{"rho_begin", c.optimizer.rho_begin},
                           {"rho_end", c.optimizer.rho_end},
                           {"max_evaluations", c.optimizer.max_evaluations}};
  const TrainingConfig& t = cfg.training;
  root["training"] = json{{"learning_rate", t.learning_rate}, {"beta1", t.beta1},
                          {"beta2", t.beta2}, {"epsilon", t.epsilon},
                          {"batch_size", t.batch_size}, {"epochs", t.epochs},
                          {"validation_fraction", t.validation_fraction}, {"seed", t.seed}};
  const ExcitationConfig& e = cfg.excitation;
  root["excitation"] = json{{"episodes", e.episodes},
                            {"duration", e.duration},
                            {"kinds", e.kinds},
                            {"hold_period", e.hold_period},
                            {"piecewise_fraction", e.piecewise_fraction},
                            {"piecewise_around_hold", e.piecewise_around_hold},
                            {"sine_components", e.sine_components},
                            {"sine_max_frequency", e.sine_max_frequency},
                            {"sine_fraction", e.sine_fraction},
                            {"target_period", e.target_period},
                            {"target_kp", e.target_kp},
                            {"target_kd", e.target_kd},
                            {"target_noise", e.target_noise},
                            {"limit_margin", e.limit_margin},
                            {"limit_kp", e.limit_kp},
                            {"limit_kd", e.limit_kd}};
  const MetricsConfig& m = cfg.metrics;
  root["metrics"] = json{{"band", m.band}, {"band_floor", m.band_floor},
                         {"steady_fraction", m.steady_fraction}, {"budget_ms", m.budget_ms}};
  return root.dump(2) + "\n";
}

}  // namespace nnmpc
