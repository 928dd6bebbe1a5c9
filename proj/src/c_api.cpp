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

#include "nnmpc/nnmpc.h"

#include <cstdlib>
#include <cstring>
#include <exception>
#include <new>
#include <string>
#include <vector>

#include "core/config.hpp"
#include "core/controller.hpp"
#include "core/dynamics.hpp"
#include "core/error.hpp"
#include "core/harness.hpp"
#include "core/jobs.hpp"
#include "core/manifest.hpp"
#include "core/network.hpp"

struct nnmpc_config {
  nnmpc::Config cfg;
};

struct nnmpc_model {
  nnmpc::NetworkParams net;
};

struct nnmpc_plant {
  nnmpc::DynamicsParams params;
  nnmpc::SimConfig sim;
};

struct nnmpc_controller {
  nnmpc::NetworkParams net;
  nnmpc::DeltaModel model;
  nnmpc::ControllerConfig cfg;
  nnmpc::Limits limits;
  nnmpc::ControllerState state;
};

namespace {

thread_local std::string last_error;

nnmpc_status fail(nnmpc_status status, const std::string& message) {
  last_error = message;
  return status;
}

template <typename F>
nnmpc_status guarded(F&& body) {
  try {
    body();
    last_error.clear();
    return NNMPC_OK;
  } catch (const nnmpc::Error& e) {
    return fail(static_cast<nnmpc_status>(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(NNMPC_ERR_OUT_OF_MEMORY, "out of memory");
  } catch (const std::exception& e) {
    return fail(NNMPC_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(NNMPC_ERR_INTERNAL, "unknown exception");
  }
}

void require(bool ok, const char* what) {
  if (!ok) throw nnmpc::Error(nnmpc::ErrorCode::kInvalidArgument, what);
}

nnmpc::Vec4 vec4(const double* p) { return nnmpc::Vec4(p[0], p[1], p[2], p[3]); }

void put(const nnmpc::Vec4& v, double* out) {
  for (int i = 0; i < nnmpc::kJoints; ++i) out[i] = v(i);
}

char* dup(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void give(char** out, const std::string& s) {
  if (out) *out = dup(s);
}

}  // namespace

extern "C" {

const char* nnmpc_version(void) { return nnmpc::library_version(); }

const char* nnmpc_status_name(nnmpc_status status) {
  switch (status) {
    case NNMPC_OK: return "ok";
    case NNMPC_ERR_OUT_OF_MEMORY: return "out-of-memory";
    case NNMPC_ERR_INTERNAL: return "internal";
    default:
      if (status >= NNMPC_ERR_INVALID_ARGUMENT && status <= NNMPC_ERR_ABORTED) {
        return nnmpc::error_code_name(static_cast<nnmpc::ErrorCode>(status));
      }
      return "unknown";
  }
}

const char* nnmpc_last_error(void) { return last_error.c_str(); }

void nnmpc_string_free(char* s) { std::free(s); }

nnmpc_status nnmpc_config_default(nnmpc_config** out) {
  return guarded([&] {
    require(out, "out is null");
    *out = new nnmpc_config{};
  });
}

nnmpc_status nnmpc_config_parse(const char* json, nnmpc_config** out) {
  return guarded([&] {
    require(json && out, "null argument");
    *out = new nnmpc_config{nnmpc::parse_config(json)};
  });
}

nnmpc_status nnmpc_config_load(const char* path, nnmpc_config** out) {
  return guarded([&] {
    require(path && out, "null argument");
    *out = new nnmpc_config{nnmpc::load_config(path)};
  });
}

nnmpc_status nnmpc_config_dump(const nnmpc_config* cfg, char** json) {
  return guarded([&] {
    require(cfg && json, "null argument");
    *json = dup(nnmpc::dump_config(cfg->cfg));
  });
}

void nnmpc_config_free(nnmpc_config* cfg) { delete cfg; }

nnmpc_status nnmpc_model_load(const char* path, nnmpc_model** out) {
  return guarded([&] {
    require(path && out, "null argument");
    *out = new nnmpc_model{nnmpc::load_model(path)};
  });
}

void nnmpc_model_free(nnmpc_model* model) { delete model; }

nnmpc_status nnmpc_model_predict(const nnmpc_model* model, const double* q, const double* qd,
                                 const double* u, double* dq, double* dqd) {
  return guarded([&] {
    require(model && q && qd && u && dq && dqd, "null argument");
    const nnmpc::StateDelta d =
        nnmpc::predict_delta(model->net, nnmpc::JointState{vec4(q), vec4(qd)}, vec4(u));
    put(d.dq, dq);
    put(d.dqd, dqd);
  });
}

nnmpc_status nnmpc_plant_create(const nnmpc_config* cfg, double payload_mass,
                                double payload_volume, const double* payload_offset,
                                nnmpc_plant** out) {
  return guarded([&] {
    require(cfg && out, "null argument");
    nnmpc::PayloadSpec payload;
    payload.mass = payload_mass;
    payload.volume = payload_volume;
    if (payload_offset) {
      payload.offset = nnmpc::Vec3(payload_offset[0], payload_offset[1], payload_offset[2]);
    }
    *out = new nnmpc_plant{nnmpc::attach_payload(cfg->cfg.plant, payload), cfg->cfg.sim};
  });
}

void nnmpc_plant_free(nnmpc_plant* plant) { delete plant; }

nnmpc_status nnmpc_plant_step(const nnmpc_plant* plant, double* q, double* qd, const double* tau,
                              double time) {
  return guarded([&] {
    require(plant && q && qd && tau, "null argument");
    const nnmpc::JointState next =
        nnmpc::step(nnmpc::JointState{vec4(q), vec4(qd)}, vec4(tau), plant->params, plant->sim, time);
    put(next.q, q);
    put(next.qd, qd);
  });
}

nnmpc_status nnmpc_controller_create(const nnmpc_config* cfg, const nnmpc_model* model,
                                     const double* reference, nnmpc_controller** out) {
  return guarded([&] {
    require(cfg && model && reference && out, "null argument");
    auto* ctl = new nnmpc_controller{};
    try {
      ctl->net = model->net;
      ctl->model = nnmpc::as_delta_model(ctl->net);
      ctl->cfg = cfg->cfg.controller;
      ctl->cfg.control_period = cfg->cfg.sim.control_period;
      ctl->limits = nnmpc::Limits::from(cfg->cfg.plant);
      ctl->state = nnmpc::initial_controller_state(vec4(reference), nnmpc::Vec4::Zero(), ctl->limits);
      nnmpc::set_reference(ctl->state, vec4(reference), nnmpc::Vec4::Zero(), ctl->limits);
    } catch (...) {
      delete ctl;
      throw;
    }
    *out = ctl;
  });
}

void nnmpc_controller_free(nnmpc_controller* ctl) { delete ctl; }

nnmpc_status nnmpc_controller_set_reference(nnmpc_controller* ctl, const double* reference,
                                            const double* reference_qd, int reset_integral) {
  return guarded([&] {
    require(ctl && reference, "null argument");
    const nnmpc::Vec4 rqd = reference_qd ? vec4(reference_qd) : nnmpc::Vec4::Zero();
    nnmpc::set_reference(ctl->state, vec4(reference), rqd, ctl->limits, reset_integral != 0);
  });
}

nnmpc_status nnmpc_controller_step(nnmpc_controller* ctl, const double* q, const double* qd,
                                   double* u, nnmpc_step_info* info) {
  return guarded([&] {
    require(ctl && q && qd && u, "null argument");
    const nnmpc::ControlOutput o = nnmpc::control_step(
        ctl->model, ctl->state, nnmpc::JointState{vec4(q), vec4(qd)}, ctl->cfg, ctl->limits);
    ctl->state = o.state;
    put(o.u, u);
    if (info) {
      info->evaluations = o.diagnostics.evaluations;
      info->failsafe = o.diagnostics.failsafe ? 1 : 0;
      info->objective = o.diagnostics.objective_after;
      info->max_violation = o.diagnostics.max_violation;
      info->solve_ms = o.diagnostics.solve_ms;
      const char* name =
          o.diagnostics.failsafe ? "failsafe" : nnmpc::termination_name(o.diagnostics.reason);
      std::strncpy(info->termination, name, sizeof info->termination - 1);
      info->termination[sizeof info->termination - 1] = '\0';
    }
  });
}

nnmpc_status nnmpc_scenario_names(char** names) {
  return guarded([&] {
    require(names, "null argument");
    std::string text;
    for (const std::string& n : nnmpc::builtin_scenario_names()) text += n + "\n";
    *names = dup(text);
  });
}

nnmpc_status nnmpc_collect(const nnmpc_config* cfg, uint64_t seed, const char* out_dir,
                           char** summary) {
  return guarded([&] {
    require(cfg && out_dir, "null argument");
    give(summary, nnmpc::collect_job(cfg->cfg, seed, out_dir));
  });
}

nnmpc_status nnmpc_train(const nnmpc_config* cfg, const char* data_csv, const char* out_dir,
                         char** summary) {
  return guarded([&] {
    require(cfg && data_csv && out_dir, "null argument");
    give(summary, nnmpc::train_job(cfg->cfg, data_csv, out_dir));
  });
}

nnmpc_status nnmpc_run(const nnmpc_config* cfg, const char* scenario, int64_t seed,
                       const char* model_path, const char* out_dir, char** summary) {
  return guarded([&] {
    require(cfg && scenario && model_path && out_dir, "null argument");
    nnmpc::Scenario s = nnmpc::resolve_scenario(scenario);
    if (seed >= 0) s.seed = static_cast<std::uint64_t>(seed);
    give(summary, nnmpc::run_job(cfg->cfg, s, model_path, out_dir));
  });
}

nnmpc_status nnmpc_replay(const char* manifest_path, const char* out_dir, char** summary) {
  return guarded([&] {
    require(manifest_path && out_dir, "null argument");
    give(summary, nnmpc::replay_job(manifest_path, out_dir));
  });
}

nnmpc_status nnmpc_metrics(const nnmpc_config* cfg, const char* trajectory_csv,
                           const char* timing_csv, char** summary) {
  return guarded([&] {
    require(cfg && trajectory_csv, "null argument");
    give(summary, nnmpc::metrics_job(cfg->cfg, trajectory_csv,
                                     timing_csv ? std::filesystem::path(timing_csv)
                                                : std::filesystem::path()));
  });
}

nnmpc_status nnmpc_sweep(const nnmpc_config* cfg, const char* const* scenarios,
                         size_t scenario_count, int seeds, const char* model_path,
                         const char* out_dir, int jobs, char** summary) {
  return guarded([&] {
    require(cfg && (scenarios || scenario_count == 0) && model_path && out_dir, "null argument");
    std::vector<std::string> names;
    for (size_t i = 0; i < scenario_count; ++i) {
      require(scenarios[i], "null scenario name");
      names.emplace_back(scenarios[i]);
    }
    give(summary, nnmpc::sweep_job(cfg->cfg, names, seeds, model_path, out_dir, jobs));
  });
}

nnmpc_status nnmpc_report(const char* dir, char** summary) {
  return guarded([&] {
    require(dir, "null argument");
    give(summary, nnmpc::report_job(dir));
  });
}

}  // extern "C"
