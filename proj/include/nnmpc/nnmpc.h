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

// C interface to the NNMPC library.
//
// Every function returns an nnmpc_status. On failure the message is available
// from nnmpc_last_error() on the same thread until the next call. Objects are
// opaque handles released with their *_free function; strings returned
// through `char**` are released with nnmpc_string_free. Arrays of joint
// quantities always have NNMPC_JOINTS elements.

#ifndef NNMPC_NNMPC_H_
#define NNMPC_NNMPC_H_

#include <stddef.h>
#include <stdint.h>

#if defined(NNMPC_BUILDING_LIBRARY)
#define NNMPC_API __attribute__((visibility("default")))
#else
#define NNMPC_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

#define NNMPC_JOINTS 4

typedef enum nnmpc_status {
  NNMPC_OK = 0,
  NNMPC_ERR_INVALID_ARGUMENT = 1,
  NNMPC_ERR_IO = 2,
  NNMPC_ERR_SCHEMA = 3,
  NNMPC_ERR_BOUNDS = 4,
  NNMPC_ERR_CAPACITY_EXCEEDED = 5,
  NNMPC_ERR_SINGULAR_DYNAMICS = 6,
  NNMPC_ERR_INTEGRATION_DIVERGED = 7,
  NNMPC_ERR_ROLLOUT_DIVERGED = 8,
  NNMPC_ERR_TRAINING_DIVERGED = 9,
  NNMPC_ERR_INPUT_DOMAIN = 10,
  NNMPC_ERR_OPTIMIZER = 11,
  NNMPC_ERR_ABORTED = 12,
  NNMPC_ERR_OUT_OF_MEMORY = 98,
  NNMPC_ERR_INTERNAL = 99
} nnmpc_status;

typedef struct nnmpc_config nnmpc_config;
typedef struct nnmpc_model nnmpc_model;
typedef struct nnmpc_plant nnmpc_plant;
typedef struct nnmpc_controller nnmpc_controller;

NNMPC_API const char* nnmpc_version(void);
NNMPC_API const char* nnmpc_status_name(nnmpc_status status);
NNMPC_API const char* nnmpc_last_error(void);
NNMPC_API void nnmpc_string_free(char* s);

//---------------------------------- Config ------------------------------------

NNMPC_API nnmpc_status nnmpc_config_default(nnmpc_config** out);
NNMPC_API nnmpc_status nnmpc_config_parse(const char* json, nnmpc_config** out);
NNMPC_API nnmpc_status nnmpc_config_load(const char* path, nnmpc_config** out);
// Canonical JSON of the complete config.
NNMPC_API nnmpc_status nnmpc_config_dump(const nnmpc_config* cfg, char** json);
NNMPC_API void nnmpc_config_free(nnmpc_config* cfg);

//---------------------------------- Model -------------------------------------

NNMPC_API nnmpc_status nnmpc_model_load(const char* path, nnmpc_model** out);
NNMPC_API void nnmpc_model_free(nnmpc_model* model);

// One-period change of the state under command u.
NNMPC_API nnmpc_status nnmpc_model_predict(const nnmpc_model* model,
                                           const double* q, const double* qd,
                                           const double* u, double* dq,
                                           double* dqd);

//---------------------------------- Plant -------------------------------------

// Simulated arm with an optional point payload on the last link.
NNMPC_API nnmpc_status nnmpc_plant_create(const nnmpc_config* cfg,
                                          double payload_mass,
                                          double payload_volume,
                                          const double* payload_offset,
                                          nnmpc_plant** out);
NNMPC_API void nnmpc_plant_free(nnmpc_plant* plant);

// Advances one control period with tau held. Writes the new state.
NNMPC_API nnmpc_status nnmpc_plant_step(const nnmpc_plant* plant, double* q,
                                        double* qd, const double* tau,
                                        double time);

//-------------------------------- Controller ----------------------------------

typedef struct nnmpc_step_info {
  int evaluations;
  int failsafe;
  double objective;
  double max_violation;
  double solve_ms;
  char termination[24];
} nnmpc_step_info;

// The controller keeps its own copy of the model.
NNMPC_API nnmpc_status nnmpc_controller_create(const nnmpc_config* cfg,
                                               const nnmpc_model* model,
                                               const double* reference,
                                               nnmpc_controller** out);
NNMPC_API void nnmpc_controller_free(nnmpc_controller* ctl);

// reference_qd may be NULL for zero. A rejected reference leaves the
// controller unchanged.
NNMPC_API nnmpc_status nnmpc_controller_set_reference(nnmpc_controller* ctl,
                                                      const double* reference,
                                                      const double* reference_qd,
                                                      int reset_integral);

// One control step from a measured state. `info` may be NULL.
NNMPC_API nnmpc_status nnmpc_controller_step(nnmpc_controller* ctl,
                                             const double* q, const double* qd,
                                             double* u, nnmpc_step_info* info);

//----------------------------------- Jobs -------------------------------------
// Each job writes its files and <command>.manifest.json into out_dir and
// returns a human-readable summary through `summary` (may be NULL).

// Newline-separated built-in scenario names.
NNMPC_API nnmpc_status nnmpc_scenario_names(char** names);

NNMPC_API nnmpc_status nnmpc_collect(const nnmpc_config* cfg, uint64_t seed,
                                     const char* out_dir, char** summary);

NNMPC_API nnmpc_status nnmpc_train(const nnmpc_config* cfg,
                                   const char* data_csv, const char* out_dir,
                                   char** summary);

// `scenario` is a built-in name or a scenario file. A negative seed keeps
// the scenario's own.
NNMPC_API nnmpc_status nnmpc_run(const nnmpc_config* cfg, const char* scenario,
                                 int64_t seed, const char* model_path,
                                 const char* out_dir, char** summary);

// Re-runs the scenario recorded in a run manifest.
NNMPC_API nnmpc_status nnmpc_replay(const char* manifest_path,
                                    const char* out_dir, char** summary);

// timing_csv may be NULL.
NNMPC_API nnmpc_status nnmpc_metrics(const nnmpc_config* cfg,
                                     const char* trajectory_csv,
                                     const char* timing_csv, char** summary);

NNMPC_API nnmpc_status nnmpc_sweep(const nnmpc_config* cfg,
                                   const char* const* scenarios,
                                   size_t scenario_count, int seeds,
                                   const char* model_path, const char* out_dir,
                                   int jobs, char** summary);

NNMPC_API nnmpc_status nnmpc_report(const char* dir, char** summary);

#ifdef __cplusplus
}  // extern "C"
#endif

#endif  // NNMPC_NNMPC_H_
