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

// Command line front end. Talks to the library only through nnmpc.h.

#include <cstdint>
#include <cstdio>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "nnmpc/nnmpc.h"

namespace {

constexpr int kUsageError = 2;
constexpr int kRuntimeError = 1;

struct ConfigHandle {
  nnmpc_config* ptr = nullptr;
  ~ConfigHandle() { nnmpc_config_free(ptr); }
};

int report_failure(nnmpc_status status) {
  std::fprintf(stderr, "error: %s: %s\n", nnmpc_status_name(status), nnmpc_last_error());
  return kRuntimeError;
}

// Prints the returned text, frees it and maps the status to an exit code.
int finish(nnmpc_status status, char*& text) {
  if (text) {
    std::fputs(text, stdout);
    nnmpc_string_free(text);
    text = nullptr;
  }
  return status == NNMPC_OK ? 0 : report_failure(status);
}

nnmpc_status load_config(const std::string& path, ConfigHandle& cfg) {
  if (path.empty()) return nnmpc_config_default(&cfg.ptr);
  return nnmpc_config_load(path.c_str(), &cfg.ptr);
}

std::vector<std::string> builtin_scenarios() {
  std::vector<std::string> out;
  char* names = nullptr;
  if (nnmpc_scenario_names(&names) != NNMPC_OK) return out;
  std::istringstream in(names);
  for (std::string line; std::getline(in, line);) {
    if (!line.empty()) out.push_back(line);
  }
  nnmpc_string_free(names);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Neural-network model predictive control of a simulated underwater arm"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", std::string(nnmpc_version()));

  std::string config_path;
  app.add_option("-c,--config", config_path, "Config JSON (defaults when omitted)")
      ->check(CLI::ExistingFile);

  std::string out_dir;
  std::uint64_t seed = 1;

  CLI::App* collect = app.add_subcommand("collect", "Record excitation data from the plant");
  collect->add_option("--seed", seed, "Excitation seed")->capture_default_str();
  collect->add_option("-o,--out", out_dir, "Output directory")->required();

  std::string data_csv;
  CLI::App* train = app.add_subcommand("train", "Fit the delta-state network to a dataset");
  train->add_option("--data", data_csv, "Dataset CSV from collect")->required()->check(CLI::ExistingFile);
  train->add_option("-o,--out", out_dir, "Output directory")->required();

  std::string scenario, model, manifest;
  std::int64_t run_seed = -1;
  CLI::App* run = app.add_subcommand("run", "Run one closed-loop scenario");
  CLI::Option* scenario_opt =
      run->add_option("--scenario", scenario, "Built-in scenario name or scenario file");
  CLI::Option* model_opt = run->add_option("--model", model, "Model JSON from train")->check(CLI::ExistingFile);
  CLI::Option* seed_opt = run->add_option("--seed", run_seed, "Sensor-noise seed (default: the scenario's)");
  CLI::Option* manifest_opt = run->add_option("--manifest", manifest, "Replay a run manifest")
                                  ->check(CLI::ExistingFile);
  manifest_opt->excludes(scenario_opt)->excludes(model_opt)->excludes(seed_opt);
  run->add_option("-o,--out", out_dir, "Output directory")->required();

  std::string traj_csv, timing_csv;
  CLI::App* metrics = app.add_subcommand("metrics", "Compute metrics of a trajectory CSV");
  metrics->add_option("--traj", traj_csv, "Trajectory CSV")->required()->check(CLI::ExistingFile);
  metrics->add_option("--timing", timing_csv, "Timing CSV written next to the trajectory")
      ->check(CLI::ExistingFile);

  std::vector<std::string> scenarios;
  int seeds = 1;
  int jobs = static_cast<int>(std::thread::hardware_concurrency());
  if (jobs < 1) jobs = 1;
  CLI::App* sweep = app.add_subcommand("sweep", "Run scenarios over several seeds");
  sweep->add_option("--scenarios", scenarios, "Comma-separated names or files, or \"all\"")
      ->required()
      ->delimiter(',');
  sweep->add_option("--seeds", seeds, "Seeded repetitions per scenario")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  sweep->add_option("--model", model, "Model JSON from train")->required()->check(CLI::ExistingFile);
  sweep->add_option("-o,--out", out_dir, "Output directory")->required();
  sweep->add_option("-j,--jobs", jobs, "Parallel runs")->capture_default_str()->check(CLI::PositiveNumber);

  std::string report_dir;
  CLI::App* report = app.add_subcommand("report", "Aggregate run metrics below a directory");
  report->add_option("-d,--dir", report_dir, "Directory holding run outputs")
      ->required()
      ->check(CLI::ExistingDirectory);

  try {
    app.parse(argc, argv);
    if (run->parsed() && manifest.empty() && (scenario.empty() || model.empty())) {
      throw CLI::ValidationError("run", "needs --scenario and --model, or --manifest");
    }
    if (run->parsed() && !manifest.empty() && !config_path.empty()) {
      throw CLI::ExcludesError("--manifest", "--config");
    }
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    // Unknown arguments are reported ahead of missing required options.
    std::vector<std::string> extras = app.remaining();
    for (const CLI::App* sub : app.get_subcommands({})) {
      for (const std::string& r : sub->remaining()) extras.push_back(r);
    }
    std::string message = e.what();
    if (!extras.empty() && e.get_name() != "ExtrasError") {
      message = "unknown argument(s):";
      for (const std::string& r : extras) message += " " + r;
    }
    std::fprintf(stderr, "%s\n\n%s", message.c_str(), app.help().c_str());
    return kUsageError;
  }

  char* text = nullptr;

  if (report->parsed()) {
    const nnmpc_status status = nnmpc_report(report_dir.c_str(), &text);
    return finish(status, text);
  }
  if (run->parsed() && !manifest.empty()) {
    const nnmpc_status status = nnmpc_replay(manifest.c_str(), out_dir.c_str(), &text);
    return finish(status, text);
  }

  ConfigHandle cfg;
  if (nnmpc_status s = load_config(config_path, cfg); s != NNMPC_OK) return report_failure(s);

  if (collect->parsed()) {
    const nnmpc_status status = nnmpc_collect(cfg.ptr, seed, out_dir.c_str(), &text);
    return finish(status, text);
  }
  if (train->parsed()) {
    const nnmpc_status status = nnmpc_train(cfg.ptr, data_csv.c_str(), out_dir.c_str(), &text);
    return finish(status, text);
  }
  if (run->parsed()) {
    const nnmpc_status status =
        nnmpc_run(cfg.ptr, scenario.c_str(), run_seed, model.c_str(), out_dir.c_str(), &text);
    return finish(status, text);
  }
  if (metrics->parsed()) {
    const nnmpc_status status = nnmpc_metrics(
        cfg.ptr, traj_csv.c_str(), timing_csv.empty() ? nullptr : timing_csv.c_str(), &text);
    return finish(status, text);
  }
  if (sweep->parsed()) {
    if (scenarios.size() == 1 && scenarios[0] == "all") scenarios = builtin_scenarios();
    std::vector<const char*> names;
    for (const std::string& s : scenarios) names.push_back(s.c_str());
    const nnmpc_status status = nnmpc_sweep(cfg.ptr, names.data(), names.size(), seeds,
                                            model.c_str(), out_dir.c_str(), jobs, &text);
    return finish(status, text);
  }
  return kUsageError;
}
