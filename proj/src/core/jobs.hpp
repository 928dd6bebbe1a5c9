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

// File-level jobs behind the command line: each one reads its inputs, writes
// its outputs into a directory and records them in <command>.manifest.json.

#ifndef NNMPC_CORE_JOBS_HPP_
#define NNMPC_CORE_JOBS_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "core/config.hpp"
#include "core/harness.hpp"

namespace nnmpc {

// data.csv and its metadata. Returns a one-line summary.
std::string collect_job(const Config& cfg, std::uint64_t seed,
                        const std::filesystem::path& out_dir);

// model.json and training.csv (per-epoch losses).
std::string train_job(const Config& cfg, const std::filesystem::path& data_csv,
                      const std::filesystem::path& out_dir);

// trajectory.csv, timing.csv, metrics.txt and metrics.csv. Returns the
// metrics as key=value lines.
std::string run_job(const Config& cfg, const Scenario& scenario,
                    const std::filesystem::path& model,
                    const std::filesystem::path& out_dir);

// Re-runs the scenario recorded in a run manifest into `out_dir`. The model
// must still match its recorded hash.
std::string replay_job(const std::filesystem::path& manifest_file,
                       const std::filesystem::path& out_dir);

// Metrics of an existing trajectory CSV, optionally with its timing CSV.
std::string metrics_job(const Config& cfg, const std::filesystem::path& traj_csv,
                        const std::filesystem::path& timing_csv = {});

// Every scenario with seeds 1..seeds, one run directory each, `jobs` runs at
// a time. Writes sweep.csv and returns the aggregate table.
std::string sweep_job(const Config& cfg, const std::vector<std::string>& scenarios,
                      int seeds, const std::filesystem::path& model,
                      const std::filesystem::path& out_dir, int jobs);

// Aggregates every run manifest below `dir` into report.csv and report.txt.
// Running it again on the same directory rewrites identical files.
std::string report_job(const std::filesystem::path& dir);

}  // namespace nnmpc

#endif  // NNMPC_CORE_JOBS_HPP_
