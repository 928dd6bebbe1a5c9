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

#include "core/jobs.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <sstream>
#include <thread>

#include "core/dataset.hpp"
#include "core/error.hpp"
#include "core/io.hpp"
#include "core/manifest.hpp"
#include "core/metrics.hpp"
#include "core/network.hpp"
#include "core/training.hpp"

namespace nnmpc {
namespace {

namespace fs = std::filesystem;

constexpr const char* kSimulationNote =
    "simulated plant; results are not hardware measurements";
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string num(double v) { return std::isnan(v) ? "nan" : format_number(v, 6); }

void make_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create directory " + dir.string() + ": " + ec.message());
}

std::string metrics_file_header() { return "scenario,seed,aborted," + metrics_csv_header() + "\n"; }

std::string metrics_file_row(const Scenario& s, bool aborted, const RunMetrics& m) {
  return s.name + "," + std::to_string(s.seed) + "," + (aborted ? "1" : "0") + "," +
         metrics_csv_row(m) + "\n";
}

struct RunOutcome {
  RunResult result;
  fs::path manifest;
};

RunOutcome run_into(const Config& cfg, const Scenario& scenario, const NetworkParams& net,
                    const fs::path& model, const fs::path& out_dir) {
  make_dir(out_dir);
  RunOutcome o;
  o.result = run_scenario(scenario, net, cfg);
  const RunResult& r = o.result;
  const fs::path traj = out_dir / "trajectory.csv";
  const fs::path timing = out_dir / "timing.csv";
  const fs::path text = out_dir / "metrics.txt";
  const fs::path csv = out_dir / "metrics.csv";
  write_text_file(traj, format_trajectory(r.trajectory));
  write_text_file(timing, format_timing(r.trajectory));
  std::string kv = format_metrics(r.metrics);
  kv += "aborted=" + std::string(r.aborted ? "1" : "0") + "\n";
  if (r.aborted) kv += "message=" + r.message + "\n";
  write_text_file(text, kv);
  write_text_file(csv, metrics_file_header() + metrics_file_row(scenario, r.aborted, r.metrics));

  Manifest m = make_manifest("run", dump_config(cfg));
  m.scenario = dump_scenario(scenario);
  m.seeds = {{"scenario", scenario.seed}};
  m.inputs = {file_ref("model", model, out_dir)};
  m.outputs = {file_ref("trajectory", traj, out_dir), file_ref("timing", timing, out_dir),
               file_ref("metrics", text, out_dir), file_ref("metrics_csv", csv, out_dir)};
  m.note = kSimulationNote;
  save_manifest(m, out_dir);
  o.manifest = manifest_path(out_dir, "run");
  return o;
}

// One metrics.csv row, looked up by column name.
struct MetricsRecord {
  std::string scenario;
  bool aborted = false;
  std::array<double, kJoints> settling{};
  std::array<double, kJoints> overshoot{};
  std::array<double, kJoints> sse{};
  double steps = 0, mean_solve = 0, max_solve = 0, over_budget = 0, violations = 0, failsafe = 0;
};

std::vector<MetricsRecord> parse_metrics_file(const std::string& text, const std::string& what) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::kSchema, what + ": empty metrics file");
  std::vector<std::string> header;
  for (std::string_view f : split_csv_line(line)) header.emplace_back(f);
  auto col = [&](const std::string& name) {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw Error(ErrorCode::kSchema, what + ": missing column " + name);
    return static_cast<std::size_t>(it - header.begin());
  };
  std::vector<MetricsRecord> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const std::vector<std::string_view> f = split_csv_line(line);
    if (f.size() != header.size()) throw Error(ErrorCode::kSchema, what + ": ragged row");
    auto value = [&](const std::string& name) {
      const std::string_view v = f[col(name)];
      return v == "nan" ? kNaN : parse_number(v, what + " " + name);
    };
    MetricsRecord r;
    r.scenario = std::string(f[col("scenario")]);
    r.aborted = f[col("aborted")] == "1";
    for (int i = 0; i < kJoints; ++i) {
      const std::string j = std::to_string(i + 1);
      r.settling[i] = value("settling_" + j);
      r.overshoot[i] = value("overshoot_" + j);
      r.sse[i] = value("sse_" + j);
    }
    r.steps = value("steps");
    r.mean_solve = value("mean_solve_ms");
    r.max_solve = value("max_solve_ms");
    r.over_budget = value("over_budget_steps");
    r.violations = value("violation_count");
    r.failsafe = value("failsafe_steps");
    out.push_back(r);
  }
  return out;
}

struct Aggregate {
  std::string csv;
  std::string table;
};

Aggregate aggregate(const std::vector<MetricsRecord>& records) {
  std::map<std::string, std::vector<const MetricsRecord*>> groups;
  for (const MetricsRecord& r : records) groups[r.scenario].push_back(&r);

  std::ostringstream csv, table;
  csv << "scenario,runs,settled_runs,";
  for (int i = 1; i <= kJoints; ++i) csv << "settling_" << i << ',';
  csv << "worst_settling,max_overshoot,mean_sse,mean_solve_ms,max_solve_ms,over_budget_pct,"
         "violations,failsafe_steps\n";
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-16s %4s %7s %7s %7s %7s %7s %7s %8s %9s %8s %8s %6s %5s\n",
                "scenario", "runs", "settled", "ts1", "ts2", "ts3", "ts4", "worst", "overshoot",
                "sse", "solve_ms", "max_ms", "over%", "viol");
  table << buf;

  for (const auto& [name, rows] : groups) {
    int settled_runs = 0;
    std::array<double, kJoints> ts_sum{};
    std::array<int, kJoints> ts_n{};
    double worst = 0.0, overshoot = 0.0, sse = 0.0, solve = 0.0, max_solve = kNaN;
    double steps = 0.0, over = 0.0, violations = 0.0, failsafe = 0.0;
    int solve_n = 0;
    for (const MetricsRecord* r : rows) {
      bool all = !r->aborted;
      for (int i = 0; i < kJoints; ++i) {
        if (std::isnan(r->settling[i])) {
          all = false;
          worst = kNaN;
        } else {
          ts_sum[i] += r->settling[i];
          ++ts_n[i];
          if (!std::isnan(worst)) worst = std::max(worst, r->settling[i]);
        }
        overshoot = std::max(overshoot, r->overshoot[i]);
        sse += r->sse[i] / (kJoints * rows.size());
      }
      if (all) ++settled_runs;
      if (!std::isnan(r->mean_solve)) {
        solve += r->mean_solve;
        ++solve_n;
        max_solve = std::isnan(max_solve) ? r->max_solve : std::max(max_solve, r->max_solve);
      }
      steps += r->steps;
      over += r->over_budget;
      violations += r->violations;
      failsafe += r->failsafe;
    }
    std::array<double, kJoints> ts{};
    for (int i = 0; i < kJoints; ++i) ts[i] = ts_n[i] > 0 ? ts_sum[i] / ts_n[i] : kNaN;
    const double mean_solve = solve_n > 0 ? solve / solve_n : kNaN;
    const double over_pct = steps > 0 ? 100.0 * over / steps : 0.0;

    csv << name << ',' << rows.size() << ',' << settled_runs << ',';
    for (int i = 0; i < kJoints; ++i) csv << num(ts[i]) << ',';
    csv << num(worst) << ',' << num(overshoot) << ',' << num(sse) << ',' << num(mean_solve) << ','
        << num(max_solve) << ',' << num(over_pct) << ',' << num(violations) << ','
        << num(failsafe) << '\n';
    std::snprintf(buf, sizeof buf,
                  "%-16s %4zu %7d %7.2f %7.2f %7.2f %7.2f %7.2f %8.2f%% %9.2e %8.3f %8.3f %6.2f %5.0f\n",
                  name.c_str(), rows.size(), settled_runs, ts[0], ts[1], ts[2], ts[3], worst,
                  overshoot, sse, mean_solve, max_solve, over_pct, violations);
    table << buf;
  }
  return {csv.str(), table.str()};
}

std::string run_dir_name(const Scenario& s) {
  return (s.name.empty() ? std::string("scenario") : s.name) + "-s" + std::to_string(s.seed);
}

}  // namespace

std::string collect_job(const Config& cfg, std::uint64_t seed, const fs::path& out_dir) {
  validate(cfg);
  make_dir(out_dir);
  const Dataset data = collect_data(cfg.excitation, cfg.plant, cfg.sim, seed);
  const fs::path csv = out_dir / "data.csv";
  save_dataset(data, csv);
  Manifest m = make_manifest("collect", dump_config(cfg));
  m.seeds = {{"collect", seed}};
  m.outputs = {file_ref("dataset", csv, out_dir),
               file_ref("dataset_metadata", metadata_path(csv), out_dir)};
  m.note = kSimulationNote;
  save_manifest(m, out_dir);
  return "rows=" + std::to_string(data.rows.size()) +
         " episodes=" + std::to_string(data.episodes.size()) +
         " discarded=" + std::to_string(data.discarded_episodes) + "\n";
}

std::string train_job(const Config& cfg, const fs::path& data_csv, const fs::path& out_dir) {
  validate(cfg);
  const Dataset data = load_dataset(data_csv);
  make_dir(out_dir);
  const TrainingResult result = train(data, cfg.training);
  const fs::path model = out_dir / "model.json";
  const fs::path log = out_dir / "training.csv";
  save_model(result.net, model);
  std::string losses = "epoch,train_loss,validation_loss\n";
  for (std::size_t e = 0; e < result.report.train_loss.size(); ++e) {
    losses += std::to_string(e + 1) + "," + format_number(result.report.train_loss[e], 9) + "," +
              format_number(result.report.validation_loss[e], 9) + "\n";
  }
  write_text_file(log, losses);

  Manifest m = make_manifest("train", dump_config(cfg));
  m.seeds = {{"collect", data.seed}, {"training", cfg.training.seed}};
  m.inputs = {file_ref("dataset", data_csv, out_dir),
              file_ref("dataset_metadata", metadata_path(data_csv), out_dir)};
  m.outputs = {file_ref("model", model, out_dir), file_ref("training_log", log, out_dir)};
  m.note = kSimulationNote;
  save_manifest(m, out_dir);

  const PredictionError err = prediction_error(result.net, data);
  const double ratio = (err.mse.array() / err.target_variance.array()).maxCoeff();
  return "train_rows=" + std::to_string(result.report.train_rows) +
         " validation_rows=" + std::to_string(result.report.validation_rows) +
         " train_loss=" + num(result.report.train_loss.back()) +
         " validation_loss=" + num(result.report.validation_loss.back()) +
         " max_mse_ratio=" + num(ratio) + "\n";
}

std::string run_job(const Config& cfg, const Scenario& scenario, const fs::path& model,
                    const fs::path& out_dir) {
  const NetworkParams net = load_model(model);
  const RunOutcome o = run_into(cfg, scenario, net, model, out_dir);
  if (o.result.aborted) throw Error(ErrorCode::kAborted, "run aborted: " + o.result.message);
  return format_metrics(o.result.metrics);
}

std::string replay_job(const fs::path& manifest_file, const fs::path& out_dir) {
  const Manifest m = load_manifest(manifest_file);
  if (m.command != "run") {
    throw Error(ErrorCode::kInvalidArgument,
                "manifest " + manifest_file.string() + " records \"" + m.command + "\", not a run");
  }
  const Config cfg = parse_config(m.config);
  const Scenario scenario = parse_scenario(m.scenario);
  const auto model = std::find_if(m.inputs.begin(), m.inputs.end(),
                                  [](const FileRef& r) { return r.role == "model"; });
  if (model == m.inputs.end()) throw Error(ErrorCode::kSchema, "manifest: no model input");
  const fs::path model_path = resolve(*model, manifest_file);
  if (file_sha256(model_path) != model->sha256) {
    throw Error(ErrorCode::kIo, "manifest: model " + model_path.string() + " has changed");
  }
  return run_job(cfg, scenario, model_path, out_dir);
}

std::string metrics_job(const Config& cfg, const fs::path& traj_csv, const fs::path& timing_csv) {
  Trajectory traj = parse_trajectory(read_text_file(traj_csv));
  if (!timing_csv.empty()) parse_timing(read_text_file(timing_csv), traj);
  return format_metrics(compute_metrics(traj, cfg.metrics, Limits::from(cfg.plant)));
}

std::string sweep_job(const Config& cfg, const std::vector<std::string>& scenarios, int seeds,
                      const fs::path& model, const fs::path& out_dir, int jobs) {
  if (scenarios.empty()) throw Error(ErrorCode::kInvalidArgument, "sweep: no scenarios");
  if (seeds < 1) throw Error(ErrorCode::kInvalidArgument, "sweep: seeds must be at least 1");
  if (jobs < 1) throw Error(ErrorCode::kInvalidArgument, "sweep: jobs must be at least 1");
  validate(cfg);
  const NetworkParams net = load_model(model);

  std::vector<Scenario> tasks;
  for (const std::string& name : scenarios) {
    const Scenario base = resolve_scenario(name);
    for (int s = 1; s <= seeds; ++s) {
      Scenario t = base;
      t.seed = static_cast<std::uint64_t>(s);
      tasks.push_back(t);
    }
  }
  make_dir(out_dir);

  std::vector<RunOutcome> outcomes(tasks.size());
  std::vector<std::string> errors(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++) {
      try {
        outcomes[i] = run_into(cfg, tasks[i], net, model, out_dir / run_dir_name(tasks[i]));
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
  };
  const int threads = std::min<int>(jobs, static_cast<int>(tasks.size()));
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (std::thread& t : pool) t.join();
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    if (!errors[i].empty()) {
      throw Error(ErrorCode::kAborted, "sweep: " + run_dir_name(tasks[i]) + ": " + errors[i]);
    }
  }

  std::string rows = metrics_file_header();
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    rows += metrics_file_row(tasks[i], outcomes[i].result.aborted, outcomes[i].result.metrics);
  }
  const Aggregate agg = aggregate(parse_metrics_file(rows, "sweep"));
  const fs::path csv = out_dir / "sweep.csv";
  const fs::path table = out_dir / "sweep.txt";
  write_text_file(csv, rows);
  write_text_file(table, agg.table);

  Manifest m = make_manifest("sweep", dump_config(cfg));
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    m.seeds.emplace_back(run_dir_name(tasks[i]), tasks[i].seed);
  }
  m.inputs = {file_ref("model", model, out_dir)};
  for (const RunOutcome& o : outcomes) m.outputs.push_back(file_ref("run_manifest", o.manifest, out_dir));
  m.outputs.push_back(file_ref("runs", csv, out_dir));
  m.outputs.push_back(file_ref("summary", table, out_dir));
  m.note = kSimulationNote;
  save_manifest(m, out_dir);
  return agg.table;
}

std::string report_job(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error(ErrorCode::kIo, "report: not a directory: " + dir.string());
  std::vector<fs::path> manifests;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().filename() == "run.manifest.json") {
      manifests.push_back(entry.path());
    }
  }
  if (manifests.empty()) throw Error(ErrorCode::kInvalidArgument, "report: no run manifests under " + dir.string());
  std::sort(manifests.begin(), manifests.end());

  std::vector<MetricsRecord> records;
  std::vector<FileRef> inputs;
  for (const fs::path& path : manifests) {
    const Manifest m = load_manifest(path);
    const auto ref = std::find_if(m.outputs.begin(), m.outputs.end(),
                                  [](const FileRef& r) { return r.role == "metrics_csv"; });
    if (ref == m.outputs.end()) throw Error(ErrorCode::kSchema, path.string() + ": no metrics_csv output");
    const fs::path csv = resolve(*ref, path);
    const std::string text = read_text_file(csv);
    if (sha256_hex(text) != ref->sha256) {
      throw Error(ErrorCode::kIo, csv.string() + " does not match its recorded hash");
    }
    const std::vector<MetricsRecord> rows = parse_metrics_file(text, csv.string());
    records.insert(records.end(), rows.begin(), rows.end());
    inputs.push_back(file_ref("metrics_csv", csv, dir));
  }
  const Aggregate agg = aggregate(records);
  const fs::path csv = dir / "report.csv";
  const fs::path table = dir / "report.txt";
  write_text_file(csv, agg.csv);
  write_text_file(table, agg.table);
  Manifest m = make_manifest("report", "{}\n");
  m.inputs = std::move(inputs);
  m.outputs = {file_ref("report", csv, dir), file_ref("summary", table, dir)};
  m.note = kSimulationNote;
  save_manifest(m, dir);
  return agg.table;
}

}  // namespace nnmpc
