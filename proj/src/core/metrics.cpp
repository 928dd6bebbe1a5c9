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

#include "core/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "core/error.hpp"
#include "core/io.hpp"

namespace nnmpc {
namespace {

constexpr int kDigits = 9;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<std::string> core_columns() {
  std::vector<std::string> cols = {"t"};
  for (const char* prefix : {"q", "qd", "u", "r"}) {
    for (int i = 1; i <= kJoints; ++i) cols.push_back(prefix + std::to_string(i));
  }
  cols.push_back("cost");
  return cols;
}

const std::vector<std::string> kDiagnosticColumns = {"evals", "term", "obj_before",
                                                     "obj_after", "failsafe", "clamp"};

std::string num(double v) { return format_number(v, kDigits); }
// Round-trip precision for the trajectory data columns.
std::string exact(double v) { return format_number(v, 17); }

std::vector<std::string_view> lines_of(const std::string& text) {
  std::vector<std::string_view> lines;
  std::string_view rest(text);
  while (!rest.empty()) {
    const std::size_t nl = rest.find('\n');
    std::string_view line = rest.substr(0, nl);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!line.empty()) lines.push_back(line);
    if (nl == std::string_view::npos) break;
    rest.remove_prefix(nl + 1);
  }
  return lines;
}

std::map<std::string, std::size_t> header_index(std::string_view header) {
  std::map<std::string, std::size_t> idx;
  const auto cols = split_csv_line(header);
  for (std::size_t i = 0; i < cols.size(); ++i) idx[std::string(cols[i])] = i;
  return idx;
}

}  // namespace

std::string format_trajectory(const Trajectory& traj) {
  std::ostringstream out;
  const auto cols = core_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  for (const std::string& c : kDiagnosticColumns) out << ',' << c;
  out << '\n';
  for (const TrajectoryRow& row : traj.rows) {
    out << exact(row.t);
    for (const Vec4* v : {&row.state.q, &row.state.qd, &row.u, &row.r}) {
      for (int i = 0; i < kJoints; ++i) out << ',' << exact((*v)(i));
    }
    out << ',' << num(row.cost) << ',' << row.evaluations << ','
        << (row.termination.empty() ? "none" : row.termination) << ','
        << num(row.objective_before) << ',' << num(row.objective_after) << ','
        << (row.failsafe ? 1 : 0) << ',' << row.clamp_events << '\n';
  }
  return out.str();
}

Trajectory parse_trajectory(const std::string& csv) {
  const auto lines = lines_of(csv);
  if (lines.empty()) throw Error(ErrorCode::kSchema, "trajectory: empty file");
  const auto idx = header_index(lines[0]);
  for (const std::string& c : core_columns()) {
    if (!idx.count(c)) throw Error(ErrorCode::kSchema, "trajectory: missing column \"" + c + "\"");
  }
  auto col = [&](const std::string& name) -> std::ptrdiff_t {
    const auto it = idx.find(name);
    return it == idx.end() ? -1 : static_cast<std::ptrdiff_t>(it->second);
  };
  Trajectory traj;
  for (std::size_t n = 1; n < lines.size(); ++n) {
    const auto fields = split_csv_line(lines[n]);
    if (fields.size() != idx.size()) {
      throw Error(ErrorCode::kSchema, "trajectory: line " + std::to_string(n + 1) +
                                          " has " + std::to_string(fields.size()) + " fields");
    }
    auto get = [&](const std::string& name) {
      return parse_number(fields[idx.at(name)], "trajectory column " + name);
    };
    TrajectoryRow row;
    row.t = get("t");
    for (int i = 0; i < kJoints; ++i) {
      const std::string j = std::to_string(i + 1);
      row.state.q(i) = get("q" + j);
      row.state.qd(i) = get("qd" + j);
      row.u(i) = get("u" + j);
      row.r(i) = get("r" + j);
    }
    row.cost = get("cost");
    if (col("evals") >= 0) row.evaluations = static_cast<int>(get("evals"));
    if (col("term") >= 0) row.termination = std::string(fields[col("term")]);
    if (col("obj_before") >= 0) row.objective_before = get("obj_before");
    if (col("obj_after") >= 0) row.objective_after = get("obj_after");
    if (col("failsafe") >= 0) row.failsafe = get("failsafe") != 0.0;
    if (col("clamp") >= 0) row.clamp_events = static_cast<int>(get("clamp"));
    traj.rows.push_back(row);
  }
  if (traj.rows.empty()) throw Error(ErrorCode::kSchema, "trajectory: no rows");
  return traj;
}

std::string format_timing(const Trajectory& traj) {
  std::ostringstream out;
  out << "t,solve_ms\n";
  for (std::size_t k = 0; k < traj.rows.size() && k < traj.solve_ms.size(); ++k) {
    out << num(traj.rows[k].t) << ',' << num(traj.solve_ms[k]) << '\n';
  }
  return out.str();
}

void parse_timing(const std::string& csv, Trajectory& traj) {
  const auto lines = lines_of(csv);
  if (lines.empty()) throw Error(ErrorCode::kSchema, "timing: empty file");
  const auto idx = header_index(lines[0]);
  if (!idx.count("solve_ms")) throw Error(ErrorCode::kSchema, "timing: missing column \"solve_ms\"");
  std::vector<double> ms;
  for (std::size_t n = 1; n < lines.size(); ++n) {
    const auto fields = split_csv_line(lines[n]);
    if (fields.size() != idx.size()) throw Error(ErrorCode::kSchema, "timing: ragged line");
    ms.push_back(parse_number(fields[idx.at("solve_ms")], "timing column solve_ms"));
  }
  if (ms.size() != traj.rows.size()) {
    throw Error(ErrorCode::kSchema, "timing: row count differs from the trajectory");
  }
  traj.solve_ms = std::move(ms);
}

bool RunMetrics::all_settled() const {
  return std::all_of(settled.begin(), settled.end(), [](bool s) { return s; });
}

double RunMetrics::max_settling_time() const {
  if (!all_settled()) return kNaN;
  return *std::max_element(settling_time.begin(), settling_time.end());
}

RunMetrics compute_metrics(const Trajectory& traj, const MetricsConfig& cfg,
                           const Limits& limits) {
  validate(cfg);
  if (traj.rows.empty()) throw Error(ErrorCode::kSchema, "metrics: empty trajectory");
  const auto& rows = traj.rows;
  const std::size_t n = rows.size();
  RunMetrics m;
  m.steps = static_cast<int>(n);
  const double t0 = rows.front().t;
  m.duration = n > 1 ? rows.back().t - t0 + (rows[1].t - rows[0].t) : 0.0;

  const std::size_t tail = std::min(
      n - 1, static_cast<std::size_t>(std::floor(static_cast<double>(n) * (1.0 - cfg.steady_fraction))));
  for (int i = 0; i < kJoints; ++i) {
    const double r = rows.back().r(i);
    const double q0 = rows.front().state.q(i);
    const double step = r - q0;
    const double band = std::max(cfg.band * std::abs(step), cfg.band_floor);

    std::size_t enter = n;
    for (std::size_t k = n; k-- > 0;) {
      if (std::abs(rows[k].state.q(i) - r) > band) break;
      enter = k;
    }
    m.settled[i] = enter < n;
    m.settling_time[i] = m.settled[i] ? rows[enter].t - t0 : kNaN;

    double peak = 0.0;
    if (step != 0.0) {
      const double dir = step > 0.0 ? 1.0 : -1.0;
      for (const TrajectoryRow& row : rows) peak = std::max(peak, dir * (row.state.q(i) - r));
      m.overshoot[i] = 100.0 * peak / std::abs(step);
    } else {
      m.overshoot[i] = 0.0;
    }

    double sum = 0.0;
    for (std::size_t k = tail; k < n; ++k) sum += std::abs(rows[k].r(i) - rows[k].state.q(i));
    m.steady_state_error[i] = sum / static_cast<double>(n - tail);
  }

  for (const TrajectoryRow& row : rows) {
    for (int i = 0; i < kJoints; ++i) {
      if (!(row.u(i) >= limits.tau_min(i) && row.u(i) <= limits.tau_max(i))) {
        ++m.violation_count;
        break;
      }
    }
    if (row.failsafe) ++m.failsafe_steps;
    m.clamp_events += row.clamp_events;
  }

  if (traj.solve_ms.size() == n) {
    double sum = 0.0;
    for (double ms : traj.solve_ms) {
      sum += ms;
      m.max_solve_ms = std::max(m.max_solve_ms, ms);
      if (ms > cfg.budget_ms) ++m.over_budget_steps;
    }
    m.mean_solve_ms = sum / static_cast<double>(n);
  } else {
    m.mean_solve_ms = kNaN;
    m.max_solve_ms = kNaN;
  }
  return m;
}

std::string format_metrics(const RunMetrics& m) {
  std::ostringstream out;
  for (int i = 0; i < kJoints; ++i) {
    const std::string j = std::to_string(i + 1);
    out << "settling_time_" << j << '=' << (m.settled[i] ? num(m.settling_time[i]) : "unsettled")
        << '\n';
  }
  for (int i = 0; i < kJoints; ++i) out << "overshoot_pct_" << i + 1 << '=' << num(m.overshoot[i]) << '\n';
  for (int i = 0; i < kJoints; ++i) {
    out << "steady_state_error_" << i + 1 << '=' << num(m.steady_state_error[i]) << '\n';
  }
  out << "duration=" << num(m.duration) << '\n'
      << "steps=" << m.steps << '\n'
      << "mean_solve_ms=" << num(m.mean_solve_ms) << '\n'
      << "max_solve_ms=" << num(m.max_solve_ms) << '\n'
      << "over_budget_steps=" << m.over_budget_steps << '\n'
      << "violation_count=" << m.violation_count << '\n'
      << "failsafe_steps=" << m.failsafe_steps << '\n'
      << "clamp_events=" << m.clamp_events << '\n';
  return out.str();
}

std::string metrics_csv_header() {
  std::ostringstream out;
  for (int i = 1; i <= kJoints; ++i) out << "settling_" << i << ',';
  for (int i = 1; i <= kJoints; ++i) out << "overshoot_" << i << ',';
  for (int i = 1; i <= kJoints; ++i) out << "sse_" << i << ',';
  out << "duration,steps,mean_solve_ms,max_solve_ms,over_budget_steps,violation_count,"
         "failsafe_steps,clamp_events";
  return out.str();
}

std::string metrics_csv_row(const RunMetrics& m) {
  std::ostringstream out;
  for (int i = 0; i < kJoints; ++i) out << (m.settled[i] ? num(m.settling_time[i]) : "nan") << ',';
  for (int i = 0; i < kJoints; ++i) out << num(m.overshoot[i]) << ',';
  for (int i = 0; i < kJoints; ++i) out << num(m.steady_state_error[i]) << ',';
  out << num(m.duration) << ',' << m.steps << ',' << num(m.mean_solve_ms) << ','
      << num(m.max_solve_ms) << ',' << m.over_budget_steps << ',' << m.violation_count << ','
      << m.failsafe_steps << ',' << m.clamp_events;
  return out.str();
}

}  // namespace nnmpc
