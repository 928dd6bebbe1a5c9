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

// Tests for core/metrics.

#include "core/metrics.hpp"

#include <cmath>

#include <gmock/gmock.h>
#include <gtest/gtest.h>

#include "core/error.hpp"

namespace nnmpc {
namespace {

using ::testing::HasSubstr;

constexpr double kPeriod = 0.05;

// Every joint follows q(t) = r + (q0 - r) * f(t).
template <typename F>
Trajectory response(double q0, double r, double duration, F f) {
  Trajectory traj;
  const int n = static_cast<int>(std::lround(duration / kPeriod));
  for (int k = 0; k < n; ++k) {
    TrajectoryRow row;
    row.t = k * kPeriod;
    row.state.q = Vec4::Constant(r + (q0 - r) * f(row.t));
    row.r = Vec4::Constant(r);
    row.termination = "radius-converged";
    traj.rows.push_back(row);
  }
  return traj;
}

TEST(MetricsTest, ConstantTrajectoryOnReference) {
  const Trajectory traj = response(1.0, 1.0, 2.0, [](double) { return 0.0; });
  const RunMetrics m = compute_metrics(traj, MetricsConfig{}, Limits{});
  for (int i = 0; i < kJoints; ++i) {
    EXPECT_TRUE(m.settled[i]);
    EXPECT_EQ(m.settling_time[i], 0.0);
    EXPECT_EQ(m.overshoot[i], 0.0);
    EXPECT_EQ(m.steady_state_error[i], 0.0);
  }
  EXPECT_EQ(m.steps, 40);
  EXPECT_NEAR(m.duration, 2.0, 1e-12);
  EXPECT_TRUE(std::isnan(m.mean_solve_ms));
}

TEST(MetricsTest, FirstOrderSettlingTime) {
  // 2 % band of a first-order lag: tau * ln 50.
  const double tau = 0.5;
  const Trajectory traj = response(0.0, 1.0, 6.0, [&](double t) { return std::exp(-t / tau); });
  const RunMetrics m = compute_metrics(traj, MetricsConfig{}, Limits{});
  for (int i = 0; i < kJoints; ++i) {
    ASSERT_TRUE(m.settled[i]);
    EXPECT_NEAR(m.settling_time[i], tau * std::log(50.0), kPeriod);
    EXPECT_EQ(m.overshoot[i], 0.0);
  }
  EXPECT_TRUE(m.all_settled());
  EXPECT_NEAR(m.max_settling_time(), tau * std::log(50.0), kPeriod);
}

TEST(MetricsTest, DampedOscillationOvershoot) {
  const double zeta = 0.3, wn = 4.0;
  const double wd = wn * std::sqrt(1.0 - zeta * zeta);
  const double phi = std::atan2(zeta, std::sqrt(1.0 - zeta * zeta));
  auto f = [&](double t) {
    return std::exp(-zeta * wn * t) * std::cos(wd * t - phi) / std::cos(phi);
  };
  // Sample exactly at the first peak so the discrete peak is the true one.
  const double t_peak = M_PI / wd;
  Trajectory traj = response(0.0, 1.0, 8.0, f);
  traj.rows[1].t = t_peak;
  traj.rows[1].state.q = Vec4::Constant(1.0 - f(t_peak));
  const RunMetrics m = compute_metrics(traj, MetricsConfig{}, Limits{});
  const double expected = 100.0 * std::exp(-zeta * M_PI / std::sqrt(1.0 - zeta * zeta));
  for (int i = 0; i < kJoints; ++i) EXPECT_NEAR(m.overshoot[i], expected, 1e-6);
}

TEST(MetricsTest, UnsettledWhenLeavingBandAtEnd) {
  Trajectory traj = response(0.0, 1.0, 2.0, [](double) { return 0.0; });
  traj.rows.back().state.q(2) = 0.5;
  const RunMetrics m = compute_metrics(traj, MetricsConfig{}, Limits{});
  EXPECT_FALSE(m.settled[2]);
  EXPECT_TRUE(std::isnan(m.settling_time[2]));
  EXPECT_TRUE(std::isnan(m.max_settling_time()));
  EXPECT_THAT(format_metrics(m), HasSubstr("settling_time_3=unsettled"));
}

TEST(MetricsTest, BandFloorApplies) {
  // A 0.1 rad step has a 2 mrad band, the floor widens it to 10 mrad.
  Trajectory traj = response(0.9, 1.0, 2.0, [](double) { return 0.0; });
  traj.rows.front().state.q = Vec4::Constant(0.9);
  traj.rows[10].state.q = Vec4::Constant(0.995);
  MetricsConfig cfg;
  EXPECT_LT(compute_metrics(traj, cfg, Limits{}).settling_time[0], 0.1);
  cfg.band_floor = 1e-3;
  EXPECT_NEAR(compute_metrics(traj, cfg, Limits{}).settling_time[0], 0.55, 1e-12);
}

TEST(MetricsTest, CountsViolationsFailsafeAndBudget) {
  Trajectory traj = response(1.0, 1.0, 1.0, [](double) { return 0.0; });
  traj.rows[3].u = Vec4(0.0, 6.5, 0.0, -7.0);
  traj.rows[4].failsafe = true;
  traj.rows[5].clamp_events = 2;
  traj.solve_ms.assign(traj.rows.size(), 1.0);
  traj.solve_ms[7] = 80.0;
  const RunMetrics m = compute_metrics(traj, MetricsConfig{}, Limits{});
  EXPECT_EQ(m.violation_count, 1);
  EXPECT_EQ(m.failsafe_steps, 1);
  EXPECT_EQ(m.clamp_events, 2);
  EXPECT_EQ(m.over_budget_steps, 1);
  EXPECT_EQ(m.max_solve_ms, 80.0);
  EXPECT_NEAR(m.mean_solve_ms, (19.0 + 80.0) / 20.0, 1e-12);
}

TEST(MetricsTest, EmptyTrajectoryRejected) {
  EXPECT_THROW(compute_metrics(Trajectory{}, MetricsConfig{}, Limits{}), Error);
}

TEST(TrajectoryCsvTest, RoundTrip) {
  Trajectory traj = response(0.0, 1.0, 1.0, [](double t) { return std::exp(-t); });
  traj.rows[2].failsafe = true;
  traj.rows[3].evaluations = 42;
  traj.rows[4].u = Vec4(0.125, -1.5, 2.0, 6.0);
  const std::string csv = format_trajectory(traj);
  const Trajectory back = parse_trajectory(csv);
  ASSERT_EQ(back.rows.size(), traj.rows.size());
  EXPECT_TRUE(back.rows[2].failsafe);
  EXPECT_EQ(back.rows[3].evaluations, 42);
  EXPECT_EQ(back.rows[4].u, traj.rows[4].u);
  EXPECT_EQ(back.rows[1].termination, "radius-converged");
  EXPECT_EQ(format_trajectory(back), csv);
}

TEST(TrajectoryCsvTest, TimingRoundTrip) {
  Trajectory traj = response(0.0, 1.0, 0.5, [](double) { return 0.0; });
  for (std::size_t k = 0; k < traj.rows.size(); ++k) traj.solve_ms.push_back(0.5 + k);
  Trajectory back = parse_trajectory(format_trajectory(traj));
  parse_timing(format_timing(traj), back);
  EXPECT_EQ(back.solve_ms.size(), traj.solve_ms.size());
  EXPECT_NEAR(back.solve_ms[3], 3.5, 1e-9);
}

TEST(TrajectoryCsvTest, MissingCoreColumnIsSchemaError) {
  try {
    parse_trajectory("t,q1,q2\n0,0,0\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSchema);
  }
}

TEST(MetricsCsvTest, HeaderMatchesRow) {
  const Trajectory traj = response(0.0, 1.0, 1.0, [](double) { return 0.0; });
  const RunMetrics m = compute_metrics(traj, MetricsConfig{}, Limits{});
  auto count = [](const std::string& s) { return std::count(s.begin(), s.end(), ','); };
  EXPECT_EQ(count(metrics_csv_header()), count(metrics_csv_row(m)));
}

}  // namespace
}  // namespace nnmpc
