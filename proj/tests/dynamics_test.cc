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

// Tests for core/dynamics.

#include "core/dynamics.hpp"

#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>
#include <gmock/gmock.h>
#include <gtest/gtest.h>

#include "core/error.hpp"
#include "test_util.hpp"

namespace nnmpc {
namespace {

using ::nnmpc::testing::neutral_params;
using ::nnmpc::testing::one_link_params;
using ::nnmpc::testing::random_state;
using ::nnmpc::testing::undamped;

constexpr double kDeg = 3.14159265358979323846 / 180.0;

// ------------------------------- structure -----------------------------------

TEST(DynamicsTest, MassMatrixSymmetricPositiveDefinite) {
  const DynamicsParams p = default_dynamics_params();
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 1000; ++trial) {
    const Mat4 m = mass_matrix(random_state(rng, p).q, p);
    EXPECT_LT((m - m.transpose()).cwiseAbs().maxCoeff(), 1e-12);
    Eigen::SelfAdjointEigenSolver<Mat4> eig(m);
    EXPECT_GT(eig.eigenvalues().minCoeff(), 0.0);
  }
}

TEST(DynamicsTest, DampingIsPassive) {
  const DynamicsParams p = default_dynamics_params();
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 1000; ++trial) {
    const Vec4 qd = random_state(rng, p, 5.0).qd;
    EXPECT_GE(qd.dot(damping_torque(qd, p)), 0.0);
    EXPECT_GE(qd.dot(friction_torque(qd, p)), 0.0);
  }
}

TEST(DynamicsTest, MdotMinusTwoCIsSkewSymmetric) {
  const DynamicsParams p = default_dynamics_params();
  std::mt19937_64 rng(13);
  std::normal_distribution<double> normal;
  const double h = 1e-6;
  for (int trial = 0; trial < 200; ++trial) {
    const JointState s = random_state(rng, p);
    const Mat4 mdot =
        (mass_matrix(s.q + h * s.qd, p) - mass_matrix(s.q - h * s.qd, p)) / (2.0 * h);
    const Mat4 n = mdot - 2.0 * coriolis_matrix(s, p);
    Vec4 x;
    for (int i = 0; i < kJoints; ++i) x(i) = normal(rng);
    EXPECT_LT(std::abs(x.dot(n * x)), 1e-9);
  }
}

TEST(DynamicsTest, MassMatrixDerivativesMatchFiniteDifferences) {
  const DynamicsParams p = default_dynamics_params();
  const Vec4 q(0.4, 1.1, 2.0, 0.7);
  const auto dm = mass_matrix_derivatives(q, p);
  const double h = 1e-6;
  for (int k = 0; k < kJoints; ++k) {
    const Vec4 e = Vec4::Unit(k);
    const Mat4 fd = (mass_matrix(q + h * e, p) - mass_matrix(q - h * e, p)) / (2.0 * h);
    EXPECT_LT((fd - dm[k]).cwiseAbs().maxCoeff(), 1e-8) << "joint " << k;
  }
}

// ---------------------------- forward dynamics --------------------------------

TEST(DynamicsTest, HoldTorqueGivesStaticEquilibrium) {
  const DynamicsParams p = default_dynamics_params();
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 100; ++trial) {
    JointState s = random_state(rng, p);
    s.qd.setZero();
    const Vec4 tau = restoring_torque(s.q, p) + friction_torque(s.qd, p);
    EXPECT_LT(forward_dynamics(s, tau, p).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(DynamicsTest, NeutralArmAtRestStaysAtRest) {
  const DynamicsParams p = neutral_params();
  const JointState s{Vec4(0.3, 1.2, 2.1, 0.9), Vec4::Zero()};
  EXPECT_LT(forward_dynamics(s, Vec4::Zero(), p).cwiseAbs().maxCoeff(), 1e-12);
}

// Closed-form pendulum with drag, added mass and buoyancy.
TEST(DynamicsTest, OneLinkMatchesAnalyticPendulum) {
  const DynamicsParams p = one_link_params();
  const LinkParams& l = p.links[0];
  const double inertia = p.rotor_inertia(0) + (l.mass + l.added_mass) * l.com.squaredNorm() +
                         l.inertia(1, 1);
  const double moment = l.mass * l.com.x() - p.fluid_density * l.volume * l.cob.x();
  std::mt19937_64 rng(19);
  std::uniform_real_distribution<double> angle(-3.0, 3.0);
  std::uniform_real_distribution<double> speed(-4.0, 4.0);
  std::uniform_real_distribution<double> torque(-2.0, 2.0);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    JointState s;
    for (int i = 0; i < kJoints; ++i) {
      s.q(i) = angle(rng);
      s.qd(i) = speed(rng);
    }
    Vec4 tau;
    for (int i = 0; i < kJoints; ++i) tau(i) = torque(rng);
    const double w = s.qd(0);
    const double resist = p.drag_linear(0) * w + p.drag_quadratic(0) * std::abs(w) * w +
                          p.friction_viscous(0) * w +
                          p.friction_coulomb(0) * std::tanh(w / p.coulomb_velocity);
    const double expected =
        (tau(0) - resist - p.gravity * moment * std::cos(s.q(0))) / inertia;
    worst = std::max(worst, std::abs(forward_dynamics(s, tau, p)(0) - expected));
  }
  EXPECT_LT(worst, 1e-9);
}

TEST(DynamicsTest, NonFiniteTorqueIsRejected) {
  const DynamicsParams p = default_dynamics_params();
  const Vec4 tau(0.0, std::nan(""), 0.0, 0.0);
  try {
    forward_dynamics(JointState{}, tau, p);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInputDomain);
  }
}

// --------------------------------- step ---------------------------------------

TEST(DynamicsTest, NeutralFrictionlessZeroTorqueIsStationary) {
  const DynamicsParams p = neutral_params();
  const JointState s{Vec4(0.5, 1.0, 1.5, 2.0), Vec4::Zero()};
  const JointState next = step(s, Vec4::Zero(), p, SimConfig{});
  EXPECT_LT((next.q - s.q).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT(next.qd.cwiseAbs().maxCoeff(), 1e-12);
}

TEST(DynamicsTest, HalvingInnerStepConverges) {
  const DynamicsParams p = default_dynamics_params();
  SimConfig coarse;
  SimConfig fine;
  fine.inner_step = coarse.inner_step / 2.0;
  JointState a{Vec4(0.5, 0.8, 1.2, 1.0), Vec4::Zero()};
  JointState b = a;
  const Vec4 tau(0.8, 1.5, 0.4, -0.3);
  for (int k = 0; k < 20; ++k) {
    a = step(a, tau, p, coarse, k * coarse.control_period);
    b = step(b, tau, p, fine, k * fine.control_period);
  }
  EXPECT_LT((a.q - b.q).cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_LT((a.qd - b.qd).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(DynamicsTest, UndampedPendulumConservesEnergy) {
  const DynamicsParams p = undamped(one_link_params());
  SimConfig cfg;
  cfg.inner_step = 1e-3;
  JointState s{Vec4(0.3, 0.0, 0.0, 0.0), Vec4(1.5, 0.0, 0.0, 0.0)};
  const double e0 = mechanical_energy(s, p);
  double drift = 0.0;
  for (int k = 0; k < 200; ++k) {
    s = step(s, Vec4::Zero(), p, cfg, k * cfg.control_period);
    drift = std::max(drift, std::abs(mechanical_energy(s, p) - e0));
  }
  EXPECT_LT(drift / std::abs(e0), 1e-3);
}

TEST(DynamicsTest, StepIsDeterministic) {
  const DynamicsParams p = default_dynamics_params();
  const JointState s{Vec4(0.5, 0.8, 1.2, 1.0), Vec4(0.1, -0.2, 0.3, 0.0)};
  const Vec4 tau(1.0, 2.0, -1.0, 0.5);
  EXPECT_EQ(step(s, tau, p, SimConfig{}), step(s, tau, p, SimConfig{}));
}

TEST(DynamicsTest, JointLimitClampsAndLogs) {
  const DynamicsParams p = default_dynamics_params();
  const JointState s{Vec4(0.5, 0.5, 0.5, 3.49), Vec4(0.0, 0.0, 0.0, 1.0)};
  StepLog log;
  const JointState next = step(s, Vec4(0.0, 3.0, 1.0, 6.0), p, SimConfig{}, 0.0, &log);
  EXPECT_EQ(next.q(3), p.q_max(3));
  EXPECT_LE(next.qd(3), 0.0);
  EXPECT_GT(log.clamp_events, 0);
}

TEST(DynamicsTest, InvalidConfigurationsAreRejected) {
  DynamicsParams p = default_dynamics_params();
  EXPECT_NO_THROW(validate(p));
  p.links[2].mass = -1.0;
  EXPECT_THROW(validate(p), Error);
  p = default_dynamics_params();
  p.drag_linear(1) = -0.1;
  EXPECT_THROW(validate(p), Error);
  SimConfig cfg;
  cfg.inner_step = 0.003;
  EXPECT_THROW(validate(cfg), Error);
  cfg.inner_step = 0.1;
  EXPECT_THROW(validate(cfg), Error);
}

// -------------------------------- payload -------------------------------------

TEST(PayloadTest, EmptyPayloadLeavesParamsUnchanged) {
  const DynamicsParams p = default_dynamics_params();
  EXPECT_EQ(attach_payload(p, PayloadSpec{}), p);
}

TEST(PayloadTest, PointMassAtTipAddsMassAndParallelAxisInertia) {
  const DynamicsParams p = default_dynamics_params();
  PayloadSpec payload;
  payload.mass = 0.5;
  const DynamicsParams out = attach_payload(p, payload);
  for (int i = 0; i + 1 < kJoints; ++i) EXPECT_EQ(out.links[i], p.links[i]);
  const LinkParams& before = p.links[3];
  const LinkParams& after = out.links[3];
  EXPECT_EQ(after.mass, before.mass + 0.5);
  const Vec3 com = (before.mass * before.com + 0.5 * before.offset) / after.mass;
  EXPECT_LT((after.com - com).norm(), 1e-15);
  // Parallel-axis: inertia about the new centre of mass.
  auto shift = [](double m, const Vec3& r) {
    return Mat3(m * (r.squaredNorm() * Mat3::Identity() - r * r.transpose()));
  };
  const Mat3 expected =
      before.inertia + shift(before.mass, before.com - com) + shift(0.5, before.offset - com);
  EXPECT_LT((after.inertia - expected).cwiseAbs().maxCoeff(), 1e-15);
}

// The payload's effect on M(q) equals that of a separate point mass whose
// Jacobian comes from finite differences of its position. Added mass rides
// with the link's centre of mass, so it is left out here.
TEST(PayloadTest, CompositeInertiaMatchesTwoBodyComputation) {
  DynamicsParams p = default_dynamics_params();
  p.links[kJoints - 1].added_mass = 0.0;
  PayloadSpec payload;
  payload.mass = 1.0;
  payload.offset = Vec3(0.1, 0.0, 0.0);
  const DynamicsParams out = attach_payload(p, payload);
  auto point = [&](const Vec4& q) -> Vec3 {
    const auto joints = joint_positions(q, p);
    const Vec3 dir = (joints[kJoints] - joints[kJoints - 1]).normalized();
    return joints[kJoints] + 0.1 * dir;
  };
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 20; ++trial) {
    const Vec4 q = random_state(rng, p).q;
    Eigen::Matrix<double, 3, kJoints> jac;
    const double h = 1e-6;
    for (int k = 0; k < kJoints; ++k) {
      const Vec4 e = Vec4::Unit(k);
      jac.col(k) = (point(q + h * e) - point(q - h * e)) / (2.0 * h);
    }
    const Mat4 expected = mass_matrix(q, p) + payload.mass * jac.transpose() * jac;
    EXPECT_LT((mass_matrix(q, out) - expected).cwiseAbs().maxCoeff(), 1e-8);
  }
}

TEST(PayloadTest, CapacityIsEnforced) {
  PayloadSpec payload;
  payload.mass = 2.5;
  try {
    attach_payload(default_dynamics_params(), payload);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kCapacityExceeded);
  }
  payload.mass = kPayloadCapacity;
  EXPECT_NO_THROW(attach_payload(default_dynamics_params(), payload));
}

TEST(PayloadTest, BuoyantPayloadMovesCentreOfBuoyancy) {
  const DynamicsParams p = default_dynamics_params();
  PayloadSpec payload;
  payload.volume = 1e-4;
  const DynamicsParams out = attach_payload(p, payload);
  EXPECT_EQ(out.links[3].mass, p.links[3].mass);
  EXPECT_DOUBLE_EQ(out.links[3].volume, p.links[3].volume + 1e-4);
  EXPECT_GT(out.links[3].cob.x(), p.links[3].cob.x());
}

// --------------------------------- sensor -------------------------------------

TEST(SensorTest, ZeroNoiseIsIdentity) {
  SimConfig cfg;
  cfg.noise_q = 0.0;
  const JointState s{Vec4(0.1, 0.2, 0.3, 0.4), Vec4(1, 2, 3, 4)};
  EXPECT_EQ(sensed_state(s, cfg, 5), s);
}

TEST(SensorTest, SeedDeterminesNoise) {
  SimConfig cfg;
  const JointState s{Vec4(0.1, 0.2, 0.3, 0.4), Vec4::Zero()};
  EXPECT_EQ(sensed_state(s, cfg, 42), sensed_state(s, cfg, 42));
  EXPECT_FALSE(sensed_state(s, cfg, 42) == sensed_state(s, cfg, 43));
}

TEST(SensorTest, NoiseAmplitudeMatchesConfiguration) {
  SimConfig cfg;
  cfg.noise_q = 0.1 * kDeg;
  const JointState s{Vec4::Constant(1.0), Vec4::Zero()};
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 25000; ++seed) {
    worst = std::max(worst, (sensed_state(s, cfg, seed).q - s.q).cwiseAbs().maxCoeff());
  }
  EXPECT_LE(worst, 0.1 * kDeg);
  EXPECT_GE(worst, 0.099 * kDeg);
}

}  // namespace
}  // namespace nnmpc
