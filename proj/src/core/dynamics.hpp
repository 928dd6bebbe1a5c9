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

// Rigid-body model of a four-joint underwater arm:
//
//   M(q) qdd + C(q, qd) qd + D(qd) qd + eta(q) + f(qd) = tau
//
// M includes link added mass and reflected rotor inertia, C is built from the
// Christoffel symbols of M, D is per-joint linear plus quadratic drag, eta is
// gravity minus buoyancy and f is viscous plus smoothed Coulomb friction.

#ifndef NNMPC_CORE_DYNAMICS_HPP_
#define NNMPC_CORE_DYNAMICS_HPP_

#include <array>
#include <cstdint>
#include <string>

#include "core/types.hpp"

namespace nnmpc {

struct LinkParams {
  double mass = 0.0;                 // kg
  Vec3 axis = Vec3::UnitZ();         // joint axis in the parent frame (unit)
  Vec3 offset = Vec3::Zero();        // this joint to the next one, link frame (m)
  Vec3 com = Vec3::Zero();           // centre of mass, link frame (m)
  Mat3 inertia = Mat3::Zero();       // about the centre of mass, link frame
  double added_mass = 0.0;           // kg
  double volume = 0.0;               // displaced volume (m^3)
  Vec3 cob = Vec3::Zero();           // centre of buoyancy, link frame (m)

  double length() const { return offset.norm(); }

  friend bool operator==(const LinkParams&, const LinkParams&) = default;
};

// Prescribed vertical acceleration of the arm base, added to gravity.
// Disabled when amplitude is zero.
struct BaseDisturbance {
  double amplitude = 0.0;  // m/s^2
  double frequency = 0.0;  // Hz

  friend bool operator==(const BaseDisturbance&,
                         const BaseDisturbance&) = default;
};

struct DynamicsParams {
  std::array<LinkParams, kJoints> links;

  Vec4 rotor_inertia = Vec4::Zero();      // reflected actuator inertia
  Vec4 drag_linear = Vec4::Zero();        // N m s / rad
  Vec4 drag_quadratic = Vec4::Zero();     // N m s^2 / rad^2
  Vec4 friction_viscous = Vec4::Zero();   // N m s / rad
  Vec4 friction_coulomb = Vec4::Zero();   // N m
  double coulomb_velocity = 0.05;         // tanh smoothing width (rad/s)

  double fluid_density = 1000.0;  // kg/m^3
  double gravity = 9.81;          // m/s^2

  Vec4 q_min = Vec4::Zero();
  Vec4 q_max = Vec4::Constant(3.5);
  Vec4 tau_min = Vec4::Constant(-6.0);
  Vec4 tau_max = Vec4::Constant(6.0);

  BaseDisturbance base;

  friend bool operator==(const DynamicsParams&,
                         const DynamicsParams&) = default;
};

struct PayloadSpec {
  double mass = 0.0;            // kg
  double volume = 0.0;          // m^3
  Vec3 offset = Vec3::Zero();   // from the end-effector frame (m)
  std::string label;
};

inline constexpr double kPayloadCapacity = 2.0;  // kg

enum class Integrator { kRk4, kEuler };

struct SimConfig {
  double inner_step = 0.005;      // s
  double control_period = 0.05;   // s
  Integrator integrator = Integrator::kRk4;
  double noise_q = 0.1 * 3.14159265358979323846 / 180.0;  // rad, uniform half-width
  double noise_qd = 0.0;                                  // rad/s

  int inner_steps() const;
};

// Reach Alpha 5 sized defaults: 1.3 kg arm, 0.416 m of links, base yaw
// followed by three pitch joints.
DynamicsParams default_dynamics_params();

// Throws Error(kInvalidArgument) naming the first violated invariant.
void validate(const DynamicsParams& params);
void validate(const SimConfig& cfg);

Mat4 mass_matrix(const Vec4& q, const DynamicsParams& params);

// Partial derivatives dM/dq_k, exact (forward-mode automatic differentiation).
std::array<Mat4, kJoints> mass_matrix_derivatives(const Vec4& q,
                                                  const DynamicsParams& params);

Mat4 coriolis_matrix(const JointState& state, const DynamicsParams& params);

// Gravity minus buoyancy, dV/dq. `time` only matters with a base disturbance.
Vec4 restoring_torque(const Vec4& q, const DynamicsParams& params,
                      double time = 0.0);

// D(qd) qd.
Vec4 damping_torque(const Vec4& qd, const DynamicsParams& params);

Vec4 friction_torque(const Vec4& qd, const DynamicsParams& params);

// Kinetic plus gravitational/buoyancy potential energy.
double mechanical_energy(const JointState& state, const DynamicsParams& params);

// Positions of each joint origin and the end-effector in the base frame.
std::array<Vec3, kJoints + 1> joint_positions(const Vec4& q,
                                              const DynamicsParams& params);

// qdd = M^-1 (tau - C qd - D qd - eta - f). Throws Error(kSingularDynamics)
// when M is numerically singular.
Vec4 forward_dynamics(const JointState& state, const Vec4& tau,
                      const DynamicsParams& params, double time = 0.0);

struct StepLog {
  int clamp_events = 0;
};

// Advances one control period with tau held constant. Positions that leave
// the joint box are clamped and the outward velocity is zeroed; each clamp is
// counted in `log`. Throws IndexedError(kIntegrationDiverged) with the inner
// step index on a non-finite state.
JointState step(const JointState& state, const Vec4& tau,
                const DynamicsParams& params, const SimConfig& cfg,
                double time = 0.0, StepLog* log = nullptr);

// Rigidly attaches a point payload to the last link. Mass above
// kPayloadCapacity throws Error(kCapacityExceeded).
DynamicsParams attach_payload(const DynamicsParams& params,
                              const PayloadSpec& payload);

// Encoder model: uniform noise of the configured half-widths, reproducible
// from the seed.
JointState sensed_state(const JointState& state, const SimConfig& cfg,
                        std::uint64_t seed);

}  // namespace nnmpc

#endif  // NNMPC_CORE_DYNAMICS_HPP_
