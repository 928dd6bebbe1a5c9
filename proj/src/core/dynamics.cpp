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

#include "core/dynamics.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/AutoDiff>

#include "core/error.hpp"

namespace nnmpc {
namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kMinRcond = 1e-12;

template <typename S>
using V3 = Eigen::Matrix<S, 3, 1>;
template <typename S>
using M3 = Eigen::Matrix<S, 3, 3>;
template <typename S>
using V4 = Eigen::Matrix<S, 4, 1>;
template <typename S>
using M4 = Eigen::Matrix<S, 4, 4>;

using AutoDiff = Eigen::AutoDiffScalar<Vec4>;

template <typename S>
struct ChainPose {
  std::array<M3<S>, kJoints> rot;     // link frame to base frame
  std::array<V3<S>, kJoints> origin;  // joint origin, base frame
  std::array<V3<S>, kJoints> axis;    // joint axis, base frame
  V3<S> tip;
};

// Rodrigues' formula for a rotation about a unit axis.
template <typename S>
M3<S> axis_rotation(const Vec3& a, const S& angle) {
  using std::cos;
  using std::sin;
  const S c = cos(angle);
  const S s = sin(angle);
  Mat3 skew;
  skew << 0.0, -a.z(), a.y(), a.z(), 0.0, -a.x(), -a.y(), a.x(), 0.0;
  const Mat3 outer = a * a.transpose();
  M3<S> r;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      r(i, j) = c * (i == j ? 1.0 : 0.0) + s * skew(i, j) +
                (S(1.0) - c) * outer(i, j);
    }
  }
  return r;
}

template <typename S>
ChainPose<S> chain_pose(const V4<S>& q, const DynamicsParams& p) {
  ChainPose<S> pose;
  M3<S> rot = M3<S>::Identity();
  V3<S> origin = V3<S>::Zero();
  for (int i = 0; i < kJoints; ++i) {
    const LinkParams& link = p.links[i];
    pose.axis[i] = rot * link.axis.template cast<S>();
    rot = rot * axis_rotation<S>(link.axis, q(i));
    pose.rot[i] = rot;
    pose.origin[i] = origin;
    origin = origin + rot * link.offset.template cast<S>();
  }
  pose.tip = origin;
  return pose;
}

// Linear-velocity Jacobian of a point rigidly attached to link `i`.
template <typename S>
Eigen::Matrix<S, 3, kJoints> point_jacobian(const ChainPose<S>& pose, int i,
                                            const V3<S>& point) {
  Eigen::Matrix<S, 3, kJoints> jac = Eigen::Matrix<S, 3, kJoints>::Zero();
  for (int j = 0; j <= i; ++j) {
    jac.col(j) = pose.axis[j].cross(point - pose.origin[j]);
  }
  return jac;
}

template <typename S>
M4<S> mass_matrix_impl(const V4<S>& q, const DynamicsParams& p) {
  const ChainPose<S> pose = chain_pose<S>(q, p);
  M4<S> m = M4<S>::Zero();
  for (int j = 0; j < kJoints; ++j) m(j, j) += S(p.rotor_inertia(j));
  for (int i = 0; i < kJoints; ++i) {
    const LinkParams& link = p.links[i];
    const V3<S> com = pose.origin[i] + pose.rot[i] * link.com.template cast<S>();
    const Eigen::Matrix<S, 3, kJoints> jv = point_jacobian<S>(pose, i, com);
    Eigen::Matrix<S, 3, kJoints> jw = Eigen::Matrix<S, 3, kJoints>::Zero();
    for (int j = 0; j <= i; ++j) jw.col(j) = pose.axis[j];
    const M3<S> inertia_world =
        pose.rot[i] * link.inertia.template cast<S>() * pose.rot[i].transpose();
    m += S(link.mass + link.added_mass) * (jv.transpose() * jv) +
         jw.transpose() * inertia_world * jw;
  }
  return S(0.5) * (m + m.transpose());
}

double potential_energy(const Vec4& q, const DynamicsParams& p, double g) {
  const ChainPose<double> pose = chain_pose<double>(q, p);
  double v = 0.0;
  for (int i = 0; i < kJoints; ++i) {
    const LinkParams& link = p.links[i];
    const Vec3 com = pose.origin[i] + pose.rot[i] * link.com;
    const Vec3 cob = pose.origin[i] + pose.rot[i] * link.cob;
    v += g * (link.mass * com.z() - p.fluid_density * link.volume * cob.z());
  }
  return v;
}

double effective_gravity(const DynamicsParams& p, double time) {
  if (p.base.amplitude == 0.0) return p.gravity;
  return p.gravity +
         p.base.amplitude * std::sin(2.0 * kPi * p.base.frequency * time);
}

// Inertia of a point mass about the origin of `r`.
Mat3 point_inertia(double mass, const Vec3& r) {
  return mass * (r.squaredNorm() * Mat3::Identity() - r * r.transpose());
}

Mat3 rod_inertia(double mass, double length, double radius) {
  const double transverse = mass * (3.0 * radius * radius + length * length) / 12.0;
  const double axial = 0.5 * mass * radius * radius;
  return Vec3(axial, transverse, transverse).asDiagonal();
}

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::kInvalidArgument, what);
}

}  // namespace

int SimConfig::inner_steps() const {
  return static_cast<int>(std::llround(control_period / inner_step));
}

DynamicsParams default_dynamics_params() {
  constexpr double kRadius = 0.02;
  constexpr double kRho = 1000.0;
  DynamicsParams p;
  const double masses[kJoints] = {0.34, 0.40, 0.34, 0.22};
  const double lengths[kJoints] = {0.046, 0.150, 0.130, 0.090};
  for (int i = 0; i < kJoints; ++i) {
    LinkParams& link = p.links[i];
    const double l = lengths[i];
    link.mass = masses[i];
    link.volume = kPi * kRadius * kRadius * l;
    link.added_mass = kRho * link.volume;
    if (i == 0) {
      // Base housing: yaw joint, link extends vertically.
      link.axis = Vec3::UnitZ();
      link.offset = Vec3(0.0, 0.0, l);
      link.com = Vec3(0.0, 0.0, 0.5 * l);
      const Mat3 rod = rod_inertia(link.mass, l, kRadius);
      link.inertia = Vec3(rod(1, 1), rod(2, 2), rod(0, 0)).asDiagonal();
    } else {
      // Pitch joints; positive angles raise the link.
      link.axis = -Vec3::UnitY();
      link.offset = Vec3(l, 0.0, 0.0);
      link.com = Vec3(0.5 * l, 0.0, 0.0);
      link.inertia = rod_inertia(link.mass, l, kRadius);
    }
    link.cob = link.com;
  }
  p.rotor_inertia = Vec4::Constant(0.03);
  p.drag_linear = Vec4::Constant(0.2);
  p.drag_quadratic = Vec4::Constant(0.1);
  p.friction_viscous = Vec4::Constant(3.0);
  p.friction_coulomb = Vec4::Constant(0.05);
  p.coulomb_velocity = 0.05;
  p.fluid_density = kRho;
  p.gravity = 9.81;
  p.q_min = Vec4::Zero();
  p.q_max = Vec4::Constant(3.5);
  p.tau_min = Vec4::Constant(-6.0);
  p.tau_max = Vec4::Constant(6.0);
  return p;
}

void validate(const DynamicsParams& p) {
  for (int i = 0; i < kJoints; ++i) {
    const LinkParams& link = p.links[i];
    const std::string tag = "link " + std::to_string(i + 1) + ": ";
    require(std::isfinite(link.mass) && link.mass > 0.0, tag + "mass must be > 0");
    require(link.offset.allFinite() && link.length() > 0.0,
            tag + "length must be > 0");
    require(link.axis.allFinite() && std::abs(link.axis.norm() - 1.0) < 1e-9,
            tag + "axis must be a unit vector");
    require(link.com.allFinite() && link.cob.allFinite(),
            tag + "com/cob must be finite");
    require(link.inertia.allFinite() &&
                (link.inertia - link.inertia.transpose()).cwiseAbs().maxCoeff() <=
                    1e-12 * (1.0 + link.inertia.cwiseAbs().maxCoeff()),
            tag + "inertia must be symmetric");
    Eigen::SelfAdjointEigenSolver<Mat3> eig(link.inertia);
    require(eig.eigenvalues().minCoeff() > 0.0, tag + "inertia must be positive");
    require(link.added_mass >= 0.0, tag + "added mass must be >= 0");
    require(link.volume >= 0.0, tag + "volume must be >= 0");
  }
  require(p.rotor_inertia.allFinite() && (p.rotor_inertia.array() >= 0.0).all(),
          "rotor inertia must be >= 0");
  require((p.drag_linear.array() >= 0.0).all() &&
              (p.drag_quadratic.array() >= 0.0).all(),
          "drag coefficients must be >= 0");
  require((p.friction_viscous.array() >= 0.0).all() &&
              (p.friction_coulomb.array() >= 0.0).all(),
          "friction coefficients must be >= 0");
  require(p.coulomb_velocity > 0.0, "coulomb smoothing velocity must be > 0");
  require(p.fluid_density >= 0.0 && std::isfinite(p.gravity),
          "fluid density / gravity invalid");
  require((p.q_min.array() < p.q_max.array()).all(), "joint box is empty");
  require((p.tau_min.array() < p.tau_max.array()).all(), "torque box is empty");
}

void validate(const SimConfig& cfg) {
  require(cfg.inner_step > 0.0 && cfg.control_period > 0.0,
          "sim steps must be > 0");
  require(cfg.inner_step <= cfg.control_period,
          "inner step must not exceed the control period");
  const int n = cfg.inner_steps();
  require(n >= 1 && std::abs(n * cfg.inner_step - cfg.control_period) <=
                        1e-9 * cfg.control_period,
          "inner step must divide the control period");
  require(cfg.noise_q >= 0.0 && cfg.noise_qd >= 0.0,
          "noise amplitudes must be >= 0");
}

Mat4 mass_matrix(const Vec4& q, const DynamicsParams& params) {
  return mass_matrix_impl<double>(q, params);
}

std::array<Mat4, kJoints> mass_matrix_derivatives(const Vec4& q,
                                                  const DynamicsParams& params) {
  V4<AutoDiff> qa;
  for (int k = 0; k < kJoints; ++k) qa(k) = AutoDiff(q(k), kJoints, k);
  const M4<AutoDiff> m = mass_matrix_impl<AutoDiff>(qa, params);
  std::array<Mat4, kJoints> dm;
  for (int k = 0; k < kJoints; ++k) {
    for (int i = 0; i < kJoints; ++i) {
      for (int j = 0; j < kJoints; ++j) {
        const auto& d = m(i, j).derivatives();
        dm[k](i, j) = d.size() == 0 ? 0.0 : d(k);
      }
    }
  }
  return dm;
}

Mat4 coriolis_matrix(const JointState& state, const DynamicsParams& params) {
  const std::array<Mat4, kJoints> dm = mass_matrix_derivatives(state.q, params);
  Mat4 c = Mat4::Zero();
  for (int i = 0; i < kJoints; ++i) {
    for (int j = 0; j < kJoints; ++j) {
      double sum = 0.0;
      for (int k = 0; k < kJoints; ++k) {
        sum += 0.5 * (dm[k](i, j) + dm[j](i, k) - dm[i](j, k)) * state.qd(k);
      }
      c(i, j) = sum;
    }
  }
  return c;
}

Vec4 restoring_torque(const Vec4& q, const DynamicsParams& params, double time) {
  const double g = effective_gravity(params, time);
  const ChainPose<double> pose = chain_pose<double>(q, params);
  Vec4 eta = Vec4::Zero();
  for (int i = 0; i < kJoints; ++i) {
    const LinkParams& link = params.links[i];
    const Vec3 com = pose.origin[i] + pose.rot[i] * link.com;
    const Vec3 cob = pose.origin[i] + pose.rot[i] * link.cob;
    const auto jc = point_jacobian<double>(pose, i, com);
    const auto jb = point_jacobian<double>(pose, i, cob);
    eta += g * (link.mass * jc.row(2).transpose() -
                params.fluid_density * link.volume * jb.row(2).transpose());
  }
  return eta;
}

Vec4 damping_torque(const Vec4& qd, const DynamicsParams& params) {
  return params.drag_linear.cwiseProduct(qd) +
         params.drag_quadratic.cwiseProduct(qd.cwiseAbs().cwiseProduct(qd));
}

Vec4 friction_torque(const Vec4& qd, const DynamicsParams& params) {
  Vec4 f = params.friction_viscous.cwiseProduct(qd);
  for (int j = 0; j < kJoints; ++j) {
    f(j) += params.friction_coulomb(j) *
            std::tanh(qd(j) / params.coulomb_velocity);
  }
  return f;
}

double mechanical_energy(const JointState& state, const DynamicsParams& params) {
  const Mat4 m = mass_matrix(state.q, params);
  return 0.5 * state.qd.dot(m * state.qd) +
         potential_energy(state.q, params, params.gravity);
}

std::array<Vec3, kJoints + 1> joint_positions(const Vec4& q,
                                              const DynamicsParams& params) {
  const ChainPose<double> pose = chain_pose<double>(q, params);
  std::array<Vec3, kJoints + 1> out;
  for (int i = 0; i < kJoints; ++i) out[i] = pose.origin[i];
  out[kJoints] = pose.tip;
  return out;
}

Vec4 forward_dynamics(const JointState& state, const Vec4& tau,
                      const DynamicsParams& params, double time) {
  if (!tau.allFinite()) {
    throw Error(ErrorCode::kInputDomain, "forward_dynamics: torque is not finite");
  }
  const Mat4 m = mass_matrix(state.q, params);
  const Vec4 rhs = tau - coriolis_matrix(state, params) * state.qd -
                   damping_torque(state.qd, params) -
                   restoring_torque(state.q, params, time) -
                   friction_torque(state.qd, params);
  Eigen::LLT<Mat4> llt(m);
  if (llt.info() != Eigen::Success || !(llt.rcond() > kMinRcond)) {
    throw Error(ErrorCode::kSingularDynamics,
                "forward_dynamics: mass matrix is numerically singular");
  }
  return llt.solve(rhs);
}

JointState step(const JointState& state, const Vec4& tau,
                const DynamicsParams& params, const SimConfig& cfg, double time,
                StepLog* log) {
  const int n = cfg.inner_steps();
  const double h = cfg.inner_step;
  JointState s = state;
  int index = 0;
  auto derivative = [&](const JointState& x, double t) {
    if (!x.finite()) {
      throw IndexedError(ErrorCode::kIntegrationDiverged,
                         "step: state became non-finite", index);
    }
    return StateDelta{x.qd, forward_dynamics(x, tau, params, t)};
  };
  auto advance = [](const JointState& x, const StateDelta& d, double scale) {
    return JointState{x.q + scale * d.dq, x.qd + scale * d.dqd};
  };

  for (index = 0; index < n; ++index) {
    const double t = time + index * h;
    if (cfg.integrator == Integrator::kRk4) {
      const StateDelta k1 = derivative(s, t);
      const StateDelta k2 = derivative(advance(s, k1, 0.5 * h), t + 0.5 * h);
      const StateDelta k3 = derivative(advance(s, k2, 0.5 * h), t + 0.5 * h);
      const StateDelta k4 = derivative(advance(s, k3, h), t + h);
      s.q += (h / 6.0) * (k1.dq + 2.0 * k2.dq + 2.0 * k3.dq + k4.dq);
      s.qd += (h / 6.0) * (k1.dqd + 2.0 * k2.dqd + 2.0 * k3.dqd + k4.dqd);
    } else {
      // Semi-implicit Euler.
      const StateDelta k = derivative(s, t);
      s.qd += h * k.dqd;
      s.q += h * s.qd;
    }
    if (!s.finite()) {
      throw IndexedError(ErrorCode::kIntegrationDiverged,
                         "step: state became non-finite", index);
    }
    for (int j = 0; j < kJoints; ++j) {
      if (s.q(j) < params.q_min(j)) {
        s.q(j) = params.q_min(j);
        if (s.qd(j) < 0.0) s.qd(j) = 0.0;
        if (log) ++log->clamp_events;
      } else if (s.q(j) > params.q_max(j)) {
        s.q(j) = params.q_max(j);
        if (s.qd(j) > 0.0) s.qd(j) = 0.0;
        if (log) ++log->clamp_events;
      }
    }
  }
  return s;
}

DynamicsParams attach_payload(const DynamicsParams& params,
                              const PayloadSpec& payload) {
  if (!std::isfinite(payload.mass) || payload.mass < 0.0 ||
      !std::isfinite(payload.volume) || payload.volume < 0.0 ||
      !payload.offset.allFinite()) {
    throw Error(ErrorCode::kInvalidArgument,
                "attach_payload: mass and volume must be finite and >= 0");
  }
  if (payload.mass > kPayloadCapacity) {
    std::ostringstream msg;
    msg << "attach_payload: " << payload.mass << " kg exceeds the "
        << kPayloadCapacity << " kg lift capacity";
    throw Error(ErrorCode::kCapacityExceeded, msg.str());
  }
  DynamicsParams out = params;
  if (payload.mass == 0.0 && payload.volume == 0.0) return out;

  LinkParams& link = out.links[kJoints - 1];
  const Vec3 where = link.offset + payload.offset;
  if (payload.mass > 0.0) {
    const double total = link.mass + payload.mass;
    const Vec3 com = (link.mass * link.com + payload.mass * where) / total;
    link.inertia = link.inertia + point_inertia(link.mass, link.com - com) +
                   point_inertia(payload.mass, where - com);
    link.com = com;
    link.mass = total;
  }
  if (payload.volume > 0.0) {
    const double total = link.volume + payload.volume;
    link.cob = (link.volume * link.cob + payload.volume * where) / total;
    link.volume = total;
  }
  return out;
}

JointState sensed_state(const JointState& state, const SimConfig& cfg,
                        std::uint64_t seed) {
  JointState out = state;
  std::mt19937_64 rng(seed);
  if (cfg.noise_q > 0.0) {
    std::uniform_real_distribution<double> noise(-cfg.noise_q, cfg.noise_q);
    for (int j = 0; j < kJoints; ++j) out.q(j) += noise(rng);
  }
  if (cfg.noise_qd > 0.0) {
    std::uniform_real_distribution<double> noise(-cfg.noise_qd, cfg.noise_qd);
    for (int j = 0; j < kJoints; ++j) out.qd(j) += noise(rng);
  }
  return out;
}

}  // namespace nnmpc
