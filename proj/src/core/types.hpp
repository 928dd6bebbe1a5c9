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

#ifndef NNMPC_CORE_TYPES_HPP_
#define NNMPC_CORE_TYPES_HPP_

#include <Eigen/Core>

namespace nnmpc {

inline constexpr int kJoints = 4;

using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;

// Joint positions (rad) and velocities (rad/s) of the arm.
struct JointState {
  Vec4 q = Vec4::Zero();
  Vec4 qd = Vec4::Zero();

  bool finite() const { return q.allFinite() && qd.allFinite(); }

  friend bool operator==(const JointState& a, const JointState& b) {
    return a.q == b.q && a.qd == b.qd;
  }
};

// One-step change of a JointState.
struct StateDelta {
  Vec4 dq = Vec4::Zero();
  Vec4 dqd = Vec4::Zero();
};

inline JointState operator+(const JointState& s, const StateDelta& d) {
  return JointState{s.q + d.dq, s.qd + d.dqd};
}

}  // namespace nnmpc

#endif  // NNMPC_CORE_TYPES_HPP_
