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

// Delta-state dynamics model: a 12 -> 25 -> 25 -> 8 feed-forward network that
// maps (q, qd, u) to the one-period change (dq, dqd).

#ifndef NNMPC_CORE_NETWORK_HPP_
#define NNMPC_CORE_NETWORK_HPP_

#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "core/types.hpp"

namespace nnmpc {

inline constexpr int kInputDim = 3 * kJoints;
inline constexpr int kHiddenDim = 25;
inline constexpr int kOutputDim = 2 * kJoints;

enum class Activation { kRelu, kTanh, kIdentity };

const char* activation_name(Activation a);
Activation parse_activation(const std::string& name);

using InputVec = Eigen::Matrix<double, kInputDim, 1>;
using OutputVec = Eigen::Matrix<double, kOutputDim, 1>;

struct NetworkParams {
  Eigen::Matrix<double, kHiddenDim, kInputDim> w1 =
      Eigen::Matrix<double, kHiddenDim, kInputDim>::Zero();
  Eigen::Matrix<double, kHiddenDim, 1> b1 =
      Eigen::Matrix<double, kHiddenDim, 1>::Zero();
  Eigen::Matrix<double, kHiddenDim, kHiddenDim> w2 =
      Eigen::Matrix<double, kHiddenDim, kHiddenDim>::Zero();
  Eigen::Matrix<double, kHiddenDim, 1> b2 =
      Eigen::Matrix<double, kHiddenDim, 1>::Zero();
  Eigen::Matrix<double, kOutputDim, kHiddenDim> w3 =
      Eigen::Matrix<double, kOutputDim, kHiddenDim>::Zero();
  OutputVec b3 = OutputVec::Zero();

  Activation hidden_activation = Activation::kRelu;
  Activation output_activation = Activation::kTanh;

  InputVec input_mean = InputVec::Zero();
  InputVec input_scale = InputVec::Ones();
  OutputVec output_scale = OutputVec::Ones();

  static constexpr int kParameterCount =
      kHiddenDim * kInputDim + kHiddenDim + kHiddenDim * kHiddenDim +
      kHiddenDim + kOutputDim * kHiddenDim + kOutputDim;

  // Weights row-major then bias, layer by layer.
  void flatten(std::span<double> out) const;
  void unflatten(std::span<const double> in);
  std::vector<double> flattened() const;

  friend bool operator==(const NetworkParams&, const NetworkParams&) = default;
};

// Throws Error(kInvalidArgument) on non-finite parameters or a non-positive
// scale.
void validate(const NetworkParams& net);

InputVec network_input(const JointState& state, const Vec4& u);

// Raw network output in normalized units, before the output scale.
OutputVec forward(const NetworkParams& net, const InputVec& input);

// Throws Error(kInputDomain) on non-finite state or torque.
StateDelta predict_delta(const NetworkParams& net, const JointState& state,
                         const Vec4& u);

// Any one-step delta predictor. The controller is written against this so
// that analytic toy models can stand in for the network in tests.
using DeltaModel = std::function<StateDelta(const JointState&, const Vec4&)>;

// The returned model refers to `net`, which must outlive it.
DeltaModel as_delta_model(const NetworkParams& net);

// s[k+1] = s[k] + g(s[k], u[k]). Returns the N predicted states. Throws
// IndexedError(kRolloutDiverged) when a prediction becomes non-finite.
std::vector<JointState> rollout(const DeltaModel& model, const JointState& state,
                                std::span<const Vec4> u_seq);
std::vector<JointState> rollout(const NetworkParams& net,
                                const JointState& state,
                                std::span<const Vec4> u_seq);

// Portable model file (JSON). Round trip is bit-exact.
std::string serialize_model(const NetworkParams& net);
NetworkParams deserialize_model(const std::string& text);
void save_model(const NetworkParams& net, const std::filesystem::path& path);
NetworkParams load_model(const std::filesystem::path& path);

}  // namespace nnmpc

#endif  // NNMPC_CORE_NETWORK_HPP_
