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

#include "core/network.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

#include "core/error.hpp"
#include "core/io.hpp"

namespace nnmpc {
namespace {

using json = nlohmann::json;

constexpr const char* kFormatTag = "nnmpc-model";
constexpr int kFormatVersion = 1;

template <typename Derived>
void activate(Eigen::MatrixBase<Derived>& x, Activation a) {
  switch (a) {
    case Activation::kRelu:
      x = x.cwiseMax(0.0);
      break;
    case Activation::kTanh:
      x = x.array().tanh().matrix();
      break;
    case Activation::kIdentity:
      break;
  }
}

template <typename Derived>
json row_major(const Eigen::MatrixBase<Derived>& m) {
  json out = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) out.push_back(m(r, c));
  }
  return out;
}

const json& field(const json& j, const char* name, const std::string& where) {
  if (!j.is_object() || !j.contains(name)) {
    throw Error(ErrorCode::kSchema,
                "model file: missing field '" + where + name + "'");
  }
  return j.at(name);
}

template <typename Derived>
void read_array(const json& j, const char* name, const std::string& where,
                Eigen::MatrixBase<Derived>& out) {
  const json& arr = field(j, name, where);
  const std::string full = where + name;
  const auto expected = static_cast<std::size_t>(out.rows() * out.cols());
  if (!arr.is_array() || arr.size() != expected) {
    throw Error(ErrorCode::kSchema, "model file: field '" + full + "' must be an array of " +
                                        std::to_string(expected) + " numbers");
  }
  std::size_t k = 0;
  for (Eigen::Index r = 0; r < out.rows(); ++r) {
    for (Eigen::Index c = 0; c < out.cols(); ++c, ++k) {
      if (!arr[k].is_number()) {
        throw Error(ErrorCode::kSchema,
                    "model file: field '" + full + "' has a non-numeric entry");
      }
      out(r, c) = arr[k].get<double>();
    }
  }
}

template <typename Derived>
void flatten_into(const Eigen::MatrixBase<Derived>& m, std::span<double> out,
                  std::size_t& k) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) out[k++] = m(r, c);
  }
}

template <typename Derived>
void unflatten_from(Eigen::MatrixBase<Derived>& m, std::span<const double> in,
                    std::size_t& k) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = in[k++];
  }
}

}  // namespace

const char* activation_name(Activation a) {
  switch (a) {
    case Activation::kRelu: return "relu";
    case Activation::kTanh: return "tanh";
    case Activation::kIdentity: return "identity";
  }
  return "identity";
}

Activation parse_activation(const std::string& name) {
  if (name == "relu") return Activation::kRelu;
  if (name == "tanh") return Activation::kTanh;
  if (name == "identity") return Activation::kIdentity;
  throw Error(ErrorCode::kSchema, "unknown activation '" + name + "'");
}

void NetworkParams::flatten(std::span<double> out) const {
  if (out.size() != static_cast<std::size_t>(kParameterCount)) {
    throw Error(ErrorCode::kInvalidArgument, "flatten: wrong buffer size");
  }
  std::size_t k = 0;
  flatten_into(w1, out, k);
  flatten_into(b1, out, k);
  flatten_into(w2, out, k);
  flatten_into(b2, out, k);
  flatten_into(w3, out, k);
  flatten_into(b3, out, k);
}

void NetworkParams::unflatten(std::span<const double> in) {
  if (in.size() != static_cast<std::size_t>(kParameterCount)) {
    throw Error(ErrorCode::kInvalidArgument, "unflatten: wrong buffer size");
  }
  std::size_t k = 0;
  unflatten_from(w1, in, k);
  unflatten_from(b1, in, k);
  unflatten_from(w2, in, k);
  unflatten_from(b2, in, k);
  unflatten_from(w3, in, k);
  unflatten_from(b3, in, k);
}

std::vector<double> NetworkParams::flattened() const {
  std::vector<double> out(kParameterCount);
  flatten(out);
  return out;
}

void validate(const NetworkParams& net) {
  const bool finite = net.w1.allFinite() && net.b1.allFinite() &&
                      net.w2.allFinite() && net.b2.allFinite() &&
                      net.w3.allFinite() && net.b3.allFinite() &&
                      net.input_mean.allFinite() && net.input_scale.allFinite() &&
                      net.output_scale.allFinite();
  if (!finite) {
    throw Error(ErrorCode::kInvalidArgument, "network parameters must be finite");
  }
  if ((net.output_scale.array() <= 0.0).any()) {
    throw Error(ErrorCode::kInvalidArgument, "output scale must be > 0");
  }
  if ((net.input_scale.array() <= 0.0).any()) {
    throw Error(ErrorCode::kInvalidArgument, "input scale must be > 0");
  }
}

InputVec network_input(const JointState& state, const Vec4& u) {
  InputVec x;
  x << state.q, state.qd, u;
  return x;
}

OutputVec forward(const NetworkParams& net, const InputVec& input) {
  const InputVec x = (input - net.input_mean).cwiseQuotient(net.input_scale);
  Eigen::Matrix<double, kHiddenDim, 1> h1 = net.w1 * x + net.b1;
  activate(h1, net.hidden_activation);
  Eigen::Matrix<double, kHiddenDim, 1> h2 = net.w2 * h1 + net.b2;
  activate(h2, net.hidden_activation);
  OutputVec y = net.w3 * h2 + net.b3;
  activate(y, net.output_activation);
  return y;
}

StateDelta predict_delta(const NetworkParams& net, const JointState& state,
                         const Vec4& u) {
  if (!state.finite() || !u.allFinite()) {
    throw Error(ErrorCode::kInputDomain, "predict_delta: input is not finite");
  }
  const OutputVec y = forward(net, network_input(state, u)).cwiseProduct(net.output_scale);
  return StateDelta{y.head<kJoints>(), y.tail<kJoints>()};
}

DeltaModel as_delta_model(const NetworkParams& net) {
  return [&net](const JointState& s, const Vec4& u) {
    return predict_delta(net, s, u);
  };
}

std::vector<JointState> rollout(const DeltaModel& model, const JointState& state,
                                std::span<const Vec4> u_seq) {
  if (u_seq.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "rollout: empty control sequence");
  }
  std::vector<JointState> out;
  out.reserve(u_seq.size());
  JointState s = state;
  for (std::size_t k = 0; k < u_seq.size(); ++k) {
    if (!s.finite() || !u_seq[k].allFinite()) {
      throw IndexedError(ErrorCode::kRolloutDiverged,
                         "rollout: non-finite state or torque", static_cast<int>(k));
    }
    s = s + model(s, u_seq[k]);
    if (!s.finite()) {
      throw IndexedError(ErrorCode::kRolloutDiverged,
                         "rollout: prediction became non-finite", static_cast<int>(k));
    }
    out.push_back(s);
  }
  return out;
}

std::vector<JointState> rollout(const NetworkParams& net,
                                const JointState& state,
                                std::span<const Vec4> u_seq) {
  return rollout(as_delta_model(net), state, u_seq);
}

std::string serialize_model(const NetworkParams& net) {
  json j;
  j["format"] = kFormatTag;
  j["format_version"] = kFormatVersion;
  j["architecture"] = {kInputDim, kHiddenDim, kHiddenDim, kOutputDim};
  j["activations"] = {{"hidden", activation_name(net.hidden_activation)},
                      {"output", activation_name(net.output_activation)}};
  j["input_mean"] = row_major(net.input_mean);
  j["input_scale"] = row_major(net.input_scale);
  j["output_scale"] = row_major(net.output_scale);
  j["layers"] = json::array({
      {{"weights", row_major(net.w1)}, {"bias", row_major(net.b1)}},
      {{"weights", row_major(net.w2)}, {"bias", row_major(net.b2)}},
      {{"weights", row_major(net.w3)}, {"bias", row_major(net.b3)}},
  });
  return j.dump(1) + "\n";
}

NetworkParams deserialize_model(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kSchema, std::string("model file: malformed: ") + e.what());
  }
  const json& format = field(j, "format", "");
  if (!format.is_string() || format.get<std::string>() != kFormatTag) {
    throw Error(ErrorCode::kSchema, "model file: field 'format' must be \"nnmpc-model\"");
  }
  const json& version = field(j, "format_version", "");
  if (!version.is_number_integer() || version.get<int>() != kFormatVersion) {
    throw Error(ErrorCode::kSchema, "model file: unsupported 'format_version'");
  }
  const json& arch = field(j, "architecture", "");
  if (arch != json({kInputDim, kHiddenDim, kHiddenDim, kOutputDim})) {
    throw Error(ErrorCode::kSchema,
                "model file: field 'architecture' must be [12, 25, 25, 8]");
  }
  NetworkParams net;
  const json& acts = field(j, "activations", "");
  try {
    net.hidden_activation =
        parse_activation(field(acts, "hidden", "activations.").get<std::string>());
    net.output_activation =
        parse_activation(field(acts, "output", "activations.").get<std::string>());
  } catch (const json::exception&) {
    throw Error(ErrorCode::kSchema, "model file: field 'activations' must hold strings");
  }
  read_array(j, "input_mean", "", net.input_mean);
  read_array(j, "input_scale", "", net.input_scale);
  read_array(j, "output_scale", "", net.output_scale);
  const json& layers = field(j, "layers", "");
  if (!layers.is_array() || layers.size() != 3) {
    throw Error(ErrorCode::kSchema, "model file: field 'layers' must hold 3 layers");
  }
  read_array(layers[0], "weights", "layers[0].", net.w1);
  read_array(layers[0], "bias", "layers[0].", net.b1);
  read_array(layers[1], "weights", "layers[1].", net.w2);
  read_array(layers[1], "bias", "layers[1].", net.b2);
  read_array(layers[2], "weights", "layers[2].", net.w3);
  read_array(layers[2], "bias", "layers[2].", net.b3);
  try {
    validate(net);
  } catch (const Error& e) {
    throw Error(ErrorCode::kSchema, std::string("model file: ") + e.what());
  }
  return net;
}

void save_model(const NetworkParams& net, const std::filesystem::path& path) {
  write_text_file(path, serialize_model(net));
}

NetworkParams load_model(const std::filesystem::path& path) {
  return deserialize_model(read_text_file(path));
}

}  // namespace nnmpc
