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

#include "core/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "core/error.hpp"

namespace nnmpc {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

MatrixXd apply(const MatrixXd& z, Activation a) {
  switch (a) {
    case Activation::kRelu: return z.cwiseMax(0.0);
    case Activation::kTanh: return z.array().tanh().matrix();
    case Activation::kIdentity: return z;
  }
  return z;
}

// d activation / dz given pre-activation z and activation value y.
MatrixXd slope(const MatrixXd& z, const MatrixXd& y, Activation a) {
  switch (a) {
    case Activation::kRelu: return (z.array() > 0.0).cast<double>().matrix();
    case Activation::kTanh: return (1.0 - y.array().square()).matrix();
    case Activation::kIdentity: return MatrixXd::Ones(z.rows(), z.cols());
  }
  return MatrixXd::Ones(z.rows(), z.cols());
}

void append_row_major(const MatrixXd& m, std::vector<double>& out) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) out.push_back(m(r, c));
  }
}

void initialize(NetworkParams& net, std::mt19937_64& rng) {
  auto fill = [&rng](auto& w, double limit) {
    std::uniform_real_distribution<double> dist(-limit, limit);
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = dist(rng);
    }
  };
  // He-uniform for the ReLU layers, Glorot-uniform for the tanh output.
  fill(net.w1, std::sqrt(6.0 / kInputDim));
  fill(net.w2, std::sqrt(6.0 / kHiddenDim));
  fill(net.w3, std::sqrt(6.0 / (kHiddenDim + kOutputDim)));
  net.b1.setZero();
  net.b2.setZero();
  net.b3.setZero();
}

void fit_normalization(NetworkParams& net, const Batch& train) {
  const double n = static_cast<double>(train.inputs.cols());
  net.input_mean = train.inputs.rowwise().mean();
  for (int i = 0; i < kInputDim; ++i) {
    const double var =
        (train.inputs.row(i).array() - net.input_mean(i)).square().sum() / n;
    const double sd = std::sqrt(var);
    net.input_scale(i) = sd > 1e-12 ? sd : 1.0;
  }
  for (int i = 0; i < kOutputDim; ++i) {
    const double peak = train.targets.row(i).cwiseAbs().maxCoeff();
    net.output_scale(i) = peak > 0.0 ? 1.25 * peak : 1.0;
  }
}

}  // namespace

void validate(const TrainingConfig& cfg) {
  if (!(cfg.learning_rate > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "training: learning rate must be > 0");
  }
  if (!(cfg.validation_fraction > 0.0 && cfg.validation_fraction < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "training: split must be in (0, 1)");
  }
  if (cfg.batch_size < 1 || cfg.epochs < 1) {
    throw Error(ErrorCode::kInvalidArgument, "training: batch size and epochs must be >= 1");
  }
  if (!(cfg.beta1 >= 0.0 && cfg.beta1 < 1.0 && cfg.beta2 >= 0.0 && cfg.beta2 < 1.0 &&
        cfg.epsilon > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "training: invalid Adam constants");
  }
}

void adam_step(std::span<double> params, std::span<const double> grads,
               AdamState& state, const TrainingConfig& cfg, int step) {
  if (grads.size() != params.size() || state.m.size() != params.size() ||
      state.v.size() != params.size()) {
    throw Error(ErrorCode::kInvalidArgument, "adam_step: shape mismatch");
  }
  if (step < 1) throw Error(ErrorCode::kInvalidArgument, "adam_step: step counts from 1");
  const double c1 = 1.0 - std::pow(cfg.beta1, step);
  const double c2 = 1.0 - std::pow(cfg.beta2, step);
  for (std::size_t i = 0; i < params.size(); ++i) {
    state.m[i] = cfg.beta1 * state.m[i] + (1.0 - cfg.beta1) * grads[i];
    state.v[i] = cfg.beta2 * state.v[i] + (1.0 - cfg.beta2) * grads[i] * grads[i];
    const double m_hat = state.m[i] / c1;
    const double v_hat = state.v[i] / c2;
    params[i] -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
  }
}

Batch make_batch(const Dataset& data, std::span<const std::size_t> rows) {
  Batch b;
  b.inputs.resize(kInputDim, static_cast<Eigen::Index>(rows.size()));
  b.targets.resize(kOutputDim, static_cast<Eigen::Index>(rows.size()));
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const Transition& t = data.rows[rows[k]];
    const auto col = static_cast<Eigen::Index>(k);
    b.inputs.col(col) = network_input(t.state, t.u);
    b.targets.col(col) << t.delta.dq, t.delta.dqd;
  }
  return b;
}

Batch make_batch(const Dataset& data) {
  std::vector<std::size_t> all(data.rows.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  return make_batch(data, all);
}

double loss_and_gradient(const NetworkParams& net, const Batch& batch,
                         std::vector<double>* grad) {
  const Eigen::Index n = batch.inputs.cols();
  if (n == 0) throw Error(ErrorCode::kInvalidArgument, "loss: empty batch");
  MatrixXd x = batch.inputs.colwise() - net.input_mean;
  x = x.array().colwise() / net.input_scale.array();
  const MatrixXd y = batch.targets.array().colwise() / net.output_scale.array();

  const MatrixXd z1 = (net.w1 * x).colwise() + net.b1;
  const MatrixXd h1 = apply(z1, net.hidden_activation);
  const MatrixXd z2 = (net.w2 * h1).colwise() + net.b2;
  const MatrixXd h2 = apply(z2, net.hidden_activation);
  const MatrixXd z3 = (net.w3 * h2).colwise() + net.b3;
  const MatrixXd out = apply(z3, net.output_activation);

  const MatrixXd err = out - y;
  const double count = static_cast<double>(n * kOutputDim);
  const double loss = err.squaredNorm() / count;
  if (grad == nullptr) return loss;

  const MatrixXd d3 = ((2.0 / count) * err).cwiseProduct(slope(z3, out, net.output_activation));
  const MatrixXd d2 = (net.w3.transpose() * d3).cwiseProduct(slope(z2, h2, net.hidden_activation));
  const MatrixXd d1 = (net.w2.transpose() * d2).cwiseProduct(slope(z1, h1, net.hidden_activation));

  grad->clear();
  grad->reserve(NetworkParams::kParameterCount);
  append_row_major(d1 * x.transpose(), *grad);
  append_row_major(d1.rowwise().sum(), *grad);
  append_row_major(d2 * h1.transpose(), *grad);
  append_row_major(d2.rowwise().sum(), *grad);
  append_row_major(d3 * h2.transpose(), *grad);
  append_row_major(d3.rowwise().sum(), *grad);
  return loss;
}

TrainingResult train(const Dataset& data, const TrainingConfig& cfg) {
  validate(cfg);
  if (data.rows.size() < static_cast<std::size_t>(10 * kInputDim)) {
    throw Error(ErrorCode::kInvalidArgument,
                "train: need at least 120 rows, got " + std::to_string(data.rows.size()));
  }
  std::mt19937_64 rng(cfg.seed);

  std::vector<std::size_t> order(data.rows.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng);
  auto n_val = static_cast<std::size_t>(
      std::llround(cfg.validation_fraction * static_cast<double>(order.size())));
  n_val = std::clamp<std::size_t>(n_val, 1, order.size() - 1);
  std::vector<std::size_t> val_rows(order.end() - static_cast<std::ptrdiff_t>(n_val), order.end());
  std::vector<std::size_t> train_rows(order.begin(), order.end() - static_cast<std::ptrdiff_t>(n_val));

  const Batch train_all = make_batch(data, train_rows);
  const Batch val_all = make_batch(data, val_rows);

  TrainingResult result;
  NetworkParams& net = result.net;
  fit_normalization(net, train_all);
  initialize(net, rng);

  std::vector<double> params = net.flattened();
  AdamState adam(params.size());
  std::vector<double> grad;
  int step = 0;
  const std::size_t batch = static_cast<std::size_t>(cfg.batch_size);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(train_rows.begin(), train_rows.end(), rng);
    for (std::size_t start = 0; start < train_rows.size(); start += batch) {
      const std::size_t len = std::min(batch, train_rows.size() - start);
      const Batch mb = make_batch(
          data, std::span<const std::size_t>(train_rows.data() + start, len));
      const double loss = loss_and_gradient(net, mb, &grad);
      if (!std::isfinite(loss)) {
        throw IndexedError(ErrorCode::kTrainingDiverged, "train: loss is not finite", epoch);
      }
      adam_step(params, grad, adam, cfg, ++step);
      net.unflatten(params);
    }
    const double train_loss = loss_and_gradient(net, train_all, nullptr);
    const double val_loss = loss_and_gradient(net, val_all, nullptr);
    if (!std::isfinite(train_loss) || !std::isfinite(val_loss)) {
      throw IndexedError(ErrorCode::kTrainingDiverged, "train: loss is not finite", epoch);
    }
    result.report.train_loss.push_back(train_loss);
    result.report.validation_loss.push_back(val_loss);
  }
  result.report.train_rows = train_rows.size();
  result.report.validation_rows = val_rows.size();
  return result;
}

PredictionError prediction_error(const NetworkParams& net, const Dataset& data) {
  PredictionError out;
  if (data.rows.empty()) return out;
  OutputVec sum = OutputVec::Zero();
  OutputVec sum_sq = OutputVec::Zero();
  for (const Transition& t : data.rows) {
    const StateDelta p = predict_delta(net, t.state, t.u);
    OutputVec target, pred;
    target << t.delta.dq, t.delta.dqd;
    pred << p.dq, p.dqd;
    out.mse += (pred - target).cwiseAbs2();
    sum += target;
    sum_sq += target.cwiseAbs2();
  }
  const double n = static_cast<double>(data.rows.size());
  out.mse /= n;
  const OutputVec mean = sum / n;
  out.target_variance = sum_sq / n - mean.cwiseAbs2();
  return out;
}

}  // namespace nnmpc
