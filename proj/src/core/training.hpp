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

#ifndef NNMPC_CORE_TRAINING_HPP_
#define NNMPC_CORE_TRAINING_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "core/dataset.hpp"
#include "core/network.hpp"

namespace nnmpc {

struct TrainingConfig {
  double learning_rate = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  int batch_size = 64;
  int epochs = 300;
  double validation_fraction = 0.2;
  std::uint64_t seed = 1;
};

void validate(const TrainingConfig& cfg);

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;

  explicit AdamState(std::size_t n = 0) : m(n, 0.0), v(n, 0.0) {}
};

// One Adam update with bias correction. `step` counts from 1.
void adam_step(std::span<double> params, std::span<const double> grads,
               AdamState& state, const TrainingConfig& cfg, int step);

// Column-per-sample matrices of raw inputs (12 x B) and raw deltas (8 x B).
struct Batch {
  Eigen::MatrixXd inputs;
  Eigen::MatrixXd targets;
};

Batch make_batch(const Dataset& data, std::span<const std::size_t> rows);
Batch make_batch(const Dataset& data);

// Mean over samples and outputs of (y_hat - target / output_scale)^2, with
// the network's own normalization. Fills `grad` (flatten() order) if given.
double loss_and_gradient(const NetworkParams& net, const Batch& batch,
                         std::vector<double>* grad);

struct TrainingReport {
  std::vector<double> train_loss;       // per epoch, full training split
  std::vector<double> validation_loss;  // per epoch
  std::size_t train_rows = 0;
  std::size_t validation_rows = 0;
};

struct TrainingResult {
  NetworkParams net;
  TrainingReport report;
};

// Requires at least 10 rows per input dimension. Deterministic in cfg.seed.
// Throws IndexedError(kTrainingDiverged) carrying the epoch on a NaN loss.
TrainingResult train(const Dataset& data, const TrainingConfig& cfg);

// Per-component one-step mean squared error in physical units, and the
// variance of each target component over the same rows.
struct PredictionError {
  OutputVec mse = OutputVec::Zero();
  OutputVec target_variance = OutputVec::Zero();
};

PredictionError prediction_error(const NetworkParams& net, const Dataset& data);

}  // namespace nnmpc

#endif  // NNMPC_CORE_TRAINING_HPP_
