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

#ifndef NNMPC_CORE_DATASET_HPP_
#define NNMPC_CORE_DATASET_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "core/types.hpp"

namespace nnmpc {

struct Transition {
  JointState state;
  Vec4 u = Vec4::Zero();
  StateDelta delta;
};

// Rows [first, first + rows) of a Dataset came from one episode, whose state
// after the last transition is `terminal`.
struct EpisodeInfo {
  std::string kind;
  int rows = 0;
  JointState terminal;
  int clamp_events = 0;
};

struct Dataset {
  std::vector<Transition> rows;
  std::vector<EpisodeInfo> episodes;
  double sample_period = 0.05;
  std::string scenario;
  std::uint64_t seed = 0;
  int discarded_episodes = 0;
};

// Checks that every delta is exactly the difference of consecutive states
// within its episode. Throws Error(kSchema) naming the first bad row.
void validate(const Dataset& data);

// Writes `csv` (q1..q4,qd1..qd4,u1..u4,dq1..dq4,dqd1..dqd4) and its sidecar
// metadata file, see metadata_path().
void save_dataset(const Dataset& data, const std::filesystem::path& csv);
Dataset load_dataset(const std::filesystem::path& csv);

std::filesystem::path metadata_path(const std::filesystem::path& csv);

}  // namespace nnmpc

#endif  // NNMPC_CORE_DATASET_HPP_
