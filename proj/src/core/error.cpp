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

#include "core/error.hpp"

namespace nnmpc {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid-argument";
    case ErrorCode::kIo: return "io";
    case ErrorCode::kSchema: return "schema";
    case ErrorCode::kBounds: return "bounds";
    case ErrorCode::kCapacityExceeded: return "capacity-exceeded";
    case ErrorCode::kSingularDynamics: return "singular-dynamics";
    case ErrorCode::kIntegrationDiverged: return "integration-diverged";
    case ErrorCode::kRolloutDiverged: return "rollout-diverged";
    case ErrorCode::kTrainingDiverged: return "training-diverged";
    case ErrorCode::kInputDomain: return "input-domain";
    case ErrorCode::kOptimizer: return "optimizer";
    case ErrorCode::kAborted: return "aborted";
  }
  return "unknown";
}

}  // namespace nnmpc
