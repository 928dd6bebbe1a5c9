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

#ifndef NNMPC_CORE_ERROR_HPP_
#define NNMPC_CORE_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace nnmpc {

// Error categories. The C API maps these one-to-one onto nnmpc_status.
enum class ErrorCode {
  kInvalidArgument = 1,
  kIo,
  kSchema,
  kBounds,
  kCapacityExceeded,
  kSingularDynamics,
  kIntegrationDiverged,
  kRolloutDiverged,
  kTrainingDiverged,
  kInputDomain,
  kOptimizer,
  kAborted,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

// Integration and rollout failures report where they happened.
class IndexedError : public Error {
 public:
  IndexedError(ErrorCode code, const std::string& what, int index)
      : Error(code, what + " (step " + std::to_string(index) + ")"),
        index_(index) {}

  int index() const { return index_; }

 private:
  int index_;
};

}  // namespace nnmpc

#endif  // NNMPC_CORE_ERROR_HPP_
