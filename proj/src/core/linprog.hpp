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

#ifndef NNMPC_CORE_LINPROG_HPP_
#define NNMPC_CORE_LINPROG_HPP_

#include <Eigen/Core>

namespace nnmpc {

enum class LpStatus { kOptimal, kInfeasible, kUnbounded, kPivotLimit };

struct LpResult {
  LpStatus status = LpStatus::kInfeasible;
  Eigen::VectorXd x;
  double objective = 0.0;
};

// minimize c'x  subject to  A x <= b,  x >= 0.
// Dense two-phase tableau simplex with Bland's rule; meant for the small
// subproblems of the trust-region optimizer, not for large LPs.
LpResult solve_lp(const Eigen::VectorXd& c, const Eigen::MatrixXd& a,
                  const Eigen::VectorXd& b, int max_pivots = 5000);

}  // namespace nnmpc

#endif  // NNMPC_CORE_LINPROG_HPP_
