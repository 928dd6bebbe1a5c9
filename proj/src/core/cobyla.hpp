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

// Derivative-free constrained minimization in the COBYLA family: linear
// interpolation of the objective and constraints over an n+1 point simplex,
// trust-region steps from a linear program, and an l-infinity merit function
// with an adaptive penalty.

#ifndef NNMPC_CORE_COBYLA_HPP_
#define NNMPC_CORE_COBYLA_HPP_

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace nnmpc {

using ObjectiveFn = std::function<double(std::span<const double>)>;
// Writes every constraint value into `out`; a constraint holds when >= 0.
using ConstraintFn = std::function<void(std::span<const double> x, std::span<double> out)>;
using ScalarConstraint = std::function<double(std::span<const double>)>;

struct OptProblem {
  int dimension = 0;
  ObjectiveFn objective;
  int num_constraints = 0;
  ConstraintFn constraints;
  std::vector<double> x0;
  double rho_begin = 0.5;
  double rho_end = 1e-3;
  int max_evaluations = 60;
};

// Bundles a list of scalar constraints into one ConstraintFn.
ConstraintFn constraint_list(std::vector<ScalarConstraint> list);

enum class Termination { kRadiusConverged, kEvalBudget, kStall };

const char* termination_name(Termination t);

struct OptResult {
  std::vector<double> x;
  double objective = 0.0;
  double max_violation = 0.0;
  double initial_objective = 0.0;
  int evaluations = 0;             // objective calls
  int constraint_evaluations = 0;  // calls of the constraint function
  Termination reason = Termination::kRadiusConverged;
};

// Points whose worst constraint is above -kFeasibilityTolerance count as
// feasible.
inline constexpr double kFeasibilityTolerance = 1e-8;

// The objective and constraints are always evaluated back to back at the same
// point, objective first. Returns the best feasible point seen, or the least
// infeasible one if none was feasible. Throws Error(kOptimizer) when the
// objective is not finite at x0 and Error(kInvalidArgument) on a malformed
// problem.
OptResult minimize(const OptProblem& problem);

// max(0, -min_i c_i(x)). Does not count towards any budget.
double max_violation(const OptProblem& problem, std::span<const double> x);

// "evals=<n> reason=<termination> violation=<v> objective=<f>".
std::string solve_stats(const OptResult& result);

}  // namespace nnmpc

#endif  // NNMPC_CORE_COBYLA_HPP_
