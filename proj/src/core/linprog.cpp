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

#include "core/linprog.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace nnmpc {
namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

class Tableau {
 public:
  // Rows 0..m-1 are constraints, row m is the objective (reduced costs, with
  // minus the objective value in the last column).
  Tableau(Index rows, Index cols) : t_(MatrixXd::Zero(rows + 1, cols + 1)) {}

  MatrixXd& t() { return t_; }
  Index rows() const { return t_.rows() - 1; }
  Index cols() const { return t_.cols() - 1; }
  double& rhs(Index i) { return t_(i, cols()); }

  void pivot(Index r, Index c) {
    t_.row(r) /= t_(r, c);
    for (Index i = 0; i < t_.rows(); ++i) {
      if (i != r && t_(i, c) != 0.0) t_.row(i) -= t_(i, c) * t_.row(r);
    }
  }

 private:
  MatrixXd t_;
};

// Runs simplex iterations on the objective row. Columns with allowed[j] ==
// false never enter. Returns false when unbounded or out of pivots.
LpStatus iterate(Tableau& tab, std::vector<Index>& basis,
                 const std::vector<bool>& allowed, double cost_tol,
                 int& pivots_left) {
  const Index m = tab.rows();
  const Index n = tab.cols();
  MatrixXd& t = tab.t();
  constexpr double kPivotTol = 1e-11;
  while (true) {
    Index enter = -1;
    for (Index j = 0; j < n; ++j) {
      if (allowed[j] && t(m, j) < -cost_tol) {
        enter = j;  // Bland: lowest index
        break;
      }
    }
    if (enter < 0) return LpStatus::kOptimal;
    Index leave = -1;
    double best = std::numeric_limits<double>::infinity();
    for (Index i = 0; i < m; ++i) {
      if (t(i, enter) > kPivotTol) {
        const double ratio = tab.rhs(i) / t(i, enter);
        if (ratio < best - 1e-14 ||
            (std::abs(ratio - best) <= 1e-14 && leave >= 0 && basis[i] < basis[leave])) {
          best = ratio;
          leave = i;
        }
      }
    }
    if (leave < 0) return LpStatus::kUnbounded;
    if (pivots_left-- <= 0) return LpStatus::kPivotLimit;
    tab.pivot(leave, enter);
    basis[leave] = enter;
  }
}

}  // namespace

LpResult solve_lp(const VectorXd& c, const MatrixXd& a, const VectorXd& b,
                  int max_pivots) {
  const Index m = a.rows();
  const Index n = a.cols();
  LpResult result;
  result.x = VectorXd::Zero(n);

  std::vector<Index> artificial_rows;
  for (Index i = 0; i < m; ++i) {
    if (b(i) < 0.0) artificial_rows.push_back(i);
  }
  const auto n_art = static_cast<Index>(artificial_rows.size());
  // Columns: x (n), slack (m), artificial (n_art).
  const Index cols = n + m + n_art;
  Tableau tab(m, cols);
  MatrixXd& t = tab.t();
  std::vector<Index> basis(static_cast<std::size_t>(m));
  Index next_art = n + m;
  for (Index i = 0; i < m; ++i) {
    const double sign = b(i) < 0.0 ? -1.0 : 1.0;
    t.row(i).head(n) = sign * a.row(i);
    t(i, n + i) = sign;
    tab.rhs(i) = sign * b(i);
    if (sign < 0.0) {
      t(i, next_art) = 1.0;
      basis[static_cast<std::size_t>(i)] = next_art++;
    } else {
      basis[static_cast<std::size_t>(i)] = n + i;
    }
  }

  int pivots_left = max_pivots;
  std::vector<bool> allowed(static_cast<std::size_t>(cols), true);

  if (n_art > 0) {
    // Phase 1: minimize the sum of artificials.
    t.row(m).setZero();
    for (Index k = 0; k < n_art; ++k) t(m, n + m + k) = 1.0;
    for (Index i : artificial_rows) t.row(m) -= t.row(i);
    const double scale = std::max(1.0, b.cwiseAbs().maxCoeff());
    const LpStatus s = iterate(tab, basis, allowed, 1e-12 * scale, pivots_left);
    if (s == LpStatus::kPivotLimit) {
      result.status = s;
      return result;
    }
    if (-t(m, cols) > 1e-9 * scale) {
      result.status = LpStatus::kInfeasible;
      return result;
    }
    // Drive zero-level artificials out of the basis where possible.
    for (Index i = 0; i < m; ++i) {
      if (basis[static_cast<std::size_t>(i)] < n + m) continue;
      for (Index j = 0; j < n + m; ++j) {
        if (std::abs(t(i, j)) > 1e-9) {
          tab.pivot(i, j);
          basis[static_cast<std::size_t>(i)] = j;
          break;
        }
      }
    }
    for (Index k = n + m; k < cols; ++k) allowed[static_cast<std::size_t>(k)] = false;
  }

  // Phase 2: reduced costs of the real objective for the current basis.
  t.row(m).setZero();
  t.row(m).head(n) = c.transpose();
  for (Index i = 0; i < m; ++i) {
    const Index bj = basis[static_cast<std::size_t>(i)];
    const double cb = bj < n ? c(bj) : 0.0;
    if (cb != 0.0) t.row(m) -= cb * t.row(i);
  }
  const double cscale = std::max(1e-300, c.cwiseAbs().maxCoeff());
  const LpStatus s = iterate(tab, basis, allowed, 1e-13 * cscale, pivots_left);
  result.status = s;
  if (s != LpStatus::kOptimal) return result;
  for (Index i = 0; i < m; ++i) {
    const Index bj = basis[static_cast<std::size_t>(i)];
    if (bj < n) result.x(bj) = std::max(0.0, tab.rhs(i));
  }
  result.objective = c.dot(result.x);
  return result;
}

}  // namespace nnmpc
