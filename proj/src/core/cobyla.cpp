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

#include "core/cobyla.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Dense>

#include "core/error.hpp"
#include "core/linprog.hpp"

namespace nnmpc {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Simplex acceptability, in units of the trust-region radius.
constexpr double kMinFaceDistance = 0.25;
constexpr double kMaxPivotDistance = 2.1;
constexpr double kGeometryStep = 0.5;
constexpr double kPoorRatio = 0.1;

struct Vertex {
  VectorXd x;
  double f = 0.0;
  VectorXd c;
  double viol = 0.0;
  bool sanitized = false;  // objective or a constraint was not finite
};

struct BudgetExhausted {};

struct Model {
  int pivot = 0;
  std::vector<int> others;  // simplex indices of the non-pivot vertices
  MatrixXd dinv;            // inverse of the rows (x_k - x_pivot)
  VectorXd g;               // objective gradient
  MatrixXd grads;           // constraint gradients, one column each
  VectorXd dist;            // inf-norm distance from the pivot
  VectorXd sigma;           // distance to the opposite face
  bool singular = false;
  bool geometry_ok = true;
};

struct TrustStep {
  VectorXd d;
  double gd = 0.0;
  double viol_pred = 0.0;
};

double violation_of(const VectorXd& c) {
  if (c.size() == 0) return 0.0;
  return std::max(0.0, -c.minCoeff());
}

class Solver {
 public:
  explicit Solver(const OptProblem& p)
      : p_(p), n_(p.dimension), m_(p.num_constraints), rho_(p.rho_begin) {}

  OptResult run() {
    OptResult out;
    const VectorXd x0 = Eigen::Map<const VectorXd>(p_.x0.data(), n_);
    try {
      const Vertex v0 = evaluate(x0);
      out.initial_objective = v0.f;
      sim_.push_back(v0);
      for (int j = 0; j < n_; ++j) {
        VectorXd x = x0;
        x(j) += rho_;
        Vertex v = evaluate(x);
        if (v.sanitized) {
          x(j) = x0(j) - rho_;
          v = evaluate(x);
        }
        sim_.push_back(v);
      }
      out.reason = iterate();
    } catch (const BudgetExhausted&) {
      out.reason = Termination::kEvalBudget;
    }
    out.x.assign(best_.x.data(), best_.x.data() + n_);
    out.objective = best_.f;
    out.max_violation = best_.viol;
    out.evaluations = evals_;
    out.constraint_evaluations = constraint_evals_;
    return out;
  }

 private:
  Vertex evaluate(const VectorXd& x) {
    if (evals_ >= p_.max_evaluations) throw BudgetExhausted{};
    ++evals_;
    Vertex v;
    v.x = x;
    v.f = p_.objective(std::span<const double>(x.data(), n_));
    v.c = VectorXd::Zero(m_);
    if (m_ > 0) {
      ++constraint_evals_;
      p_.constraints(std::span<const double>(x.data(), n_),
                     std::span<double>(v.c.data(), m_));
    }
    if (!std::isfinite(v.f)) {
      if (evals_ == 1) {
        throw Error(ErrorCode::kOptimizer,
                    "minimize: objective is not finite at the initial point");
      }
      v.f = worst_f_ + std::abs(worst_f_) + std::abs(first_f_);
      if (v.f <= worst_f_) v.f = worst_f_ + 1.0;
      v.sanitized = true;
    } else {
      if (evals_ == 1) first_f_ = v.f;
      worst_f_ = evals_ == 1 ? v.f : std::max(worst_f_, v.f);
    }
    for (int i = 0; i < m_; ++i) {
      if (!std::isfinite(v.c(i))) {
        v.c(i) = -(1.0 + worst_c_);
        v.sanitized = true;
      } else {
        worst_c_ = std::max(worst_c_, std::abs(v.c(i)));
      }
    }
    v.viol = violation_of(v.c);
    record(v);
    return v;
  }

  void record(const Vertex& v) {
    const bool feasible = v.viol <= kFeasibilityTolerance;
    if (evals_ == 1) {
      best_ = v;
      have_feasible_ = feasible;
      return;
    }
    if (feasible) {
      if (!have_feasible_ || v.f < best_.f) best_ = v;
      have_feasible_ = true;
    } else if (!have_feasible_) {
      if (v.viol < best_.viol || (v.viol == best_.viol && v.f < best_.f)) best_ = v;
    }
  }

  double merit(const Vertex& v) const { return v.f + mu_ * v.viol; }

  int pick_pivot() const {
    int b = 0;
    for (int k = 1; k <= n_; ++k) {
      const double mk = merit(sim_[k]);
      const double mb = merit(sim_[b]);
      if (mk < mb || (mk == mb && sim_[k].viol < sim_[b].viol)) b = k;
    }
    return b;
  }

  Model build_model() const {
    Model mdl;
    mdl.pivot = pick_pivot();
    const Vertex& pv = sim_[mdl.pivot];
    MatrixXd d(n_, n_);
    VectorXd fdiff(n_);
    MatrixXd cdiff(n_, m_);
    for (int k = 0, row = 0; k <= n_; ++k) {
      if (k == mdl.pivot) continue;
      mdl.others.push_back(k);
      d.row(row) = (sim_[k].x - pv.x).transpose();
      fdiff(row) = sim_[k].f - pv.f;
      if (m_ > 0) cdiff.row(row) = (sim_[k].c - pv.c).transpose();
      ++row;
    }
    Eigen::FullPivLU<MatrixXd> lu(d);
    if (!lu.isInvertible()) {
      mdl.singular = true;
      return mdl;
    }
    mdl.dinv = lu.inverse();
    if (!mdl.dinv.allFinite()) {
      mdl.singular = true;
      return mdl;
    }
    mdl.g = mdl.dinv * fdiff;
    mdl.grads = m_ > 0 ? MatrixXd(mdl.dinv * cdiff) : MatrixXd(n_, 0);
    mdl.dist.resize(n_);
    mdl.sigma.resize(n_);
    for (int k = 0; k < n_; ++k) {
      mdl.dist(k) = (sim_[mdl.others[k]].x - pv.x).lpNorm<Eigen::Infinity>();
      mdl.sigma(k) = 1.0 / mdl.dinv.col(k).norm();
      if (mdl.dist(k) > kMaxPivotDistance * rho_ ||
          mdl.sigma(k) < kMinFaceDistance * rho_) {
        mdl.geometry_ok = false;
      }
    }
    return mdl;
  }

  // Linearized subproblem over the box |d|_inf <= rho, with d = dp - dm.
  // First the least achievable linearized violation, then the best linear
  // objective that keeps it. A small l1 penalty picks the shortest of
  // equally good steps.
  TrustStep trust_step(const Model& mdl) const {
    const Vertex& pv = sim_[mdl.pivot];
    std::vector<int> active;
    for (int i = 0; i < m_; ++i) {
      if (pv.c(i) - rho_ * mdl.grads.col(i).lpNorm<1>() < 0.0) active.push_back(i);
    }
    const int k = static_cast<int>(active.size());
    const double gscale = mdl.g.lpNorm<Eigen::Infinity>();
    double cscale = 0.0;
    for (int i : active) cscale = std::max(cscale, mdl.grads.col(i).lpNorm<Eigen::Infinity>());

    auto build_rows = [&](bool with_slack, double relax, MatrixXd& a, VectorXd& b) {
      const int vars = 2 * n_ + (with_slack ? 1 : 0);
      a = MatrixXd::Zero(2 * n_ + k, vars);
      b = VectorXd::Zero(2 * n_ + k);
      for (int j = 0; j < 2 * n_; ++j) {
        a(j, j) = 1.0;
        b(j) = rho_;
      }
      for (int r = 0; r < k; ++r) {
        const VectorXd gi = mdl.grads.col(active[r]);
        a.row(2 * n_ + r).head(n_) = -gi.transpose();
        a.row(2 * n_ + r).segment(n_, n_) = gi.transpose();
        if (with_slack) a(2 * n_ + r, 2 * n_) = -1.0;
        b(2 * n_ + r) = pv.c(active[r]) + relax;
      }
    };

    TrustStep st;
    st.d = VectorXd::Zero(n_);
    double level = 0.0;
    MatrixXd a;
    VectorXd b;
    if (pv.viol > 0.0 && k > 0) {
      build_rows(true, 0.0, a, b);
      VectorXd cost = VectorXd::Constant(2 * n_ + 1, 1e-9 * std::max(cscale, 1e-300));
      cost(2 * n_) = 1.0;
      const LpResult lp = solve_lp(cost, a, b);
      if (lp.status != LpStatus::kOptimal) return finish_step(mdl, st);
      level = lp.x(2 * n_);
      level += 1e-9 * (1.0 + level);
    }
    build_rows(false, level, a, b);
    const double eps = 1e-8 * (gscale > 0.0 ? gscale : 1.0);
    VectorXd cost(2 * n_);
    cost.head(n_) = mdl.g.array() + eps;
    cost.tail(n_) = -mdl.g.array() + eps;
    const LpResult lp = solve_lp(cost, a, b);
    if (lp.status == LpStatus::kOptimal) st.d = lp.x.head(n_) - lp.x.tail(n_);
    return finish_step(mdl, st);
  }

  TrustStep finish_step(const Model& mdl, TrustStep st) const {
    st.gd = mdl.g.dot(st.d);
    if (m_ > 0) {
      const VectorXd cp = sim_[mdl.pivot].c + mdl.grads.transpose() * st.d;
      st.viol_pred = violation_of(cp);
    }
    return st;
  }

  void geometry_step(const Model& mdl) {
    int kk = 0;
    if (mdl.dist.maxCoeff(&kk) <= kMaxPivotDistance * rho_) mdl.sigma.minCoeff(&kk);
    VectorXd dir = mdl.dinv.col(kk);
    dir *= kGeometryStep * rho_ / dir.norm();
    const Vertex& pv = sim_[mdl.pivot];
    auto predicted_merit = [&](const VectorXd& d) {
      double viol = 0.0;
      if (m_ > 0) viol = violation_of(pv.c + mdl.grads.transpose() * d);
      return mdl.g.dot(d) + mu_ * viol;
    };
    if (predicted_merit(-dir) < predicted_merit(dir)) dir = -dir;
    const VectorXd x = pv.x + dir;
    sim_[mdl.others[kk]] = evaluate(x);
  }

  void insert(const Model& mdl, const Vertex& v, bool improved) {
    const Vertex& pv = sim_[mdl.pivot];
    const VectorXd lambda = mdl.dinv.transpose() * (v.x - pv.x);
    const VectorXd& ref = improved ? v.x : pv.x;
    auto weight = [&](const VectorXd& x) {
      const double r = (x - ref).lpNorm<Eigen::Infinity>() / rho_;
      return std::max(1.0, r * r);
    };
    int drop = -1;
    double best = 0.0;
    for (int k = 0; k < n_; ++k) {
      const double score = std::abs(lambda(k)) * weight(sim_[mdl.others[k]].x);
      if (score > best) {
        best = score;
        drop = mdl.others[k];
      }
    }
    if (improved) {
      const double score = std::abs(1.0 - lambda.sum()) * weight(pv.x);
      if (score > best) {
        best = score;
        drop = mdl.pivot;
      }
    }
    if (drop >= 0 && best > 1e-6) sim_[drop] = v;
  }

  bool reduce_rho() {
    if (rho_ <= p_.rho_end) return false;
    rho_ *= 0.5;
    if (rho_ <= 1.5 * p_.rho_end) rho_ = p_.rho_end;
    return true;
  }

  void restart_simplex(int pivot) {
    const Vertex pv = sim_[pivot];
    sim_.assign(1, pv);
    for (int j = 0; j < n_; ++j) {
      VectorXd x = pv.x;
      x(j) += rho_;
      sim_.push_back(evaluate(x));
    }
  }

  Termination iterate() {
    bool check_geometry = false;
    int singular = 0;
    while (true) {
      const Model mdl = build_model();
      if (mdl.singular) {
        if (++singular > 2) return Termination::kStall;
        restart_simplex(mdl.pivot);
        continue;
      }
      singular = 0;
      if (check_geometry) {
        check_geometry = false;
        if (!mdl.geometry_ok) {
          geometry_step(mdl);
          continue;
        }
        if (!reduce_rho()) return Termination::kRadiusConverged;
        continue;
      }
      const TrustStep st = trust_step(mdl);
      if (st.d.lpNorm<Eigen::Infinity>() < 0.5 * rho_) {
        check_geometry = true;
        continue;
      }
      const Vertex& pv = sim_[mdl.pivot];
      const double viol_drop = pv.viol - st.viol_pred;
      if (viol_drop > 0.0) {
        const double needed = st.gd / viol_drop;
        if (mu_ < 1.5 * needed) {
          mu_ = 2.0 * needed;
          if (pick_pivot() != mdl.pivot) continue;
        }
      }
      const double predicted = mu_ * viol_drop - st.gd;
      const Vertex pivot_copy = pv;
      const Vertex v = evaluate(pivot_copy.x + st.d);
      const double actual = merit(pivot_copy) - merit(v);
      const double ratio = predicted > 0.0 ? actual / predicted : -1.0;
      insert(mdl, v, actual > 0.0);
      if (ratio < kPoorRatio) check_geometry = true;
    }
  }

  const OptProblem& p_;
  int n_;
  int m_;
  double rho_;
  double mu_ = 0.0;
  std::vector<Vertex> sim_;
  Vertex best_;
  bool have_feasible_ = false;
  int evals_ = 0;
  int constraint_evals_ = 0;
  double first_f_ = 0.0;
  double worst_f_ = 0.0;
  double worst_c_ = 0.0;
};

}  // namespace

ConstraintFn constraint_list(std::vector<ScalarConstraint> list) {
  return [list = std::move(list)](std::span<const double> x, std::span<double> out) {
    for (std::size_t i = 0; i < list.size(); ++i) out[i] = list[i](x);
  };
}

const char* termination_name(Termination t) {
  switch (t) {
    case Termination::kRadiusConverged: return "radius-converged";
    case Termination::kEvalBudget: return "eval-budget";
    case Termination::kStall: return "stall";
  }
  return "unknown";
}

OptResult minimize(const OptProblem& problem) {
  if (problem.dimension < 1 ||
      problem.x0.size() != static_cast<std::size_t>(problem.dimension)) {
    throw Error(ErrorCode::kInvalidArgument, "minimize: dimension and x0 disagree");
  }
  if (!problem.objective || (problem.num_constraints > 0 && !problem.constraints) ||
      problem.num_constraints < 0) {
    throw Error(ErrorCode::kInvalidArgument, "minimize: missing objective or constraints");
  }
  if (!(problem.rho_begin > problem.rho_end && problem.rho_end > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "minimize: need rho_begin > rho_end > 0");
  }
  if (problem.max_evaluations < 1) {
    throw Error(ErrorCode::kInvalidArgument, "minimize: evaluation budget must be >= 1");
  }
  for (double v : problem.x0) {
    if (!std::isfinite(v)) {
      throw Error(ErrorCode::kInvalidArgument, "minimize: initial point is not finite");
    }
  }
  return Solver(problem).run();
}

double max_violation(const OptProblem& problem, std::span<const double> x) {
  if (problem.num_constraints == 0) return 0.0;
  VectorXd c(problem.num_constraints);
  problem.constraints(x, std::span<double>(c.data(), problem.num_constraints));
  for (int i = 0; i < c.size(); ++i) {
    if (!std::isfinite(c(i))) return std::numeric_limits<double>::infinity();
  }
  return violation_of(c);
}

std::string solve_stats(const OptResult& result) {
  std::ostringstream s;
  s << "evals=" << result.evaluations << " reason=" << termination_name(result.reason)
    << " violation=" << result.max_violation << " objective=" << result.objective;
  return s.str();
}

}  // namespace nnmpc
