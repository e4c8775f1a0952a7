// Copyright 2026 The tlqg Authors
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

#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tlqg/filters.hpp"
#include "tlqg/models.hpp"

namespace tlqg {

/// Sigmoid obstacle barrier: weight / (1 + exp(sharpness * clearance)).
struct BarrierParams {
  double weight = 10.0;
  double sharpness = 20.0;  // 1/m
};

enum class InitStrategy { kZero, kSteer };

std::string to_string(InitStrategy s);
InitStrategy init_strategy_from_string(const std::string& s);

struct OptimizerParams {
  int max_outer_iters = 6;
  int max_inner_iters = 400;
  double gradient_tolerance = 1e-6;
  double penalty_weight_initial = 10.0;
  double penalty_growth = 10.0;
  double fd_step = 1e-5;
  InitStrategy init_strategy = InitStrategy::kZero;
  // Terminal ball used by the penalty is r_g - terminal_margin, so the exterior
  // penalty settles strictly inside the goal ball.
  double terminal_margin = 1e-3;
};

struct PlanProblem {
  State start = State::Zero();
  Eigen::Vector2d goal = Eigen::Vector2d::Zero();
  double goal_radius = 0.2;
  double control_radius = 1.2;
  int horizon = 40;
  Eigen::Matrix2d effort_weight = 0.1 * Eigen::Matrix2d::Identity();
  WorldModel world;
  BarrierParams barrier;
  OptimizerParams optimizer;

  int decision_dim() const { return kControlDim * horizon; }

  /// Throws std::invalid_argument on the first violated invariant.
  void validate() const;
};

template <typename Scalar>
struct CostBreakdownT {
  Scalar trace_term{0.0};
  Scalar effort_term{0.0};
  Scalar barrier_term{0.0};
  Scalar terminal_residual{0.0};
  Scalar control_residual{0.0};
  double penalty_weight = 0.0;
  Scalar total{0.0};
};
using CostBreakdown = CostBreakdownT<double>;

struct NominalPlan {
  std::vector<Control> controls;     // u^p_0 .. u^p_{K-1}
  std::vector<State> states;         // x^p_0 .. x^p_K
  std::vector<Eigen::Matrix3d> covariances;  // P+_0 .. P+_K at the planning noise level
  CostBreakdown cost;
  bool converged = false;
  int iterations = 0;
  // Total penalized cost after each accepted descent step, with the weight in force.
  std::vector<std::pair<double, double>> cost_history;
  double initial_guess_cost = 0.0;  // initial guess under the final penalty weight

  int horizon() const { return static_cast<int>(controls.size()); }
};

template <typename Scalar>
std::vector<ControlT<Scalar>> unstack_controls(const VectorX<Scalar>& stacked) {
  std::vector<ControlT<Scalar>> out(static_cast<std::size_t>(stacked.size() / kControlDim));
  for (std::size_t t = 0; t < out.size(); ++t) {
    out[t] = stacked.template segment<kControlDim>(static_cast<Eigen::Index>(kControlDim * t));
  }
  return out;
}

Eigen::VectorXd stack_controls(const std::vector<Control>& controls);

template <typename Scalar>
std::vector<StateT<Scalar>> rollout_nominal(const std::vector<ControlT<Scalar>>& controls,
                                            const StateT<Scalar>& start, double dt) {
  std::vector<StateT<Scalar>> states;
  states.reserve(controls.size() + 1);
  states.push_back(start);
  for (const auto& u : controls) states.push_back(step_dynamics<Scalar>(states.back(), u, dt));
  return states;
}

template <typename Scalar>
Scalar barrier_cost(const StateT<Scalar>& state, const std::vector<Obstacle>& obstacles,
                    const BarrierParams& params) {
  using std::exp;
  using std::sqrt;
  Scalar total(0.0);
  for (const auto& ob : obstacles) {
    const Scalar dx = state(0) - ob.cx;
    const Scalar dy = state(1) - ob.cy;
    const Scalar d = sqrt(dx * dx + dy * dy);
    total += params.weight / (1.0 + exp(params.sharpness * (d - ob.radius - ob.safety_margin)));
  }
  return total;
}

/// Analytic gradient of barrier_cost with respect to the state.
Eigen::Vector3d barrier_gradient(const State& state, const std::vector<Obstacle>& obstacles,
                                 const BarrierParams& params);

/// Problem objective plus exterior quadratic penalties for the terminal ball and the
/// control-norm bound, at the given penalty weight.
template <typename Scalar>
CostBreakdownT<Scalar> evaluate_plan_cost(const VectorX<Scalar>& stacked_controls,
                                          const PlanProblem& problem, double penalty_weight) {
  using std::sqrt;
  const auto controls = unstack_controls<Scalar>(stacked_controls);
  const StateT<Scalar> start = problem.start.cast<Scalar>();
  const auto states = rollout_nominal<Scalar>(controls, start, problem.world.dt);
  const auto covs = propagate_nominal_covariances<Scalar>(states, controls, problem.world);
  const Eigen::Matrix<Scalar, 2, 2> Wu = problem.effort_weight.cast<Scalar>();

  CostBreakdownT<Scalar> c;
  c.penalty_weight = penalty_weight;
  for (std::size_t t = 1; t < covs.size(); ++t) c.trace_term += covs[t].trace();
  for (const auto& u : controls) {
    c.effort_term += u.dot(Wu * u);
    const Scalar excess = u.norm() - problem.control_radius;
    if (value_of(excess) > 0.0) c.control_residual += excess * excess;
  }
  for (const auto& x : states) c.barrier_term += barrier_cost<Scalar>(x, problem.world.obstacles, problem.barrier);

  const Scalar dx = states.back()(0) - problem.goal(0);
  const Scalar dy = states.back()(1) - problem.goal(1);
  const double radius = problem.goal_radius - problem.optimizer.terminal_margin;
  const Scalar excess = sqrt(dx * dx + dy * dy) - radius;
  if (value_of(excess) > 0.0) c.terminal_residual = excess * excess;

  c.total = c.trace_term + c.effort_term + c.barrier_term +
            penalty_weight * (c.terminal_residual + c.control_residual);
  return c;
}

/// Central finite-difference gradient of the total penalized cost. Coordinates may be
/// evaluated on `threads` workers; the result does not depend on the worker count.
Eigen::VectorXd cost_gradient(const Eigen::VectorXd& stacked_controls, const PlanProblem& problem,
                              double penalty_weight, int threads = 1);

Eigen::VectorXd initial_guess(const PlanProblem& problem, InitStrategy strategy);

/// Fills states, covariances and cost for a fixed control sequence.
NominalPlan make_plan(const std::vector<Control>& controls, const PlanProblem& problem,
                      double penalty_weight);

/// Terminal ball and control-norm constraints in their unmodified form.
bool plan_is_feasible(const NominalPlan& plan, const PlanProblem& problem);

/// Number of nominal states that lie inside some obstacle's radius + safety margin.
int barrier_violations(const NominalPlan& plan, const PlanProblem& problem);

/// Penalty method with gradient descent and Armijo backtracking over the stacked controls.
NominalPlan solve_plan(const PlanProblem& problem, int threads = 1);

}  // namespace tlqg
