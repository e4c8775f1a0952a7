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

#include "tlqg/planner.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "tlqg/parallel.hpp"

namespace tlqg {

namespace {

constexpr double kArmijo = 1e-4;
constexpr double kMinStep = 1e-14;

double total_cost(const Eigen::VectorXd& u, const PlanProblem& problem, double weight) {
  return evaluate_plan_cost<double>(u, problem, weight).total;
}

bool is_psd(const Eigen::Matrix2d& M) {
  if ((M - M.transpose()).cwiseAbs().maxCoeff() > 1e-12) return false;
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(M);
  return es.eigenvalues().minCoeff() >= -1e-12;
}

}  // namespace

std::string to_string(InitStrategy s) { return s == InitStrategy::kZero ? "zero" : "steer"; }

InitStrategy init_strategy_from_string(const std::string& s) {
  if (s == "zero") return InitStrategy::kZero;
  if (s == "steer") return InitStrategy::kSteer;
  throw std::invalid_argument("unknown init strategy '" + s + "'");
}

void PlanProblem::validate() const {
  world.validate();
  if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
  if (!(goal_radius > 0.0)) throw std::invalid_argument("goal_radius must be > 0");
  if (!(control_radius > 0.0)) throw std::invalid_argument("control_radius must be > 0");
  if (!is_psd(effort_weight)) throw std::invalid_argument("effort_weight must be symmetric PSD");
  if (!(barrier.weight >= 0.0)) throw std::invalid_argument("barrier weight must be >= 0");
  if (!(barrier.sharpness > 0.0)) throw std::invalid_argument("barrier sharpness must be > 0");
  const auto& o = optimizer;
  if (o.max_outer_iters < 1 || o.max_inner_iters < 1) {
    throw std::invalid_argument("optimizer iteration limits must be positive");
  }
  if (!(o.gradient_tolerance > 0.0) || !(o.penalty_weight_initial > 0.0) || !(o.fd_step > 0.0)) {
    throw std::invalid_argument("optimizer tolerances and weights must be positive");
  }
  if (!(o.penalty_growth > 1.0)) throw std::invalid_argument("penalty_growth must be > 1");
  if (!(o.terminal_margin >= 0.0) || o.terminal_margin >= goal_radius) {
    throw std::invalid_argument("terminal_margin must lie in [0, goal_radius)");
  }
}

Eigen::VectorXd stack_controls(const std::vector<Control>& controls) {
  Eigen::VectorXd out(kControlDim * static_cast<Eigen::Index>(controls.size()));
  for (std::size_t t = 0; t < controls.size(); ++t) {
    out.segment<kControlDim>(static_cast<Eigen::Index>(kControlDim * t)) = controls[t];
  }
  return out;
}

Eigen::Vector3d barrier_gradient(const State& state, const std::vector<Obstacle>& obstacles,
                                 const BarrierParams& params) {
  Eigen::Vector3d g = Eigen::Vector3d::Zero();
  for (const auto& ob : obstacles) {
    const Eigen::Vector2d rel(state(0) - ob.cx, state(1) - ob.cy);
    const double d = rel.norm();
    if (d == 0.0) continue;
    const double e = std::exp(params.sharpness * (d - ob.radius - ob.safety_margin));
    if (!std::isfinite(e)) continue;
    const double dcost_dd = -params.weight * params.sharpness * e / ((1.0 + e) * (1.0 + e));
    g.head<2>() += dcost_dd * rel / d;
  }
  return g;
}

Eigen::VectorXd cost_gradient(const Eigen::VectorXd& stacked_controls, const PlanProblem& problem,
                              double penalty_weight, int threads) {
  const double h = problem.optimizer.fd_step;
  Eigen::VectorXd g(stacked_controls.size());
  parallel_for(static_cast<std::size_t>(stacked_controls.size()), threads, [&](std::size_t i) {
    const auto k = static_cast<Eigen::Index>(i);
    Eigen::VectorXd up = stacked_controls;
    Eigen::VectorXd um = stacked_controls;
    up(k) += h;
    um(k) -= h;
    g(k) = (total_cost(up, problem, penalty_weight) - total_cost(um, problem, penalty_weight)) /
           (2.0 * h);
  });
  return g;
}

Eigen::VectorXd initial_guess(const PlanProblem& problem, InitStrategy strategy) {
  Eigen::VectorXd u = Eigen::VectorXd::Zero(problem.decision_dim());
  if (strategy == InitStrategy::kZero) return u;

  // Turn toward the goal, then advance while correcting heading.
  const double dt = problem.world.dt;
  State x = problem.start;
  for (int t = 0; t < problem.horizon; ++t) {
    const Eigen::Vector2d to_goal = problem.goal - x.head<2>();
    const double dist = to_goal.norm();
    Control c = Control::Zero();
    if (dist > 0.5 * problem.goal_radius) {
      const double heading_err = wrap_angle(std::atan2(to_goal.y(), to_goal.x()) - x(2));
      c(1) = heading_err / dt;
      if (std::abs(heading_err) < 0.3) c(0) = dist / (dt * (problem.horizon - t));
      const double n = c.norm();
      if (n > problem.control_radius) c *= problem.control_radius / n;
    }
    u.segment<kControlDim>(kControlDim * t) = c;
    x = step_dynamics<double>(x, c, dt);
  }
  return u;
}

NominalPlan make_plan(const std::vector<Control>& controls, const PlanProblem& problem,
                      double penalty_weight) {
  NominalPlan plan;
  plan.controls = controls;
  plan.states = rollout_nominal<double>(controls, problem.start, problem.world.dt);
  plan.covariances = propagate_nominal_covariances<double>(plan.states, controls, problem.world);
  plan.cost = evaluate_plan_cost<double>(stack_controls(controls), problem, penalty_weight);
  return plan;
}

bool plan_is_feasible(const NominalPlan& plan, const PlanProblem& problem) {
  if ((plan.states.back().head<2>() - problem.goal).norm() >= problem.goal_radius) return false;
  for (const auto& u : plan.controls) {
    if (u.norm() > problem.control_radius + 1e-6) return false;
  }
  return true;
}

int barrier_violations(const NominalPlan& plan, const PlanProblem& problem) {
  int count = 0;
  for (const auto& x : plan.states) {
    for (const auto& ob : problem.world.obstacles) {
      if (std::hypot(x(0) - ob.cx, x(1) - ob.cy) < ob.radius + ob.safety_margin) {
        ++count;
        break;
      }
    }
  }
  return count;
}

NominalPlan solve_plan(const PlanProblem& problem, int threads) {
  problem.validate();
  const OptimizerParams& opt = problem.optimizer;
  const Eigen::VectorXd guess = initial_guess(problem, opt.init_strategy);

  Eigen::VectorXd u = guess;
  double weight = opt.penalty_weight_initial;
  std::vector<std::pair<double, double>> history;
  int iterations = 0;

  for (int outer = 0; outer < opt.max_outer_iters; ++outer) {
    if (outer > 0) weight *= opt.penalty_growth;
    double f = total_cost(u, problem, weight);
    Eigen::VectorXd g = cost_gradient(u, problem, weight, threads);
    double step = 1.0;
    Eigen::VectorXd s_prev;
    Eigen::VectorXd y_prev;

    for (int inner = 0; inner < opt.max_inner_iters; ++inner) {
      const double gnorm2 = g.squaredNorm();
      if (std::sqrt(gnorm2) <= opt.gradient_tolerance) break;

      // Barzilai-Borwein trial step, then halve until the Armijo condition holds.
      double trial = 2.0 * step;
      if (s_prev.size() > 0) {
        const double sy = s_prev.dot(y_prev);
        if (sy > 0.0) trial = s_prev.squaredNorm() / sy;
      }
      bool accepted = false;
      Eigen::VectorXd u_new;
      double f_new = 0.0;
      for (double a = trial; a >= kMinStep; a *= 0.5) {
        u_new = u - a * g;
        f_new = total_cost(u_new, problem, weight);
        if (f_new <= f - kArmijo * a * gnorm2) {
          step = a;
          accepted = true;
          break;
        }
      }
      if (!accepted) break;

      Eigen::VectorXd g_new = cost_gradient(u_new, problem, weight, threads);
      s_prev = u_new - u;
      y_prev = g_new - g;
      u = std::move(u_new);
      f = f_new;
      g = std::move(g_new);
      ++iterations;
      history.emplace_back(weight, f);
    }

    const NominalPlan probe = make_plan(unstack_controls<double>(u), problem, weight);
    if (plan_is_feasible(probe, problem) && probe.cost.terminal_residual == 0.0 &&
        probe.cost.control_residual == 0.0) {
      break;
    }
  }

  const double guess_cost = total_cost(guess, problem, weight);
  if (guess_cost < total_cost(u, problem, weight)) u = guess;

  NominalPlan plan = make_plan(unstack_controls<double>(u), problem, weight);
  plan.converged = plan_is_feasible(plan, problem);
  plan.iterations = iterations;
  plan.cost_history = std::move(history);
  plan.initial_guess_cost = guess_cost;
  return plan;
}

}  // namespace tlqg
