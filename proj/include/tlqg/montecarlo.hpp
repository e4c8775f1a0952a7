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

#include <cstdint>
#include <cstring>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tlqg/filters.hpp"
#include "tlqg/lqr.hpp"
#include "tlqg/planner.hpp"
#include "tlqg/rng.hpp"

namespace tlqg {

/// Raised when too many rollouts abort for the aggregate statistics to be trusted.
class StatisticalValidityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Maximum fraction of aborted rollouts tolerated by the aggregate estimators.
inline constexpr double kMaxAbortFraction = 0.01;

/// Stage cost c_t(b, u) = trace(P) + u^T Wu u + state_cost(mean) and its collision set.
template <typename C>
concept StageCostModel = requires(const C& c, const Eigen::VectorXd& x) {
  { c.state_cost(x) } -> std::convertible_to<double>;
  { c.state_cost_gradient(x) } -> std::convertible_to<Eigen::VectorXd>;
  { c.in_collision(x) } -> std::convertible_to<bool>;
  { c.effort_weight() } -> std::convertible_to<Eigen::MatrixXd>;
};

/// Obstacle barrier on the estimate plus the planner's effort weight.
class BarrierStageCost {
 public:
  explicit BarrierStageCost(const PlanProblem& problem) : problem_(&problem) {}

  double state_cost(const Eigen::VectorXd& x) const {
    return barrier_cost<double>(State(x), problem_->world.obstacles, problem_->barrier);
  }
  Eigen::VectorXd state_cost_gradient(const Eigen::VectorXd& x) const {
    return barrier_gradient(State(x), problem_->world.obstacles, problem_->barrier);
  }
  bool in_collision(const Eigen::VectorXd& x) const {
    for (const auto& ob : problem_->world.obstacles) {
      if (std::hypot(x(0) - ob.cx, x(1) - ob.cy) < ob.radius) return true;
    }
    return false;
  }
  Eigen::MatrixXd effort_weight() const { return problem_->effort_weight; }

 private:
  const PlanProblem* problem_;
};

/// Trajectory the closed loop is linearized around, with covariances at the noise
/// level being simulated.
struct NominalTrajectory {
  std::vector<Eigen::VectorXd> states;        // K + 1
  std::vector<Eigen::VectorXd> controls;      // K
  std::vector<Eigen::MatrixXd> covariances;   // K + 1
  double control_radius = 0.0;

  int horizon() const { return static_cast<int>(controls.size()); }
};

/// Gradients of the stage costs at the nominal belief and control. Index K of the
/// belief gradients is the terminal cost.
struct CostJacobians {
  std::vector<Eigen::VectorXd> mean;     // dc_t / dxhat, K + 1 entries
  std::vector<Eigen::VectorXd> cov;      // dc_t / dvec(P), K + 1 entries
  std::vector<Eigen::VectorXd> control;  // dc_t / du, K entries
};

struct RolloutState {
  Eigen::VectorXd true_state;
  BeliefState belief;
};

struct RolloutResult {
  std::vector<RolloutState> trajectory;      // K + 1
  std::vector<Eigen::VectorXd> controls;     // K, as applied
  std::vector<Eigen::VectorXd> innovations;  // K
  double cost = 0.0;
  double first_order_error = 0.0;
  double max_deviation = 0.0;
  double terminal_error = 0.0;  // position distance to the nominal terminal state
  bool collided = false;
  bool aborted = false;
  std::string abort_reason;
  std::uint64_t seed = 0;
  std::uint64_t index = 0;
  std::uint64_t noise_digest = 0;  // FNV-1a over every noise draw consumed
};

/// Where a rollout takes its randomness from. `sign = -1` replays the antithetic path.
struct NoiseKey {
  std::uint64_t seed = 0;
  std::uint64_t index = 0;
  double sign = 1.0;
};

struct ErrorStats {
  int n_samples = 0;
  int n_aborted = 0;
  double mean = 0.0;
  double std = 0.0;
  double std_error = 0.0;
  double skewness = 0.0;
  double excess_kurtosis = 0.0;
};

struct SweepRecord {
  double epsilon = 0.0;
  double exit_probability = 0.0;
  int n_samples = 0;
  int n_aborted = 0;
  double mean_cost_gap = 0.0;
  double cost_gap_std_error = 0.0;
};

struct SweepResult {
  std::vector<SweepRecord> records;
  std::optional<double> slope;  // log|mean cost gap| vs log eps, when at least 2 usable points
  bool exit_monotone = true;
};

struct PairedComparison {
  int n_samples = 0;
  double closed_mean_max_deviation = 0.0;
  double open_mean_max_deviation = 0.0;
  double closed_mean_terminal_error = 0.0;
  double open_mean_terminal_error = 0.0;
  double terminal_gap_mean = 0.0;       // open - closed
  double terminal_gap_std_error = 0.0;  // paired
  bool noise_paired = true;             // both arms consumed identical noise
};

/// Throws StatisticalValidityError when more than kMaxAbortFraction of the rollouts aborted.
void check_abort_budget(int aborted, int total);

/// Symmetric PSD square root via eigendecomposition, negative eigenvalues clamped to 0.
Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& M);

/// Moments of a sample; skewness and excess kurtosis are 0 for a degenerate sample.
ErrorStats summarize(const std::vector<double>& samples);

template <StageCostModel Cost>
double stage_cost(const Cost& cost, const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov,
                  const Eigen::VectorXd* control) {
  double c = cov.trace() + cost.state_cost(mean);
  if (control != nullptr) c += control->dot(cost.effort_weight() * *control);
  return c;
}

/// Nominal value J^p of the realized cost, using the same stage costs as a rollout.
template <StageCostModel Cost>
double nominal_cost(const NominalTrajectory& nominal, const Cost& cost) {
  double J = 0.0;
  const int K = nominal.horizon();
  for (int t = 0; t < K; ++t) {
    J += stage_cost(cost, nominal.states[t], nominal.covariances[t], &nominal.controls[t]);
  }
  J += stage_cost(cost, nominal.states[K], nominal.covariances[K], nullptr);
  return J;
}

template <StageCostModel Cost>
CostJacobians cost_jacobians(const NominalTrajectory& nominal, const Cost& cost) {
  CostJacobians J;
  const int K = nominal.horizon();
  for (int t = 0; t <= K; ++t) {
    const auto n = nominal.covariances[t].rows();
    J.mean.push_back(cost.state_cost_gradient(nominal.states[t]));
    J.cov.push_back(Eigen::MatrixXd::Identity(n, n).reshaped());
    if (t < K) J.control.push_back(2.0 * cost.effort_weight() * nominal.controls[t]);
  }
  return J;
}

/// Linear term of the realized cost around the nominal: inner products of the cost
/// gradients with the belief and control deviations of a rollout.
template <FilterModel Model>
double first_order_error(const RolloutResult& rollout, const NominalTrajectory& nominal,
                         const CostJacobians& jac, const Model& model) {
  double e = 0.0;
  const int K = nominal.horizon();
  for (int t = 0; t <= K; ++t) {
    const BeliefState& b = rollout.trajectory[t].belief;
    e += jac.mean[t].dot(model.state_difference(b.mean, nominal.states[t]));
    e += jac.cov[t].dot((b.cov - nominal.covariances[t]).reshaped());
    if (t < K) e += jac.control[t].dot(rollout.controls[t] - nominal.controls[t]);
  }
  return e;
}

namespace detail {

inline void fnv_mix(std::uint64_t& h, const Eigen::VectorXd& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    std::uint64_t bits = 0;
    std::memcpy(&bits, &v(i), sizeof bits);
    for (int k = 0; k < 8; ++k) {
      h ^= (bits >> (8 * k)) & 0xFFu;
      h *= 0x100000001B3ull;
    }
  }
}

}  // namespace detail

/// Closed-loop execution of the joint true-state / estimate system: the true state is
/// driven by process noise, measured with sensor noise, tracked by an EKF, and
/// controlled by the feedback schedule acting on the estimate.
template <FilterModel Model, StageCostModel Cost>
RolloutResult simulate_closed_loop(const Model& model, const NoiseModel& noise, const Cost& cost,
                                   const NominalTrajectory& nominal, const GainSchedule& gains,
                                   const CostJacobians& jac, const NoiseKey& key) {
  const int K = nominal.horizon();
  if (gains.horizon() != K) throw std::invalid_argument("gain schedule horizon mismatch");
  const int nx = model.state_dim();
  const int nz = model.measurement_dim();
  const double eps = noise.epsilon;
  const Eigen::MatrixXd sqrt_x0 = psd_sqrt(noise.sigma_x0);
  const Eigen::MatrixXd process_map = noise.G * psd_sqrt(noise.sigma_omega);
  const Eigen::MatrixXd sqrt_nu = psd_sqrt(noise.sigma_nu);

  RolloutResult r;
  r.seed = key.seed;
  r.index = key.index;
  r.noise_digest = 0xCBF29CE484222325ull;
  r.trajectory.reserve(K + 1);

  Eigen::VectorXd xi(nx);
  Eigen::VectorXd xi_z(nz);
  standard_normals(key.seed, key.index, NoiseStream::kInit, 0, xi);
  xi *= key.sign;
  detail::fnv_mix(r.noise_digest, xi);

  Eigen::VectorXd x = model.normalize_state(nominal.states[0] + eps * (sqrt_x0 * xi));
  BeliefState belief{nominal.states[0], eps * eps * noise.sigma_x0};
  r.trajectory.push_back({x, belief});

  auto track = [&](const Eigen::VectorXd& state, int t) {
    r.max_deviation =
        std::max(r.max_deviation, model.state_difference(state, nominal.states[t]).norm());
    if (cost.in_collision(state)) r.collided = true;
  };
  track(x, 0);

  try {
    for (int t = 0; t < K; ++t) {
      const Eigen::VectorXd deviation = model.state_difference(belief.mean, nominal.states[t]);
      const Eigen::VectorXd u =
          policy_control(nominal.controls[t], gains.gains[t], deviation, nominal.control_radius);
      r.cost += stage_cost(cost, belief.mean, belief.cov, &u);

      standard_normals(key.seed, key.index, NoiseStream::kProcess, static_cast<std::uint32_t>(t), xi);
      xi *= key.sign;
      detail::fnv_mix(r.noise_digest, xi);
      x = model.normalize_state(model.step(x, u) + eps * (process_map * xi));

      standard_normals(key.seed, key.index, NoiseStream::kMeasurement,
                       static_cast<std::uint32_t>(t), xi_z);
      xi_z *= key.sign;
      detail::fnv_mix(r.noise_digest, xi_z);
      const Eigen::VectorXd z = model.measure(x) + eps * (sqrt_nu * xi_z);

      Eigen::VectorXd innovation;
      belief = ekf_step(belief, u, z, model, noise, &innovation);

      r.controls.push_back(u);
      r.innovations.push_back(std::move(innovation));
      r.trajectory.push_back({x, belief});
      track(x, t + 1);
    }
  } catch (const GeometryError& e) {
    r.aborted = true;
    r.abort_reason = std::string("degenerate geometry: ") + e.what();
    return r;
  } catch (const NotPositiveDefiniteError& e) {
    r.aborted = true;
    r.abort_reason = std::string("non-PD innovation: ") + e.what();
    return r;
  }

  r.cost += stage_cost(cost, belief.mean, belief.cov, nullptr);
  r.terminal_error = (x.head(2) - nominal.states[K].head(2)).norm();
  r.first_order_error = first_order_error(r, nominal, jac, model);
  return r;
}

// Unicycle / landmark entry points. `problem.world.noise.epsilon` is the execution noise
// level; nominal covariances are recomputed at that level.

NominalTrajectory nominal_trajectory(const NominalPlan& plan, const PlanProblem& problem);
CostJacobians cost_jacobians(const NominalPlan& plan, const PlanProblem& problem);
double nominal_cost(const NominalPlan& plan, const PlanProblem& problem);
double first_order_error(const RolloutResult& rollout, const NominalPlan& plan,
                         const PlanProblem& problem, const CostJacobians& jac);

GainSchedule zero_gains(const GainSchedule& like);

RolloutResult simulate_rollout(const NominalPlan& plan, const GainSchedule& gains,
                               const PlanProblem& problem, std::uint64_t seed,
                               std::uint64_t index = 0);

/// First-order cost error moments over n independent rollouts (noise keys (seed, i)).
ErrorStats estimate_error_stats(const NominalPlan& plan, const GainSchedule& gains,
                                const PlanProblem& problem, int n, std::uint64_t seed,
                                int threads = 1);

/// Exit probabilities and mean cost gaps over a strictly decreasing epsilon grid. Rollouts
/// come in antithetic pairs (noise keys (seed, i/2) with alternating sign).
SweepResult epsilon_sweep(const NominalPlan& plan, const GainSchedule& gains,
                          const PlanProblem& problem, const std::vector<double>& epsilons,
                          double delta, int n, std::uint64_t seed, int threads = 1);

/// Paired rollouts with the gain schedule and with zero gains on the same noise.
PairedComparison compare_openloop_closedloop(const NominalPlan& plan, const GainSchedule& gains,
                                             const PlanProblem& problem, int n,
                                             std::uint64_t seed, int threads = 1);

/// Least-squares slope of log|y| against log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace tlqg
