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

#include "tlqg/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "tlqg/parallel.hpp"

namespace tlqg {

namespace {

PlanProblem with_epsilon(const PlanProblem& problem, double epsilon) {
  PlanProblem p = problem;
  p.world.noise.epsilon = epsilon;
  return p;
}

void require_samples(int n) {
  if (n < 100) {
    throw std::invalid_argument("at least 100 samples are required, got " + std::to_string(n));
  }
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

// Everything a batch of rollouts at one noise level shares.
struct Batch {
  PlanProblem problem;
  NominalTrajectory nominal;
  CostJacobians jac;
  double nominal_cost = 0.0;

  Batch(const NominalPlan& plan, const PlanProblem& p) : problem(p) {
    nominal = nominal_trajectory(plan, problem);
    jac = cost_jacobians(nominal, BarrierStageCost(problem));
    this->nominal_cost = tlqg::nominal_cost(nominal, BarrierStageCost(problem));
  }

  RolloutResult run(const GainSchedule& gains, const NoiseKey& key) const {
    return simulate_closed_loop(UnicycleLandmarkModel(problem.world), problem.world.noise,
                                BarrierStageCost(problem), nominal, gains, jac, key);
  }
};

}  // namespace

void check_abort_budget(int aborted, int total) {
  if (static_cast<double>(aborted) > kMaxAbortFraction * total) {
    std::ostringstream msg;
    msg << aborted << " of " << total << " rollouts aborted (limit "
        << kMaxAbortFraction * 100.0 << "%)";
    throw StatisticalValidityError(msg.str());
  }
}

Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& M) {
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
  const Eigen::VectorXd root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * root.asDiagonal() * es.eigenvectors().transpose();
}

ErrorStats summarize(const std::vector<double>& samples) {
  ErrorStats s;
  s.n_samples = static_cast<int>(samples.size());
  if (samples.empty()) return s;
  const double n = static_cast<double>(samples.size());
  s.mean = mean_of(samples);
  double m2 = 0.0;
  double m3 = 0.0;
  double m4 = 0.0;
  for (double x : samples) {
    const double d = x - s.mean;
    const double d2 = d * d;
    m2 += d2;
    m3 += d2 * d;
    m4 += d2 * d2;
  }
  if (samples.size() >= 2) s.std = std::sqrt(m2 / (n - 1.0));
  s.std_error = s.std / std::sqrt(n);
  m2 /= n;
  m3 /= n;
  m4 /= n;
  if (m2 > 0.0) {
    s.skewness = m3 / std::pow(m2, 1.5);
    s.excess_kurtosis = m4 / (m2 * m2) - 3.0;
  }
  return s;
}

NominalTrajectory nominal_trajectory(const NominalPlan& plan, const PlanProblem& problem) {
  NominalTrajectory nominal;
  for (const auto& x : plan.states) nominal.states.emplace_back(x);
  for (const auto& u : plan.controls) nominal.controls.emplace_back(u);
  for (const auto& P : propagate_nominal_covariances<double>(plan.states, plan.controls, problem.world)) {
    nominal.covariances.emplace_back(P);
  }
  nominal.control_radius = problem.control_radius;
  return nominal;
}

CostJacobians cost_jacobians(const NominalPlan& plan, const PlanProblem& problem) {
  return cost_jacobians(nominal_trajectory(plan, problem), BarrierStageCost(problem));
}

double nominal_cost(const NominalPlan& plan, const PlanProblem& problem) {
  return nominal_cost(nominal_trajectory(plan, problem), BarrierStageCost(problem));
}

double first_order_error(const RolloutResult& rollout, const NominalPlan& plan,
                         const PlanProblem& problem, const CostJacobians& jac) {
  return first_order_error(rollout, nominal_trajectory(plan, problem), jac,
                           UnicycleLandmarkModel(problem.world));
}

GainSchedule zero_gains(const GainSchedule& like) {
  GainSchedule z = like;
  for (auto& L : z.gains) L.setZero();
  return z;
}

RolloutResult simulate_rollout(const NominalPlan& plan, const GainSchedule& gains,
                               const PlanProblem& problem, std::uint64_t seed,
                               std::uint64_t index) {
  const Batch batch(plan, problem);
  return batch.run(gains, {seed, index, 1.0});
}

ErrorStats estimate_error_stats(const NominalPlan& plan, const GainSchedule& gains,
                                const PlanProblem& problem, int n, std::uint64_t seed,
                                int threads) {
  require_samples(n);
  const Batch batch(plan, problem);
  std::vector<RolloutResult> results(static_cast<std::size_t>(n));
  parallel_for(results.size(), threads, [&](std::size_t i) {
    results[i] = batch.run(gains, {seed, i, 1.0});
  });
  std::vector<double> values;
  int aborted = 0;
  for (const auto& r : results) {
    if (r.aborted) {
      ++aborted;
    } else {
      values.push_back(r.first_order_error);
    }
  }
  check_abort_budget(aborted, n);
  ErrorStats stats = summarize(values);
  stats.n_aborted = aborted;
  return stats;
}

SweepResult epsilon_sweep(const NominalPlan& plan, const GainSchedule& gains,
                          const PlanProblem& problem, const std::vector<double>& epsilons,
                          double delta, int n, std::uint64_t seed, int threads) {
  require_samples(n);
  if (epsilons.empty()) throw std::invalid_argument("epsilon grid is empty");
  for (std::size_t i = 0; i < epsilons.size(); ++i) {
    if (!(epsilons[i] > 0.0)) throw std::invalid_argument("epsilon grid values must be > 0");
    if (i > 0 && !(epsilons[i] < epsilons[i - 1])) {
      throw std::invalid_argument("epsilon grid must be strictly decreasing");
    }
  }

  SweepResult out;
  for (double eps : epsilons) {
    const Batch batch(plan, with_epsilon(problem, eps));
    std::vector<RolloutResult> results(static_cast<std::size_t>(n));
    parallel_for(results.size(), threads, [&](std::size_t i) {
      results[i] = batch.run(gains, {seed, i / 2, (i % 2 == 0) ? 1.0 : -1.0});
    });

    SweepRecord rec;
    rec.epsilon = eps;
    int exits = 0;
    std::vector<double> pair_gaps;
    double gap_sum = 0.0;
    int used = 0;
    for (std::size_t i = 0; i < results.size(); ++i) {
      const auto& r = results[i];
      if (r.aborted) {
        ++rec.n_aborted;
        continue;
      }
      ++used;
      if (r.max_deviation > 0.5 * delta) ++exits;
      gap_sum += r.cost - batch.nominal_cost;
      if (i % 2 == 1 && !results[i - 1].aborted) {
        pair_gaps.push_back(0.5 * ((results[i - 1].cost - batch.nominal_cost) +
                                   (r.cost - batch.nominal_cost)));
      }
    }
    check_abort_budget(rec.n_aborted, n);
    rec.n_samples = used;
    rec.exit_probability = used > 0 ? static_cast<double>(exits) / used : 0.0;
    rec.mean_cost_gap = used > 0 ? gap_sum / used : 0.0;
    rec.cost_gap_std_error = summarize(pair_gaps).std_error;
    out.records.push_back(rec);
  }

  for (std::size_t i = 1; i < out.records.size(); ++i) {
    const auto& hi = out.records[i - 1];
    const auto& lo = out.records[i];
    const double se = std::sqrt(hi.exit_probability * (1.0 - hi.exit_probability) / hi.n_samples +
                                lo.exit_probability * (1.0 - lo.exit_probability) / lo.n_samples);
    if (lo.exit_probability > hi.exit_probability + 2.0 * se) out.exit_monotone = false;
  }

  std::vector<double> xs;
  std::vector<double> ys;
  for (const auto& rec : out.records) {
    if (rec.mean_cost_gap != 0.0) {
      xs.push_back(rec.epsilon);
      ys.push_back(rec.mean_cost_gap);
    }
  }
  if (xs.size() >= 2) out.slope = loglog_slope(xs, ys);
  return out;
}

PairedComparison compare_openloop_closedloop(const NominalPlan& plan, const GainSchedule& gains,
                                             const PlanProblem& problem, int n,
                                             std::uint64_t seed, int threads) {
  require_samples(n);
  const Batch batch(plan, problem);
  const GainSchedule open = zero_gains(gains);
  std::vector<RolloutResult> closed_runs(static_cast<std::size_t>(n));
  std::vector<RolloutResult> open_runs(static_cast<std::size_t>(n));
  parallel_for(closed_runs.size(), threads, [&](std::size_t i) {
    closed_runs[i] = batch.run(gains, {seed, i, 1.0});
    open_runs[i] = batch.run(open, {seed, i, 1.0});
  });

  PairedComparison cmp;
  std::vector<double> gaps;
  std::vector<double> closed_dev;
  std::vector<double> open_dev;
  std::vector<double> closed_term;
  std::vector<double> open_term;
  int aborted = 0;
  for (std::size_t i = 0; i < closed_runs.size(); ++i) {
    const auto& c = closed_runs[i];
    const auto& o = open_runs[i];
    if (c.noise_digest != o.noise_digest) cmp.noise_paired = false;
    if (c.aborted || o.aborted) {
      ++aborted;
      continue;
    }
    closed_dev.push_back(c.max_deviation);
    open_dev.push_back(o.max_deviation);
    closed_term.push_back(c.terminal_error);
    open_term.push_back(o.terminal_error);
    gaps.push_back(o.terminal_error - c.terminal_error);
  }
  check_abort_budget(aborted, n);
  cmp.n_samples = static_cast<int>(gaps.size());
  cmp.closed_mean_max_deviation = mean_of(closed_dev);
  cmp.open_mean_max_deviation = mean_of(open_dev);
  cmp.closed_mean_terminal_error = mean_of(closed_term);
  cmp.open_mean_terminal_error = mean_of(open_term);
  const ErrorStats g = summarize(gaps);
  cmp.terminal_gap_mean = g.mean;
  cmp.terminal_gap_std_error = g.std_error;
  return cmp;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw std::invalid_argument("slope fit needs at least two paired points");
  }
  const double n = static_cast<double>(x.size());
  double sx = 0.0;
  double sy = 0.0;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]);
    const double ly = std::log(std::abs(y[i]));
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace tlqg
