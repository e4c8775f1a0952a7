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

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "test_support.hpp"
#include "tlqg/montecarlo.hpp"
#include "tlqg/rng.hpp"

using namespace tlqg;
using tlqg::testing::fig1_problem;
using tlqg::testing::LinearModel;
using tlqg::testing::LinearStageCost;
using tlqg::testing::steer_plan;

namespace {

struct Fixture {
  PlanProblem problem;
  NominalPlan plan;
  GainSchedule gains;
};

Fixture fig1_fixture(double epsilon) {
  Fixture f;
  f.problem = fig1_problem(epsilon);
  f.plan = steer_plan(f.problem);
  f.gains = synthesize_gains(f.plan, f.problem.world.dt, CostWeights{});
  return f;
}

// Two-state double integrator observed through its position.
struct LinearSetup {
  LinearModel model;
  NoiseModel noise;
  LinearStageCost cost;
  NominalTrajectory nominal;
  GainSchedule gains;
  int K = 12;
};

LinearSetup linear_setup(double epsilon) {
  LinearSetup s;
  s.model.A.resize(2, 2);
  s.model.A << 1.0, 0.1, 0.0, 1.0;
  s.model.B.resize(2, 1);
  s.model.B << 0.0, 0.1;
  s.model.H.resize(1, 2);
  s.model.H << 1.0, 0.0;
  s.noise.epsilon = epsilon;
  s.noise.sigma_omega = Eigen::Vector2d(0.01, 0.02).asDiagonal();
  s.noise.sigma_nu = Eigen::MatrixXd::Constant(1, 1, 0.05);
  s.noise.sigma_x0 = 0.01 * Eigen::MatrixXd::Identity(2, 2);
  s.noise.G = Eigen::MatrixXd::Identity(2, 2);
  s.cost.a = Eigen::Vector2d(1.0, -0.5);
  s.cost.Wu = Eigen::MatrixXd::Constant(1, 1, 0.2);

  s.nominal.control_radius = 1e9;
  s.nominal.states.push_back(Eigen::Vector2d(0.0, 0.2));
  Eigen::MatrixXd P = epsilon * epsilon * s.noise.sigma_x0;
  s.nominal.covariances.push_back(P);
  std::vector<Eigen::MatrixXd> As, Bs;
  for (int t = 0; t < s.K; ++t) {
    const Eigen::VectorXd u = Eigen::VectorXd::Constant(1, 0.5 - 0.1 * t);
    s.nominal.controls.push_back(u);
    s.nominal.states.push_back(s.model.step(s.nominal.states.back(), u));
    const Eigen::MatrixXd Pm = predict_covariance(P, s.model.A, s.noise);
    P = update_covariance(Pm, s.model.H, innovation_covariance(Pm, s.model.H, s.noise));
    s.nominal.covariances.push_back(P);
    As.push_back(s.model.A);
    Bs.push_back(s.model.B);
  }
  CostWeights w;
  w.Wx = Eigen::MatrixXd::Identity(2, 2);
  w.Wu = Eigen::MatrixXd::Constant(1, 1, 0.2);
  s.gains = backward_riccati(As, Bs, w);
  return s;
}

// Hand-rolled closed loop of the linear setup: returns the first-order error for the
// given unit noises. Uses diagonal square roots and an explicit-inverse Kalman gain.
double linear_first_order_error(const LinearSetup& s, const Eigen::VectorXd& xi0,
                                const std::vector<Eigen::VectorXd>& xi_w,
                                const std::vector<Eigen::VectorXd>& xi_v) {
  const double e = s.noise.epsilon;
  const Eigen::MatrixXd sw = s.noise.sigma_omega.diagonal().cwiseSqrt().asDiagonal();
  const Eigen::MatrixXd sx = s.noise.sigma_x0.diagonal().cwiseSqrt().asDiagonal();
  const double sv = std::sqrt(s.noise.sigma_nu(0, 0));
  Eigen::VectorXd x = s.nominal.states[0] + e * sx * xi0;
  Eigen::VectorXd xh = s.nominal.states[0];
  double j1 = s.cost.a.dot(xh - s.nominal.states[0]);
  for (int t = 0; t < s.K; ++t) {
    const Eigen::VectorXd u = s.nominal.controls[t] - s.gains.gains[t] * (xh - s.nominal.states[t]);
    j1 += (2.0 * s.cost.Wu * s.nominal.controls[t]).dot(u - s.nominal.controls[t]);
    x = s.model.A * x + s.model.B * u + e * sw * xi_w[t];
    const double z = (s.model.H * x)(0) + e * sv * xi_v[t](0);
    const Eigen::VectorXd xp = s.model.A * xh + s.model.B * u;
    const Eigen::MatrixXd& Pm = predict_covariance(s.nominal.covariances[t], s.model.A, s.noise);
    const Eigen::MatrixXd S = s.model.H * Pm * s.model.H.transpose() + e * e * s.noise.sigma_nu;
    const Eigen::MatrixXd Kg = Pm * s.model.H.transpose() * S.inverse();
    xh = xp + Kg * (z - (s.model.H * xp)(0));
    j1 += s.cost.a.dot(xh - s.nominal.states[t + 1]);
  }
  return j1;
}

}  // namespace

TEST(Philox, KnownAnswerVectors) {
  EXPECT_EQ(philox4x32({0, 0, 0, 0}, {0, 0}),
            (std::array<std::uint32_t, 4>{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8}));
  EXPECT_EQ(philox4x32({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}),
            (std::array<std::uint32_t, 4>{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd}));
  EXPECT_EQ(philox4x32({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}),
            (std::array<std::uint32_t, 4>{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1}));
}

TEST(StandardNormals, FirstTwoMomentsAndDeterminism) {
  const int n = 200000;
  double s1 = 0.0, s2 = 0.0;
  Eigen::VectorXd v(8);
  for (int i = 0; i < n / 8; ++i) {
    standard_normals(42, static_cast<std::uint64_t>(i), NoiseStream::kProcess, 3, v);
    s1 += v.sum();
    s2 += v.squaredNorm();
  }
  const double mean = s1 / n;
  const double var = s2 / n - mean * mean;
  EXPECT_LT(std::abs(mean), 4.0 / std::sqrt(n));
  EXPECT_LT(std::abs(var - 1.0), 5.0 * std::sqrt(2.0 / n));

  Eigen::VectorXd a(5), b(5), c(5);
  standard_normals(7, 3, NoiseStream::kMeasurement, 9, a);
  standard_normals(7, 3, NoiseStream::kMeasurement, 9, b);
  standard_normals(7, 3, NoiseStream::kProcess, 9, c);
  EXPECT_EQ(a, b);
  EXPECT_NE(a, c);
}

TEST(Summarize, KnownSamples) {
  const ErrorStats a = summarize({1, 2, 3, 4});
  EXPECT_DOUBLE_EQ(a.mean, 2.5);
  EXPECT_NEAR(a.std, std::sqrt(5.0 / 3.0), 1e-15);
  EXPECT_NEAR(a.std_error, std::sqrt(5.0 / 3.0) / 2.0, 1e-15);
  EXPECT_NEAR(a.skewness, 0.0, 1e-15);
  const ErrorStats b = summarize({0, 0, 0, 1});
  EXPECT_NEAR(b.skewness, 2.0 / std::sqrt(3.0), 1e-12);
  EXPECT_NEAR(b.excess_kurtosis, -2.0 / 3.0, 1e-12);
  const ErrorStats c = summarize({5, 5, 5});
  EXPECT_EQ(c.std, 0.0);
  EXPECT_EQ(c.skewness, 0.0);
  EXPECT_EQ(c.excess_kurtosis, 0.0);
}

TEST(LoglogSlope, PowerLaw) {
  EXPECT_NEAR(loglog_slope({0.1, 0.2, 0.4}, {0.03, 0.12, 0.48}), 2.0, 1e-12);
  EXPECT_NEAR(loglog_slope({1.0, 2.0}, {-3.0, -6.0}), 1.0, 1e-12);
  EXPECT_THROW(loglog_slope({1.0}, {1.0}), std::invalid_argument);
}

TEST(AbortBudget, OnePercentLimit) {
  EXPECT_NO_THROW(check_abort_budget(0, 100));
  EXPECT_NO_THROW(check_abort_budget(10, 1000));
  EXPECT_THROW(check_abort_budget(11, 1000), StatisticalValidityError);
  EXPECT_THROW(check_abort_budget(2, 100), StatisticalValidityError);
}

TEST(PsdSqrt, SquaresBack) {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 50; ++i) {
    const Eigen::MatrixXd M = tlqg::testing::random_spd(rng, 4);
    const Eigen::MatrixXd R = psd_sqrt(M);
    EXPECT_LE(tlqg::testing::rel_err(R * R, M), 1e-10);
  }
}

TEST(SimulateRollout, NoiselessLimitReproducesNominal) {
  const Fixture f = fig1_fixture(0.0);
  const RolloutResult r = simulate_rollout(f.plan, f.gains, f.problem, 99, 4);
  ASSERT_FALSE(r.aborted);
  EXPECT_EQ(r.max_deviation, 0.0);
  EXPECT_EQ(r.first_order_error, 0.0);
  EXPECT_NEAR(r.cost, nominal_cost(f.plan, f.problem), 1e-12);
  for (int t = 0; t <= f.plan.horizon(); ++t) {
    EXPECT_EQ(r.trajectory[t].true_state, Eigen::VectorXd(f.plan.states[t]));
    EXPECT_EQ(r.trajectory[t].belief.mean, Eigen::VectorXd(f.plan.states[t]));
  }
  for (const auto& nu : r.innovations) EXPECT_EQ(nu.norm(), 0.0);
}

TEST(SimulateRollout, SameKeyIsBitIdentical) {
  const Fixture f = fig1_fixture(0.1);
  const RolloutResult a = simulate_rollout(f.plan, f.gains, f.problem, 5, 17);
  const RolloutResult b = simulate_rollout(f.plan, f.gains, f.problem, 5, 17);
  const RolloutResult c = simulate_rollout(f.plan, f.gains, f.problem, 5, 18);
  EXPECT_EQ(a.cost, b.cost);
  EXPECT_EQ(a.first_order_error, b.first_order_error);
  EXPECT_EQ(a.noise_digest, b.noise_digest);
  for (std::size_t t = 0; t < a.trajectory.size(); ++t) {
    EXPECT_EQ(a.trajectory[t].true_state, b.trajectory[t].true_state);
    EXPECT_EQ(a.trajectory[t].belief.cov, b.trajectory[t].belief.cov);
  }
  EXPECT_NE(a.noise_digest, c.noise_digest);
}

TEST(SimulateRollout, SmallNoiseStaysNearNominal) {
  const Fixture f = fig1_fixture(0.01);
  int near = 0;
  for (std::uint64_t i = 0; i < 100; ++i) {
    const RolloutResult r = simulate_rollout(f.plan, f.gains, f.problem, 1234, i);
    ASSERT_FALSE(r.aborted);
    if (r.max_deviation < 0.2) ++near;
  }
  EXPECT_GE(near, 99);
}

TEST(SimulateClosedLoop, AntitheticKeyMirrorsInitialDraw) {
  const Fixture f = fig1_fixture(0.1);
  const NominalTrajectory nom = nominal_trajectory(f.plan, f.problem);
  const CostJacobians jac = cost_jacobians(f.plan, f.problem);
  const UnicycleLandmarkModel model(f.problem.world);
  const BarrierStageCost cost(f.problem);
  const RolloutResult plus =
      simulate_closed_loop(model, f.problem.world.noise, cost, nom, f.gains, jac, {3, 8, 1.0});
  const RolloutResult minus =
      simulate_closed_loop(model, f.problem.world.noise, cost, nom, f.gains, jac, {3, 8, -1.0});
  const Eigen::VectorXd dp = plus.trajectory[0].true_state - nom.states[0];
  const Eigen::VectorXd dm = minus.trajectory[0].true_state - nom.states[0];
  EXPECT_LE((dp + dm).norm(), 1e-15);
  EXPECT_GT(dp.norm(), 0.0);
}

TEST(SimulateClosedLoop, GainScheduleHorizonMustMatch) {
  const Fixture f = fig1_fixture(0.1);
  GainSchedule short_gains = f.gains;
  short_gains.gains.pop_back();
  EXPECT_THROW(simulate_rollout(f.plan, short_gains, f.problem, 1), std::invalid_argument);
}

TEST(SimulateClosedLoop, DegenerateGeometryAbortsRollout) {
  struct FragileModel : LinearModel {
    Eigen::VectorXd measure(const Eigen::VectorXd& x) const {
      if (x(0) > 0.05) throw GeometryError("sensor singularity");
      return H * x;
    }
  };
  LinearSetup s = linear_setup(2.0);
  FragileModel m;
  m.A = s.model.A;
  m.B = s.model.B;
  m.H = s.model.H;
  int aborted = 0;
  for (std::uint64_t i = 0; i < 50; ++i) {
    const RolloutResult r = simulate_closed_loop(m, s.noise, s.cost, s.nominal, s.gains,
                                                 cost_jacobians(s.nominal, s.cost), {1, i, 1.0});
    if (r.aborted) {
      ++aborted;
      EXPECT_NE(r.abort_reason.find("degenerate geometry"), std::string::npos);
    }
  }
  EXPECT_GT(aborted, 0);
}

TEST(CostJacobians, ObstacleFreeAndZeroControlStructure) {
  PlanProblem p = fig1_problem(0.5);
  p.world.obstacles.clear();
  NominalPlan plan = make_plan(std::vector<Control>(6, Control::Zero()), p, 10.0);
  const CostJacobians J = cost_jacobians(plan, p);
  ASSERT_EQ(J.mean.size(), 7u);
  ASSERT_EQ(J.control.size(), 6u);
  for (const auto& g : J.mean) EXPECT_EQ(g.norm(), 0.0);
  for (const auto& g : J.control) EXPECT_EQ(g.norm(), 0.0);
  for (const auto& g : J.cov) EXPECT_EQ(g, Eigen::Matrix3d::Identity().reshaped().eval());
}

TEST(CostJacobians, MatchFiniteDifferencesOfStageCost) {
  const Fixture f = fig1_fixture(0.5);
  const NominalTrajectory nom = nominal_trajectory(f.plan, f.problem);
  const CostJacobians J = cost_jacobians(f.plan, f.problem);
  const BarrierStageCost cost(f.problem);
  const double h = 1e-6;
  for (int t = 0; t <= nom.horizon(); ++t) {
    const Eigen::VectorXd* u = t < nom.horizon() ? &nom.controls[t] : nullptr;
    auto c = [&](const Eigen::VectorXd& m, const Eigen::MatrixXd& P, const Eigen::VectorXd* v) {
      return stage_cost(cost, m, P, v);
    };
    Eigen::VectorXd gm(3);
    for (int i = 0; i < 3; ++i) {
      Eigen::VectorXd a = nom.states[t], b = nom.states[t];
      a(i) += h;
      b(i) -= h;
      gm(i) = (c(a, nom.covariances[t], u) - c(b, nom.covariances[t], u)) / (2 * h);
    }
    EXPECT_LE((J.mean[t] - gm).norm(), 1e-6 * std::max(1.0, gm.norm())) << "t=" << t;
    Eigen::VectorXd gp(9);
    for (int i = 0; i < 9; ++i) {
      Eigen::MatrixXd a = nom.covariances[t], b = nom.covariances[t];
      a.reshaped()(i) += h;
      b.reshaped()(i) -= h;
      gp(i) = (c(nom.states[t], a, u) - c(nom.states[t], b, u)) / (2 * h);
    }
    EXPECT_LE((J.cov[t] - gp).norm(), 1e-6 * std::max(1.0, gp.norm())) << "t=" << t;
    if (u != nullptr) {
      Eigen::VectorXd gu(2);
      for (int i = 0; i < 2; ++i) {
        Eigen::VectorXd a = *u, b = *u;
        a(i) += h;
        b(i) -= h;
        gu(i) = (c(nom.states[t], nom.covariances[t], &a) - c(nom.states[t], nom.covariances[t], &b)) / (2 * h);
      }
      EXPECT_LE((J.control[t] - gu).norm(), 1e-6 * std::max(1.0, gu.norm())) << "t=" << t;
    }
  }
}

TEST(FirstOrderError, LinearInDeviations) {
  const Fixture f = fig1_fixture(0.05);
  const NominalTrajectory nom = nominal_trajectory(f.plan, f.problem);
  const CostJacobians J = cost_jacobians(f.plan, f.problem);
  const UnicycleLandmarkModel model(f.problem.world);
  for (std::uint64_t i = 0; i < 20; ++i) {
    const RolloutResult r = simulate_rollout(f.plan, f.gains, f.problem, 77, i);
    RolloutResult doubled = r;
    for (int t = 0; t <= nom.horizon(); ++t) {
      auto& b = doubled.trajectory[t].belief;
      b.mean = nom.states[t] + 2.0 * model.state_difference(b.mean, nom.states[t]);
      b.cov = nom.covariances[t] + 2.0 * (b.cov - nom.covariances[t]);
      if (t < nom.horizon()) doubled.controls[t] = nom.controls[t] + 2.0 * (r.controls[t] - nom.controls[t]);
    }
    const double e1 = first_order_error(r, nom, J, model);
    EXPECT_EQ(e1, r.first_order_error);
    EXPECT_NEAR(first_order_error(doubled, nom, J, model), 2.0 * e1, 1e-12 * std::max(1.0, std::abs(e1)));
  }
}

TEST(LinearGaussian, FirstOrderErrorMatchesHandRolledLoop) {
  const LinearSetup s = linear_setup(0.3);
  const CostJacobians jac = cost_jacobians(s.nominal, s.cost);
  for (std::uint64_t i = 0; i < 50; ++i) {
    const RolloutResult r =
        simulate_closed_loop(s.model, s.noise, s.cost, s.nominal, s.gains, jac, {11, i, 1.0});
    Eigen::VectorXd xi0(2);
    standard_normals(11, i, NoiseStream::kInit, 0, xi0);
    std::vector<Eigen::VectorXd> w(s.K, Eigen::VectorXd(2)), v(s.K, Eigen::VectorXd(1));
    for (int t = 0; t < s.K; ++t) {
      standard_normals(11, i, NoiseStream::kProcess, t, w[t]);
      standard_normals(11, i, NoiseStream::kMeasurement, t, v[t]);
    }
    EXPECT_NEAR(r.first_order_error, linear_first_order_error(s, xi0, w, v), 1e-10);
  }
}

TEST(LinearGaussian, FirstOrderErrorHasTheExactGaussianLaw) {
  // The error is a linear functional of the unit noises; its variance is the squared norm
  // of the functional, read off by feeding unit impulses through the hand-rolled loop.
  const LinearSetup s = linear_setup(0.3);
  const int dim = 2 + 3 * s.K;
  auto eval = [&](const Eigen::VectorXd& xi) {
    std::vector<Eigen::VectorXd> w, v;
    for (int t = 0; t < s.K; ++t) {
      w.push_back(xi.segment(2 + 3 * t, 2));
      v.push_back(xi.segment(4 + 3 * t, 1));
    }
    return linear_first_order_error(s, xi.head(2), w, v);
  };
  const double offset = eval(Eigen::VectorXd::Zero(dim));
  EXPECT_NEAR(offset, 0.0, 1e-14);
  double var = 0.0;
  for (int i = 0; i < dim; ++i) {
    const double c = eval(Eigen::VectorXd::Unit(dim, i)) - offset;
    var += c * c;
  }

  const CostJacobians jac = cost_jacobians(s.nominal, s.cost);
  const int n = 20000;
  std::vector<double> samples;
  for (int i = 0; i < n; ++i) {
    samples.push_back(simulate_closed_loop(s.model, s.noise, s.cost, s.nominal, s.gains, jac,
                                           {2024, static_cast<std::uint64_t>(i), 1.0})
                          .first_order_error);
  }
  const ErrorStats st = summarize(samples);
  EXPECT_LT(std::abs(st.mean), 4.0 * std::sqrt(var / n));
  EXPECT_LT(std::abs(st.std * st.std / var - 1.0), 5.0 * std::sqrt(2.0 / n));
  EXPECT_LT(std::abs(st.skewness), 5.0 * std::sqrt(6.0 / n));
  EXPECT_LT(std::abs(st.excess_kurtosis), 5.0 * std::sqrt(24.0 / n));
}

TEST(EstimateErrorStats, NoiselessLimitIsExactlyZero) {
  const Fixture f = fig1_fixture(0.0);
  const ErrorStats st = estimate_error_stats(f.plan, f.gains, f.problem, 100, 3);
  EXPECT_EQ(st.n_samples, 100);
  EXPECT_EQ(st.mean, 0.0);
  EXPECT_EQ(st.std, 0.0);
}

TEST(EstimateErrorStats, RequiresAtLeastOneHundredSamples) {
  const Fixture f = fig1_fixture(0.05);
  EXPECT_THROW(estimate_error_stats(f.plan, f.gains, f.problem, 99, 3), std::invalid_argument);
  EXPECT_THROW(epsilon_sweep(f.plan, f.gains, f.problem, {0.1}, 0.1, 50, 3), std::invalid_argument);
  EXPECT_THROW(compare_openloop_closedloop(f.plan, f.gains, f.problem, 10, 3), std::invalid_argument);
}

TEST(EstimateErrorStats, IndependentOfThreadCount) {
  const Fixture f = fig1_fixture(0.05);
  const ErrorStats a = estimate_error_stats(f.plan, f.gains, f.problem, 200, 8, 1);
  const ErrorStats b = estimate_error_stats(f.plan, f.gains, f.problem, 200, 8, 4);
  EXPECT_EQ(a.mean, b.mean);
  EXPECT_EQ(a.std, b.std);
  EXPECT_EQ(a.skewness, b.skewness);
  EXPECT_EQ(a.excess_kurtosis, b.excess_kurtosis);
}

TEST(EpsilonSweep, HugeTubeNeverExits) {
  const Fixture f = fig1_fixture(1.0);
  const SweepResult r = epsilon_sweep(f.plan, f.gains, f.problem, {0.1, 0.05}, 1e6, 100, 4);
  ASSERT_EQ(r.records.size(), 2u);
  for (const auto& rec : r.records) EXPECT_EQ(rec.exit_probability, 0.0);
  EXPECT_TRUE(r.exit_monotone);
  ASSERT_TRUE(r.slope.has_value());
}

TEST(EpsilonSweep, SingleEpsilonHasNoSlope) {
  const Fixture f = fig1_fixture(1.0);
  const SweepResult r = epsilon_sweep(f.plan, f.gains, f.problem, {0.05}, 0.1, 100, 4);
  ASSERT_EQ(r.records.size(), 1u);
  EXPECT_FALSE(r.slope.has_value());
}

TEST(EpsilonSweep, GridMustBePositiveAndStrictlyDecreasing) {
  const Fixture f = fig1_fixture(1.0);
  EXPECT_THROW(epsilon_sweep(f.plan, f.gains, f.problem, {}, 0.1, 100, 4), std::invalid_argument);
  EXPECT_THROW(epsilon_sweep(f.plan, f.gains, f.problem, {0.1, 0.1}, 0.1, 100, 4), std::invalid_argument);
  EXPECT_THROW(epsilon_sweep(f.plan, f.gains, f.problem, {0.05, 0.1}, 0.1, 100, 4), std::invalid_argument);
  EXPECT_THROW(epsilon_sweep(f.plan, f.gains, f.problem, {0.1, 0.0}, 0.1, 100, 4), std::invalid_argument);
}

TEST(CompareOpenloopClosedloop, ZeroGainsMakeBothArmsEqual) {
  const Fixture f = fig1_fixture(0.1);
  const PairedComparison c =
      compare_openloop_closedloop(f.plan, zero_gains(f.gains), f.problem, 100, 6);
  EXPECT_TRUE(c.noise_paired);
  EXPECT_EQ(c.terminal_gap_mean, 0.0);
  EXPECT_EQ(c.closed_mean_max_deviation, c.open_mean_max_deviation);
}

TEST(CompareOpenloopClosedloop, FeedbackShrinksTerminalError) {
  const Fixture f = fig1_fixture(0.1);
  const PairedComparison c = compare_openloop_closedloop(f.plan, f.gains, f.problem, 200, 6);
  EXPECT_TRUE(c.noise_paired);
  EXPECT_EQ(c.n_samples, 200);
  EXPECT_LT(c.closed_mean_terminal_error, c.open_mean_terminal_error);
  EXPECT_GT(c.terminal_gap_mean, 3.0 * c.terminal_gap_std_error);
}
