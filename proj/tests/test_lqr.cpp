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
#include <numbers>
#include <random>

#include "test_support.hpp"
#include "tlqg/lqr.hpp"

using namespace tlqg;
using tlqg::testing::random_matrix;
using tlqg::testing::random_spd;

namespace {

Eigen::MatrixXd scalar(double v) { return Eigen::MatrixXd::Constant(1, 1, v); }

CostWeights scalar_weights(double wx, double wu) {
  CostWeights w;
  w.Wx = scalar(wx);
  w.Wu = scalar(wu);
  return w;
}

NominalPlan straight_plan(int K) {
  NominalPlan p;
  p.controls.assign(K, Control(0.5, 0.0));
  p.states = rollout_nominal<double>(p.controls, State(0, 0, 0), 1.0);
  return p;
}

}  // namespace

TEST(BackwardRiccati, SingleStepScalar) {
  const GainSchedule g = backward_riccati({scalar(1)}, {scalar(1)}, scalar_weights(1, 1));
  ASSERT_EQ(g.horizon(), 1);
  EXPECT_DOUBLE_EQ(g.riccati[1](0, 0), 1.0);
  EXPECT_DOUBLE_EQ(g.gains[0](0, 0), 0.5);
  EXPECT_DOUBLE_EQ(g.riccati[0](0, 0), 1.5);
}

TEST(BackwardRiccati, ZeroInputMatrixGivesZeroGains) {
  std::mt19937_64 rng(1);
  std::vector<Eigen::MatrixXd> A, B;
  for (int t = 0; t < 10; ++t) {
    A.push_back(random_matrix(rng, 3, 3));
    B.push_back(Eigen::MatrixXd::Zero(3, 2));
  }
  const GainSchedule g = backward_riccati(A, B, CostWeights{});
  for (const auto& L : g.gains) EXPECT_EQ(L.norm(), 0.0);
}

TEST(BackwardRiccati, LongHorizonScalarConvergesToAlgebraicSolution) {
  // Oracle: iterate the scalar map P <- 1 + P - P^2 / (1 + P) to its fixed point.
  double p = 1.0;
  for (int i = 0; i < 1000; ++i) p = 1.0 + p - p * p / (1.0 + p);
  const double golden = (1.0 + std::sqrt(5.0)) / 2.0;
  ASSERT_NEAR(p, golden, 1e-14);

  const std::vector<Eigen::MatrixXd> A(200, scalar(1)), B(200, scalar(1));
  const GainSchedule g = backward_riccati(A, B, scalar_weights(1, 1));
  EXPECT_NEAR(g.riccati[0](0, 0), p, 1e-9);
  EXPECT_NEAR(g.gains[0](0, 0), p / (1.0 + p), 1e-9);
}

TEST(BackwardRiccati, GainsAreConsistentWithCostToGo) {
  std::mt19937_64 rng(2);
  std::vector<Eigen::MatrixXd> A, B;
  for (int t = 0; t < 40; ++t) {
    A.push_back(Eigen::MatrixXd::Identity(3, 3) + 0.3 * random_matrix(rng, 3, 3));
    B.push_back(random_matrix(rng, 3, 2));
  }
  CostWeights w;
  w.Wx = random_spd(rng, 3, 0.1);
  w.Wu = random_spd(rng, 2, 0.1);
  const GainSchedule g = backward_riccati(A, B, w);
  for (int t = 0; t < 40; ++t) {
    const Eigen::MatrixXd& P = g.riccati[t + 1];
    const Eigen::MatrixXd L =
        (w.Wu + B[t].transpose() * P * B[t]).inverse() * B[t].transpose() * P * A[t];
    EXPECT_LE(tlqg::testing::rel_err(g.gains[t], L), 1e-12) << "t=" << t;
  }
  std::normal_distribution<double> gauss;
  for (const auto& P : g.riccati) {
    EXPECT_LE((P - P.transpose()).cwiseAbs().maxCoeff(), 1e-12 * P.norm());
    for (int k = 0; k < 20; ++k) {
      const Eigen::Vector3d z(gauss(rng), gauss(rng), gauss(rng));
      EXPECT_GE(z.dot(P * z), 0.0);
    }
  }
}

TEST(BackwardRiccati, CostToGoEqualsNoiselessClosedLoopCost) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Eigen::MatrixXd> A, B;
    for (int t = 0; t < 15; ++t) {
      A.push_back(Eigen::MatrixXd::Identity(3, 3) + 0.3 * random_matrix(rng, 3, 3));
      B.push_back(random_matrix(rng, 3, 2));
    }
    CostWeights w;
    w.Wx = random_spd(rng, 3, 0.1);
    w.Wu = random_spd(rng, 2, 0.1);
    const GainSchedule g = backward_riccati(A, B, w);
    const Eigen::VectorXd x0 = random_matrix(rng, 3, 1);
    Eigen::VectorXd x = x0;
    double cost = 0.0;
    for (int t = 0; t < 15; ++t) {
      const Eigen::VectorXd u = -g.gains[t] * x;
      cost += x.dot(w.Wx * x) + u.dot(w.Wu * u);
      x = A[t] * x + B[t] * u;
    }
    cost += x.dot(w.Wx * x);
    const double value = x0.dot(g.riccati[0] * x0);
    EXPECT_NEAR(cost, value, 1e-9 * std::max(1.0, value));
  }
}

TEST(BackwardRiccati, MismatchedSequencesRejected) {
  EXPECT_THROW(backward_riccati({scalar(1)}, {}, scalar_weights(1, 1)), std::invalid_argument);
}

TEST(SynthesizeGains, UsesPlanLinearization) {
  const NominalPlan plan = straight_plan(8);
  const GainSchedule g = synthesize_gains(plan, 1.0, CostWeights{});
  ASSERT_EQ(g.horizon(), 8);
  std::vector<Eigen::MatrixXd> A, B;
  for (int t = 0; t < 8; ++t) {
    const auto J = dynamics_jacobians<double>(plan.states[t], plan.controls[t], 1.0);
    A.emplace_back(J.A);
    B.emplace_back(J.B);
  }
  const GainSchedule ref = backward_riccati(A, B, CostWeights{});
  for (int t = 0; t < 8; ++t) EXPECT_TRUE(g.gains[t].isApprox(ref.gains[t]));
}

TEST(ApplyPolicy, OnNominalReturnsNominalControl) {
  const NominalPlan plan = straight_plan(5);
  const GainSchedule g = synthesize_gains(plan, 1.0, CostWeights{});
  for (int t = 0; t < 5; ++t) {
    const Control u = apply_policy(t, plan, g, plan.states[t], 1.2);
    EXPECT_EQ(u, plan.controls[t]);
  }
}

TEST(ApplyPolicy, ZeroGainIsOpenLoop) {
  const NominalPlan plan = straight_plan(5);
  GainSchedule g = synthesize_gains(plan, 1.0, CostWeights{});
  for (auto& L : g.gains) L.setZero();
  EXPECT_EQ(apply_policy(2, plan, g, State(9, 9, 1), 1.2), plan.controls[2]);
}

TEST(ApplyPolicy, CorrectionIsLinearInDeviationWithinBall) {
  const NominalPlan plan = straight_plan(5);
  const GainSchedule g = synthesize_gains(plan, 1.0, CostWeights{});
  const State dev(0.01, 0.02, -0.01);
  const Control u1 = apply_policy(1, plan, g, plan.states[1] + dev, 10.0);
  const Control u2 = apply_policy(1, plan, g, plan.states[1] + 2 * dev, 10.0);
  EXPECT_LE(((u2 - plan.controls[1]) - 2 * (u1 - plan.controls[1])).norm(), 1e-14);
  EXPECT_LE((u1 - (plan.controls[1] - g.gains[1] * dev)).norm(), 1e-15);
}

TEST(ApplyPolicy, ClipsToControlBall) {
  const NominalPlan plan = straight_plan(5);
  const GainSchedule g = synthesize_gains(plan, 1.0, CostWeights{});
  const Control u = apply_policy(0, plan, g, State(-5, 3, 0), 0.5);
  EXPECT_NEAR(u.norm(), 0.5, 1e-15);
  const Eigen::VectorXd raw = plan.controls[0] - g.gains[0] * State(-5, 3, 0);
  EXPECT_NEAR(u.normalized().dot(raw.normalized()), 1.0, 1e-12);
}

TEST(ApplyPolicy, HeadingDeviationIsWrapped) {
  NominalPlan plan;
  plan.controls = {Control(0.2, 0.0)};
  plan.states = {State(0, 0, std::numbers::pi - 0.01), State(0.2, 0, std::numbers::pi - 0.01)};
  const GainSchedule g = synthesize_gains(plan, 1.0, CostWeights{});
  const Control u = apply_policy(0, plan, g, State(0, 0, -std::numbers::pi + 0.01), 10.0);
  const Control expected = plan.controls[0] - g.gains[0] * State(0, 0, 0.02);
  EXPECT_LE((u - expected).norm(), 1e-12);
}

TEST(ClipToBall, LeavesInteriorPointsAlone) {
  const Eigen::Vector2d u(0.3, 0.4);
  EXPECT_EQ(clip_to_ball(u, 1.0), Eigen::VectorXd(u));
  EXPECT_NEAR(clip_to_ball(u, 0.25).norm(), 0.25, 1e-15);
}
