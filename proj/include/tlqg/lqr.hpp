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

#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "tlqg/filters.hpp"
#include "tlqg/planner.hpp"

namespace tlqg {

/// Quadratic weights on state and control deviations for feedback synthesis.
struct CostWeights {
  Eigen::MatrixXd Wx = Eigen::MatrixXd::Identity(kStateDim, kStateDim);
  Eigen::MatrixXd Wu = 0.1 * Eigen::MatrixXd::Identity(kControlDim, kControlDim);
};

struct GainSchedule {
  std::vector<Eigen::MatrixXd> gains;    // L_0 .. L_{K-1}
  std::vector<Eigen::MatrixXd> riccati;  // P^f_0 .. P^f_K

  int horizon() const { return static_cast<int>(gains.size()); }
};

/// L = (Wu + B^T P B)^-1 B^T P A for the cost-to-go P of the following step.
inline Eigen::MatrixXd feedback_gain(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                                     const Eigen::MatrixXd& P_next, const Eigen::MatrixXd& Wu) {
  const Eigen::MatrixXd M = Wu + B.transpose() * P_next * B;
  const Eigen::LLT<Eigen::MatrixXd> llt(M);
  if (llt.info() != Eigen::Success) {
    throw NotPositiveDefiniteError("Wu + B^T P B is not positive definite");
  }
  return llt.solve(B.transpose() * P_next * A);
}

/// Backward dynamic Riccati recursion with P^f_K = Wx:
///   P^f_t = A_t^T P A_t - A_t^T P B_t (Wu + B_t^T P B_t)^-1 B_t^T P A_t + Wx, P = P^f_{t+1}.
inline GainSchedule backward_riccati(const std::vector<Eigen::MatrixXd>& A_seq,
                                     const std::vector<Eigen::MatrixXd>& B_seq,
                                     const CostWeights& weights) {
  if (A_seq.size() != B_seq.size()) {
    throw std::invalid_argument("A and B sequences must have equal length");
  }
  const std::size_t K = A_seq.size();
  GainSchedule out;
  out.gains.resize(K);
  out.riccati.resize(K + 1);
  out.riccati[K] = weights.Wx;
  for (std::size_t t = K; t-- > 0;) {
    const Eigen::MatrixXd& A = A_seq[t];
    const Eigen::MatrixXd& B = B_seq[t];
    const Eigen::MatrixXd& P = out.riccati[t + 1];
    out.gains[t] = feedback_gain(A, B, P, weights.Wu);
    Eigen::MatrixXd P_prev =
        A.transpose() * P * A - A.transpose() * P * B * out.gains[t] + weights.Wx;
    symmetrize(P_prev);
    out.riccati[t] = std::move(P_prev);
  }
  return out;
}

/// Gain schedule around a nominal plan, linearizing at (x^p_t, u^p_t).
inline GainSchedule synthesize_gains(const NominalPlan& plan, double dt, const CostWeights& weights) {
  std::vector<Eigen::MatrixXd> A_seq;
  std::vector<Eigen::MatrixXd> B_seq;
  for (int t = 0; t < plan.horizon(); ++t) {
    const auto J = dynamics_jacobians<double>(plan.states[t], plan.controls[t], dt);
    A_seq.emplace_back(J.A);
    B_seq.emplace_back(J.B);
  }
  return backward_riccati(A_seq, B_seq, weights);
}

/// Projects u onto the ball of radius r_u.
inline Eigen::VectorXd clip_to_ball(Eigen::VectorXd u, double r_u) {
  const double n = u.norm();
  if (n > r_u) u *= r_u / n;
  return u;
}

/// u = u_nominal - L * deviation, clipped to the r_u ball.
inline Eigen::VectorXd policy_control(const Eigen::VectorXd& nominal_control,
                                      const Eigen::MatrixXd& gain,
                                      const Eigen::VectorXd& deviation, double r_u) {
  return clip_to_ball(nominal_control - gain * deviation, r_u);
}

inline Control apply_policy(int t, const NominalPlan& plan, const GainSchedule& gains,
                            const State& estimate, double r_u) {
  const State deviation = state_difference<double>(estimate, plan.states.at(t));
  return policy_control(plan.controls.at(t), gains.gains.at(t), deviation, r_u);
}

}  // namespace tlqg
