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

#include <concepts>
#include <vector>

#include <Eigen/Dense>

#include "tlqg/models.hpp"

namespace tlqg {

/// Dynamics + sensing interface used by the estimator and the closed-loop simulator.
/// UnicycleLandmarkModel is the production implementation; tests plug in linear ones.
template <typename M>
concept FilterModel = requires(const M& m, const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                               Eigen::MatrixXd& A, Eigen::MatrixXd& B) {
  { m.state_dim() } -> std::convertible_to<int>;
  { m.control_dim() } -> std::convertible_to<int>;
  { m.measurement_dim() } -> std::convertible_to<int>;
  { m.step(x, u) } -> std::convertible_to<Eigen::VectorXd>;
  m.jacobians(x, u, A, B);
  { m.measure(x) } -> std::convertible_to<Eigen::VectorXd>;
  { m.measurement_jacobian(x) } -> std::convertible_to<Eigen::MatrixXd>;
  { m.state_difference(x, x) } -> std::convertible_to<Eigen::VectorXd>;
  { m.measurement_difference(x, x) } -> std::convertible_to<Eigen::VectorXd>;
  { m.normalize_state(x) } -> std::convertible_to<Eigen::VectorXd>;
};

static_assert(FilterModel<UnicycleLandmarkModel>);

/// Gaussian belief: estimate mean and covariance.
struct BeliefState {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

template <typename Derived>
void symmetrize(Eigen::MatrixBase<Derived>& P) {
  P = (0.5 * (P + P.transpose())).eval();
}

/// P- = A P+ A^T + eps^2 G Sigma_w G^T
template <typename DerivedP, typename DerivedA>
MatrixX<typename DerivedP::Scalar> predict_covariance(const Eigen::MatrixBase<DerivedP>& P_plus,
                                                      const Eigen::MatrixBase<DerivedA>& A,
                                                      const NoiseModel& noise) {
  using Scalar = typename DerivedP::Scalar;
  const double e2 = noise.epsilon * noise.epsilon;
  const Eigen::MatrixXd Q = e2 * noise.G * noise.sigma_omega * noise.G.transpose();
  MatrixX<Scalar> P = A * P_plus * A.transpose() + Q.cast<Scalar>();
  symmetrize(P);
  return P;
}

/// S = H P- H^T + eps^2 Sigma_nu. Throws NotPositiveDefiniteError if S does not factor.
template <typename DerivedP, typename DerivedH>
MatrixX<typename DerivedP::Scalar> innovation_covariance(const Eigen::MatrixBase<DerivedP>& P_minus,
                                                         const Eigen::MatrixBase<DerivedH>& H,
                                                         const NoiseModel& noise) {
  using Scalar = typename DerivedP::Scalar;
  const double e2 = noise.epsilon * noise.epsilon;
  MatrixX<Scalar> S = H * P_minus * H.transpose() + (e2 * noise.sigma_nu).cast<Scalar>();
  symmetrize(S);
  if (Eigen::LLT<MatrixX<Scalar>>(S).info() != Eigen::Success) {
    throw NotPositiveDefiniteError("innovation covariance is not positive definite");
  }
  return S;
}

/// K = P- H^T S^-1, using the symmetry of P- and S.
template <typename DerivedP, typename DerivedH, typename DerivedS>
MatrixX<typename DerivedP::Scalar> kalman_gain(const Eigen::MatrixBase<DerivedP>& P_minus,
                                               const Eigen::MatrixBase<DerivedH>& H,
                                               const Eigen::MatrixBase<DerivedS>& S) {
  using Scalar = typename DerivedP::Scalar;
  const Eigen::LLT<MatrixX<Scalar>> llt(S);
  if (llt.info() != Eigen::Success) {
    throw NotPositiveDefiniteError("innovation covariance is not positive definite");
  }
  const MatrixX<Scalar> HP = H * P_minus;
  return llt.solve(HP).transpose();
}

/// P+ = (I - P- H^T S^-1 H) P-
template <typename DerivedP, typename DerivedH, typename DerivedS>
MatrixX<typename DerivedP::Scalar> update_covariance(const Eigen::MatrixBase<DerivedP>& P_minus,
                                                     const Eigen::MatrixBase<DerivedH>& H,
                                                     const Eigen::MatrixBase<DerivedS>& S) {
  using Scalar = typename DerivedP::Scalar;
  const MatrixX<Scalar> K = kalman_gain(P_minus, H, S);
  const auto n = P_minus.rows();
  MatrixX<Scalar> P = (MatrixX<Scalar>::Identity(n, n) - K * H) * P_minus;
  symmetrize(P);
  return P;
}

/// Joseph form (I-KH) P- (I-KH)^T + eps^2 K Sigma_nu K^T.
template <typename DerivedP, typename DerivedH>
MatrixX<typename DerivedP::Scalar> joseph_update(const Eigen::MatrixBase<DerivedP>& P_minus,
                                                 const Eigen::MatrixBase<DerivedH>& H,
                                                 const NoiseModel& noise) {
  using Scalar = typename DerivedP::Scalar;
  const MatrixX<Scalar> S = innovation_covariance(P_minus, H, noise);
  const MatrixX<Scalar> K = kalman_gain(P_minus, H, S);
  const auto n = P_minus.rows();
  const MatrixX<Scalar> IKH = MatrixX<Scalar>::Identity(n, n) - K * H;
  const double e2 = noise.epsilon * noise.epsilon;
  MatrixX<Scalar> P = IKH * P_minus * IKH.transpose() +
                      K * (e2 * noise.sigma_nu).cast<Scalar>() * K.transpose();
  symmetrize(P);
  return P;
}

/// Planning-time covariance recursion along a nominal trajectory: P+_0 = eps^2 Sigma_x0,
/// then predict with A_{t-1} at (x_{t-1}, u_{t-1}) and update with H_t at x_t.
/// In the noiseless limit (eps == 0) every covariance is zero and updates are skipped.
template <typename Scalar>
std::vector<Eigen::Matrix<Scalar, kStateDim, kStateDim>> propagate_nominal_covariances(
    const std::vector<StateT<Scalar>>& nominal_states,
    const std::vector<ControlT<Scalar>>& controls, const WorldModel& world) {
  using Cov = Eigen::Matrix<Scalar, kStateDim, kStateDim>;
  if (nominal_states.size() != controls.size() + 1) {
    throw std::invalid_argument("need exactly one more nominal state than controls");
  }
  const NoiseModel& noise = world.noise;
  std::vector<Cov> out;
  out.reserve(nominal_states.size());
  Cov P = (noise.epsilon * noise.epsilon * noise.sigma_x0).cast<Scalar>();
  out.push_back(P);
  for (std::size_t t = 1; t < nominal_states.size(); ++t) {
    const auto J = dynamics_jacobians<Scalar>(nominal_states[t - 1], controls[t - 1], world.dt);
    const MatrixX<Scalar> P_minus = predict_covariance(P, J.A, noise);
    if (noise.epsilon == 0.0) {
      P = P_minus;
    } else {
      const MatrixX<Scalar> H = measurement_jacobian<Scalar>(nominal_states[t], world);
      const MatrixX<Scalar> S = innovation_covariance(P_minus, H, noise);
      P = update_covariance(P_minus, H, S);
    }
    out.push_back(P);
  }
  return out;
}

/// One extended Kalman filter cycle: predict through the model at the current estimate,
/// then correct with the measurement linearized at the predicted estimate. Innovations
/// are formed with model.measurement_difference; the covariance uses the Joseph form.
/// If `innovation` is non-null it receives the (wrapped) innovation vector.
template <FilterModel Model>
BeliefState ekf_step(const BeliefState& belief, const Eigen::VectorXd& control,
                     const Eigen::VectorXd& measurement, const Model& model,
                     const NoiseModel& noise, Eigen::VectorXd* innovation = nullptr) {
  Eigen::MatrixXd A;
  Eigen::MatrixXd B;
  model.jacobians(belief.mean, control, A, B);
  BeliefState out;
  out.mean = model.step(belief.mean, control);
  out.cov = predict_covariance(belief.cov, A, noise);
  if (noise.epsilon == 0.0) {
    if (innovation != nullptr) *innovation = Eigen::VectorXd::Zero(model.measurement_dim());
    return out;
  }
  const Eigen::MatrixXd H = model.measurement_jacobian(out.mean);
  const Eigen::VectorXd nu = model.measurement_difference(measurement, model.measure(out.mean));
  const Eigen::MatrixXd S = innovation_covariance(out.cov, H, noise);
  const Eigen::MatrixXd K = kalman_gain(out.cov, H, S);
  out.mean = model.normalize_state(out.mean + K * nu);
  out.cov = joseph_update(out.cov, H, noise);
  if (innovation != nullptr) *innovation = nu;
  return out;
}

inline BeliefState ekf_step(const BeliefState& belief, const Control& control,
                            const Measurement& measurement, const WorldModel& world,
                            Eigen::VectorXd* innovation = nullptr) {
  return ekf_step(belief, Eigen::VectorXd(control), measurement, UnicycleLandmarkModel(world),
                  world.noise, innovation);
}

}  // namespace tlqg
