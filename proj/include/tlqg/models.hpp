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

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

#include <Eigen/Dense>

namespace tlqg {

inline constexpr int kStateDim = 3;
inline constexpr int kControlDim = 2;

/// Minimum landmark range before the range/bearing model is considered degenerate.
inline constexpr double kMinRange = 1e-9;

template <typename Scalar>
using StateT = Eigen::Matrix<Scalar, kStateDim, 1>;
template <typename Scalar>
using ControlT = Eigen::Matrix<Scalar, kControlDim, 1>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Pose (x [m], y [m], theta [rad]) with theta kept in (-pi, pi].
using State = StateT<double>;
/// Command (v, omega): linear speed and turn rate.
using Control = ControlT<double>;
using Measurement = Eigen::VectorXd;

/// Raised when the robot sits on top of a landmark and range/bearing is singular.
class GeometryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a matrix that must be positive definite fails to factor.
class NotPositiveDefiniteError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Plain double value of a scalar, which may be an Eigen::AutoDiffScalar.
template <typename Scalar>
double value_of(const Scalar& s) {
  if constexpr (std::is_arithmetic_v<Scalar>) {
    return static_cast<double>(s);
  } else {
    return value_of(s.value());
  }
}

/// Maps an angle to (-pi, pi]. The shift is computed on the value only, so
/// derivatives pass through unchanged for autodiff scalars.
template <typename Scalar>
Scalar wrap_angle(const Scalar& a) {
  constexpr double kPi = std::numbers::pi;
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  const double v = value_of(a);
  double turns = std::round(v / kTwoPi);
  double r = v - kTwoPi * turns;
  if (r <= -kPi) {
    turns -= 1.0;
  } else if (r > kPi) {
    turns += 1.0;
  }
  if (turns == 0.0) return a;
  return a - Scalar(kTwoPi * turns);
}

struct Landmark {
  std::string id;
  double px = 0.0;
  double py = 0.0;
};

struct Obstacle {
  double cx = 0.0;
  double cy = 0.0;
  double radius = 0.0;
  double safety_margin = 0.0;
};

/// Noise scale and covariances of the discretized process/measurement models.
/// Process noise enters as epsilon * G * w with w ~ N(0, sigma_omega); measurement
/// noise as epsilon * nu with nu ~ N(0, sigma_nu); x0 ~ N(mean, epsilon^2 sigma_x0).
/// epsilon == 0 is the noiseless limit.
struct NoiseModel {
  double epsilon = 1.0;
  Eigen::MatrixXd sigma_omega;
  Eigen::MatrixXd sigma_nu;
  Eigen::MatrixXd sigma_x0;
  Eigen::MatrixXd G;
};

struct WorldModel {
  std::vector<Landmark> landmarks;
  std::vector<Obstacle> obstacles;
  double dt = 1.0;
  NoiseModel noise;

  int measurement_dim() const { return 2 * static_cast<int>(landmarks.size()); }

  /// Throws std::invalid_argument describing the first violated invariant.
  void validate() const;
};

/// Unicycle step: (x + dt v cos th, y + dt v sin th, wrap(th + dt w)).
template <typename Scalar>
StateT<Scalar> step_dynamics(const StateT<Scalar>& state, const ControlT<Scalar>& control,
                             double dt) {
  using std::cos;
  using std::sin;
  StateT<Scalar> next;
  next(0) = state(0) + dt * control(0) * cos(state(2));
  next(1) = state(1) + dt * control(0) * sin(state(2));
  next(2) = wrap_angle<Scalar>(state(2) + dt * control(1));
  return next;
}

template <typename Scalar>
struct DynamicsJacobiansT {
  Eigen::Matrix<Scalar, kStateDim, kStateDim> A;
  Eigen::Matrix<Scalar, kStateDim, kControlDim> B;
};
using DynamicsJacobians = DynamicsJacobiansT<double>;

template <typename Scalar>
DynamicsJacobiansT<Scalar> dynamics_jacobians(const StateT<Scalar>& state,
                                              const ControlT<Scalar>& control, double dt) {
  using std::cos;
  using std::sin;
  const Scalar c = cos(state(2));
  const Scalar s = sin(state(2));
  DynamicsJacobiansT<Scalar> J;
  J.A.setIdentity();
  J.A(0, 2) = -dt * control(0) * s;
  J.A(1, 2) = dt * control(0) * c;
  J.B.setZero();
  J.B(0, 0) = dt * c;
  J.B(1, 0) = dt * s;
  J.B(2, 1) = Scalar(dt);
  return J;
}

/// Stacked [range_1, bearing_1, range_2, bearing_2, ...] in landmark order.
template <typename Scalar>
VectorX<Scalar> measure(const StateT<Scalar>& state, const WorldModel& world) {
  using std::atan2;
  using std::sqrt;
  VectorX<Scalar> z(world.measurement_dim());
  for (std::size_t j = 0; j < world.landmarks.size(); ++j) {
    const Scalar dx = world.landmarks[j].px - state(0);
    const Scalar dy = world.landmarks[j].py - state(1);
    const Scalar r = sqrt(dx * dx + dy * dy);
    if (value_of(r) < kMinRange) {
      throw GeometryError("robot coincides with landmark '" + world.landmarks[j].id + "'");
    }
    z(2 * j) = r;
    z(2 * j + 1) = wrap_angle<Scalar>(atan2(dy, dx) - state(2));
  }
  return z;
}

template <typename Scalar>
MatrixX<Scalar> measurement_jacobian(const StateT<Scalar>& state, const WorldModel& world) {
  using std::sqrt;
  MatrixX<Scalar> H = MatrixX<Scalar>::Zero(world.measurement_dim(), kStateDim);
  for (std::size_t j = 0; j < world.landmarks.size(); ++j) {
    const Scalar dx = world.landmarks[j].px - state(0);
    const Scalar dy = world.landmarks[j].py - state(1);
    const Scalar r2 = dx * dx + dy * dy;
    const Scalar r = sqrt(r2);
    if (value_of(r) < kMinRange) {
      throw GeometryError("robot coincides with landmark '" + world.landmarks[j].id + "'");
    }
    const auto row = static_cast<Eigen::Index>(2 * j);
    H(row, 0) = -dx / r;
    H(row, 1) = -dy / r;
    H(row + 1, 0) = dy / r2;
    H(row + 1, 1) = -dx / r2;
    H(row + 1, 2) = Scalar(-1.0);
  }
  return H;
}

/// a - b with the heading component wrapped.
template <typename Scalar>
StateT<Scalar> state_difference(const StateT<Scalar>& a, const StateT<Scalar>& b) {
  StateT<Scalar> d = a - b;
  d(2) = wrap_angle<Scalar>(d(2));
  return d;
}

/// z - zhat with every bearing component wrapped.
template <typename Scalar>
VectorX<Scalar> measurement_difference(const VectorX<Scalar>& z, const VectorX<Scalar>& zhat) {
  VectorX<Scalar> d = z - zhat;
  for (Eigen::Index i = 1; i < d.size(); i += 2) d(i) = wrap_angle<Scalar>(d(i));
  return d;
}

/// Unicycle with landmark range/bearing sensing, exposed through the dynamic-size
/// interface that the estimator and the closed-loop simulator are written against.
class UnicycleLandmarkModel {
 public:
  explicit UnicycleLandmarkModel(const WorldModel& world) : world_(&world) {}

  int state_dim() const { return kStateDim; }
  int control_dim() const { return kControlDim; }
  int measurement_dim() const { return world_->measurement_dim(); }

  Eigen::VectorXd step(const Eigen::VectorXd& x, const Eigen::VectorXd& u) const {
    return step_dynamics<double>(State(x), Control(u), world_->dt);
  }

  void jacobians(const Eigen::VectorXd& x, const Eigen::VectorXd& u, Eigen::MatrixXd& A,
                 Eigen::MatrixXd& B) const {
    const auto J = dynamics_jacobians<double>(State(x), Control(u), world_->dt);
    A = J.A;
    B = J.B;
  }

  Eigen::VectorXd measure(const Eigen::VectorXd& x) const {
    return tlqg::measure<double>(State(x), *world_);
  }

  Eigen::MatrixXd measurement_jacobian(const Eigen::VectorXd& x) const {
    return tlqg::measurement_jacobian<double>(State(x), *world_);
  }

  Eigen::VectorXd state_difference(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const {
    return tlqg::state_difference<double>(State(a), State(b));
  }

  Eigen::VectorXd measurement_difference(const Eigen::VectorXd& z,
                                         const Eigen::VectorXd& zhat) const {
    return tlqg::measurement_difference<double>(z, zhat);
  }

  Eigen::VectorXd normalize_state(Eigen::VectorXd x) const {
    x(2) = wrap_angle(x(2));
    return x;
  }

  const WorldModel& world() const { return *world_; }

 private:
  const WorldModel* world_;
};

}  // namespace tlqg
