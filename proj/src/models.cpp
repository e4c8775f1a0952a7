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

#include "tlqg/models.hpp"

#include <cstdlib>
#include <set>
#include <string>
#include <thread>

#include "tlqg/parallel.hpp"

namespace tlqg {

namespace {

bool is_symmetric(const Eigen::MatrixXd& M) {
  return M.rows() == M.cols() && (M - M.transpose()).cwiseAbs().maxCoeff() <= 1e-12;
}

double min_eigenvalue(const Eigen::MatrixXd& M) {
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(M, Eigen::EigenvaluesOnly)
      .eigenvalues()
      .minCoeff();
}

void require_psd(const Eigen::MatrixXd& M, int dim, const std::string& name) {
  if (M.rows() != dim || M.cols() != dim) {
    throw std::invalid_argument(name + " must be " + std::to_string(dim) + "x" +
                                std::to_string(dim));
  }
  if (!is_symmetric(M)) throw std::invalid_argument(name + " must be symmetric");
  if (min_eigenvalue(M) < -1e-12) throw std::invalid_argument(name + " must be PSD");
}

}  // namespace

void WorldModel::validate() const {
  if (landmarks.empty()) throw std::invalid_argument("world needs at least one landmark");
  std::set<std::string> ids;
  for (const auto& l : landmarks) {
    if (!ids.insert(l.id).second) throw std::invalid_argument("duplicate landmark id '" + l.id + "'");
  }
  for (const auto& o : obstacles) {
    if (!(o.radius > 0.0)) throw std::invalid_argument("obstacle radius must be > 0");
    if (!(o.safety_margin >= 0.0)) throw std::invalid_argument("obstacle safety_margin must be >= 0");
  }
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be > 0");
  if (!(noise.epsilon >= 0.0)) throw std::invalid_argument("epsilon must be >= 0");
  require_psd(noise.sigma_omega, kStateDim, "sigma_omega");
  require_psd(noise.sigma_x0, kStateDim, "sigma_x0");
  require_psd(noise.sigma_nu, measurement_dim(), "sigma_nu");
  if (min_eigenvalue(noise.sigma_nu) <= 0.0) {
    throw std::invalid_argument("sigma_nu must be positive definite");
  }
  if (noise.G.rows() != kStateDim || noise.G.cols() != kStateDim) {
    throw std::invalid_argument("G must be 3x3");
  }
}

int default_thread_count() {
  if (const char* env = std::getenv("TLQG_THREADS"); env != nullptr && *env != '\0') {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace tlqg
