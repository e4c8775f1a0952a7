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

#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace tlqg::svg {

/// Minimal SVG writer in world coordinates (y up), mapped onto a fixed-size canvas.
class Canvas {
 public:
  Canvas(Eigen::Vector2d lo, Eigen::Vector2d hi, double width_px = 640.0);

  void circle(const Eigen::Vector2d& c, double r, const std::string& style);
  void polyline(const std::vector<Eigen::Vector2d>& pts, const std::string& style);
  /// 1-sigma contour of a 2x2 position covariance.
  void covariance_ellipse(const Eigen::Vector2d& c, const Eigen::Matrix2d& cov,
                          const std::string& style);
  void text(const Eigen::Vector2d& at, const std::string& s, const std::string& style = "");
  /// Text positioned in pixel coordinates.
  void label(double px, double py, const std::string& s, const std::string& style = "");

  std::string str() const;

 private:
  Eigen::Vector2d to_px(const Eigen::Vector2d& p) const;

  Eigen::Vector2d lo_;
  double hi_y_ = 0.0;
  double scale_;
  double width_;
  double height_;
  std::ostringstream body_;
};

std::string escape(const std::string& s);

}  // namespace tlqg::svg
