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

#include "tlqg/svg.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>

namespace tlqg::svg {

namespace {

constexpr double kPad = 20.0;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

}  // namespace

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

Canvas::Canvas(Eigen::Vector2d lo, Eigen::Vector2d hi, double width_px) : lo_(lo), width_(width_px) {
  const Eigen::Vector2d span = (hi - lo).cwiseMax(1e-9);
  scale_ = (width_px - 2.0 * kPad) / span.x();
  height_ = span.y() * scale_ + 2.0 * kPad;
  hi_y_ = hi.y();
}

Eigen::Vector2d Canvas::to_px(const Eigen::Vector2d& p) const {
  return {kPad + (p.x() - lo_.x()) * scale_, kPad + (hi_y_ - p.y()) * scale_};
}

void Canvas::circle(const Eigen::Vector2d& c, double r, const std::string& style) {
  const auto p = to_px(c);
  body_ << "  <circle cx=\"" << num(p.x()) << "\" cy=\"" << num(p.y()) << "\" r=\""
        << num(r * scale_) << "\" style=\"" << style << "\"/>\n";
}

void Canvas::polyline(const std::vector<Eigen::Vector2d>& pts, const std::string& style) {
  body_ << "  <polyline fill=\"none\" style=\"" << style << "\" points=\"";
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto p = to_px(pts[i]);
    body_ << (i ? " " : "") << num(p.x()) << "," << num(p.y());
  }
  body_ << "\"/>\n";
}

void Canvas::covariance_ellipse(const Eigen::Vector2d& c, const Eigen::Matrix2d& cov,
                                const std::string& style) {
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(0.5 * (cov + cov.transpose()));
  const Eigen::Vector2d radii = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  const Eigen::Vector2d major = es.eigenvectors().col(1);
  // The canvas flips y, so world angles turn clockwise on screen.
  const double angle_deg = -std::atan2(major.y(), major.x()) * 180.0 / std::numbers::pi;
  const auto p = to_px(c);
  body_ << "  <ellipse cx=\"" << num(p.x()) << "\" cy=\"" << num(p.y()) << "\" rx=\""
        << num(radii(1) * scale_) << "\" ry=\"" << num(radii(0) * scale_) << "\" transform=\"rotate("
        << num(angle_deg) << " " << num(p.x()) << " " << num(p.y()) << ")\" style=\"" << style
        << "\"/>\n";
}

void Canvas::text(const Eigen::Vector2d& at, const std::string& s, const std::string& style) {
  const auto p = to_px(at);
  label(p.x(), p.y(), s, style);
}

void Canvas::label(double px, double py, const std::string& s, const std::string& style) {
  body_ << "  <text x=\"" << num(px) << "\" y=\"" << num(py)
        << "\" style=\"font-family:sans-serif;font-size:11px;" << style << "\">" << escape(s)
        << "</text>\n";
}

std::string Canvas::str() const {
  std::ostringstream out;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width_) << "\" height=\""
      << num(height_) << "\" viewBox=\"0 0 " << num(width_) << " " << num(height_) << "\">\n"
      << "  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << body_.str() << "</svg>\n";
  return out.str();
}

}  // namespace tlqg::svg
