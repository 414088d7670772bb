// Copyright 2026 The RMPC Evasive Steering Authors
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

#include "rmpc/path_frame.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace rmpc::path
{

double wrap_angle(double angle)
{
  double a = std::remainder(angle, 2.0 * std::numbers::pi);
  if (a <= -std::numbers::pi) {
    a += 2.0 * std::numbers::pi;
  }
  return a;
}

ReferencePath::ReferencePath(std::vector<Segment> segments, Pose anchor)
: segments_(std::move(segments)), anchor_(anchor)
{
  if (segments_.empty()) {
    throw InvalidArgument("reference path needs at least one segment");
  }
  Pose pose = anchor_;
  double s = 0.0;
  starts_.reserve(segments_.size());
  for (std::size_t k = 0; k < segments_.size(); ++k) {
    const auto & seg = segments_[k];
    if (!(seg.length > 0.0) || !std::isfinite(seg.curvature)) {
      throw InvalidArgument("path segments need positive length and finite curvature");
    }
    starts_.push_back({s, pose});
    pose = point_on_segment(k, seg.length);
    s += seg.length;
  }
  total_length_ = s;
}

ReferencePath ReferencePath::straight(double length) { return ReferencePath({{length, 0.0}}); }

ReferencePath ReferencePath::arc(double length, double curvature)
{
  return ReferencePath({{length, curvature}});
}

std::size_t ReferencePath::segment_index(double s) const
{
  // last segment whose start is <= s
  auto it = std::upper_bound(
    starts_.begin(), starts_.end(), s,
    [](double value, const SegmentStart & st) { return value < st.s; });
  if (it == starts_.begin()) {
    return 0;
  }
  return static_cast<std::size_t>(std::distance(starts_.begin(), it) - 1);
}

double ReferencePath::curvature_at(double s) const
{
  const double clamped = std::clamp(s, 0.0, total_length_);
  return segments_[segment_index(clamped)].curvature;
}

Pose ReferencePath::point_on_segment(std::size_t k, double local_s) const
{
  const Pose & p0 = k < starts_.size() ? starts_[k].pose : anchor_;
  const double kappa = segments_[k].curvature;
  const double phi = p0.phi + kappa * local_s;
  if (std::abs(kappa) < 1e-12) {
    return {p0.x + local_s * std::cos(p0.phi), p0.y + local_s * std::sin(p0.phi), phi};
  }
  return {
    p0.x + (std::sin(phi) - std::sin(p0.phi)) / kappa,
    p0.y - (std::cos(phi) - std::cos(p0.phi)) / kappa, phi};
}

Pose ReferencePath::point_at(double s) const
{
  const std::size_t k = segment_index(s);
  return point_on_segment(k, s - starts_[k].s);
}

Pose ReferencePath::path_to_global(double e_y, double e_phi, double s) const
{
  const Pose p = point_at(s);
  return {p.x - e_y * std::sin(p.phi), p.y + e_y * std::cos(p.phi), wrap_angle(p.phi + e_phi)};
}

PathErrors ReferencePath::global_to_path_errors(const Pose & pose) const
{
  double best_dist = std::numeric_limits<double>::infinity();
  double best_s = 0.0;
  for (std::size_t k = 0; k < segments_.size(); ++k) {
    const Pose & p0 = starts_[k].pose;
    const double kappa = segments_[k].curvature;
    // geometry continues past the ends of the first and last segment
    double lo = 0.0;
    double hi = segments_[k].length;
    const double half_turn =
      std::abs(kappa) < 1e-12 ? 1e9 : 0.9 * std::numbers::pi / std::abs(kappa);
    if (k == 0) {
      lo = -std::min(half_turn, 1e6);
    }
    if (k + 1 == segments_.size()) {
      hi = std::max(hi, std::min(half_turn, hi + 1e6));
    }

    double local = 0.0;
    if (std::abs(kappa) < 1e-12) {
      local = (pose.x - p0.x) * std::cos(p0.phi) + (pose.y - p0.y) * std::sin(p0.phi);
    } else {
      const double cx = p0.x - std::sin(p0.phi) / kappa;
      const double cy = p0.y + std::cos(p0.phi) / kappa;
      const double dx = pose.x - cx;
      const double dy = pose.y - cy;
      if (std::hypot(dx, dy) < 1e-9 / std::abs(kappa)) {
        throw FrameError("projection ambiguous: pose at the center of curvature");
      }
      const double v0x = p0.x - cx;
      const double v0y = p0.y - cy;
      const double delta = std::atan2(v0x * dy - v0y * dx, v0x * dx + v0y * dy);
      local = delta / kappa;
    }
    local = std::clamp(local, lo, hi);
    const Pose q = point_on_segment(k, local);
    const double dist = std::hypot(pose.x - q.x, pose.y - q.y);
    if (dist < best_dist) {
      best_dist = dist;
      best_s = starts_[k].s + local;
    }
  }

  const Pose q = point_at(best_s);
  const double e_y = -(pose.x - q.x) * std::sin(q.phi) + (pose.y - q.y) * std::cos(q.phi);
  if (curvature_at(best_s) * e_y >= 1.0) {
    throw FrameError("projection ambiguous: lateral offset beyond the radius of curvature");
  }
  return {e_y, wrap_angle(pose.phi - q.phi), best_s};
}

RoadBounds::RoadBounds(std::vector<Section> sections) : sections_(std::move(sections))
{
  if (sections_.empty()) {
    throw InvalidArgument("road bounds need at least one section");
  }
  std::sort(sections_.begin(), sections_.end(), [](const Section & a, const Section & b) {
    return a.s_from < b.s_from;
  });
  for (const auto & sec : sections_) {
    if (!(sec.right < sec.left)) {
      throw InvalidArgument("road bounds need right < left");
    }
  }
}

RoadBounds RoadBounds::constant(double right, double left)
{
  return RoadBounds({{0.0, right, left}});
}

const RoadBounds::Section & RoadBounds::at(double s) const
{
  auto it = std::upper_bound(
    sections_.begin(), sections_.end(), s,
    [](double value, const Section & sec) { return value < sec.s_from; });
  if (it == sections_.begin()) {
    return sections_.front();
  }
  return *std::prev(it);
}

}  // namespace rmpc::path
