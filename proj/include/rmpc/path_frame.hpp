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

#pragma once

#include "rmpc/common.hpp"

#include <vector>

namespace rmpc::path
{

struct Pose
{
  double x{0.0};
  double y{0.0};
  double phi{0.0};
};

struct PathErrors
{
  double e_y{0.0};
  double e_phi{0.0};
  double s_d{0.0};
};

struct Segment
{
  double length{0.0};     // m, > 0
  double curvature{0.0};  // 1/m, positive turns left
};

/// Arc-length parameterized reference path built from straight and
/// constant-curvature segments. Immutable after construction.
///
/// Geometry queries beyond either end continue the first or last segment;
/// curvature queries clamp to the path extent.
class ReferencePath
{
public:
  ReferencePath(std::vector<Segment> segments, Pose anchor = {});

  static ReferencePath straight(double length);
  static ReferencePath arc(double length, double curvature);

  double length() const { return total_length_; }
  const std::vector<Segment> & segments() const { return segments_; }
  const Pose & anchor() const { return anchor_; }

  double curvature_at(double s) const;
  /// Pose of the path point at arc length s (heading = path tangent).
  Pose point_at(double s) const;

  Pose path_to_global(double e_y, double e_phi, double s) const;
  PathErrors global_to_path_errors(const Pose & pose) const;

private:
  struct SegmentStart
  {
    double s;
    Pose pose;
  };

  std::size_t segment_index(double s) const;
  Pose point_on_segment(std::size_t k, double local_s) const;

  std::vector<Segment> segments_;
  std::vector<SegmentStart> starts_;
  Pose anchor_;
  double total_length_{0.0};
};

/// Piecewise-constant lateral limits of the drivable road, in e_y.
class RoadBounds
{
public:
  struct Section
  {
    double s_from{0.0};
    double right{0.0};  // lower e_y limit
    double left{0.0};   // upper e_y limit
  };

  explicit RoadBounds(std::vector<Section> sections);
  static RoadBounds constant(double right, double left);

  const Section & at(double s) const;
  const std::vector<Section> & sections() const { return sections_; }

private:
  std::vector<Section> sections_;
};

/// Wraps an angle to (-pi, pi].
double wrap_angle(double angle);

}  // namespace rmpc::path
