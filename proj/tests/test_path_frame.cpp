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

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

namespace rmpc::path
{
namespace
{

TEST(ReferencePath, LeftOffsetOnStraightPath)
{
  const auto path = ReferencePath::straight(100.0);
  const auto err = path.global_to_path_errors({10.0, 1.0, 0.0});
  EXPECT_NEAR(err.e_y, 1.0, 1e-12);
  EXPECT_NEAR(err.e_phi, 0.0, 1e-12);
  EXPECT_NEAR(err.s_d, 10.0, 1e-12);
}

TEST(ReferencePath, ArcEndpointsFollowCircleGeometry)
{
  const double radius = 400.0;
  const auto path = ReferencePath::arc(radius * std::numbers::pi / 2.0, 1.0 / radius);
  const auto end = path.point_at(path.length());
  EXPECT_NEAR(end.x, radius, 1e-9);
  EXPECT_NEAR(end.y, radius, 1e-9);
  EXPECT_NEAR(end.phi, std::numbers::pi / 2.0, 1e-12);
}

TEST(ReferencePath, RoundTripThroughGlobalFrame)
{
  const ReferencePath path(
    {{50.0, 0.0}, {200.0, 1.0 / 400.0}, {80.0, -0.01}, {100.0, 0.0}}, {5.0, -2.0, 0.3});
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> s(0.0, path.length());
  std::uniform_real_distribution<double> ey(-4.0, 4.0);
  std::uniform_real_distribution<double> ephi(-0.5, 0.5);
  for (int k = 0; k < 500; ++k) {
    const double s0 = s(rng);
    const double e0 = ey(rng);
    const double p0 = ephi(rng);
    const auto err = path.global_to_path_errors(path.path_to_global(e0, p0, s0));
    EXPECT_NEAR(err.s_d, s0, 1e-8);
    EXPECT_NEAR(err.e_y, e0, 1e-8);
    EXPECT_NEAR(err.e_phi, p0, 1e-10);
  }
}

TEST(ReferencePath, SegmentsJoinContinuously)
{
  const ReferencePath path({{30.0, 0.02}, {30.0, -0.03}, {30.0, 0.0}});
  for (double s : {30.0, 60.0}) {
    const auto a = path.point_at(std::nextafter(s, 0.0));
    const auto b = path.point_at(s);
    EXPECT_NEAR(a.x, b.x, 1e-9);
    EXPECT_NEAR(a.y, b.y, 1e-9);
    EXPECT_NEAR(a.phi, b.phi, 1e-9);
  }
}

TEST(ReferencePath, CurvatureClampsOutsideTheExtent)
{
  const ReferencePath path({{10.0, 0.1}, {10.0, -0.2}});
  EXPECT_EQ(path.curvature_at(-5.0), 0.1);
  EXPECT_EQ(path.curvature_at(15.0), -0.2);
  EXPECT_EQ(path.curvature_at(500.0), -0.2);
}

TEST(ReferencePath, ProjectionAtCenterOfCurvatureIsAnError)
{
  const auto path = ReferencePath::arc(100.0, 0.01);
  EXPECT_THROW(path.global_to_path_errors({0.0, 100.0, 0.0}), FrameError);
}

TEST(ReferencePath, RejectsBadSegments)
{
  EXPECT_THROW(ReferencePath({}), InvalidArgument);
  EXPECT_THROW(ReferencePath({{-1.0, 0.0}}), InvalidArgument);
  EXPECT_THROW(ReferencePath({{1.0, INFINITY}}), InvalidArgument);
}

TEST(WrapAngle, MapsIntoHalfOpenInterval)
{
  EXPECT_DOUBLE_EQ(wrap_angle(std::numbers::pi), std::numbers::pi);
  EXPECT_DOUBLE_EQ(wrap_angle(-std::numbers::pi), std::numbers::pi);
  EXPECT_NEAR(wrap_angle(3.0 * std::numbers::pi / 2.0), -std::numbers::pi / 2.0, 1e-15);
  EXPECT_NEAR(wrap_angle(0.1 + 8.0 * std::numbers::pi), 0.1, 1e-12);
}

TEST(RoadBounds, PiecewiseConstantLookup)
{
  const RoadBounds road({{50.0, -1.0, 1.0}, {0.0, -2.0, 5.0}});
  EXPECT_EQ(road.at(-3.0).left, 5.0);
  EXPECT_EQ(road.at(49.9).right, -2.0);
  EXPECT_EQ(road.at(50.0).left, 1.0);
  EXPECT_EQ(road.at(1e6).right, -1.0);
  EXPECT_THROW(RoadBounds({{0.0, 1.0, 1.0}}), InvalidArgument);
  EXPECT_THROW(RoadBounds({}), InvalidArgument);
}

}  // namespace
}  // namespace rmpc::path
