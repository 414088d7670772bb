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


#include "oracles.hpp"
#include "rmpc/vehicle_dynamics.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

namespace rmpc::vehicle
{
namespace
{

struct TireCase
{
  double c;
  double mu;
  double fz;
};

std::vector<TireCase> random_tires(int n, unsigned seed)
{
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> c(2e4, 2e5);
  std::uniform_real_distribution<double> mu(0.1, 1.2);
  std::uniform_real_distribution<double> fz(1e3, 8e3);
  std::vector<TireCase> out;
  for (int k = 0; k < n; ++k) {
    out.push_back({c(rng), mu(rng), fz(rng)});
  }
  return out;
}

TEST(BrushTire, MatchesExtendedPrecisionOracle)
{
  for (const auto & t : random_tires(50, 3)) {
    const double a_sat = tire_saturation_angle(t.c, t.mu, t.fz);
    for (int k = -20; k <= 20; ++k) {
      const double alpha = 1.3 * a_sat * k / 20.0;
      const double expected = static_cast<double>(oracle::brush_force_ld(alpha, t.c, t.mu, t.fz));
      EXPECT_NEAR(brush_tire_force(alpha, t.c, t.mu, t.fz), expected, 1e-9 * t.mu * t.fz);
    }
  }
}

TEST(BrushTire, SaturatesContinuouslyWithZeroSlope)
{
  for (const auto & t : random_tires(100, 7)) {
    const double a_sat = tire_saturation_angle(t.c, t.mu, t.fz);
    const double f_max = t.mu * t.fz;
    EXPECT_NEAR(brush_tire_force(a_sat, t.c, t.mu, t.fz), -f_max, 1e-9 * f_max);
    const double below = std::nextafter(a_sat, 0.0);
    EXPECT_NEAR(brush_tire_force(below, t.c, t.mu, t.fz), -f_max, 1e-9 * f_max);
    EXPECT_NEAR(brush_tire_local_stiffness(below, t.c, t.mu, t.fz), 0.0, 1e-6 * t.c);
    const double h = 1e-6 * a_sat;
    const double slope = (brush_tire_force(a_sat, t.c, t.mu, t.fz) -
                          brush_tire_force(a_sat - h, t.c, t.mu, t.fz)) / h;
    EXPECT_NEAR(slope, 0.0, 1e-6 * t.c);
    EXPECT_DOUBLE_EQ(brush_tire_force(2.0 * a_sat, t.c, t.mu, t.fz), -f_max);
    EXPECT_DOUBLE_EQ(brush_tire_force(-2.0 * a_sat, t.c, t.mu, t.fz), f_max);
  }
}

TEST(BrushTire, LinearNearZeroSlip)
{
  const TireCase t{51650.0, 0.55, 2704.4};
  const double alpha = 1e-7;
  EXPECT_NEAR(brush_tire_force(alpha, t.c, t.mu, t.fz) / alpha, -t.c, 1e-3 * t.c);
  EXPECT_NEAR(brush_tire_local_stiffness(0.0, t.c, t.mu, t.fz), t.c, 1e-12 * t.c);
  EXPECT_EQ(brush_tire_force(0.0, t.c, t.mu, t.fz), 0.0);
}

TEST(BrushTire, LocalStiffnessMatchesCentralDifference)
{
  for (const auto & t : random_tires(30, 11)) {
    const double a_sat = tire_saturation_angle(t.c, t.mu, t.fz);
    for (double frac : {-0.9, -0.5, -0.1, 0.05, 0.3, 0.7, 0.95}) {
      const double alpha = frac * a_sat;
      const double h = 1e-6 * a_sat;
      const double fd = -(brush_tire_force(alpha + h, t.c, t.mu, t.fz) -
                          brush_tire_force(alpha - h, t.c, t.mu, t.fz)) / (2.0 * h);
      EXPECT_NEAR(brush_tire_local_stiffness(alpha, t.c, t.mu, t.fz), fd, 1e-5 * t.c);
    }
  }
}

TEST(BrushTire, InverseAgreesWithBisection)
{
  for (const auto & t : random_tires(30, 13)) {
    const double a_sat = tire_saturation_angle(t.c, t.mu, t.fz);
    for (double frac : {-0.99, -0.6, -0.2, 0.0, 0.1, 0.5, 0.9, 0.999}) {
      const double force = frac * t.mu * t.fz;
      const double ref = oracle::bisect(
        [&](double a) { return brush_tire_force(a, t.c, t.mu, t.fz) - force; }, -a_sat, a_sat);
      EXPECT_NEAR(inverse_tire_force(force, t.c, t.mu, t.fz), ref, 1e-10);
    }
    EXPECT_DOUBLE_EQ(inverse_tire_force(2.0 * t.mu * t.fz, t.c, t.mu, t.fz), -a_sat);
  }
}

TEST(BrushTire, RejectsNonPhysicalArguments)
{
  EXPECT_THROW(brush_tire_force(0.1, 0.0, 0.5, 1000.0), InvalidArgument);
  EXPECT_THROW(brush_tire_force(0.1, 1e4, -0.5, 1000.0), InvalidArgument);
  EXPECT_THROW(brush_tire_force(NAN, 1e4, 0.5, 1000.0), InvalidArgument);
  EXPECT_THROW(inverse_tire_force(10.0, 1e4, 0.5, 0.0), InvalidArgument);
}

TEST(SlipAngles, SmallAngleFormIsTheLinearization)
{
  const VehicleParams p;
  const GlobalState s{0, 0, 0, 0.3, 18.0, 0.1};
  const auto exact = slip_angles(s, 0.02, p, SlipForm::kExact);
  const auto small = slip_angles(s, 0.02, p, SlipForm::kSmallAngle);
  EXPECT_NEAR(exact.front, std::atan((0.3 + p.cg_to_front * 0.1) / 18.0) - 0.02, 1e-15);
  EXPECT_NEAR(small.rear, (0.3 - p.cg_to_rear * 0.1) / 18.0, 1e-15);
  EXPECT_NEAR(exact.front, small.front, 1e-5);
  EXPECT_THROW(slip_angles({0, 0, 0, 0, 0.0, 0}, 0.0, p, SlipForm::kExact), InvalidArgument);
}

TEST(CenterOfPercussion, RearForceDoesNotMoveCpLateralVelocity)
{
  const VehicleParams p;
  const double cp = p.cp_distance();
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> v(-2.0, 2.0);
  std::uniform_real_distribution<double> r(-0.5, 0.5);
  std::uniform_real_distribution<double> f(-3000.0, 3000.0);
  std::uniform_real_distribution<double> speed(5.0, 35.0);
  for (int k = 0; k < 1000; ++k) {
    const GlobalState s{0, 0, 0, v(rng), speed(rng), r(rng)};
    const double ff = f(rng);
    const double fr = f(rng);
    auto cp_acc = [&](double rear) {
      const auto acc = body_accelerations(s, ff, rear, p);
      return acc.y_ddot + cp * acc.phi_ddot;
    };
    const double h = 1.0;
    const double sensitivity = (cp_acc(fr + h) - cp_acc(fr - h)) / (2.0 * h);
    EXPECT_LT(std::abs(sensitivity) / (2.0 / p.mass), 1e-10);
  }
}

TEST(PlantDerivative, StraightDrivingOnPathIsAnEquilibrium)
{
  const VehicleParams p;
  PlantState s;
  s.body.x_dot = 18.0;
  const auto d = plant_derivative(s, 0.0, p, 0.55, [](double) { return 0.0; });
  EXPECT_DOUBLE_EQ(d(0), 18.0);
  for (int i = 1; i < 8; ++i) {
    if (i != 7) {
      EXPECT_EQ(d(i), 0.0) << i;
    }
  }
  EXPECT_DOUBLE_EQ(d(7), 18.0);
}

TEST(PlantDerivative, PathKinematicsMatchGlobalMotion)
{
  // On a straight path along x, e_y = y and e_phi = phi.
  const VehicleParams p;
  PlantState s;
  s.body = {3.0, 0.4, 0.05, 0.2, 15.0, 0.03};
  s.e_phi = 0.05;
  s.e_y = 0.4;
  s.s_d = 3.0;
  const auto d = plant_derivative(s, 0.01, p, 0.55, [](double) { return 0.0; });
  EXPECT_NEAR(d(6), d(1), 1e-12);
  EXPECT_NEAR(d(5), d(2), 1e-12);
  EXPECT_NEAR(d(7), d(0), 1e-12);
}

TEST(PlantDerivative, SingularFrameThrows)
{
  const VehicleParams p;
  PlantState s;
  s.body.x_dot = 10.0;
  s.e_y = 2.0;
  EXPECT_THROW(plant_derivative(s, 0.0, p, 0.55, [](double) { return 0.5; }), FrameError);
}

TEST(SteadyCornering, IsAnEquilibriumOfThePlant)
{
  const VehicleParams p;
  for (double kappa : {0.0025, -0.004, 0.006}) {
    for (double mu : {0.35, 0.55, 0.9}) {
      const auto ss = steady_state_cornering(p, mu, 18.0, kappa);
      PlantState s;
      s.body.x_dot = 18.0;
      s.body.y_dot = ss.y_dot;
      s.body.phi_dot = ss.phi_dot;
      s.e_phi = ss.e_phi;
      const auto d = plant_derivative(s, ss.steering, p, mu, [&](double) { return kappa; });
      EXPECT_NEAR(d(3), 0.0, 1e-9) << kappa << " " << mu;
      EXPECT_NEAR(d(4), 0.0, 1e-9);
      EXPECT_NEAR(d(5), 0.0, 1e-9);
      EXPECT_NEAR(d(6), 0.0, 1e-9);
    }
  }
}

TEST(SteadyCornering, RejectsCurvesBeyondGrip)
{
  EXPECT_THROW(steady_state_cornering(VehicleParams{}, 0.35, 18.0, 0.05), Error);
}

TEST(Measure, ReportsCpLateralVelocity)
{
  const VehicleParams p;
  PlantState s;
  s.body = {0, 0, 0, 0.3, 18.0, 0.2};
  s.e_y = 1.0;
  const auto m = measure(s, p);
  EXPECT_DOUBLE_EQ(m.y_dot_p, 0.3 + p.cp_distance() * 0.2);
  EXPECT_EQ(m.e_y, 1.0);
  EXPECT_EQ(ErrorState::from_vector(m.to_vector()).y_dot_p, m.y_dot_p);
}

}  // namespace
}  // namespace rmpc::vehicle
