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

#include <Eigen/Core>

#include <stdexcept>
#include <string>

namespace rmpc
{

constexpr int kNumStates = 5;
constexpr int kNumStabStates = 4;
constexpr double kGravity = 9.81;

using StateVector = Eigen::Matrix<double, kNumStates, 1>;
using StateMatrix = Eigen::Matrix<double, kNumStates, kNumStates>;
using GainRow = Eigen::Matrix<double, 1, kNumStates>;
using StabMatrix = Eigen::Matrix<double, kNumStabStates, kNumStabStates>;
using StabVector = Eigen::Matrix<double, kNumStabStates, 1>;

// Index of each coordinate in the error-state vector
// X = [lateral velocity at CP, yaw rate, heading error, lateral error, path distance].
enum StateIndex : int {
  kLatVelCp = 0,
  kYawRate = 1,
  kHeadingError = 2,
  kLateralError = 3,
  kPathDistance = 4,
};

/// Base class for all recoverable errors raised by the library.
class Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// Raised when a configuration or argument violates a documented precondition.
class InvalidArgument : public Error
{
public:
  using Error::Error;
};

/// Raised when a path-frame transformation is singular or ambiguous.
class FrameError : public Error
{
public:
  using Error::Error;
};

/// Serial reference loops or OpenMP data-parallel loops. Both produce
/// bit-identical results; the serial path is kept as the testing reference.
enum class ExecutionPolicy { kSerial, kParallel };

}  // namespace rmpc
