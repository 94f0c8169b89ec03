// Copyright 2026 The wzplan Authors
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

#ifndef WZPLAN_TRAJECTORY_HPP_
#define WZPLAN_TRAJECTORY_HPP_

#include <Eigen/Core>

#include <vector>

namespace wzplan::planner
{

constexpr int kTrajectoryPoints = 20;

using Polyline = std::vector<Eigen::Vector2d>;

/// Image-space trajectory of exactly kTrajectoryPoints points ordered
/// start -> destination; first point equals start, last equals destination.
struct Trajectory
{
  Polyline points;

  const Eigen::Vector2d & start() const { return points.front(); }
  const Eigen::Vector2d & destination() const { return points.back(); }
};

double polyline_length(const Polyline & line);

/// Arc-length resampling to exactly n points; the original endpoints are
/// preserved bit-exactly. A zero-length input yields n copies of the point.
/// Throws invalid_input for empty input or n < 2.
Polyline resample_polyline(const Polyline & line, int n);

/// Resamples to kTrajectoryPoints and wraps. Throws invalid_input on empty
/// input.
Trajectory make_trajectory(const Polyline & path);

}  // namespace wzplan::planner

#endif  // WZPLAN_TRAJECTORY_HPP_
