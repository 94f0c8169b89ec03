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

#include "wzplan/trajectory.hpp"

#include "wzplan/errors.hpp"

#include <cmath>

namespace wzplan::planner
{

double polyline_length(const Polyline & line)
{
  double total = 0.0;
  for (std::size_t i = 1; i < line.size(); ++i) {
    total += (line[i] - line[i - 1]).norm();
  }
  return total;
}

Polyline resample_polyline(const Polyline & line, int n)
{
  if (line.empty()) {
    throw Error(ErrorKind::invalid_input, "resample_polyline: empty polyline");
  }
  if (n < 2) {
    throw Error(ErrorKind::invalid_input, "resample_polyline: need n >= 2");
  }

  const double total = polyline_length(line);
  Polyline out;
  out.reserve(static_cast<std::size_t>(n));
  if (total == 0.0) {
    out.assign(static_cast<std::size_t>(n), line.front());
    return out;
  }

  std::vector<double> cum(line.size(), 0.0);
  for (std::size_t i = 1; i < line.size(); ++i) {
    cum[i] = cum[i - 1] + (line[i] - line[i - 1]).norm();
  }

  out.push_back(line.front());
  std::size_t seg = 0;
  for (int i = 1; i < n - 1; ++i) {
    const double target = total * static_cast<double>(i) / static_cast<double>(n - 1);
    while (seg + 1 < line.size() && cum[seg + 1] < target) {
      ++seg;
    }
    const double seg_len = cum[seg + 1] - cum[seg];
    const double t = seg_len > 0.0 ? (target - cum[seg]) / seg_len : 0.0;
    out.push_back(line[seg] + t * (line[seg + 1] - line[seg]));
  }
  out.push_back(line.back());
  return out;
}

Trajectory make_trajectory(const Polyline & path)
{
  Trajectory traj;
  traj.points = resample_polyline(path, kTrajectoryPoints);
  return traj;
}

}  // namespace wzplan::planner
