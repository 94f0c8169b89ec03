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

#ifndef WZPLAN_MASK_HPP_
#define WZPLAN_MASK_HPP_

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>

namespace wzplan::planner
{

/// Binary drivable-space raster. grid(y, x) != 0 means the cell belongs to
/// the drivable set.
struct RoadMask
{
  int width = 0;
  int height = 0;
  Eigen::Array<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic> grid;  // height x width

  bool inside(int x, int y) const { return x >= 0 && x < width && y >= 0 && y < height; }
  bool drivable(int x, int y) const { return inside(x, y) && grid(y, x) != 0; }
  Eigen::Index drivable_count() const { return (grid != 0).count(); }
};

RoadMask make_mask(int width, int height, bool drivable);

/// Per-cell Euclidean distance (pixels) to the nearest drivable cell;
/// zero exactly on drivable cells, +inf when the mask is empty.
struct DistanceField
{
  int width = 0;
  int height = 0;
  Eigen::ArrayXXd grid;  // height x width

  /// Field value at a continuous point: nearest cell, clamped to bounds.
  double at(double x, double y) const;
};

/// Exact Euclidean distance transform (two-pass parabolic lower envelope
/// over squared distances; exact on integer grids).
DistanceField distance_transform(const RoadMask & mask);

/// Portable graymap I/O. Written as binary P5 with 0 = blocked and
/// 255 = drivable; loading accepts P2/P5 and treats values >= 128 as
/// drivable.
void save_pgm(const RoadMask & mask, const std::filesystem::path & path);
RoadMask load_pgm(const std::filesystem::path & path);

}  // namespace wzplan::planner

#endif  // WZPLAN_MASK_HPP_
