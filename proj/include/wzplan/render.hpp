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

#ifndef WZPLAN_RENDER_HPP_
#define WZPLAN_RENDER_HPP_

#include "wzplan/planner.hpp"
#include "wzplan/trajectory.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

namespace wzplan::render
{

using Color = std::array<std::uint8_t, 3>;

inline constexpr Color kFailureColor = {220, 40, 40};   // red
inline constexpr Color kGroundTruthColor = {40, 200, 40};  // green
inline constexpr Color kPlannedColor = {60, 90, 230};   // blue
inline constexpr Color kBoxColor = {240, 160, 40};      // orange

struct Image
{
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;  // row-major, 3 bytes per pixel

  void set(int x, int y, const Color & c);
};

struct Overlay
{
  planner::Polyline line;
  Color color;
};

/// Mask rendered as light (drivable) / dark (blocked) gray, work-zone
/// boxes outlined, polylines drawn with dots at the sample points.
Image render_scene(
  const planner::RoadMask & mask, const std::vector<planner::WorkzoneBox> & workzone,
  const std::vector<Overlay> & overlays);

/// Binary PPM (P6); deterministic bytes.
void save_ppm(const Image & image, const std::filesystem::path & path);

}  // namespace wzplan::render

#endif  // WZPLAN_RENDER_HPP_
