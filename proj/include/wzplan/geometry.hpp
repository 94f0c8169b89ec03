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

#ifndef WZPLAN_GEOMETRY_HPP_
#define WZPLAN_GEOMETRY_HPP_

#include <Eigen/Core>

#include <cmath>
#include <optional>

namespace wzplan::geometry
{

/// Pixel-space axis-aligned box (x, y = top-left corner).
struct PixelBox
{
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;

  Eigen::Vector2d center() const { return {x + w / 2.0, y + h / 2.0}; }
};

/// Flat-scale camera model: pixel coordinates map to a meter-based plane
/// centered at the ego vehicle via a single pixels-per-meter factor.
struct EgoConfig
{
  double image_width = 960.0;
  double image_height = 540.0;
  Eigen::Vector2d center = {480.0, 270.0};  // (c_x, c_y)
  double ppm = 20.0;                        // pixels per meter
  double alpha = M_PI / 4.0;                // direction threshold, radians
  double lane_half_width = 1.75;            // meters

  static EgoConfig with_image_size(double width, double height)
  {
    EgoConfig cfg;
    cfg.image_width = width;
    cfg.image_height = height;
    cfg.center = {width / 2.0, height / 2.0};
    return cfg;
  }

  bool valid() const
  {
    return image_width > 0 && image_height > 0 && ppm > 0 && alpha > 0 &&
           alpha < M_PI / 2.0 && lane_half_width > 0;
  }
};

/// Point on the ego plane: x lateral (right-positive), y forward, meters.
/// The ego vehicle sits at (0, 0).
using EgoPoint = Eigen::Vector2d;

/// Position plus orientation on the ego plane. The ego vehicle has psi = 0.
struct Pose
{
  EgoPoint position = {0.0, 0.0};
  double psi = 0.0;  // radians, in (-pi, pi]
};

enum class DirRelation { inFrontOf, toLeftOf, toRightOf };

enum class ProxRelation { near_collision, super_near, very_near, near_, visible };

enum class LaneId { LeftLane, MiddleLane, RightLane };

/// Maps a pixel bounding box center onto the ego plane.
/// Throws invalid_input on degenerate boxes (w <= 0 or h <= 0).
EgoPoint pixel_to_ego(const PixelBox & bbox, const EgoConfig & cfg);

/// Inverse of pixel_to_ego: ego-plane point back to pixel coordinates.
Eigen::Vector2d ego_to_pixel(const EgoPoint & point, const EgoConfig & cfg);

/// Normalizes an angle to (-pi, pi]. Throws invalid_input on non-finite input.
double wrap_angle(double theta);

/// Polar angle of (dst - src.position) minus the source orientation,
/// wrapped to (-pi, pi]. Throws degenerate_geometry on coincident points.
double relative_angle(const Pose & src, const EgoPoint & dst);

/// Bearing of `dst` relative to the forward (+y) axis of `src`, left-positive.
/// Coincident points count as dead ahead (bearing 0).
double bearing_from_forward(const Pose & src, const EgoPoint & dst);

/// inFrontOf iff |theta| <= alpha; toLeftOf iff theta > alpha; toRightOf otherwise.
DirRelation classify_direction(double theta, double alpha);

/// Distance bins in meters: [0,4) near_collision, [4,7) super_near,
/// [7,10) very_near, [10,16) near, [16,25) visible, >= 25 no relation.
/// Throws invalid_input on negative distance.
std::optional<ProxRelation> classify_proximity(double distance);

/// LeftLane iff x < -L, MiddleLane iff |x| <= L, RightLane iff x > L.
LaneId assign_lane(double x, double lane_half_width);

const char * to_string(DirRelation r);
const char * to_string(ProxRelation r);
const char * to_string(LaneId lane);

}  // namespace wzplan::geometry

#endif  // WZPLAN_GEOMETRY_HPP_
