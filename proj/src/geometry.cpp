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

#include "wzplan/geometry.hpp"

#include "wzplan/errors.hpp"

#include <cmath>

namespace wzplan::geometry
{

EgoPoint pixel_to_ego(const PixelBox & bbox, const EgoConfig & cfg)
{
  if (!(bbox.w > 0.0) || !(bbox.h > 0.0)) {
    throw Error(ErrorKind::invalid_input, "pixel_to_ego: degenerate bbox (w, h must be > 0)");
  }
  if (!cfg.valid()) {
    throw Error(ErrorKind::invalid_input, "pixel_to_ego: invalid ego config");
  }
  const Eigen::Vector2d c = bbox.center();
  return {(c.x() - cfg.center.x()) / cfg.ppm, (cfg.center.y() - c.y()) / cfg.ppm};
}

Eigen::Vector2d ego_to_pixel(const EgoPoint & point, const EgoConfig & cfg)
{
  return {cfg.center.x() + point.x() * cfg.ppm, cfg.center.y() - point.y() * cfg.ppm};
}

double wrap_angle(double theta)
{
  if (!std::isfinite(theta)) {
    throw Error(ErrorKind::invalid_input, "wrap_angle: non-finite angle");
  }
  double t = std::fmod(theta + M_PI, 2.0 * M_PI);
  if (t <= 0.0) {
    t += 2.0 * M_PI;
  }
  return t - M_PI;
}

double relative_angle(const Pose & src, const EgoPoint & dst)
{
  const Eigen::Vector2d delta = dst - src.position;
  if (delta.x() == 0.0 && delta.y() == 0.0) {
    throw Error(ErrorKind::degenerate_geometry, "relative_angle: coincident points");
  }
  return wrap_angle(std::atan2(delta.y(), delta.x()) - src.psi);
}

double bearing_from_forward(const Pose & src, const EgoPoint & dst)
{
  const Eigen::Vector2d delta = dst - src.position;
  if (delta.x() == 0.0 && delta.y() == 0.0) {
    return 0.0;
  }
  // Forward (+y) sits at polar angle pi/2; re-reference so that ahead = 0
  // and angles grow counterclockwise (toward the left).
  return wrap_angle(std::atan2(delta.y(), delta.x()) - src.psi - M_PI / 2.0);
}

DirRelation classify_direction(double theta, double alpha)
{
  if (std::abs(theta) <= alpha) {
    return DirRelation::inFrontOf;
  }
  return theta > alpha ? DirRelation::toLeftOf : DirRelation::toRightOf;
}

std::optional<ProxRelation> classify_proximity(double distance)
{
  if (distance < 0.0 || !std::isfinite(distance)) {
    throw Error(ErrorKind::invalid_input, "classify_proximity: distance must be finite and >= 0");
  }
  if (distance < 4.0) return ProxRelation::near_collision;
  if (distance < 7.0) return ProxRelation::super_near;
  if (distance < 10.0) return ProxRelation::very_near;
  if (distance < 16.0) return ProxRelation::near_;
  if (distance < 25.0) return ProxRelation::visible;
  return std::nullopt;
}

LaneId assign_lane(double x, double lane_half_width)
{
  if (x < -lane_half_width) return LaneId::LeftLane;
  if (x > lane_half_width) return LaneId::RightLane;
  return LaneId::MiddleLane;
}

const char * to_string(DirRelation r)
{
  switch (r) {
    case DirRelation::inFrontOf: return "inFrontOf";
    case DirRelation::toLeftOf:  return "toLeftOf";
    case DirRelation::toRightOf: return "toRightOf";
  }
  return "?";
}

const char * to_string(ProxRelation r)
{
  switch (r) {
    case ProxRelation::near_collision: return "near_collision";
    case ProxRelation::super_near:     return "super_near";
    case ProxRelation::very_near:      return "very_near";
    case ProxRelation::near_:          return "near";
    case ProxRelation::visible:        return "visible";
  }
  return "?";
}

const char * to_string(LaneId lane)
{
  switch (lane) {
    case LaneId::LeftLane:   return "LeftLane";
    case LaneId::MiddleLane: return "MiddleLane";
    case LaneId::RightLane:  return "RightLane";
  }
  return "?";
}

}  // namespace wzplan::geometry
