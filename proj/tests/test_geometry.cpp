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

#include "support/oracles.hpp"
#include "wzplan/errors.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace wzplan;
using namespace wzplan::geometry;

namespace
{

EgoConfig test_cfg()
{
  EgoConfig cfg = EgoConfig::with_image_size(960, 540);
  cfg.ppm = 20.0;
  return cfg;
}

}  // namespace

TEST_CASE("pixel_to_ego maps the image center to the origin")
{
  const EgoConfig cfg = test_cfg();
  const EgoPoint p = pixel_to_ego({470, 260, 20, 20}, cfg);  // centered at (480, 270)
  CHECK(p.x() == doctest::Approx(0.0));
  CHECK(p.y() == doctest::Approx(0.0));
}

TEST_CASE("pixel_to_ego hand-evaluated cases")
{
  const EgoConfig cfg = test_cfg();
  const EgoPoint a = pixel_to_ego({470, 250, 20, 20}, cfg);
  CHECK(a.x() == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(a.y() == doctest::Approx(0.5).epsilon(1e-12));

  const EgoPoint b = pixel_to_ego({520, 270, 40, 20}, cfg);
  CHECK(b.x() == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(b.y() == doctest::Approx(-0.5).epsilon(1e-12));
}

TEST_CASE("pixel_to_ego rejects degenerate boxes")
{
  const EgoConfig cfg = test_cfg();
  CHECK_THROWS_AS(pixel_to_ego({10, 10, 0, 5}, cfg), Error);
  CHECK_THROWS_AS(pixel_to_ego({10, 10, 5, -1}, cfg), Error);
}

TEST_CASE("pixel_to_ego round-trips through ego_to_pixel")
{
  const EgoConfig cfg = test_cfg();
  std::mt19937_64 rng(7);
  for (int i = 0; i < 200; ++i) {
    const double w = test_support::uniform(rng, 1.0, 100.0);
    const double h = test_support::uniform(rng, 1.0, 100.0);
    const PixelBox box{test_support::uniform(rng, 0.0, 860.0),
                       test_support::uniform(rng, 0.0, 440.0), w, h};
    const Eigen::Vector2d back = ego_to_pixel(pixel_to_ego(box, cfg), cfg);
    CHECK(std::abs(back.x() - box.center().x()) < 1e-9);
    CHECK(std::abs(back.y() - box.center().y()) < 1e-9);
  }
}

TEST_CASE("wrap_angle basics and boundary")
{
  CHECK(wrap_angle(0.0) == 0.0);
  CHECK(wrap_angle(3.0 * M_PI / 2.0) == doctest::Approx(-M_PI / 2.0));
  CHECK(wrap_angle(-M_PI) == doctest::Approx(M_PI));
  CHECK(wrap_angle(M_PI) == doctest::Approx(M_PI));
  CHECK_THROWS_AS(wrap_angle(std::numeric_limits<double>::infinity()), Error);
}

TEST_CASE("wrap_angle is idempotent and congruent mod 2pi")
{
  std::mt19937_64 rng(11);
  for (int i = 0; i < 500; ++i) {
    const double theta = test_support::uniform(rng, -50.0, 50.0);
    const double w = wrap_angle(theta);
    CHECK(w > -M_PI);
    CHECK(w <= M_PI);
    CHECK(wrap_angle(w) == doctest::Approx(w));
    CHECK(std::abs(std::remainder(w - theta, 2.0 * M_PI)) < 1e-9);
  }
}

TEST_CASE("relative_angle hand cases")
{
  const Pose origin{};
  CHECK(relative_angle(origin, {0.0, 5.0}) == doctest::Approx(M_PI / 2.0));

  Pose rotated;
  rotated.psi = M_PI / 2.0;
  CHECK(relative_angle(rotated, {0.0, 5.0}) == doctest::Approx(0.0));

  CHECK_THROWS_AS(relative_angle(origin, {0.0, 0.0}), Error);
}

TEST_CASE("relative_angle is rotationally equivariant")
{
  std::mt19937_64 rng(13);
  for (int i = 0; i < 200; ++i) {
    const Pose src{{test_support::uniform(rng, -5, 5), test_support::uniform(rng, -5, 5)},
                   wrap_angle(test_support::uniform(rng, -3, 3))};
    const double r = test_support::uniform(rng, 0.5, 10.0);
    const double phi = test_support::uniform(rng, -3.0, 3.0);
    const double delta = test_support::uniform(rng, -3.0, 3.0);
    const EgoPoint a = src.position + r * Eigen::Vector2d{std::cos(phi), std::sin(phi)};
    const EgoPoint b =
      src.position + r * Eigen::Vector2d{std::cos(phi + delta), std::sin(phi + delta)};
    const double diff = wrap_angle(relative_angle(src, b) - relative_angle(src, a));
    CHECK(diff == doctest::Approx(wrap_angle(delta)).epsilon(1e-9));
  }
}

TEST_CASE("bearing_from_forward treats the image center as dead ahead")
{
  const Pose ego{};
  CHECK(bearing_from_forward(ego, {0.0, 0.0}) == 0.0);
  CHECK(bearing_from_forward(ego, {0.0, 5.0}) == doctest::Approx(0.0));
  CHECK(bearing_from_forward(ego, {-5.0, 0.0}) == doctest::Approx(M_PI / 2.0));
  CHECK(bearing_from_forward(ego, {5.0, 0.0}) == doctest::Approx(-M_PI / 2.0));
}

TEST_CASE("classify_direction rule and boundaries")
{
  const double alpha = M_PI / 4.0;
  CHECK(classify_direction(0.0, alpha) == DirRelation::inFrontOf);
  CHECK(classify_direction(M_PI / 2.0, alpha) == DirRelation::toLeftOf);
  CHECK(classify_direction(-M_PI / 3.0, alpha) == DirRelation::toRightOf);
  // closed boundary: exactly alpha is still in front
  CHECK(classify_direction(alpha, alpha) == DirRelation::inFrontOf);
  CHECK(classify_direction(-alpha, alpha) == DirRelation::inFrontOf);
  CHECK(classify_direction(std::nextafter(alpha, 4.0), alpha) == DirRelation::toLeftOf);
}

TEST_CASE("classify_direction partitions the circle")
{
  std::mt19937_64 rng(17);
  for (int i = 0; i < 500; ++i) {
    const double alpha = test_support::uniform(rng, 1e-3, M_PI / 2.0 - 1e-3);
    const double theta = wrap_angle(test_support::uniform(rng, -10.0, 10.0));
    int hits = 0;
    if (std::abs(theta) <= alpha) ++hits;
    if (theta > alpha) ++hits;
    if (theta < -alpha) ++hits;
    CHECK(hits == 1);
  }
}

TEST_CASE("classify_proximity bins")
{
  CHECK(classify_proximity(3.9) == ProxRelation::near_collision);
  CHECK(classify_proximity(4.0) == ProxRelation::super_near);
  CHECK(classify_proximity(7.0) == ProxRelation::very_near);
  CHECK(classify_proximity(10.0) == ProxRelation::near_);
  CHECK(classify_proximity(16.0) == ProxRelation::visible);
  CHECK(classify_proximity(24.999) == ProxRelation::visible);
  CHECK_FALSE(classify_proximity(25.0).has_value());
  CHECK_FALSE(classify_proximity(100.0).has_value());
  CHECK_THROWS_AS(classify_proximity(-0.1), Error);
}

TEST_CASE("classify_proximity partitions [0, 25)")
{
  std::mt19937_64 rng(19);
  for (int i = 0; i < 1000; ++i) {
    const double d = test_support::uniform(rng, 0.0, 25.0);
    CHECK(classify_proximity(d).has_value());
  }
}

TEST_CASE("assign_lane rule, boundaries and monotonicity")
{
  const double L = 1.75;
  CHECK(assign_lane(0.0, L) == LaneId::MiddleLane);
  CHECK(assign_lane(-2.0, L) == LaneId::LeftLane);
  CHECK(assign_lane(1.75, L) == LaneId::MiddleLane);   // closed boundary
  CHECK(assign_lane(-1.75, L) == LaneId::MiddleLane);  // closed boundary
  CHECK(assign_lane(1.7501, L) == LaneId::RightLane);

  std::mt19937_64 rng(23);
  for (int i = 0; i < 300; ++i) {
    const double a = test_support::uniform(rng, -10.0, 10.0);
    const double b = test_support::uniform(rng, -10.0, 10.0);
    const auto lane_lo = assign_lane(std::min(a, b), L);
    const auto lane_hi = assign_lane(std::max(a, b), L);
    CHECK(static_cast<int>(lane_lo) <= static_cast<int>(lane_hi));
  }
}
