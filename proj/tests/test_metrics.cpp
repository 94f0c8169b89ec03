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

#include "wzplan/metrics.hpp"

#include "support/oracles.hpp"
#include "wzplan/errors.hpp"

#include <doctest.h>

#include <random>

using namespace wzplan;
using namespace wzplan::metrics;
using planner::Polyline;

namespace
{

Polyline straight_line(const Eigen::Vector2d & a, const Eigen::Vector2d & b, int n)
{
  return planner::resample_polyline({a, b}, n);
}

Polyline shifted(const Polyline & line, const Eigen::Vector2d & delta)
{
  Polyline out = line;
  for (auto & p : out) {
    p += delta;
  }
  return out;
}

}  // namespace

TEST_CASE("ade and fde of identical trajectories are zero")
{
  const Polyline gt = straight_line({0, 0}, {100, 50}, 20);
  CHECK(ade(gt, gt) == 0.0);
  CHECK(fde(gt, gt) == 0.0);
}

TEST_CASE("constant offset (3,4) gives ade and fde of 5")
{
  const Polyline gt = straight_line({0, 0}, {100, 50}, 20);
  const Polyline pred = shifted(gt, {3, 4});
  CHECK(ade(pred, gt) == doctest::Approx(5.0).epsilon(1e-12));
  CHECK(fde(pred, gt) == doctest::Approx(5.0).epsilon(1e-12));
}

TEST_CASE("offset on the final point only")
{
  const Polyline gt = straight_line({0, 0}, {100, 0}, 20);
  Polyline pred = gt;
  pred.back() += Eigen::Vector2d{0, 20};
  CHECK(ade(pred, gt) == doctest::Approx(1.0).epsilon(1e-12));  // 20 / 20
  CHECK(fde(pred, gt) == doctest::Approx(20.0));

  Polyline mid = gt;
  mid[10] += Eigen::Vector2d{0, 7};
  CHECK(fde(mid, gt) == 0.0);  // intermediate points do not matter
}

TEST_CASE("ground truth of a different length is resampled")
{
  const Polyline pred = straight_line({0, 0}, {100, 0}, 20);
  const Polyline gt = straight_line({0, 0}, {100, 0}, 7);
  CHECK(ade(pred, gt) == doctest::Approx(0.0).epsilon(1e-9));
  CHECK_THROWS_AS(ade(pred, {}), Error);
  CHECK_THROWS_AS(fde({}, pred), Error);
}

TEST_CASE("displacement errors are translation-invariant")
{
  std::mt19937_64 rng(211);
  const Polyline gt = straight_line({5, 5}, {200, 90}, 20);
  Polyline pred = gt;
  for (auto & p : pred) {
    p += Eigen::Vector2d{test_support::uniform(rng, -9, 9), test_support::uniform(rng, -9, 9)};
  }
  const Eigen::Vector2d delta{42.0, -17.0};
  CHECK(ade(pred, gt) == doctest::Approx(ade(shifted(pred, delta), shifted(gt, delta))));
  CHECK(fde(pred, gt) == doctest::Approx(fde(shifted(pred, delta), shifted(gt, delta))));
}

TEST_CASE("collision uses the strict interior of inflated boxes")
{
  const std::vector<geometry::PixelBox> obstacles = {{10, 10, 20, 20}};
  const double margin = 5.0;

  CHECK_FALSE(collision(straight_line({0, 0}, {0, 100}, 20), obstacles, margin));
  CHECK(collision({{20, 20}}, obstacles, margin));          // obstacle center
  CHECK_FALSE(collision({{5, 20}}, obstacles, margin));     // exactly on the inflated edge
  CHECK(collision({{5.001, 20}}, obstacles, margin));       // just inside
  CHECK_FALSE(collision({{100, 100}}, {}, margin));         // no obstacles
}

TEST_CASE("cr is the mean of the collision indicators")
{
  CHECK(cr({false, false, false, false}) == 0.0);
  CHECK(cr({true, false, false, false}) == doctest::Approx(0.25));
  CHECK(cr({true, true, true}) == 1.0);
  CHECK_THROWS_AS(cr({}), Error);
}

TEST_CASE("case failure rule is a strict conjunction")
{
  CHECK(classify_case_failure(51, 101));
  CHECK_FALSE(classify_case_failure(51, 100));
  CHECK_FALSE(classify_case_failure(50, 101));
  CHECK_FALSE(classify_case_failure(0, 0));

  // monotone: raising either error never un-fails a case
  std::mt19937_64 rng(223);
  for (int i = 0; i < 200; ++i) {
    const double a = test_support::uniform(rng, 0, 120);
    const double f = test_support::uniform(rng, 0, 240);
    if (classify_case_failure(a, f)) {
      CHECK(classify_case_failure(a + test_support::uniform(rng, 0, 50), f));
      CHECK(classify_case_failure(a, f + test_support::uniform(rng, 0, 50)));
    }
  }
}

TEST_CASE("scenario failure needs strictly more than half")
{
  CHECK(classify_scenario_failure({true, true, true, false, false}));
  CHECK_FALSE(classify_scenario_failure({true, true, false, false}));  // exactly 50%
  CHECK_FALSE(classify_scenario_failure({false}));
  CHECK_THROWS_AS(classify_scenario_failure({}), Error);
}

TEST_CASE("evaluate aggregates per pattern and per sequence")
{
  const Polyline gt = straight_line({0, 0}, {0, 200}, 20);
  std::vector<EvalCase> cases;
  // two P1 cases in one sequence: one clean, one failing
  cases.push_back({"c1", "P1", "s1", gt, gt, {}});
  cases.push_back({"c2", "P1", "s1", shifted(gt, {60, 90}), gt, {}});
  cases.push_back({"c3", "P2", "s2", shifted(gt, {120, 0}), gt, {}});
  cases.push_back({"c4", "P2", "s2", shifted(gt, {120, 0}), gt, {}});

  const MetricsReport report = evaluate(cases, 5.0);
  CHECK(report.overall.count == 4);
  CHECK(report.by_pattern.at("P1").count == 2);
  CHECK(report.by_pattern.at("P1").ade == doctest::Approx((0.0 + std::hypot(60, 90)) / 2));
  CHECK(report.cases[1].failure);  // ade ~108 > 50, fde ~108 > 100
  CHECK_FALSE(report.cases[0].failure);
  // s1: 1 of 2 failed (not > 50%); s2: both fail (ade 120 > 50, fde 120 > 100)
  CHECK_FALSE(report.scenario_failure_by_sequence.at("s1"));
  CHECK(report.scenario_failure_by_sequence.at("s2"));

  const std::string table = report_to_table(report);
  CHECK(table.find("case_id") != std::string::npos);
  CHECK(table.find("P2") != std::string::npos);
  CHECK(table.find("overall") != std::string::npos);
}
