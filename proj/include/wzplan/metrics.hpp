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

#ifndef WZPLAN_METRICS_HPP_
#define WZPLAN_METRICS_HPP_

#include "wzplan/geometry.hpp"
#include "wzplan/trajectory.hpp"

#include <map>
#include <string>
#include <vector>

namespace wzplan::metrics
{

/// Mean Euclidean displacement over aligned points, in pixels. When the
/// lengths differ the ground truth is arc-length resampled to the
/// prediction's length. Throws invalid_input on empty inputs.
double ade(const planner::Polyline & pred, const planner::Polyline & gt);

/// Euclidean distance between the final points, in pixels.
double fde(const planner::Polyline & pred, const planner::Polyline & gt);

/// True iff any trajectory point lies strictly inside any obstacle box
/// inflated by `margin` (points on the inflated boundary do not collide).
bool collision(
  const planner::Polyline & trajectory, const std::vector<geometry::PixelBox> & obstacles,
  double margin);

/// Fraction of collided trajectories. Throws invalid_input on empty input.
double cr(const std::vector<bool> & collisions);

/// Case failure rule: ade > 50 px and fde > 100 px, both strict.
bool classify_case_failure(double ade_px, double fde_px);

/// Scenario failure rule: strictly more than half of its cases fail.
bool classify_scenario_failure(const std::vector<bool> & case_failures);

struct EvalCase
{
  std::string case_id;
  std::string pattern_tag;
  std::string sequence_id;
  planner::Polyline pred;
  planner::Polyline gt;
  std::vector<geometry::PixelBox> obstacles;
};

struct CaseMetrics
{
  std::string case_id;
  std::string pattern_tag;
  std::string sequence_id;
  double ade = 0.0;
  double fde = 0.0;
  bool collided = false;
  bool failure = false;
};

struct Aggregate
{
  int count = 0;
  double ade = 0.0;  // means
  double fde = 0.0;
  double cr = 0.0;
  int failures = 0;
};

struct MetricsReport
{
  std::vector<CaseMetrics> cases;
  std::map<std::string, Aggregate> by_pattern;
  std::map<std::string, bool> scenario_failure_by_sequence;
  Aggregate overall;
};

MetricsReport evaluate(const std::vector<EvalCase> & cases, double collision_margin = 5.0);

/// Tab-separated report: one row per case, aggregates per pattern, overall.
std::string report_to_table(const MetricsReport & report);
std::string report_to_json(const MetricsReport & report);

}  // namespace wzplan::metrics

#endif  // WZPLAN_METRICS_HPP_
