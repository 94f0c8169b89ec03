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

#ifndef WZPLAN_PLANNER_HPP_
#define WZPLAN_PLANNER_HPP_

#include "wzplan/casedb.hpp"
#include "wzplan/geometry.hpp"
#include "wzplan/mask.hpp"
#include "wzplan/trajectory.hpp"

#include <Eigen/Core>

#include <optional>
#include <string>
#include <vector>

namespace wzplan::planner
{

struct WorkzoneBox
{
  geometry::PixelBox bbox;
  double depth = 0.0;  // meters
};

struct PlannerThresholds
{
  double tau_road = 10.0;  // drivability bound, pixels
  double tau = 100.0;      // destination bound, pixels
};

/// Per-attempt verification outcome plus the numbers behind it; the text
/// form feeds the retry prompt.
struct VerificationFeedback
{
  casedb::CheckResult drivability;
  std::optional<casedb::CheckResult> destination;  // absent in online mode
  int attempt = 0;
  std::string note;        // set when planning itself failed
  std::string render_ref;  // optional comparison image path

  bool pass() const;
};

std::string feedback_text(const VerificationFeedback & feedback);

/// Everything the planner needs to know about one scene.
struct SceneContext
{
  RoadMask base_mask;
  std::vector<WorkzoneBox> workzone;
  Eigen::Vector2d start{0.0, 0.0};
  std::optional<double> lane_center_col;
};

struct MitigationOutcome
{
  Trajectory trajectory;
  std::vector<VerificationFeedback> history;
  bool verified = false;
};

/// Removes the inflated work-zone boxes from the drivable set and, when a
/// detour side is set, blocks the opposite side of each work-zone cluster
/// over its vertical extent. Boxes within `cluster_gap_px` horizontally are
/// treated as one cluster. Throws no_drivable_space when nothing remains.
RoadMask segment_drivable_mask(
  const RoadMask & mask, const std::vector<WorkzoneBox> & workzone,
  const casedb::ConstraintSet & constraints, const casedb::MitigationConfig & mitigation = {});

/// Picks a drivable destination cell for the constraint set. `attempt`
/// deterministically walks the ranked candidate list on retries. Throws
/// infeasible_destination when no cell satisfies the constraints.
Eigen::Vector2d plan_destination(
  const RoadMask & segmented, const std::vector<WorkzoneBox> & workzone,
  const casedb::ConstraintSet & constraints, const Eigen::Vector2d & start,
  std::optional<double> lane_center_col, const geometry::EgoConfig & cfg,
  const casedb::MitigationConfig & mitigation = {}, int attempt = 0);

/// Obstacle-aware 8-connected shortest path, line-of-sight shortcutting,
/// mask-constrained midpoint smoothing, then arc-length resampling to
/// exactly kTrajectoryPoints. Every output point lies on a drivable cell.
/// Throws no_path when start and destination are disconnected.
Trajectory smooth_trajectory(
  const Eigen::Vector2d & start, const Eigen::Vector2d & destination, const RoadMask & mask,
  const std::vector<WorkzoneBox> & workzone, const casedb::MitigationConfig & mitigation = {});

/// Drivability check D(pred) <= tau_road plus, when a ground-truth
/// destination is supplied, the pixel-distance check d_pix <= tau.
VerificationFeedback verify(
  const Eigen::Vector2d & pred_dest, const std::optional<Eigen::Vector2d> & gt_dest,
  const DistanceField & field, double tau_road, double tau);

/// Full mitigation loop: segment -> plan destination -> smooth -> verify,
/// retrying with deterministic destination perturbation until the checks
/// pass or max_iter is reached. The outcome carries the full feedback
/// history; `verified` is false when the loop was exhausted.
MitigationOutcome mitigate_with_retry(
  const SceneContext & scene, const casedb::ConstraintSet & constraints,
  const casedb::MitigationConfig & mitigation, const std::optional<Eigen::Vector2d> & gt_dest,
  const geometry::EgoConfig & cfg, const PlannerThresholds & thresholds, int max_iter);

}  // namespace wzplan::planner

#endif  // WZPLAN_PLANNER_HPP_
