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

#include "wzplan/planner.hpp"

#include "wzplan/errors.hpp"
#include "wzplan/util.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <sstream>
#include <tuple>

namespace wzplan::planner
{

namespace
{

struct CellBox
{
  int x0, x1, y0, y1;  // inclusive cell range
};

CellBox inflate_box(const geometry::PixelBox & box, double margin)
{
  return {
    static_cast<int>(std::floor(box.x - margin)),
    static_cast<int>(std::ceil(box.x + box.w + margin)),
    static_cast<int>(std::floor(box.y - margin)),
    static_cast<int>(std::ceil(box.y + box.h + margin)),
  };
}

void clear_region(RoadMask & mask, const CellBox & box)
{
  const int x0 = std::max(box.x0, 0);
  const int x1 = std::min(box.x1, mask.width - 1);
  const int y0 = std::max(box.y0, 0);
  const int y1 = std::min(box.y1, mask.height - 1);
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      mask.grid(y, x) = 0;
    }
  }
}

/// Boxes overlapping horizontally (or closer than gap_px) merge into one
/// cluster; the vertical extent is the union.
std::vector<CellBox> workzone_clusters(
  const std::vector<WorkzoneBox> & workzone, double margin, double gap_px)
{
  std::vector<CellBox> boxes;
  boxes.reserve(workzone.size());
  for (const auto & wz : workzone) {
    boxes.push_back(inflate_box(wz.bbox, margin));
  }
  std::sort(boxes.begin(), boxes.end(), [](const CellBox & a, const CellBox & b) {
    return std::tie(a.x0, a.y0, a.x1, a.y1) < std::tie(b.x0, b.y0, b.x1, b.y1);
  });
  std::vector<CellBox> clusters;
  for (const CellBox & box : boxes) {
    if (!clusters.empty() &&
        static_cast<double>(box.x0) <= static_cast<double>(clusters.back().x1) + gap_px) {
      CellBox & last = clusters.back();
      last.x1 = std::max(last.x1, box.x1);
      last.y0 = std::min(last.y0, box.y0);
      last.y1 = std::max(last.y1, box.y1);
    } else {
      clusters.push_back(box);
    }
  }
  return clusters;
}

Eigen::Vector2i to_cell(const Eigen::Vector2d & p)
{
  return {static_cast<int>(std::lround(p.x())), static_cast<int>(std::lround(p.y()))};
}

}  // namespace

bool VerificationFeedback::pass() const
{
  if (!note.empty()) return false;
  if (!drivability.pass) return false;
  return !destination || destination->pass;
}

std::string feedback_text(const VerificationFeedback & feedback)
{
  std::ostringstream out;
  out << "attempt " << feedback.attempt << ": ";
  if (!feedback.note.empty()) {
    out << feedback.note;
    return out.str();
  }
  out << "drivability D(dest)=" << util::fmt_double(feedback.drivability.value)
      << (feedback.drivability.pass ? " within " : " exceeds ")
      << "tau_road=" << util::fmt_double(feedback.drivability.threshold);
  if (feedback.destination) {
    out << "; destination d_pix=" << util::fmt_double(feedback.destination->value)
        << (feedback.destination->pass ? " within " : " exceeds ")
        << "tau=" << util::fmt_double(feedback.destination->threshold);
  }
  return out.str();
}

RoadMask segment_drivable_mask(
  const RoadMask & mask, const std::vector<WorkzoneBox> & workzone,
  const casedb::ConstraintSet & constraints, const casedb::MitigationConfig & mitigation)
{
  if (mask.width <= 0 || mask.height <= 0) {
    throw Error(ErrorKind::invalid_input, "segment_drivable_mask: empty mask");
  }
  RoadMask out = mask;

  for (const auto & wz : workzone) {
    clear_region(out, inflate_box(wz.bbox, mitigation.inflate_margin_px));
  }

  if (constraints.detour_side != casedb::DetourSide::none) {
    const auto clusters =
      workzone_clusters(workzone, mitigation.inflate_margin_px, mitigation.cluster_gap_px);
    for (const CellBox & cluster : clusters) {
      CellBox blocked = cluster;
      if (constraints.detour_side == casedb::DetourSide::left) {
        blocked.x1 = mask.width - 1;  // everything right of the cluster's left edge
      } else {
        blocked.x0 = 0;  // everything left of the cluster's right edge
      }
      clear_region(out, blocked);
    }
  }

  if (out.drivable_count() == 0) {
    throw Error(
      ErrorKind::no_drivable_space,
      "segment_drivable_mask: constraints removed every drivable cell");
  }
  return out;
}

namespace
{

struct Candidate
{
  Eigen::Vector2d point;
  double primary;    // lower is better
  double secondary;  // lower is better
  double tertiary;   // lower is better
};

void sort_candidates(std::vector<Candidate> & candidates)
{
  std::sort(candidates.begin(), candidates.end(), [](const Candidate & a, const Candidate & b) {
    return std::tie(a.primary, a.secondary, a.tertiary) <
           std::tie(b.primary, b.secondary, b.tertiary);
  });
}

/// Consecutive drivable runs of one row, as [x_begin, x_end] inclusive.
std::vector<std::pair<int, int>> row_runs(const RoadMask & mask, int y)
{
  std::vector<std::pair<int, int>> runs;
  int begin = -1;
  for (int x = 0; x < mask.width; ++x) {
    if (mask.grid(y, x) != 0) {
      if (begin < 0) begin = x;
    } else if (begin >= 0) {
      runs.emplace_back(begin, x - 1);
      begin = -1;
    }
  }
  if (begin >= 0) {
    runs.emplace_back(begin, mask.width - 1);
  }
  return runs;
}

}  // namespace

Eigen::Vector2d plan_destination(
  const RoadMask & segmented, const std::vector<WorkzoneBox> & workzone,
  const casedb::ConstraintSet & constraints, const Eigen::Vector2d & start,
  std::optional<double> lane_center_col, const geometry::EgoConfig & cfg,
  const casedb::MitigationConfig & mitigation, int attempt)
{
  if (attempt < 0) {
    throw Error(ErrorKind::invalid_input, "plan_destination: negative attempt index");
  }
  const double start_x = start.x();
  const int start_y = static_cast<int>(std::lround(start.y()));
  const double lane_px = cfg.lane_half_width * cfg.ppm;

  // Forward rows only: in image space the road ahead is above the start.
  const int max_row = std::min(start_y, segmented.height - 1);

  int beyond_row = segmented.height;  // first row index strictly past the zone
  if (!workzone.empty()) {
    int top = std::numeric_limits<int>::max();
    for (const auto & wz : workzone) {
      top = std::min(top, inflate_box(wz.bbox, mitigation.inflate_margin_px).y0);
    }
    beyond_row = top;  // rows y < top are beyond the last box
  }

  std::vector<Candidate> candidates;

  if (constraints.turn_to_avoid_work_zone) {
    // Dead-end handling: head for the widest lateral opening.
    for (int y = 0; y <= max_row; ++y) {
      for (int x = 0; x < segmented.width; ++x) {
        if (segmented.grid(y, x) == 0) continue;
        const double lateral = std::abs(static_cast<double>(x) - start_x);
        candidates.push_back(
          {{static_cast<double>(x), static_cast<double>(y)}, -lateral, static_cast<double>(y),
           static_cast<double>(x)});
      }
    }
  } else if (constraints.return_to_original_lane_after_workzone && !workzone.empty()) {
    const int row_limit = std::min(beyond_row - 1, max_row);
    for (int y = 0; y <= row_limit; ++y) {
      for (int x = 0; x < segmented.width; ++x) {
        if (segmented.grid(y, x) == 0) continue;
        const double off = std::abs(static_cast<double>(x) - start_x);
        if (off > lane_px) continue;
        candidates.push_back(
          {{static_cast<double>(x), static_cast<double>(y)}, static_cast<double>(y), off,
           static_cast<double>(x)});
      }
    }
  } else if (constraints.return_center_line_after_crossing || constraints.follow_lane_center) {
    const bool beyond_only = constraints.return_center_line_after_crossing && !workzone.empty();
    const int row_limit = beyond_only ? std::min(beyond_row - 1, max_row) : max_row;
    const double target = lane_center_col.value_or(start_x);
    for (int y = 0; y <= row_limit; ++y) {
      for (const auto & [run_begin, run_end] : row_runs(segmented, y)) {
        double col;
        if (lane_center_col) {
          col = std::clamp(*lane_center_col, static_cast<double>(run_begin),
                           static_cast<double>(run_end));
          col = std::round(col);
        } else {
          col = std::floor((run_begin + run_end) / 2.0);  // run centerline
        }
        candidates.push_back(
          {{col, static_cast<double>(y)}, static_cast<double>(y), std::abs(col - target), col});
      }
    }
  } else {
    for (int y = 0; y <= max_row; ++y) {
      for (int x = 0; x < segmented.width; ++x) {
        if (segmented.grid(y, x) == 0) continue;
        candidates.push_back(
          {{static_cast<double>(x), static_cast<double>(y)}, static_cast<double>(y),
           std::abs(static_cast<double>(x) - start_x), static_cast<double>(x)});
      }
    }
  }

  if (candidates.empty()) {
    throw Error(
      ErrorKind::infeasible_destination,
      "plan_destination: no drivable cell satisfies the constraints");
  }
  sort_candidates(candidates);
  const std::size_t idx = std::min(static_cast<std::size_t>(attempt), candidates.size() - 1);
  return candidates[idx].point;
}

namespace
{

/// True when every sampled cell along the segment is drivable.
bool line_of_sight(const RoadMask & mask, const Eigen::Vector2d & a, const Eigen::Vector2d & b)
{
  const double len = (b - a).norm();
  const int steps = std::max(1, static_cast<int>(std::ceil(len / 0.5)));
  for (int i = 0; i <= steps; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(steps);
    const Eigen::Vector2i cell = to_cell(a + t * (b - a));
    if (!mask.drivable(cell.x(), cell.y())) {
      return false;
    }
  }
  return true;
}

Polyline shortest_path_cells(
  const RoadMask & mask, const Eigen::Vector2i & start, const Eigen::Vector2i & goal)
{
  if (!mask.drivable(start.x(), start.y())) {
    throw Error(ErrorKind::no_path, "smooth_trajectory: start cell is not drivable");
  }
  if (!mask.drivable(goal.x(), goal.y())) {
    throw Error(ErrorKind::no_path, "smooth_trajectory: destination cell is not drivable");
  }

  const int w = mask.width;
  const int h = mask.height;
  auto index = [w](int x, int y) { return y * w + x; };

  std::vector<double> g(static_cast<std::size_t>(w) * h,
                        std::numeric_limits<double>::infinity());
  std::vector<int> parent(static_cast<std::size_t>(w) * h, -1);

  using Entry = std::tuple<double, double, int>;  // f, g, cell index
  std::priority_queue<Entry, std::vector<Entry>, std::greater<Entry>> open;

  auto heuristic = [&goal](int x, int y) {
    return std::hypot(static_cast<double>(x - goal.x()), static_cast<double>(y - goal.y()));
  };

  const int start_idx = index(start.x(), start.y());
  const int goal_idx = index(goal.x(), goal.y());
  g[static_cast<std::size_t>(start_idx)] = 0.0;
  open.emplace(heuristic(start.x(), start.y()), 0.0, start_idx);

  static constexpr int dx[] = {1, -1, 0, 0, 1, 1, -1, -1};
  static constexpr int dy[] = {0, 0, 1, -1, 1, -1, 1, -1};
  const double kSqrt2 = std::sqrt(2.0);

  while (!open.empty()) {
    const auto [f, gc, idx] = open.top();
    open.pop();
    if (gc > g[static_cast<std::size_t>(idx)]) {
      continue;  // stale entry
    }
    if (idx == goal_idx) {
      break;
    }
    const int x = idx % w;
    const int y = idx / w;
    for (int k = 0; k < 8; ++k) {
      const int nx = x + dx[k];
      const int ny = y + dy[k];
      if (!mask.drivable(nx, ny)) {
        continue;
      }
      if (k >= 4 && (!mask.drivable(x + dx[k], y) || !mask.drivable(x, y + dy[k]))) {
        continue;  // no squeezing through blocked corners
      }
      const double cost = k < 4 ? 1.0 : kSqrt2;
      const double ng = gc + cost;
      const int nidx = index(nx, ny);
      if (ng < g[static_cast<std::size_t>(nidx)] - 1e-12) {
        g[static_cast<std::size_t>(nidx)] = ng;
        parent[static_cast<std::size_t>(nidx)] = idx;
        open.emplace(ng + heuristic(nx, ny), ng, nidx);
      }
    }
  }

  if (!std::isfinite(g[static_cast<std::size_t>(goal_idx)])) {
    throw Error(ErrorKind::no_path, "smooth_trajectory: start and destination are disconnected");
  }

  Polyline cells;
  for (int idx = goal_idx; idx != -1; idx = parent[static_cast<std::size_t>(idx)]) {
    cells.emplace_back(static_cast<double>(idx % w), static_cast<double>(idx / w));
    if (idx == start_idx) break;
  }
  std::reverse(cells.begin(), cells.end());
  return cells;
}

Polyline shortcut_path(const RoadMask & mask, const Polyline & path)
{
  if (path.size() <= 2) {
    return path;
  }
  Polyline out;
  out.push_back(path.front());
  std::size_t i = 0;
  while (i + 1 < path.size()) {
    std::size_t j = path.size() - 1;
    while (j > i + 1 && !line_of_sight(mask, path[i], path[j])) {
      --j;
    }
    out.push_back(path[j]);
    i = j;
  }
  return out;
}

void midpoint_smooth(const RoadMask & mask, Polyline & path, int passes)
{
  for (int pass = 0; pass < passes; ++pass) {
    bool moved = false;
    for (std::size_t i = 1; i + 1 < path.size(); ++i) {
      const Eigen::Vector2d candidate = 0.5 * (path[i - 1] + path[i + 1]);
      const Eigen::Vector2i cell = to_cell(candidate);
      if (!mask.drivable(cell.x(), cell.y())) {
        continue;
      }
      if (!line_of_sight(mask, path[i - 1], candidate) ||
          !line_of_sight(mask, candidate, path[i + 1])) {
        continue;
      }
      if ((candidate - path[i]).squaredNorm() > 1e-12) {
        path[i] = candidate;
        moved = true;
      }
    }
    if (!moved) {
      break;
    }
  }
}

/// Snaps any point whose cell fell off the drivable set to the nearest
/// drivable cell center (expanding square rings, nearest Euclidean first).
void snap_to_mask(const RoadMask & mask, Polyline & path)
{
  for (std::size_t i = 1; i + 1 < path.size(); ++i) {
    Eigen::Vector2i cell = to_cell(path[i]);
    if (mask.drivable(cell.x(), cell.y())) {
      continue;
    }
    double best = std::numeric_limits<double>::infinity();
    Eigen::Vector2i best_cell = cell;
    const int max_r = std::max(mask.width, mask.height);
    for (int r = 1; r <= max_r; ++r) {
      for (int dy = -r; dy <= r; ++dy) {
        for (int dx = -r; dx <= r; ++dx) {
          if (std::max(std::abs(dx), std::abs(dy)) != r) continue;
          const int nx = cell.x() + dx;
          const int ny = cell.y() + dy;
          if (!mask.drivable(nx, ny)) continue;
          const double d = std::hypot(static_cast<double>(dx), static_cast<double>(dy));
          if (d < best) {
            best = d;
            best_cell = {nx, ny};
          }
        }
      }
      // ring r+1 cannot beat a hit at distance <= r
      if (std::isfinite(best) && best <= static_cast<double>(r)) break;
    }
    if (std::isfinite(best)) {
      path[i] = {static_cast<double>(best_cell.x()), static_cast<double>(best_cell.y())};
    }
  }
}

}  // namespace

Trajectory smooth_trajectory(
  const Eigen::Vector2d & start, const Eigen::Vector2d & destination, const RoadMask & mask,
  const std::vector<WorkzoneBox> & workzone, const casedb::MitigationConfig & mitigation)
{
  (void)workzone;  // encoded in the segmented mask

  if ((destination - start).norm() == 0.0) {
    Trajectory traj;
    traj.points.assign(kTrajectoryPoints, start);
    return traj;
  }

  Polyline cells = shortest_path_cells(mask, to_cell(start), to_cell(destination));
  if (cells.size() == 1) {
    cells = {start, destination};  // same cell, different continuous points
  } else {
    // keep the exact continuous endpoints
    cells.front() = start;
    cells.back() = destination;
  }

  Polyline path = shortcut_path(mask, cells);
  midpoint_smooth(mask, path, mitigation.smoothing_passes);

  Trajectory traj = make_trajectory(path);
  snap_to_mask(mask, traj.points);
  return traj;
}

VerificationFeedback verify(
  const Eigen::Vector2d & pred_dest, const std::optional<Eigen::Vector2d> & gt_dest,
  const DistanceField & field, double tau_road, double tau)
{
  VerificationFeedback fb;
  const double d = field.at(pred_dest.x(), pred_dest.y());
  fb.drivability = {d <= tau_road, d, tau_road};
  if (gt_dest) {
    const double d_pix = (pred_dest - *gt_dest).norm();
    fb.destination = casedb::CheckResult{d_pix <= tau, d_pix, tau};
  }
  return fb;
}

MitigationOutcome mitigate_with_retry(
  const SceneContext & scene, const casedb::ConstraintSet & constraints,
  const casedb::MitigationConfig & mitigation, const std::optional<Eigen::Vector2d> & gt_dest,
  const geometry::EgoConfig & cfg, const PlannerThresholds & thresholds, int max_iter)
{
  if (max_iter < 1) {
    throw Error(ErrorKind::invalid_input, "mitigate_with_retry: max_iter must be >= 1");
  }

  MitigationOutcome out;
  bool have_trajectory = false;
  for (int attempt = 1; attempt <= max_iter; ++attempt) {
    try {
      const RoadMask segmented =
        segment_drivable_mask(scene.base_mask, scene.workzone, constraints, mitigation);
      const Eigen::Vector2d dest = plan_destination(
        segmented, scene.workzone, constraints, scene.start, scene.lane_center_col, cfg,
        mitigation, attempt - 1);
      const DistanceField field = distance_transform(segmented);
      const Trajectory traj =
        smooth_trajectory(scene.start, dest, segmented, scene.workzone, mitigation);

      VerificationFeedback fb = verify(dest, gt_dest, field, thresholds.tau_road, thresholds.tau);
      fb.attempt = attempt;
      out.trajectory = traj;
      have_trajectory = true;
      out.history.push_back(fb);
      if (fb.pass()) {
        out.verified = true;
        break;
      }
    } catch (const Error & e) {
      if (e.kind() == ErrorKind::no_drivable_space ||
          e.kind() == ErrorKind::infeasible_destination || e.kind() == ErrorKind::no_path) {
        VerificationFeedback fb;
        fb.attempt = attempt;
        fb.note = e.what();
        fb.drivability = {false, std::numeric_limits<double>::infinity(), thresholds.tau_road};
        out.history.push_back(fb);
        continue;
      }
      throw;
    }
  }

  if (!have_trajectory) {
    out.trajectory.points.assign(kTrajectoryPoints, scene.start);
  }
  return out;
}

}  // namespace wzplan::planner
