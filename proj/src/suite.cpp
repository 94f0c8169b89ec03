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

#include "wzplan/suite.hpp"

#include "wzplan/io.hpp"
#include "wzplan/mask.hpp"
#include "wzplan/trajectory.hpp"
#include "wzplan/util.hpp"

#include <nlohmann/json.hpp>

#include <sstream>

namespace wzplan::suite
{

namespace fs = std::filesystem;

namespace
{

constexpr int kWidth = 960;
constexpr int kHeight = 540;
constexpr int kRoadLeft = 360;   // corridor columns [360, 600)
constexpr int kRoadRight = 600;
constexpr int kHorizon = 30;     // corridor rows [30, 540)
constexpr int kAppearanceDim = 8;

struct SceneSpec
{
  std::string id;          // "p1" .. "p8"
  std::string pattern;     // "P1" .. "P8"
  Eigen::Vector2d start;
  std::vector<scene_graph::Detection> detections;
  planner::Polyline gt_waypoints;
  planner::Polyline baseline_waypoints;
  std::map<std::string, std::string> slots;
  bool dead_end_strip = false;   // P2's lateral escape corridor
  double lane_center_col = 480;  // P5 shifts the target lane
};

scene_graph::Detection det(
  scene_graph::NodeLabel category, double x, double y, double w, double h, double depth,
  std::int64_t instance_id)
{
  scene_graph::Detection d;
  d.category = category;
  d.bbox = {x, y, w, h};
  d.depth = depth;
  d.instance_id = instance_id;
  return d;
}

std::map<std::string, std::string> slots_for(
  const std::string & cross, const std::string & detour, bool return_orig, bool follow_center,
  bool turn_avoid, bool return_center, bool follow_sign, bool follow_front)
{
  return {
    {"no_cross_workzone", cross},
    {"detour_side", detour},
    {"return_to_original_lane_after_workzone", return_orig ? "True" : "False"},
    {"follow_lane_center", follow_center ? "True" : "False"},
    {"turn_to_avoid_work_zone", turn_avoid ? "True" : "False"},
    {"return_center_line_after_crossing", return_center ? "True" : "False"},
    {"follow_sign", follow_sign ? "True" : "False"},
    {"follow_front_car", follow_front ? "True" : "False"},
  };
}

std::vector<SceneSpec> scene_table()
{
  using L = scene_graph::NodeLabel;
  std::vector<SceneSpec> scenes;

  {  // P1: dense cones on the sidewalk; keep the lane center
    SceneSpec s;
    s.id = "p1";
    s.pattern = "P1";
    s.start = {590, 520};
    s.detections = {
      det(L::cone, 612, 200, 24, 40, 18.0, 1),
      det(L::cone, 620, 280, 24, 40, 14.0, 2),
      det(L::cone, 628, 360, 24, 40, 9.0, 3),
      det(L::cone, 636, 440, 24, 40, 5.0, 4),
    };
    s.gt_waypoints = {{590, 520}, {480, 120}, {480, 30}};
    s.baseline_waypoints = {{590, 520}, {630, 200}};
    s.slots = slots_for("no", "none", false, true, false, false, false, false);
    scenes.push_back(s);
  }
  {  // P2: dead end ahead; turn into the side corridor
    SceneSpec s;
    s.id = "p2";
    s.pattern = "P2";
    s.start = {480, 520};
    s.detections = {
      det(L::barrier, 360, 200, 80, 40, 12.0, 1),
      det(L::barrier, 440, 200, 80, 40, 12.5, 2),
      det(L::barrier, 520, 200, 80, 40, 13.0, 3),
    };
    s.gt_waypoints = {{480, 520}, {362, 297}, {60, 242}};
    s.baseline_waypoints = {{480, 520}, {480, 100}};
    s.slots = slots_for("no", "none", false, false, true, false, false, false);
    s.dead_end_strip = true;
    scenes.push_back(s);
  }
  {  // P3: large work vehicle; detour left, keep the lane center
    SceneSpec s;
    s.id = "p3";
    s.pattern = "P3";
    s.start = {480, 520};
    s.detections = {
      det(L::work_vehicle, 440, 260, 160, 80, 9.0, 1),
      det(L::cone, 420, 350, 24, 40, 7.0, 2),
      det(L::cone, 560, 350, 24, 40, 7.5, 3),
    };
    s.gt_waypoints = {{480, 520}, {410, 397}, {410, 253}, {480, 30}};
    s.baseline_waypoints = {{480, 520}, {500, 300}};
    s.slots = slots_for("no", "left", false, true, false, false, false, false);
    scenes.push_back(s);
  }
  {  // P4: lane borrowing; detour left then return to the original lane
    SceneSpec s;
    s.id = "p4";
    s.pattern = "P4";
    s.start = {480, 520};
    s.detections = {
      det(L::drum, 440, 260, 50, 70, 11.0, 1),
      det(L::drum, 500, 260, 50, 70, 11.5, 2),
      det(L::drum, 560, 260, 50, 70, 12.0, 3),
    };
    s.gt_waypoints = {{480, 520}, {430, 337}, {430, 253}, {480, 30}};
    s.baseline_waypoints = {{480, 520}, {510, 310}};
    s.slots = slots_for("no", "left", true, false, false, false, false, false);
    scenes.push_back(s);
  }
  {  // P5: lane shift across staggered drums; cross, then recenter
    SceneSpec s;
    s.id = "p5";
    s.pattern = "P5";
    s.start = {480, 520};
    s.detections = {
      det(L::drum, 360, 350, 60, 50, 8.0, 1),
      det(L::drum, 430, 350, 60, 50, 8.2, 2),
      det(L::drum, 470, 230, 60, 50, 13.0, 3),
      det(L::drum, 540, 230, 60, 50, 13.2, 4),
    };
    s.gt_waypoints = {{480, 520}, {498, 407}, {498, 343}, {462, 287}, {462, 223}, {440, 30}};
    s.baseline_waypoints = {{480, 520}, {390, 380}};
    s.slots = slots_for("yes", "none", false, false, false, true, false, false);
    s.lane_center_col = 440;  // the shifted lane the scene settles into
    scenes.push_back(s);
  }
  {  // P6: sign overreaction; follow the sign, recenter after the zone
    SceneSpec s;
    s.id = "p6";
    s.pattern = "P6";
    s.start = {480, 520};
    s.detections = {
      det(L::ttc_sign, 600, 300, 60, 60, 14.0, 1),
      det(L::cone, 496, 310, 28, 40, 13.0, 2),
      det(L::cone, 460, 330, 30, 40, 12.5, 3),
    };
    s.gt_waypoints = {{480, 520}, {452, 377}, {452, 323}, {480, 30}};
    s.baseline_waypoints = {{480, 520}, {380, 150}};
    s.slots = slots_for("yes", "none", false, false, false, true, true, false);
    scenes.push_back(s);
  }
  {  // P7: exit behind a front vehicle; follow it, keep the lane center
    SceneSpec s;
    s.id = "p7";
    s.pattern = "P7";
    s.start = {480, 520};
    s.detections = {
      det(L::work_vehicle, 420, 30, 80, 50, 19.0, 1),
      det(L::tubular_marker, 380, 300, 16, 40, 11.0, 2),
      det(L::tubular_marker, 580, 300, 16, 40, 11.2, 3),
    };
    s.gt_waypoints = {{480, 520}, {480, 350}, {512, 120}, {512, 30}};
    s.baseline_waypoints = {{480, 520}, {380, 160}};
    s.slots = slots_for("no", "none", false, true, false, false, false, true);
    scenes.push_back(s);
  }
  {  // P8: turning through the zone; cross the panel gap, keep the center
    SceneSpec s;
    s.id = "p8";
    s.pattern = "P8";
    s.start = {480, 520};
    s.detections = {
      det(L::vertical_panel, 360, 250, 66, 60, 10.5, 1),
      det(L::vertical_panel, 426, 250, 66, 60, 10.8, 2),
      det(L::vertical_panel, 492, 250, 66, 60, 11.0, 3),
    };
    s.gt_waypoints = {{480, 520}, {568, 316}, {568, 244}, {480, 30}};
    s.baseline_waypoints = {{480, 520}, {430, 280}};
    s.slots = slots_for("yes", "none", false, true, false, false, false, false);
    scenes.push_back(s);
  }
  return scenes;
}

planner::RoadMask make_scene_mask(bool dead_end_strip)
{
  planner::RoadMask mask = planner::make_mask(kWidth, kHeight, false);
  for (int y = kHorizon; y < kHeight; ++y) {
    for (int x = kRoadLeft; x < kRoadRight; ++x) {
      mask.grid(y, x) = 1;
    }
  }
  if (dead_end_strip) {
    for (int y = 240; y < 300; ++y) {
      for (int x = 60; x < kRoadRight; ++x) {
        mask.grid(y, x) = 1;
      }
    }
  }
  return mask;
}

Eigen::VectorXd pattern_appearance(int pattern_index, bool query)
{
  Eigen::VectorXd v = Eigen::VectorXd::Constant(kAppearanceDim, 0.05);
  v[pattern_index] += 1.0;
  if (query) {
    v[(pattern_index + 1) % kAppearanceDim] += 0.03;
  }
  return v / v.norm();
}

std::string response_text(const std::map<std::string, std::string> & slots)
{
  nlohmann::json constraints = nlohmann::json::object();
  for (const auto & [key, value] : slots) {
    constraints[key] = value;
  }
  std::ostringstream out;
  out << "The scene calls for the rules below.\n\n```json\n"
      << nlohmann::json{{"constraints", constraints}}.dump(2)
      << "\n```\n\n```python\n"
         "def segment_drivable_mask(original_road_mask, workzone_info):\n"
         "    return original_road_mask\n"
         "\n"
         "def plan_destination(drivable_road_mask, workzone_info):\n"
         "    return (0, 0)\n"
         "```\n";
  return out.str();
}

io::FrameRecord make_frame(const SceneSpec & scene, int pattern_index, bool query)
{
  io::FrameRecord frame;
  frame.frame_id = scene.id + (query ? "_query" : "_build");
  frame.sequence_id = "seq_" + scene.id;
  frame.frame_index = query ? 1 : 0;
  frame.pattern_tag = scene.pattern;
  frame.start = scene.start;
  frame.lane_center_col = scene.lane_center_col;
  const Eigen::VectorXd appearance = pattern_appearance(pattern_index, query);
  for (scene_graph::Detection d : scene.detections) {
    if (query) {
      d.bbox.x += 4.0;
      d.bbox.y -= 3.0;
      d.depth += 0.2;
    }
    d.appearance = appearance;
    frame.detections.push_back(std::move(d));
  }
  return frame;
}

}  // namespace

std::vector<std::string> build_frames()
{
  std::vector<std::string> out;
  for (const auto & scene : scene_table()) {
    out.push_back(scene.id + "_build");
  }
  return out;
}

std::vector<std::string> query_frames()
{
  std::vector<std::string> out;
  for (const auto & scene : scene_table()) {
    out.push_back(scene.id + "_query");
  }
  return out;
}

fs::path make_suite(const fs::path & root)
{
  fs::create_directories(root / "masks");
  fs::create_directories(root / "gt");
  fs::create_directories(root / "baseline");

  const std::vector<SceneSpec> scenes = scene_table();

  io::DetectionFile detections;
  detections.appearance_dim = kAppearanceDim;
  nlohmann::json by_case = nlohmann::json::object();

  for (std::size_t i = 0; i < scenes.size(); ++i) {
    const SceneSpec & scene = scenes[i];
    const planner::RoadMask mask = make_scene_mask(scene.dead_end_strip);
    const std::string response = response_text(scene.slots);

    for (bool query : {false, true}) {
      const io::FrameRecord frame = make_frame(scene, static_cast<int>(i), query);
      detections.frames.push_back(frame);
      planner::save_pgm(mask, root / "masks" / (frame.frame_id + ".pgm"));

      // ground truth shifts with the query twin's perturbation
      planner::Polyline gt = scene.gt_waypoints;
      if (query) {
        for (std::size_t k = 1; k + 1 < gt.size(); ++k) {
          gt[k].x() += 2.0;
        }
      }
      io::save_trajectory(
        {frame.frame_id, planner::resample_polyline(gt, planner::kTrajectoryPoints)},
        root / "gt" / (frame.frame_id + ".json"));

      if (!query) {
        // the recorded failure that puts this scene into the abnormal pool
        io::save_trajectory(
          {frame.frame_id,
           planner::resample_polyline(scene.baseline_waypoints, planner::kTrajectoryPoints)},
          root / "baseline" / (frame.frame_id + ".json"));
      }
      by_case[frame.frame_id] = {response};
    }
  }

  io::save_detections(detections, root / "detections.jsonl");

  const nlohmann::json fixtures = {
    {"schema", "adapter-fixtures/v1"},
    {"by_case", by_case},
  };
  util::write_file_atomic(root / "fixtures.json", fixtures.dump(2) + "\n");

  const nlohmann::json config = {
    {"ego",
     {{"image_width", kWidth},
      {"image_height", kHeight},
      {"ppm", 20.0},
      {"lane_half_width", 1.75}}},
    {"backend", "stub"},
    {"fixtures", "fixtures.json"},
    {"detections", "detections.jsonl"},
    {"masks_dir", "masks"},
    {"gt_dir", "gt"},
    {"baseline_dir", "baseline"},
    {"max_iter", 3},
    {"k_max", 15},
    {"seed", 20260810},
    {"workers", 1},
  };
  const fs::path config_path = root / "config.json";
  util::write_file_atomic(config_path, config.dump(2) + "\n");
  return config_path;
}

}  // namespace wzplan::suite
