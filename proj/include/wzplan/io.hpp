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

#ifndef WZPLAN_IO_HPP_
#define WZPLAN_IO_HPP_

#include "wzplan/casedb.hpp"
#include "wzplan/geometry.hpp"
#include "wzplan/mining.hpp"
#include "wzplan/planner.hpp"
#include "wzplan/retrieval.hpp"
#include "wzplan/scene_graph.hpp"
#include "wzplan/trajectory.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace wzplan::io
{

/// One frame's ingested data plus retrieval/planning metadata.
struct FrameRecord
{
  std::string frame_id;
  std::string sequence_id;
  int frame_index = 0;
  std::string pattern_tag;  // optional; required for database construction
  std::optional<Eigen::Vector2d> start;
  std::optional<double> lane_center_col;
  std::vector<scene_graph::Detection> detections;
};

struct DetectionFile
{
  int appearance_dim = 0;
  std::vector<FrameRecord> frames;
};

/// Newline-delimited stream: a header line declaring the schema and the
/// appearance dimension, then one frame record per line (or bare detection
/// records carrying their frame_id).
DetectionFile load_detections(const std::filesystem::path & path);
void save_detections(const DetectionFile & file, const std::filesystem::path & path);

struct TrajectoryRecord
{
  std::string frame_id;
  planner::Polyline points;
};

TrajectoryRecord load_trajectory(const std::filesystem::path & path);
void save_trajectory(const TrajectoryRecord & record, const std::filesystem::path & path);

/// Everything a pipeline run needs; defaults pinned here, overridable from
/// a JSON config file.
struct RunConfig
{
  geometry::EgoConfig ego;
  mining::MiningParams mining;
  retrieval::RetrievalParams retrieval;
  planner::PlannerThresholds thresholds;
  casedb::MitigationConfig mitigation;
  double collision_margin_px = 5.0;
  int max_iter = 3;
  int k_max = 15;  // cluster-sweep cap
  std::uint64_t seed = 1;
  int workers = 1;
  std::string backend = "stub";  // stub | replay | remote
  std::string fixtures;          // fixture file for stub/replay, relative to config dir
  std::string detections = "detections.jsonl";
  std::string masks_dir = "masks";
  std::string gt_dir = "gt";
  std::string baseline_dir = "baseline";
  struct Remote
  {
    std::string host = "localhost";
    int port = 8080;
    std::string path = "/generate";
    std::string auth_env = "WZPLAN_AUTH_TOKEN";
    double timeout_s = 10.0;
  } remote;
};

RunConfig load_config(const std::filesystem::path & path);
RunConfig parse_config(const std::string & json_text);

/// Config echo for run outputs: every constant with its value and origin
/// ("reference" for values the method pins, "decision" for implementation
/// choices).
std::string config_provenance_json(const RunConfig & config);

}  // namespace wzplan::io

#endif  // WZPLAN_IO_HPP_
