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

#ifndef WZPLAN_PIPELINE_HPP_
#define WZPLAN_PIPELINE_HPP_

#include "wzplan/casedb.hpp"
#include "wzplan/io.hpp"
#include "wzplan/planner.hpp"
#include "wzplan/vlm_adapter.hpp"

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace wzplan::pipeline
{

/// A dataset rooted at the config file's directory: detections stream plus
/// per-frame masks, ground-truth and recorded baseline trajectories.
struct Dataset
{
  std::filesystem::path root;
  io::RunConfig config;
  io::DetectionFile detections;

  const io::FrameRecord * frame(const std::string & frame_id) const;
  planner::RoadMask mask_for(const std::string & frame_id) const;
  std::optional<planner::Polyline> gt_for(const std::string & frame_id) const;
  std::optional<planner::Polyline> baseline_for(const std::string & frame_id) const;

  /// Frame start point (authored, or bottom center as a fallback).
  Eigen::Vector2d start_for(const io::FrameRecord & frame) const;
  std::vector<planner::WorkzoneBox> workzone_for(const io::FrameRecord & frame) const;
};

Dataset load_dataset(const std::filesystem::path & config_path);

std::unique_ptr<vlm::Backend> make_backend(const io::RunConfig & config,
                                           const std::filesystem::path & root);

struct BuildOutputs
{
  casedb::CaseDatabase db;
  std::string prototypes_json;
  std::string cluster_report_json;
  std::string build_report_json;
  int abnormal_count = 0;
  int stored_count = 0;
  int failed_count = 0;
};

/// Offline stage: find the abnormal pool via the baseline failure rule,
/// mine + cluster prototypes, then for each abnormal frame run the
/// constraint-generation loop, plan, verify against the ground truth and
/// store passing cases. Reports and overlays land under out_dir; all
/// embedded paths are relative to out_dir so reruns are byte-identical.
BuildOutputs build_database(
  const Dataset & dataset, vlm::Backend & backend, const std::filesystem::path & out_dir);

struct InferOutputs
{
  planner::Trajectory trajectory;
  bool verified = false;
  std::string decision;  // "use_case:<id>" or "fallback_vlm"
  std::string trace_json;
};

/// Online stage for one scene: scene graph -> candidate -> retrieval ->
/// dispatch. The reuse path replans the stored case's constraints with
/// online (drivability-only) verification; the fallback path runs the
/// adapter loop.
InferOutputs infer(
  const Dataset & dataset, const io::FrameRecord & frame, const casedb::CaseDatabase & db,
  vlm::Backend & backend, const std::filesystem::path & out_dir);

}  // namespace wzplan::pipeline

#endif  // WZPLAN_PIPELINE_HPP_
