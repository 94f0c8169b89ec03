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

#include "wzplan/io.hpp"

#include "wzplan/errors.hpp"
#include "wzplan/util.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <sstream>

namespace wzplan::io
{

namespace
{

Eigen::VectorXd to_vector(const nlohmann::json & array)
{
  Eigen::VectorXd v(array.size());
  Eigen::Index i = 0;
  for (const auto & item : array) {
    v[i++] = item.get<double>();
  }
  return v;
}

nlohmann::json detection_to_json(const scene_graph::Detection & det)
{
  nlohmann::json j = {
    {"instance_id", det.instance_id},
    {"category", scene_graph::label_display(det.category)},
    {"bbox", {det.bbox.x, det.bbox.y, det.bbox.w, det.bbox.h}},
    {"depth_m", det.depth},
  };
  if (det.appearance) {
    j["appearance"] = std::vector<double>(
      det.appearance->data(), det.appearance->data() + det.appearance->size());
  }
  return j;
}

scene_graph::Detection detection_from_json(const nlohmann::json & j, int appearance_dim)
{
  scene_graph::Detection det;
  det.instance_id = j.at("instance_id").get<std::int64_t>();
  det.category = scene_graph::parse_category(j.at("category").get<std::string>());
  const auto & bbox = j.at("bbox");
  if (!bbox.is_array() || bbox.size() != 4) {
    throw Error(ErrorKind::schema, "detection bbox must be [x, y, w, h]");
  }
  det.bbox = {bbox[0].get<double>(), bbox[1].get<double>(), bbox[2].get<double>(),
              bbox[3].get<double>()};
  det.depth = j.at("depth_m").get<double>();
  if (det.depth < 0.0) {
    throw Error(ErrorKind::schema, "detection depth_m must be >= 0");
  }
  if (j.contains("appearance") && !j["appearance"].is_null()) {
    Eigen::VectorXd v = to_vector(j["appearance"]);
    if (appearance_dim > 0 && v.size() != appearance_dim) {
      throw Error(
        ErrorKind::schema, "appearance dimension " + std::to_string(v.size()) +
                             " does not match header dimension " + std::to_string(appearance_dim));
    }
    const double norm = v.norm();
    if (std::abs(norm - 1.0) > 1e-6) {
      throw Error(ErrorKind::schema, "appearance vector must be unit-norm");
    }
    det.appearance = v / norm;
  }
  return det;
}

}  // namespace

DetectionFile load_detections(const std::filesystem::path & path)
{
  const std::string text = util::read_file(path);
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;

  DetectionFile file;
  bool have_header = false;
  std::map<std::string, std::size_t> frame_index;

  auto frame_slot = [&file, &frame_index](const std::string & frame_id) -> FrameRecord & {
    auto it = frame_index.find(frame_id);
    if (it == frame_index.end()) {
      frame_index[frame_id] = file.frames.size();
      FrameRecord record;
      record.frame_id = frame_id;
      file.frames.push_back(std::move(record));
      return file.frames.back();
    }
    return file.frames[it->second];
  };

  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) {
      continue;
    }
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      throw Error(
        ErrorKind::parse, path.string() + ":" + std::to_string(line_no) + ": malformed JSON line");
    }
    if (!have_header) {
      if (j.value("schema", "") != "detections/v1") {
        throw Error(
          ErrorKind::version_mismatch,
          path.string() + ": first line must be a detections/v1 header");
      }
      file.appearance_dim = j.value("appearance_dim", 0);
      have_header = true;
      continue;
    }

    const std::string frame_id = j.at("frame_id").get<std::string>();
    FrameRecord & frame = frame_slot(frame_id);
    if (j.contains("detections")) {
      // frame record
      frame.sequence_id = j.value("sequence_id", frame.sequence_id);
      frame.frame_index = j.value("frame_index", frame.frame_index);
      frame.pattern_tag = j.value("pattern_tag", frame.pattern_tag);
      if (j.contains("start") && !j["start"].is_null()) {
        frame.start = Eigen::Vector2d{j["start"][0].get<double>(), j["start"][1].get<double>()};
      }
      if (j.contains("lane_center_col") && !j["lane_center_col"].is_null()) {
        frame.lane_center_col = j["lane_center_col"].get<double>();
      }
      for (const auto & d : j["detections"]) {
        frame.detections.push_back(detection_from_json(d, file.appearance_dim));
      }
    } else {
      // bare detection record
      frame.detections.push_back(detection_from_json(j, file.appearance_dim));
    }
  }
  if (!have_header) {
    throw Error(ErrorKind::parse, path.string() + ": empty detections file");
  }
  return file;
}

void save_detections(const DetectionFile & file, const std::filesystem::path & path)
{
  std::ostringstream out;
  out << nlohmann::json{{"schema", "detections/v1"}, {"appearance_dim", file.appearance_dim}}
           .dump()
      << "\n";
  for (const auto & frame : file.frames) {
    nlohmann::json dets = nlohmann::json::array();
    for (const auto & det : frame.detections) {
      dets.push_back(detection_to_json(det));
    }
    nlohmann::json j = {
      {"frame_id", frame.frame_id},
      {"sequence_id", frame.sequence_id},
      {"frame_index", frame.frame_index},
      {"detections", dets},
    };
    if (!frame.pattern_tag.empty()) {
      j["pattern_tag"] = frame.pattern_tag;
    }
    if (frame.start) {
      j["start"] = {frame.start->x(), frame.start->y()};
    }
    if (frame.lane_center_col) {
      j["lane_center_col"] = *frame.lane_center_col;
    }
    out << j.dump() << "\n";
  }
  util::write_file_atomic(path, out.str());
}

TrajectoryRecord load_trajectory(const std::filesystem::path & path)
{
  nlohmann::json j = nlohmann::json::parse(util::read_file(path), nullptr, false);
  if (j.is_discarded()) {
    throw Error(ErrorKind::parse, path.string() + ": malformed trajectory file");
  }
  if (j.value("schema", "") != "trajectory/v1") {
    throw Error(ErrorKind::version_mismatch, path.string() + ": unsupported trajectory schema");
  }
  TrajectoryRecord record;
  record.frame_id = j.at("frame_id").get<std::string>();
  for (const auto & p : j.at("points")) {
    record.points.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
  }
  return record;
}

void save_trajectory(const TrajectoryRecord & record, const std::filesystem::path & path)
{
  nlohmann::json points = nlohmann::json::array();
  for (const auto & p : record.points) {
    points.push_back({p.x(), p.y()});
  }
  const nlohmann::json j = {
    {"schema", "trajectory/v1"},
    {"frame_id", record.frame_id},
    {"points", points},
  };
  util::write_file_atomic(path, j.dump(2) + "\n");
}

namespace
{

template <typename T>
void read_if(const nlohmann::json & j, const char * key, T & target)
{
  if (j.contains(key)) {
    target = j.at(key).get<T>();
  }
}

}  // namespace

RunConfig parse_config(const std::string & json_text)
{
  nlohmann::json j = nlohmann::json::parse(json_text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw Error(ErrorKind::parse, "config: malformed JSON");
  }
  RunConfig cfg;
  if (j.contains("ego")) {
    const auto & e = j["ego"];
    double width = cfg.ego.image_width, height = cfg.ego.image_height;
    read_if(e, "image_width", width);
    read_if(e, "image_height", height);
    cfg.ego = geometry::EgoConfig::with_image_size(width, height);
    if (e.contains("center")) {
      cfg.ego.center = {e["center"][0].get<double>(), e["center"][1].get<double>()};
    }
    read_if(e, "ppm", cfg.ego.ppm);
    read_if(e, "alpha", cfg.ego.alpha);
    read_if(e, "lane_half_width", cfg.ego.lane_half_width);
    if (!cfg.ego.valid()) {
      throw Error(ErrorKind::schema, "config: invalid ego section");
    }
  }
  if (j.contains("mining")) {
    const auto & m = j["mining"];
    read_if(m, "hop_limit", cfg.mining.hop_limit);
    read_if(m, "min_size", cfg.mining.min_size);
    read_if(m, "depth_gate", cfg.mining.depth_gate);
    read_if(m, "radius_gate", cfg.mining.radius_gate);
  }
  if (j.contains("retrieval")) {
    const auto & r = j["retrieval"];
    read_if(r, "depth_divisor", cfg.retrieval.depth_divisor);
    read_if(r, "bbox_divisor", cfg.retrieval.bbox_divisor);
    read_if(r, "similarity_threshold", cfg.retrieval.similarity_threshold);
    read_if(r, "top_k", cfg.retrieval.top_k);
  } else {
    cfg.retrieval.bbox_divisor = std::max(cfg.ego.image_width, cfg.ego.image_height);
  }
  if (j.contains("planner")) {
    const auto & p = j["planner"];
    read_if(p, "tau_road", cfg.thresholds.tau_road);
    read_if(p, "tau", cfg.thresholds.tau);
    read_if(p, "inflate_margin_px", cfg.mitigation.inflate_margin_px);
    read_if(p, "cluster_gap_px", cfg.mitigation.cluster_gap_px);
    read_if(p, "forward_clearance_px", cfg.mitigation.forward_clearance_px);
    read_if(p, "smoothing_passes", cfg.mitigation.smoothing_passes);
  }
  read_if(j, "collision_margin_px", cfg.collision_margin_px);
  read_if(j, "max_iter", cfg.max_iter);
  read_if(j, "k_max", cfg.k_max);
  read_if(j, "seed", cfg.seed);
  read_if(j, "workers", cfg.workers);
  read_if(j, "backend", cfg.backend);
  read_if(j, "fixtures", cfg.fixtures);
  read_if(j, "detections", cfg.detections);
  read_if(j, "masks_dir", cfg.masks_dir);
  read_if(j, "gt_dir", cfg.gt_dir);
  read_if(j, "baseline_dir", cfg.baseline_dir);
  if (j.contains("remote")) {
    const auto & r = j["remote"];
    read_if(r, "host", cfg.remote.host);
    read_if(r, "port", cfg.remote.port);
    read_if(r, "path", cfg.remote.path);
    read_if(r, "auth_env", cfg.remote.auth_env);
    read_if(r, "timeout_s", cfg.remote.timeout_s);
  }
  if (cfg.backend != "stub" && cfg.backend != "replay" && cfg.backend != "remote") {
    throw Error(ErrorKind::schema, "config: backend must be stub, replay or remote");
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path & path)
{
  return parse_config(util::read_file(path));
}

std::string config_provenance_json(const RunConfig & cfg)
{
  auto entry = [](auto value, const char * origin) {
    return nlohmann::json{{"value", value}, {"origin", origin}};
  };
  nlohmann::json j = {
    {"schema", "config-provenance/v1"},
    {"proximity_bins_m", entry(std::vector<double>{0, 4, 7, 10, 16, 25}, "reference")},
    {"hop_limit", entry(cfg.mining.hop_limit, "reference")},
    {"min_size", entry(cfg.mining.min_size, "reference")},
    {"depth_gate_m", entry(cfg.mining.depth_gate, "reference")},
    {"radius_gate_px", entry(cfg.mining.radius_gate, "reference")},
    {"depth_divisor_m", entry(cfg.retrieval.depth_divisor, "reference")},
    {"bbox_divisor_px", entry(cfg.retrieval.bbox_divisor, "reference")},
    {"similarity_threshold", entry(cfg.retrieval.similarity_threshold, "reference")},
    {"top_k", entry(cfg.retrieval.top_k, "reference")},
    {"trajectory_points", entry(planner::kTrajectoryPoints, "reference")},
    {"case_failure_ade_px", entry(50.0, "reference")},
    {"case_failure_fde_px", entry(100.0, "reference")},
    {"ppm", entry(cfg.ego.ppm, "decision")},
    {"alpha_rad", entry(cfg.ego.alpha, "decision")},
    {"lane_half_width_m", entry(cfg.ego.lane_half_width, "decision")},
    {"tau_road_px", entry(cfg.thresholds.tau_road, "decision")},
    {"tau_px", entry(cfg.thresholds.tau, "decision")},
    {"inflate_margin_px", entry(cfg.mitigation.inflate_margin_px, "decision")},
    {"cluster_gap_px", entry(cfg.mitigation.cluster_gap_px, "decision")},
    {"collision_margin_px", entry(cfg.collision_margin_px, "decision")},
    {"k_max", entry(cfg.k_max, "decision")},
    {"max_iter", entry(cfg.max_iter, "decision")},
    {"seed", entry(cfg.seed, "decision")},
  };
  return j.dump(2) + "\n";
}

}  // namespace wzplan::io
