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

#include "wzplan/pipeline.hpp"

#include "wzplan/clustering.hpp"
#include "wzplan/errors.hpp"
#include "wzplan/metrics.hpp"
#include "wzplan/render.hpp"
#include "wzplan/retrieval.hpp"
#include "wzplan/util.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <future>
#include <limits>
#include <mutex>
#include <sstream>

namespace wzplan::pipeline
{

namespace fs = std::filesystem;

const io::FrameRecord * Dataset::frame(const std::string & frame_id) const
{
  for (const auto & f : detections.frames) {
    if (f.frame_id == frame_id) {
      return &f;
    }
  }
  return nullptr;
}

planner::RoadMask Dataset::mask_for(const std::string & frame_id) const
{
  planner::RoadMask mask = planner::load_pgm(root / config.masks_dir / (frame_id + ".pgm"));
  if (mask.width != static_cast<int>(config.ego.image_width) ||
      mask.height != static_cast<int>(config.ego.image_height)) {
    throw Error(
      ErrorKind::schema, frame_id + ": road mask is " + std::to_string(mask.width) + "x" +
                           std::to_string(mask.height) + " but the configured image is " +
                           std::to_string(static_cast<int>(config.ego.image_width)) + "x" +
                           std::to_string(static_cast<int>(config.ego.image_height)));
  }
  return mask;
}

std::optional<planner::Polyline> Dataset::gt_for(const std::string & frame_id) const
{
  const fs::path path = root / config.gt_dir / (frame_id + ".json");
  if (!fs::exists(path)) {
    return std::nullopt;
  }
  return io::load_trajectory(path).points;
}

std::optional<planner::Polyline> Dataset::baseline_for(const std::string & frame_id) const
{
  const fs::path path = root / config.baseline_dir / (frame_id + ".json");
  if (!fs::exists(path)) {
    return std::nullopt;
  }
  return io::load_trajectory(path).points;
}

Eigen::Vector2d Dataset::start_for(const io::FrameRecord & frame) const
{
  if (frame.start) {
    return *frame.start;
  }
  return {config.ego.center.x(), config.ego.image_height - 6.0};
}

std::vector<planner::WorkzoneBox> Dataset::workzone_for(const io::FrameRecord & frame) const
{
  std::vector<planner::WorkzoneBox> boxes;
  boxes.reserve(frame.detections.size());
  for (const auto & det : frame.detections) {
    boxes.push_back({det.bbox, det.depth});
  }
  return boxes;
}

Dataset load_dataset(const fs::path & config_path)
{
  Dataset dataset;
  dataset.root = config_path.parent_path();
  dataset.config = io::load_config(config_path);
  dataset.detections = io::load_detections(dataset.root / dataset.config.detections);
  return dataset;
}

std::unique_ptr<vlm::Backend> make_backend(const io::RunConfig & config, const fs::path & root)
{
  if (config.backend == "stub") {
    if (config.fixtures.empty()) {
      throw Error(ErrorKind::schema, "stub backend requires a fixtures file in the config");
    }
    return std::make_unique<vlm::StubBackend>(
      vlm::StubBackend::from_file(root / config.fixtures));
  }
  if (config.backend == "replay") {
    if (config.fixtures.empty()) {
      throw Error(ErrorKind::schema, "replay backend requires a fixtures file in the config");
    }
    return std::make_unique<vlm::ReplayBackend>(
      vlm::ReplayBackend::from_file(root / config.fixtures));
  }
  vlm::RemoteBackend::Config remote;
  remote.host = config.remote.host;
  remote.port = config.remote.port;
  remote.path = config.remote.path;
  remote.auth_env = config.remote.auth_env;
  remote.timeout_s = config.remote.timeout_s;
  return std::make_unique<vlm::RemoteBackend>(remote);
}

namespace
{

/// Fixture backends keep per-key cursors; serialize access across frames.
class LockedBackend
{
public:
  explicit LockedBackend(vlm::Backend & inner) : inner_(inner) {}

  std::string generate(const vlm::PromptBundle & prompt)
  {
    std::scoped_lock lock(mutex_);
    return inner_.generate(prompt);
  }

private:
  vlm::Backend & inner_;
  std::mutex mutex_;
};

struct AdapterLoopResult
{
  bool ok = false;
  casedb::ConstraintSet constraints;
  planner::Trajectory trajectory;
  std::vector<planner::VerificationFeedback> history;
  std::string error;  // terminal failure (fixture miss, transport)
};

/// Constraint-generation loop: each attempt renders the prompt with the
/// feedback of earlier attempts appended, asks the backend, resolves the
/// slots and runs the planner once. Parse and resolve failures consume an
/// attempt too.
AdapterLoopResult adapter_loop(
  LockedBackend & backend, const io::RunConfig & config, const planner::SceneContext & scene,
  const std::string & case_key, const std::string & failure_overlay,
  const std::string & gt_overlay, const std::optional<Eigen::Vector2d> & gt_dest)
{
  AdapterLoopResult result;
  std::vector<std::string> feedback;
  for (int attempt = 1; attempt <= config.max_iter; ++attempt) {
    vlm::PromptContext context;
    context.case_key = case_key;
    context.failure_overlay_ref = failure_overlay;
    context.gt_overlay_ref = gt_overlay;
    context.feedback = feedback;
    const vlm::PromptBundle prompt = vlm::render_prompt(context);

    std::string raw;
    try {
      raw = backend.generate(prompt);
    } catch (const Error & e) {
      result.error = e.what();  // no scripted/recorded response: stop retrying
      return result;
    }

    planner::VerificationFeedback fb;
    fb.attempt = attempt;
    try {
      const vlm::AdapterResponse response = vlm::parse_response(raw);
      const casedb::ConstraintSet constraints = casedb::resolve_constraints(response.slots);

      const planner::RoadMask segmented = planner::segment_drivable_mask(
        scene.base_mask, scene.workzone, constraints, config.mitigation);
      const Eigen::Vector2d dest = planner::plan_destination(
        segmented, scene.workzone, constraints, scene.start, scene.lane_center_col, config.ego,
        config.mitigation, 0);
      const planner::DistanceField field = planner::distance_transform(segmented);
      const planner::Trajectory traj = planner::smooth_trajectory(
        scene.start, dest, segmented, scene.workzone, config.mitigation);

      fb = planner::verify(
        dest, gt_dest, field, config.thresholds.tau_road, config.thresholds.tau);
      fb.attempt = attempt;
      result.history.push_back(fb);
      result.trajectory = traj;  // keep the last planned trajectory
      if (fb.pass()) {
        result.ok = true;
        result.constraints = constraints;
        return result;
      }
    } catch (const Error & e) {
      fb.note = e.what();
      fb.drivability = {
        false, std::numeric_limits<double>::infinity(), config.thresholds.tau_road};
      result.history.push_back(fb);
    }
    feedback.push_back(planner::feedback_text(result.history.back()));
  }
  return result;
}

nlohmann::json history_to_json(const std::vector<planner::VerificationFeedback> & history)
{
  nlohmann::json out = nlohmann::json::array();
  for (const auto & fb : history) {
    nlohmann::json j = {
      {"attempt", fb.attempt},
      {"pass", fb.pass()},
      {"note", fb.note},
      {"drivability",
       {{"pass", fb.drivability.pass},
        {"value", fb.drivability.value},
        {"threshold", fb.drivability.threshold}}},
    };
    if (fb.destination) {
      j["destination"] = {
        {"pass", fb.destination->pass},
        {"value", fb.destination->value},
        {"threshold", fb.destination->threshold}};
    } else {
      j["destination"] = nullptr;
    }
    out.push_back(j);
  }
  return out;
}

nlohmann::json points_to_json(const planner::Polyline & points)
{
  nlohmann::json out = nlohmann::json::array();
  for (const auto & p : points) {
    out.push_back({p.x(), p.y()});
  }
  return out;
}

casedb::VerificationRecord to_record(
  const std::vector<planner::VerificationFeedback> & history, bool pass)
{
  casedb::VerificationRecord record;
  record.attempts = static_cast<int>(history.size());
  record.pass = pass;
  if (!history.empty()) {
    record.drivability = history.back().drivability;
    record.destination = history.back().destination;
  }
  return record;
}

std::optional<Eigen::VectorXd> frame_appearance(const io::FrameRecord & frame)
{
  std::vector<Eigen::VectorXd> embeddings;
  for (const auto & det : frame.detections) {
    if (det.appearance) {
      embeddings.push_back(*det.appearance);
    }
  }
  if (embeddings.empty()) {
    return std::nullopt;
  }
  return clustering::aggregate_appearance(embeddings);
}

/// Deterministic frame-parallel map: per-index results, merged in input
/// order by the caller regardless of scheduling.
template <typename Fn>
void parallel_frames(std::size_t count, int workers, Fn && fn)
{
  if (workers <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) break;
      fn(i);
    }
  };
  std::vector<std::future<void>> futures;
  const int n = std::min<int>(workers, static_cast<int>(count));
  futures.reserve(static_cast<std::size_t>(n));
  for (int t = 0; t < n; ++t) {
    futures.push_back(std::async(std::launch::async, worker));
  }
  for (auto & f : futures) {
    f.get();
  }
}

}  // namespace

BuildOutputs build_database(
  const Dataset & dataset, vlm::Backend & backend, const fs::path & out_dir)
{
  const io::RunConfig & config = dataset.config;
  fs::create_directories(out_dir / "graphs");
  fs::create_directories(out_dir / "overlays");

  LockedBackend locked(backend);
  BuildOutputs outputs;
  std::vector<std::string> log;

  // abnormal pool: frames whose recorded baseline fails the case rule
  struct Pending
  {
    const io::FrameRecord * frame;
    planner::Polyline gt;
    planner::Polyline baseline;
    mining::CandidateSubgraph candidate;
  };
  std::vector<Pending> abnormal;
  std::vector<mining::CandidateSubgraph> candidates;

  for (const auto & frame : dataset.detections.frames) {
    const auto gt = dataset.gt_for(frame.frame_id);
    const auto baseline = dataset.baseline_for(frame.frame_id);
    if (!gt || !baseline) {
      log.push_back(frame.frame_id + ": no baseline/gt record, not considered for the pool");
      continue;
    }
    const double base_ade = metrics::ade(*baseline, *gt);
    const double base_fde = metrics::fde(*baseline, *gt);
    if (!metrics::classify_case_failure(base_ade, base_fde)) {
      log.push_back(frame.frame_id + ": baseline passes, skipped");
      continue;
    }

    const scene_graph::SceneGraph graph =
      scene_graph::build_scene_graph(frame.frame_id, frame.detections, config.ego);
    util::write_file_atomic(
      out_dir / "graphs" / (frame.frame_id + ".txt"), scene_graph::serialize(graph));

    const auto candidate = mining::extract_candidate(
      graph, config.ego, config.mining.hop_limit, config.mining.min_size);
    if (!candidate) {
      log.push_back(frame.frame_id + ": candidate smaller than min_size, discarded");
      continue;
    }
    candidates.push_back(*candidate);
    abnormal.push_back({&frame, *gt, *baseline, *candidate});
  }
  outputs.abnormal_count = static_cast<int>(abnormal.size());

  // prototype mining over the abnormal pool
  const std::vector<mining::PrototypeCluster> prototypes =
    mining::merge(candidates, config.mining);
  outputs.prototypes_json = mining::manifest_to_json(prototypes);
  util::write_file_atomic(out_dir / "prototypes.json", outputs.prototypes_json);

  // clustering report over prototype features
  {
    nlohmann::json report;
    report["schema"] = "cluster-report/v1";
    report["prototype_count"] = prototypes.size();
    if (prototypes.size() >= 2) {
      std::vector<clustering::FeatureVector> features;
      for (const auto & proto : prototypes) {
        const io::FrameRecord * rep_frame = dataset.frame(proto.representative.source_frame);
        std::optional<Eigen::VectorXd> appearance;
        if (rep_frame) {
          appearance = frame_appearance(*rep_frame);
        }
        if (!appearance) {
          Eigen::VectorXd fallback =
            Eigen::VectorXd::Zero(std::max(1, dataset.detections.appearance_dim));
          fallback[0] = 1.0;
          appearance = fallback;
        }
        features.push_back(clustering::extract_features(proto, *appearance));
      }
      const clustering::FeatureMatrix matrix = clustering::normalize_features(features);
      const int k_hi = std::min<int>(config.k_max, static_cast<int>(prototypes.size()));
      std::map<int, double> sse_by_k;
      std::map<int, clustering::ClusterModel> models;
      for (int k = 2; k <= k_hi; ++k) {
        models[k] = clustering::kmeans(matrix.rows, k, config.seed);
        sse_by_k[k] = models[k].sse;
      }
      nlohmann::json sse_json = nlohmann::json::object();
      for (const auto & [k, sse] : sse_by_k) {
        sse_json[std::to_string(k)] = sse;
      }
      report["sse_by_k"] = sse_json;
      if (sse_by_k.size() >= 3) {
        const auto elbow = clustering::elbow_select(sse_by_k);
        report["k_star"] = elbow.k_star;
        report["monotone"] = elbow.monotone;
        nlohmann::json assignments = nlohmann::json::object();
        const auto & chosen = models.at(elbow.k_star);
        std::map<int, std::vector<std::string>> members;
        for (std::size_t i = 0; i < prototypes.size(); ++i) {
          assignments[prototypes[i].representative.source_frame] =
            chosen.assignments[i];
          members[chosen.assignments[i]].push_back(
            prototypes[i].representative.source_frame);
        }
        report["assignments"] = assignments;
        nlohmann::json member_lists = nlohmann::json::object();
        for (const auto & [cluster_id, frames] : members) {
          member_lists[std::to_string(cluster_id)] = frames;
        }
        report["members"] = member_lists;
      } else {
        report["k_star"] = nullptr;
        report["note"] = "sweep too short for knee selection";
      }
    } else {
      report["note"] = "fewer than two prototypes, clustering skipped";
    }
    outputs.cluster_report_json = report.dump(2) + "\n";
    util::write_file_atomic(out_dir / "clusters.json", outputs.cluster_report_json);
  }

  util::write_file_atomic(
    out_dir / "config_provenance.json", io::config_provenance_json(config));

  auto prototype_ref_for = [&prototypes](const std::string & frame_id) -> std::string {
    for (const auto & proto : prototypes) {
      if (std::find(proto.member_frames.begin(), proto.member_frames.end(), frame_id) !=
          proto.member_frames.end()) {
        return proto.representative.source_frame;
      }
    }
    return frame_id;
  };

  // per-frame constraint generation + verification
  struct BuildResult
  {
    std::optional<casedb::CaseRecord> record;
    std::vector<std::string> log;
  };
  std::vector<BuildResult> results(abnormal.size());

  parallel_frames(abnormal.size(), config.workers, [&](std::size_t i) {
    const Pending & pending = abnormal[i];
    const io::FrameRecord & frame = *pending.frame;
    BuildResult & result = results[i];

    planner::SceneContext scene;
    scene.base_mask = dataset.mask_for(frame.frame_id);
    scene.workzone = dataset.workzone_for(frame);
    scene.start = dataset.start_for(frame);
    scene.lane_center_col = frame.lane_center_col;

    // overlays for the prompt; paths relative to out_dir so reruns match
    const std::string failure_ref = "overlays/" + frame.frame_id + "_failure.ppm";
    const std::string gt_ref = "overlays/" + frame.frame_id + "_expected.ppm";
    render::save_ppm(
      render::render_scene(
        scene.base_mask, scene.workzone, {{pending.baseline, render::kFailureColor}}),
      out_dir / failure_ref);
    render::save_ppm(
      render::render_scene(
        scene.base_mask, scene.workzone, {{pending.gt, render::kGroundTruthColor}}),
      out_dir / gt_ref);

    const Eigen::Vector2d gt_dest = pending.gt.back();
    const AdapterLoopResult loop =
      adapter_loop(locked, config, scene, frame.frame_id, failure_ref, gt_ref, gt_dest);

    if (!loop.error.empty()) {
      result.log.push_back(frame.frame_id + ": backend failure: " + loop.error);
      return;
    }
    if (!loop.ok) {
      result.log.push_back(
        frame.frame_id + ": verification failed after " + std::to_string(loop.history.size()) +
        " attempts");
      return;
    }
    if (frame.pattern_tag.empty()) {
      result.log.push_back(frame.frame_id + ": verified but missing pattern_tag, not stored");
      return;
    }
    const auto appearance = frame_appearance(frame);
    if (!appearance) {
      result.log.push_back(frame.frame_id + ": verified but no appearance vectors, not stored");
      return;
    }

    casedb::CaseRecord record;
    record.case_id = "case:" + frame.frame_id;
    record.pattern_tag = frame.pattern_tag;
    record.frame_id = frame.frame_id;
    record.detections_file = config.detections;
    record.prototype_ref = prototype_ref_for(frame.frame_id);
    record.constraints = loop.constraints;
    record.mitigation = config.mitigation;
    record.subgraph = pending.candidate;
    record.appearance = *appearance;
    record.verification = to_record(loop.history, true);
    record.sequence_id = frame.sequence_id;
    record.frame_index = frame.frame_index;
    result.record = std::move(record);
  });

  for (auto & result : results) {
    log.insert(log.end(), result.log.begin(), result.log.end());
    if (result.record) {
      outputs.db.add_case(std::move(*result.record));
      ++outputs.stored_count;
    } else {
      ++outputs.failed_count;
    }
  }

  nlohmann::json report = {
    {"schema", "build-report/v1"},
    {"abnormal", outputs.abnormal_count},
    {"stored", outputs.stored_count},
    {"failed", outputs.failed_count},
    {"log", log},
  };
  outputs.build_report_json = report.dump(2) + "\n";
  util::write_file_atomic(out_dir / "build_report.json", outputs.build_report_json);
  return outputs;
}

InferOutputs infer(
  const Dataset & dataset, const io::FrameRecord & frame, const casedb::CaseDatabase & db,
  vlm::Backend & backend, const fs::path & out_dir)
{
  const io::RunConfig & config = dataset.config;
  fs::create_directories(out_dir / "overlays");
  LockedBackend locked(backend);

  planner::SceneContext scene;
  scene.base_mask = dataset.mask_for(frame.frame_id);
  scene.workzone = dataset.workzone_for(frame);
  scene.start = dataset.start_for(frame);
  scene.lane_center_col = frame.lane_center_col;

  const scene_graph::SceneGraph graph =
    scene_graph::build_scene_graph(frame.frame_id, frame.detections, config.ego);
  const auto candidate = mining::extract_candidate(
    graph, config.ego, config.mining.hop_limit, config.mining.min_size);
  const auto appearance = frame_appearance(frame);

  retrieval::RetrievalResult retrieved;
  retrieval::Decision decision{false, ""};
  retrieval::Query query;
  query.frame_id = frame.frame_id;
  query.sequence_id = frame.sequence_id;
  query.frame_index = frame.frame_index;
  if (candidate && appearance && db.size() > 0) {
    query.prototype = *candidate;
    query.appearance = *appearance;
    retrieved = retrieval::retrieve_topk(query, db, config.retrieval);
    decision = retrieval::dispatch(retrieved);
  } else {
    retrieved.query_frame = frame.frame_id;
  }

  InferOutputs outputs;
  std::vector<planner::VerificationFeedback> history;
  if (decision.use_case) {
    const casedb::CaseRecord * record = db.find(decision.case_id);
    const planner::MitigationOutcome outcome = planner::mitigate_with_retry(
      scene, record->constraints, record->mitigation, std::nullopt, config.ego,
      config.thresholds, config.max_iter);
    outputs.trajectory = outcome.trajectory;
    outputs.verified = outcome.verified;
    outputs.decision = "use_case:" + decision.case_id;
    history = outcome.history;
  } else {
    // fallback: the backend reasons about the scene directly
    const std::string scene_ref = "overlays/" + frame.frame_id + "_scene.ppm";
    render::save_ppm(
      render::render_scene(scene.base_mask, scene.workzone, {}), out_dir / scene_ref);
    const AdapterLoopResult loop =
      adapter_loop(locked, config, scene, frame.frame_id, scene_ref, scene_ref, std::nullopt);
    if (!loop.error.empty()) {
      throw Error(ErrorKind::fixture_miss, frame.frame_id + ": fallback failed: " + loop.error);
    }
    outputs.trajectory = loop.trajectory;
    if (outputs.trajectory.points.empty()) {
      outputs.trajectory.points.assign(planner::kTrajectoryPoints, scene.start);
    }
    outputs.verified = loop.ok;
    outputs.decision = "fallback_vlm";
    history = loop.history;
  }

  nlohmann::json trace =
    nlohmann::json::parse(retrieval::trace_to_json(query, retrieved, decision));
  trace["decision"] = outputs.decision;
  trace["verified"] = outputs.verified;
  trace["verification_history"] = history_to_json(history);
  trace["trajectory"] = points_to_json(outputs.trajectory.points);
  trace["candidate_found"] = candidate.has_value();
  outputs.trace_json = trace.dump(2) + "\n";
  return outputs;
}

}  // namespace wzplan::pipeline
