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

#include "wzplan/clustering.hpp"
#include "wzplan/errors.hpp"
#include "wzplan/metrics.hpp"
#include "wzplan/pipeline.hpp"
#include "wzplan/render.hpp"
#include "wzplan/retrieval.hpp"
#include "wzplan/util.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <iostream>

namespace
{

namespace fs = std::filesystem;
using namespace wzplan;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitVerification = 4;

struct Options
{
  std::string config;
  std::string input;
  std::string db;
  std::string out = "out";
  int workers = -1;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string backend;
};

void add_common(CLI::App * sub, Options & opts, bool needs_config = true)
{
  auto * config = sub->add_option("--config", opts.config, "pipeline configuration file (JSON)");
  if (needs_config) {
    config->required();
  }
  sub->add_option("--input", opts.input, "input path or frame id (subcommand specific)");
  sub->add_option("--db", opts.db, "case database file");
  sub->add_option("--out", opts.out, "output directory");
  sub->add_option("--workers", opts.workers, "frame-level parallelism (default from config)");
  sub->add_option("--seed", opts.seed, "seed override")->each([&opts](const std::string &) {
    opts.seed_set = true;
  });
  sub->add_option("--backend", opts.backend, "backend override: stub, replay or remote");
}

pipeline::Dataset load_dataset_with_overrides(const Options & opts)
{
  pipeline::Dataset dataset = pipeline::load_dataset(opts.config);
  if (opts.workers > 0) {
    dataset.config.workers = opts.workers;
  }
  if (opts.seed_set) {
    dataset.config.seed = opts.seed;
  }
  if (!opts.backend.empty()) {
    dataset.config.backend = opts.backend;
  }
  return dataset;
}

int cmd_graph(const Options & opts)
{
  const pipeline::Dataset dataset = load_dataset_with_overrides(opts);
  fs::create_directories(opts.out);
  for (const auto & frame : dataset.detections.frames) {
    const auto graph =
      scene_graph::build_scene_graph(frame.frame_id, frame.detections, dataset.config.ego);
    util::write_file_atomic(
      fs::path(opts.out) / (frame.frame_id + ".txt"), scene_graph::serialize(graph));
  }
  std::cout << "wrote " << dataset.detections.frames.size() << " scene graphs to " << opts.out
            << "\n";
  return kExitOk;
}

int cmd_mine(const Options & opts)
{
  const pipeline::Dataset dataset = load_dataset_with_overrides(opts);
  fs::create_directories(opts.out);
  std::vector<mining::CandidateSubgraph> candidates;
  for (const auto & frame : dataset.detections.frames) {
    const auto graph =
      scene_graph::build_scene_graph(frame.frame_id, frame.detections, dataset.config.ego);
    const auto candidate = mining::extract_candidate(
      graph, dataset.config.ego, dataset.config.mining.hop_limit,
      dataset.config.mining.min_size);
    if (candidate) {
      candidates.push_back(*candidate);
    }
  }
  const auto clusters = mining::merge(candidates, dataset.config.mining);
  util::write_file_atomic(
    fs::path(opts.out) / "prototypes.json", mining::manifest_to_json(clusters));
  std::cout << "mined " << candidates.size() << " candidates into " << clusters.size()
            << " prototypes\n";
  return kExitOk;
}

int cmd_cluster(const Options & opts)
{
  const pipeline::Dataset dataset = load_dataset_with_overrides(opts);
  const fs::path manifest_path =
    opts.input.empty() ? fs::path(opts.out) / "prototypes.json" : fs::path(opts.input);
  const auto clusters = mining::parse_manifest(util::read_file(manifest_path));
  if (clusters.size() < 2) {
    throw Error(ErrorKind::invalid_input, "cluster: need at least two prototypes");
  }

  std::vector<clustering::FeatureVector> features;
  for (const auto & proto : clusters) {
    Eigen::VectorXd appearance =
      Eigen::VectorXd::Zero(std::max(1, dataset.detections.appearance_dim));
    appearance[0] = 1.0;
    if (const auto * frame = dataset.frame(proto.representative.source_frame)) {
      std::vector<Eigen::VectorXd> embeddings;
      for (const auto & det : frame->detections) {
        if (det.appearance) embeddings.push_back(*det.appearance);
      }
      if (!embeddings.empty()) {
        appearance = clustering::aggregate_appearance(embeddings);
      }
    }
    features.push_back(clustering::extract_features(proto, appearance));
  }
  const auto matrix = clustering::normalize_features(features);
  const int k_hi = std::min<int>(dataset.config.k_max, static_cast<int>(features.size()));
  std::map<int, double> sse_by_k;
  for (int k = 2; k <= k_hi; ++k) {
    sse_by_k[k] = clustering::kmeans(matrix.rows, k, dataset.config.seed).sse;
  }
  nlohmann::json sse_json = nlohmann::json::object();
  for (const auto & [k, sse] : sse_by_k) {
    sse_json[std::to_string(k)] = sse;
  }
  nlohmann::json report = {{"schema", "cluster-report/v1"}, {"sse_by_k", sse_json}};
  if (sse_by_k.size() >= 3) {
    const auto elbow = clustering::elbow_select(sse_by_k);
    report["k_star"] = elbow.k_star;
    report["monotone"] = elbow.monotone;
  }
  fs::create_directories(opts.out);
  util::write_file_atomic(fs::path(opts.out) / "clusters.json", report.dump(2) + "\n");
  std::cout << "cluster report written to " << opts.out << "/clusters.json\n";
  return kExitOk;
}

int cmd_build_db(const Options & opts)
{
  const pipeline::Dataset dataset = load_dataset_with_overrides(opts);
  if (opts.db.empty()) {
    throw CLI::ValidationError("build-db", "--db is required");
  }
  const auto backend = pipeline::make_backend(dataset.config, dataset.root);
  const auto outputs = pipeline::build_database(dataset, *backend, opts.out);
  casedb::save(outputs.db, opts.db);
  std::cout << "abnormal=" << outputs.abnormal_count << " stored=" << outputs.stored_count
            << " failed=" << outputs.failed_count << "\n";
  return outputs.failed_count > 0 ? kExitVerification : kExitOk;
}

int cmd_retrieve(const Options & opts)
{
  const pipeline::Dataset dataset = load_dataset_with_overrides(opts);
  if (opts.db.empty()) {
    throw CLI::ValidationError("retrieve", "--db is required");
  }
  const auto * frame = dataset.frame(opts.input);
  if (!frame) {
    throw Error(ErrorKind::invalid_input, "retrieve: unknown frame id '" + opts.input + "'");
  }
  const auto db = casedb::load(opts.db);
  const auto graph =
    scene_graph::build_scene_graph(frame->frame_id, frame->detections, dataset.config.ego);
  const auto candidate = mining::extract_candidate(
    graph, dataset.config.ego, dataset.config.mining.hop_limit, dataset.config.mining.min_size);
  if (!candidate) {
    throw Error(ErrorKind::invalid_input, "retrieve: frame has no candidate subgraph");
  }
  std::vector<Eigen::VectorXd> embeddings;
  for (const auto & det : frame->detections) {
    if (det.appearance) embeddings.push_back(*det.appearance);
  }
  retrieval::Query query;
  query.frame_id = frame->frame_id;
  query.sequence_id = frame->sequence_id;
  query.frame_index = frame->frame_index;
  query.prototype = *candidate;
  query.appearance = embeddings.empty()
                       ? Eigen::VectorXd::Zero(std::max(1, db.embedding_dim()))
                       : clustering::aggregate_appearance(embeddings);
  const auto result = retrieval::retrieve_topk(query, db, dataset.config.retrieval);
  const auto decision = retrieval::dispatch(result);
  fs::create_directories(opts.out);
  util::write_file_atomic(
    fs::path(opts.out) / ("trace_" + frame->frame_id + ".json"),
    retrieval::trace_to_json(query, result, decision));
  std::cout << (decision.use_case ? "use_case:" + decision.case_id : "fallback_vlm") << "\n";
  return kExitOk;
}

int cmd_plan(const Options & opts)
{
  const pipeline::Dataset dataset = load_dataset_with_overrides(opts);
  const auto * frame = dataset.frame(opts.input);
  if (!frame) {
    throw Error(ErrorKind::invalid_input, "plan: unknown frame id '" + opts.input + "'");
  }

  planner::SceneContext scene;
  scene.base_mask = dataset.mask_for(frame->frame_id);
  scene.workzone = dataset.workzone_for(*frame);
  scene.start = dataset.start_for(*frame);
  scene.lane_center_col = frame->lane_center_col;
  const auto gt = dataset.gt_for(frame->frame_id);
  std::optional<Eigen::Vector2d> gt_dest;
  if (gt) {
    gt_dest = gt->back();
  }

  const casedb::CaseRecord * record = nullptr;
  casedb::CaseDatabase db;
  if (!opts.db.empty()) {
    db = casedb::load(opts.db);
    record = db.find("case:" + frame->frame_id);
  }
  if (!record) {
    throw Error(
      ErrorKind::invalid_input, "plan: no stored case for frame '" + frame->frame_id + "'");
  }

  const auto outcome = planner::mitigate_with_retry(
    scene, record->constraints, record->mitigation, gt_dest, dataset.config.ego,
    dataset.config.thresholds, dataset.config.max_iter);

  fs::create_directories(opts.out);
  io::save_trajectory(
    {frame->frame_id, outcome.trajectory.points},
    fs::path(opts.out) / (frame->frame_id + "_plan.json"));
  for (const auto & fb : outcome.history) {
    std::cout << planner::feedback_text(fb) << "\n";
  }
  std::cout << (outcome.verified ? "verified" : "unverified") << "\n";
  return outcome.verified ? kExitOk : kExitVerification;
}

int cmd_infer(const Options & opts)
{
  pipeline::Dataset dataset = load_dataset_with_overrides(opts);
  if (!opts.input.empty()) {
    dataset.detections = io::load_detections(opts.input);
  }
  if (opts.db.empty()) {
    throw CLI::ValidationError("infer", "--db is required");
  }
  const auto db = casedb::load(opts.db);
  const auto backend = pipeline::make_backend(dataset.config, dataset.root);

  fs::create_directories(fs::path(opts.out) / "traces");
  fs::create_directories(fs::path(opts.out) / "pred");
  bool any_unverified = false;
  for (const auto & frame : dataset.detections.frames) {
    const auto outputs = pipeline::infer(dataset, frame, db, *backend, opts.out);
    util::write_file_atomic(
      fs::path(opts.out) / "traces" / (frame.frame_id + ".json"), outputs.trace_json);
    io::save_trajectory(
      {frame.frame_id, outputs.trajectory.points},
      fs::path(opts.out) / "pred" / (frame.frame_id + ".json"));
    any_unverified = any_unverified || !outputs.verified;
    std::cout << frame.frame_id << ": " << outputs.decision
              << (outputs.verified ? " (verified)" : " (unverified)") << "\n";
  }
  return any_unverified ? kExitVerification : kExitOk;
}

int cmd_eval(const Options & opts)
{
  const pipeline::Dataset dataset = load_dataset_with_overrides(opts);
  if (opts.input.empty()) {
    throw CLI::ValidationError("eval", "--input must point to a prediction directory");
  }
  std::vector<metrics::EvalCase> cases;
  for (const auto & frame : dataset.detections.frames) {
    const fs::path pred_path = fs::path(opts.input) / (frame.frame_id + ".json");
    const auto gt = dataset.gt_for(frame.frame_id);
    if (!fs::exists(pred_path) || !gt) {
      continue;
    }
    metrics::EvalCase c;
    c.case_id = frame.frame_id;
    c.pattern_tag = frame.pattern_tag.empty() ? "untagged" : frame.pattern_tag;
    c.sequence_id = frame.sequence_id;
    c.pred = io::load_trajectory(pred_path).points;
    c.gt = *gt;
    for (const auto & det : frame.detections) {
      c.obstacles.push_back(det.bbox);
    }
    cases.push_back(std::move(c));
  }
  if (cases.empty()) {
    throw Error(ErrorKind::invalid_input, "eval: no (prediction, ground truth) pairs found");
  }
  const auto report = metrics::evaluate(cases, dataset.config.collision_margin_px);
  fs::create_directories(opts.out);
  util::write_file_atomic(
    fs::path(opts.out) / "eval_report.tsv", metrics::report_to_table(report));
  util::write_file_atomic(
    fs::path(opts.out) / "eval_report.json", metrics::report_to_json(report));
  std::cout << "cases=" << report.overall.count << " ade=" << report.overall.ade
            << " fde=" << report.overall.fde << " cr=" << report.overall.cr << "\n";
  return kExitOk;
}

int cmd_render(const Options & opts)
{
  const pipeline::Dataset dataset = load_dataset_with_overrides(opts);
  const auto * frame = dataset.frame(opts.input);
  if (!frame) {
    throw Error(ErrorKind::invalid_input, "render: unknown frame id '" + opts.input + "'");
  }
  std::vector<render::Overlay> overlays;
  if (const auto baseline = dataset.baseline_for(frame->frame_id)) {
    overlays.push_back({*baseline, render::kFailureColor});
  }
  if (const auto gt = dataset.gt_for(frame->frame_id)) {
    overlays.push_back({*gt, render::kGroundTruthColor});
  }
  const auto image = render::render_scene(
    dataset.mask_for(frame->frame_id), dataset.workzone_for(*frame), overlays);
  fs::create_directories(opts.out);
  const fs::path out_path = fs::path(opts.out) / (frame->frame_id + ".ppm");
  render::save_ppm(image, out_path);
  std::cout << "wrote " << out_path.string() << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char ** argv)
{
  CLI::App app{"work-zone scene mining, retrieval and constraint-based trajectory planning"};
  app.require_subcommand(1);

  Options opts;
  add_common(app.add_subcommand("graph", "serialize per-frame scene graphs"), opts);
  add_common(app.add_subcommand("mine", "extract and merge prototype subgraphs"), opts);
  add_common(app.add_subcommand("cluster", "cluster prototypes, SSE sweep + knee"), opts);
  add_common(app.add_subcommand("build-db", "run the offline database construction"), opts);
  add_common(app.add_subcommand("retrieve", "top-K retrieval trace for one frame"), opts);
  add_common(app.add_subcommand("plan", "replan one stored case"), opts);
  add_common(app.add_subcommand("infer", "online inference over a scene set"), opts);
  add_common(app.add_subcommand("eval", "displacement/collision metrics report"), opts);
  add_common(app.add_subcommand("render", "overlay trajectories onto a frame image"), opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp & e) {
    return app.exit(e);
  } catch (const CLI::ParseError & e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (app.got_subcommand("graph")) return cmd_graph(opts);
    if (app.got_subcommand("mine")) return cmd_mine(opts);
    if (app.got_subcommand("cluster")) return cmd_cluster(opts);
    if (app.got_subcommand("build-db")) return cmd_build_db(opts);
    if (app.got_subcommand("retrieve")) return cmd_retrieve(opts);
    if (app.got_subcommand("plan")) return cmd_plan(opts);
    if (app.got_subcommand("infer")) return cmd_infer(opts);
    if (app.got_subcommand("eval")) return cmd_eval(opts);
    if (app.got_subcommand("render")) return cmd_render(opts);
  } catch (const CLI::Error & e) {
    std::cerr << e.what() << "\n";
    return kExitUsage;
  } catch (const Error & e) {
    std::cerr << "error (" << to_string(e.kind()) << "): " << e.what() << "\n";
    switch (e.kind()) {
      case ErrorKind::verification:
      case ErrorKind::no_drivable_space:
      case ErrorKind::infeasible_destination:
      case ErrorKind::no_path:
        return kExitVerification;
      default:
        return kExitData;
    }
  } catch (const std::exception & e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}
