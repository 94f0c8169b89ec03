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

#include "wzplan/retrieval.hpp"

#include "wzplan/errors.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <set>

namespace wzplan::retrieval
{

namespace
{

template <typename T>
double jaccard(const std::set<T> & a, const std::set<T> & b)
{
  if (a.empty() && b.empty()) {
    return 1.0;  // identical emptiness
  }
  std::size_t inter = 0;
  for (const T & x : a) {
    inter += b.count(x);
  }
  const std::size_t uni = a.size() + b.size() - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

double cosine(const Eigen::VectorXd & a, const Eigen::VectorXd & b)
{
  if (a.size() != b.size()) return 0.0;
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) return 0.0;
  return a.dot(b) / (na * nb);
}

}  // namespace

double TripletSim::min() const
{
  return std::min(sim_struct, std::min(sim_depth, sim_bbox));
}

TripletSim triplet_similarity(
  const mining::CandidateSubgraph & a, const mining::CandidateSubgraph & b,
  const RetrievalParams & params)
{
  std::set<scene_graph::NodeLabel> labels_a, labels_b;
  for (const auto & [id, label] : a.nodes) labels_a.insert(label);
  for (const auto & [id, label] : b.nodes) labels_b.insert(label);
  std::set<scene_graph::Relation> rels_a, rels_b;
  for (const auto & e : a.edges) rels_a.insert(e.relation);
  for (const auto & e : b.edges) rels_b.insert(e.relation);

  TripletSim sim;
  sim.sim_struct = 0.5 * (jaccard(labels_a, labels_b) + jaccard(rels_a, rels_b));
  sim.sim_depth =
    std::max(0.0, 1.0 - std::abs(a.mean_depth - b.mean_depth) / params.depth_divisor);
  sim.sim_bbox = std::max(
    0.0, 1.0 - std::abs(a.mean_pixel_radius - b.mean_pixel_radius) / params.bbox_divisor);
  return sim;
}

bool is_non_independent(const TripletSim & sim, double threshold)
{
  return sim.min() >= threshold;
}

RetrievalResult retrieve_topk(
  const Query & query, const casedb::CaseDatabase & db, const RetrievalParams & params)
{
  if (params.top_k < 1) {
    throw Error(ErrorKind::invalid_input, "retrieve_topk: top_k must be >= 1");
  }

  struct Scored
  {
    const casedb::CaseRecord * rec;
    double cosine_score;
    bool prefix;
  };
  std::vector<Scored> scored;
  scored.reserve(db.size());
  for (const auto & [id, rec] : db.records()) {
    const bool prefix =
      rec.sequence_id == query.sequence_id && rec.frame_index < query.frame_index;
    scored.push_back({&rec, cosine(rec.appearance, query.appearance), prefix});
  }
  std::stable_sort(scored.begin(), scored.end(), [](const Scored & a, const Scored & b) {
    if (a.prefix != b.prefix) return a.prefix;  // temporal-prefix tier first
    if (a.cosine_score != b.cosine_score) return a.cosine_score > b.cosine_score;
    return a.rec->case_id < b.rec->case_id;
  });

  RetrievalResult result;
  result.query_frame = query.frame_id;
  const std::size_t take = std::min<std::size_t>(scored.size(), params.top_k);
  for (std::size_t i = 0; i < take; ++i) {
    const TripletSim sim = triplet_similarity(scored[i].rec->subgraph, query.prototype, params);
    result.ranked.push_back({
      scored[i].rec->case_id,
      scored[i].cosine_score,
      sim,
      is_non_independent(sim, params.similarity_threshold),
      scored[i].prefix,
    });
  }
  return result;
}

Decision dispatch(const RetrievalResult & result)
{
  if (result.ranked.empty() || !result.ranked.front().non_independent) {
    return {false, ""};
  }
  return {true, result.ranked.front().case_id};
}

std::string trace_to_json(
  const Query & query, const RetrievalResult & result, const Decision & decision)
{
  nlohmann::json ranked = nlohmann::json::array();
  for (const auto & r : result.ranked) {
    ranked.push_back({
      {"case_id", r.case_id},
      {"appearance_score", r.appearance_score},
      {"sim_struct", r.triplet.sim_struct},
      {"sim_depth", r.triplet.sim_depth},
      {"sim_bbox", r.triplet.sim_bbox},
      {"non_independent", r.non_independent},
      {"temporal_prefix", r.temporal_prefix},
    });
  }
  nlohmann::json j = {
    {"schema", "retrieval-trace/v1"},
    {"query_frame", query.frame_id},
    {"sequence_id", query.sequence_id},
    {"frame_index", query.frame_index},
    {"ranked", ranked},
    {"decision", decision.use_case ? "use_case:" + decision.case_id : "fallback_vlm"},
  };
  return j.dump(2) + "\n";
}

}  // namespace wzplan::retrieval
