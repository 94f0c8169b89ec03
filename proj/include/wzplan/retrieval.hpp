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

#ifndef WZPLAN_RETRIEVAL_HPP_
#define WZPLAN_RETRIEVAL_HPP_

#include "wzplan/casedb.hpp"
#include "wzplan/mining.hpp"

#include <Eigen/Core>

#include <string>
#include <vector>

namespace wzplan::retrieval
{

struct RetrievalParams
{
  double depth_divisor = 3.5;     // meters
  double bbox_divisor = 960.0;    // max(image width, image height), pixels
  double similarity_threshold = 0.8;
  int top_k = 5;
};

/// The (structural, depth, bbox-radius) similarity triple; each component
/// lies in [0, 1].
struct TripletSim
{
  double sim_struct = 0.0;
  double sim_depth = 0.0;
  double sim_bbox = 0.0;

  double min() const;
};

/// sim_struct averages the Jaccard similarities of the label and relation
/// sets (multisets collapsed; two empty sets count as identical).
/// sim_depth and sim_bbox are 1 minus the normalized absolute difference
/// of the subgraph scale statistics, clamped at 0.
TripletSim triplet_similarity(
  const mining::CandidateSubgraph & a, const mining::CandidateSubgraph & b,
  const RetrievalParams & params = {});

/// True iff all three components reach the threshold (min >= 0.8 by
/// default). False marks the query prototype independent; such queries are
/// surfaced for human review and planned by the fallback path.
bool is_non_independent(const TripletSim & sim, double threshold = 0.8);

struct RankedCase
{
  std::string case_id;
  double appearance_score = 0.0;
  TripletSim triplet;
  bool non_independent = false;
  bool temporal_prefix = false;  // same sequence, strictly earlier frame
};

struct RetrievalResult
{
  std::string query_frame;
  std::vector<RankedCase> ranked;  // tier 1 (temporal prefix) first
};

struct Query
{
  std::string frame_id;
  std::string sequence_id;
  int frame_index = 0;
  mining::CandidateSubgraph prototype;
  Eigen::VectorXd appearance;
};

/// Cases from the query's own sequence with a strictly smaller frame index
/// form the first tier; everything else the second. Within a tier, ranking
/// is by appearance cosine (descending, ties by case id). The first K
/// overall are annotated with their triplet similarity against the query.
RetrievalResult retrieve_topk(
  const Query & query, const casedb::CaseDatabase & db, const RetrievalParams & params = {});

struct Decision
{
  bool use_case = false;  // false = fall back to VLM reasoning
  std::string case_id;
};

/// Reuses the top candidate's stored mitigation iff it passes the
/// similarity threshold; otherwise falls back.
Decision dispatch(const RetrievalResult & result);

/// Audit trace for one query (JSON): tiers, scores, triplet values, decision.
std::string trace_to_json(
  const Query & query, const RetrievalResult & result, const Decision & decision);

}  // namespace wzplan::retrieval

#endif  // WZPLAN_RETRIEVAL_HPP_
