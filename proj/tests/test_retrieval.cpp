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

#include "support/oracles.hpp"
#include "wzplan/errors.hpp"

#include <doctest.h>

#include <random>

using namespace wzplan;
using namespace wzplan::retrieval;
using scene_graph::NodeLabel;
using scene_graph::Relation;
using test_support::make_candidate;

namespace
{

casedb::CaseRecord stored_case(
  const std::string & id, const mining::CandidateSubgraph & sub, const Eigen::VectorXd & app,
  const std::string & sequence, int frame_index)
{
  casedb::CaseRecord rec;
  rec.case_id = id;
  rec.pattern_tag = "P1";
  rec.frame_id = id;
  rec.detections_file = "d.jsonl";
  rec.prototype_ref = id;
  rec.constraints = casedb::resolve_constraints({
    {"no_cross_workzone", "no"},
    {"detour_side", "none"},
    {"return_to_original_lane_after_workzone", "False"},
    {"follow_lane_center", "True"},
    {"turn_to_avoid_work_zone", "False"},
    {"return_center_line_after_crossing", "False"},
    {"follow_sign", "False"},
    {"follow_front_car", "False"},
  });
  rec.subgraph = sub;
  rec.appearance = app;
  rec.verification.drivability = {true, 0.0, 10.0};
  rec.verification.pass = true;
  rec.verification.attempts = 1;
  rec.sequence_id = sequence;
  rec.frame_index = frame_index;
  return rec;
}

Eigen::VectorXd unit2(double angle)
{
  Eigen::VectorXd v(2);
  v << std::cos(angle), std::sin(angle);
  return v;
}

}  // namespace

TEST_CASE("triplet similarity of a subgraph with itself is all ones")
{
  const auto sub = make_candidate(
    "f", {NodeLabel::ego, NodeLabel::cone}, {{0, 1, Relation::inFrontOf}}, 5.0, 100.0);
  const TripletSim sim = triplet_similarity(sub, sub);
  CHECK(sim.sim_struct == doctest::Approx(1.0));
  CHECK(sim.sim_depth == doctest::Approx(1.0));
  CHECK(sim.sim_bbox == doctest::Approx(1.0));
}

TEST_CASE("triplet similarity hits the exact zero boundaries")
{
  const auto a = make_candidate(
    "a", {NodeLabel::ego, NodeLabel::cone}, {{0, 1, Relation::inFrontOf}}, 0.0, 0.0);
  const auto b = make_candidate(
    "b", {NodeLabel::drum, NodeLabel::worker}, {{0, 1, Relation::near_}}, 3.5, 960.0);
  const TripletSim sim = triplet_similarity(a, b);
  CHECK(sim.sim_struct == doctest::Approx(0.0));
  CHECK(sim.sim_depth == doctest::Approx(0.0));
  CHECK(sim.sim_bbox == doctest::Approx(0.0));
}

TEST_CASE("triplet similarity hand-computed mixed case")
{
  // label sets {ego, cone} vs {ego, cone, drum}; equal relation sets
  const auto a = make_candidate(
    "a", {NodeLabel::ego, NodeLabel::cone, NodeLabel::cone},
    {{0, 1, Relation::inFrontOf}, {0, 2, Relation::inFrontOf}}, 10.0, 200.0);
  const auto b = make_candidate(
    "b", {NodeLabel::ego, NodeLabel::cone, NodeLabel::drum},
    {{0, 1, Relation::inFrontOf}, {0, 2, Relation::inFrontOf}}, 11.75, 680.0);
  const TripletSim sim = triplet_similarity(a, b);
  CHECK(sim.sim_struct == doctest::Approx(0.5 * (2.0 / 3.0 + 1.0)).epsilon(1e-12));
  CHECK(sim.sim_depth == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(sim.sim_bbox == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("triplet similarity components stay in [0,1] under fuzzing")
{
  std::mt19937_64 rng(61);
  for (int i = 0; i < 500; ++i) {
    const auto a = make_candidate(
      "a", {NodeLabel::ego, NodeLabel::cone}, {{0, 1, Relation::inFrontOf}},
      test_support::uniform(rng, 0.0, 1e4), test_support::uniform(rng, 0.0, 1e4));
    const auto b = make_candidate(
      "b", {NodeLabel::ego, NodeLabel::drum}, {{0, 1, Relation::near_}},
      test_support::uniform(rng, 0.0, 1e4), test_support::uniform(rng, 0.0, 1e4));
    const TripletSim sim = triplet_similarity(a, b);
    for (double v : {sim.sim_struct, sim.sim_depth, sim.sim_bbox}) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
    const TripletSim swapped = triplet_similarity(b, a);
    CHECK(sim.sim_struct == swapped.sim_struct);
    CHECK(sim.sim_depth == swapped.sim_depth);
    CHECK(sim.sim_bbox == swapped.sim_bbox);
  }
}

TEST_CASE("empty-vs-empty relation sets count as identical")
{
  const auto a = make_candidate("a", {NodeLabel::ego}, {}, 1.0, 10.0);
  const auto b = make_candidate("b", {NodeLabel::ego}, {}, 1.0, 10.0);
  CHECK(triplet_similarity(a, b).sim_struct == doctest::Approx(1.0));
}

TEST_CASE("is_non_independent flips exactly at the 0.8 threshold")
{
  CHECK(is_non_independent({0.8, 0.8, 0.8}));
  CHECK_FALSE(is_non_independent({1.0, 1.0, 0.79}));
  CHECK(is_non_independent({0.9, 0.85, 0.95}));
  CHECK_FALSE(is_non_independent({0.9, 0.85, std::nextafter(0.8, 0.0)}));

  std::mt19937_64 rng(67);
  for (int i = 0; i < 300; ++i) {
    const TripletSim sim{test_support::uniform(rng, 0, 1), test_support::uniform(rng, 0, 1),
                         test_support::uniform(rng, 0, 1)};
    CHECK(is_non_independent(sim) == (sim.min() >= 0.8));
  }
}

TEST_CASE("retrieve_topk ranks by cosine and annotates triplets")
{
  const auto sub = make_candidate(
    "q", {NodeLabel::ego, NodeLabel::cone}, {{0, 1, Relation::inFrontOf}}, 5.0, 100.0);
  casedb::CaseDatabase db;
  db.add_case(stored_case("case:x", sub, unit2(0.0), "other", 0));
  db.add_case(stored_case("case:y", sub, unit2(1.0), "other", 0));

  Query query;
  query.frame_id = "q";
  query.sequence_id = "mine";
  query.frame_index = 5;
  query.prototype = sub;
  query.appearance = unit2(0.0);

  const RetrievalResult result = retrieve_topk(query, db);
  REQUIRE(result.ranked.size() == 2);
  CHECK(result.ranked[0].case_id == "case:x");
  CHECK(result.ranked[0].appearance_score == doctest::Approx(1.0));
  CHECK(result.ranked[0].non_independent);
  CHECK(result.ranked[0].triplet.sim_struct == doctest::Approx(1.0));
  CHECK(result.ranked[0].appearance_score >= result.ranked[1].appearance_score);
}

TEST_CASE("temporal prefix outranks higher cosine from other sequences")
{
  const auto sub = make_candidate(
    "q", {NodeLabel::ego, NodeLabel::cone}, {{0, 1, Relation::inFrontOf}}, 5.0, 100.0);
  casedb::CaseDatabase db;
  db.add_case(stored_case("case:same_seq", sub, unit2(1.0), "mine", 2));   // cosine ~0.54
  db.add_case(stored_case("case:other", sub, unit2(0.1), "other", 0));     // cosine ~0.995
  db.add_case(stored_case("case:later", sub, unit2(0.0), "mine", 9));      // later frame

  Query query;
  query.frame_id = "q";
  query.sequence_id = "mine";
  query.frame_index = 5;
  query.prototype = sub;
  query.appearance = unit2(0.0);

  const RetrievalResult result = retrieve_topk(query, db);
  REQUIRE(result.ranked.size() == 3);
  CHECK(result.ranked[0].case_id == "case:same_seq");
  CHECK(result.ranked[0].temporal_prefix);
  // a later frame of the same sequence is no prefix: it falls into tier 2
  // and tier 2 is cosine-sorted (case:later carries cosine 1.0)
  CHECK_FALSE(result.ranked[1].temporal_prefix);
  CHECK(result.ranked[1].case_id == "case:later");
  CHECK(result.ranked[2].case_id == "case:other");
}

TEST_CASE("retrieve_topk truncates to K and tolerates small databases")
{
  const auto sub = make_candidate(
    "q", {NodeLabel::ego, NodeLabel::cone}, {{0, 1, Relation::inFrontOf}}, 5.0, 100.0);
  casedb::CaseDatabase db;
  db.add_case(stored_case("case:a", sub, unit2(0.2), "s", 0));
  db.add_case(stored_case("case:b", sub, unit2(0.4), "s", 1));
  db.add_case(stored_case("case:c", sub, unit2(0.6), "s", 2));

  Query query;
  query.frame_id = "q";
  query.sequence_id = "other";
  query.frame_index = 0;
  query.prototype = sub;
  query.appearance = unit2(0.0);

  RetrievalParams params;
  params.top_k = 5;
  CHECK(retrieve_topk(query, db, params).ranked.size() == 3);
  params.top_k = 2;
  CHECK(retrieve_topk(query, db, params).ranked.size() == 2);
}

TEST_CASE("ranking is invariant to database insertion order")
{
  const auto sub = make_candidate(
    "q", {NodeLabel::ego, NodeLabel::cone}, {{0, 1, Relation::inFrontOf}}, 5.0, 100.0);
  Query query;
  query.frame_id = "q";
  query.sequence_id = "s";
  query.frame_index = 9;
  query.prototype = sub;
  query.appearance = unit2(0.0);

  std::vector<int> order{0, 1, 2, 3};
  std::vector<std::vector<std::string>> rankings;
  do {
    casedb::CaseDatabase db;
    for (int idx : order) {
      db.add_case(
        stored_case("case:" + std::to_string(idx), sub, unit2(0.2 * idx), "s", idx));
    }
    std::vector<std::string> ids;
    for (const auto & r : retrieve_topk(query, db).ranked) {
      ids.push_back(r.case_id);
    }
    rankings.push_back(ids);
  } while (std::next_permutation(order.begin(), order.end()));
  for (const auto & ids : rankings) {
    CHECK(ids == rankings.front());
  }
}

TEST_CASE("dispatch follows the top candidate's flag")
{
  RetrievalResult result;
  result.ranked.push_back({"case:a", 1.0, {1.0, 1.0, 1.0}, true, false});
  CHECK(dispatch(result).use_case);
  CHECK(dispatch(result).case_id == "case:a");

  result.ranked[0] = {"case:a", 1.0, {0.5, 1.0, 1.0}, false, false};
  CHECK_FALSE(dispatch(result).use_case);

  CHECK_FALSE(dispatch(RetrievalResult{}).use_case);
}

TEST_CASE("dispatch only fires at min similarity >= 0.8")
{
  std::mt19937_64 rng(71);
  for (int i = 0; i < 300; ++i) {
    const TripletSim sim{test_support::uniform(rng, 0, 1), test_support::uniform(rng, 0, 1),
                         test_support::uniform(rng, 0, 1)};
    RetrievalResult result;
    result.ranked.push_back({"case:a", 1.0, sim, is_non_independent(sim), false});
    CHECK(dispatch(result).use_case == (sim.min() >= 0.8));
  }
}

TEST_CASE("empty database yields an empty result and fallback")
{
  const auto sub = make_candidate(
    "q", {NodeLabel::ego, NodeLabel::cone}, {{0, 1, Relation::inFrontOf}}, 5.0, 100.0);
  Query query;
  query.frame_id = "q";
  query.prototype = sub;
  query.appearance = unit2(0.0);
  const RetrievalResult result = retrieve_topk(query, casedb::CaseDatabase{});
  CHECK(result.ranked.empty());
  CHECK_FALSE(dispatch(result).use_case);
}
