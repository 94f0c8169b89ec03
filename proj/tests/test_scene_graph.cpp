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

#include "wzplan/scene_graph.hpp"

#include "support/oracles.hpp"
#include "wzplan/errors.hpp"

#include <doctest.h>

#include <algorithm>
#include <random>

using namespace wzplan;
using namespace wzplan::scene_graph;

namespace
{

geometry::EgoConfig test_cfg()
{
  return geometry::EgoConfig::with_image_size(960, 540);
}

Detection make_det(NodeLabel cat, double x, double y, double w, double h, double depth,
                   std::int64_t id)
{
  Detection det;
  det.category = cat;
  det.bbox = {x, y, w, h};
  det.depth = depth;
  det.instance_id = id;
  return det;
}

bool has_edge(const SceneGraph & g, const std::string & src, Relation r, const std::string & dst)
{
  return std::find(g.edges.begin(), g.edges.end(), Edge{src, dst, r}) != g.edges.end();
}

}  // namespace

TEST_CASE("empty frame yields only auxiliary structure")
{
  const SceneGraph g = build_scene_graph("f0", {}, test_cfg());
  CHECK(g.nodes.size() == 5);
  CHECK(g.edges.size() == 3);
  for (const auto & e : g.edges) {
    CHECK(e.relation == Relation::isIn);
    CHECK(e.dst == kRootRoadId);
  }
  CHECK(validate(g).empty());
}

TEST_CASE("centered cone gets front, near-collision and middle-lane edges")
{
  const SceneGraph g = build_scene_graph(
    "f1", {make_det(NodeLabel::cone, 470, 260, 20, 20, 3.0, 7)}, test_cfg());
  CHECK(g.nodes.size() == 6);
  CHECK(has_edge(g, "ego", Relation::inFrontOf, "det:7"));
  CHECK(has_edge(g, "ego", Relation::near_collision, "det:7"));
  CHECK(has_edge(g, "det:7", Relation::isIn, "lane:middle"));
  CHECK(validate(g).empty());
}

TEST_CASE("deep detections get no proximity edge")
{
  const SceneGraph g = build_scene_graph(
    "f2", {make_det(NodeLabel::drum, 470, 100, 20, 20, 30.0, 1)}, test_cfg());
  int prox_edges = 0;
  for (const auto & e : g.edges) {
    if (relation_family(e.relation) == RelationFamily::proximity) ++prox_edges;
  }
  CHECK(prox_edges == 0);
  CHECK(has_edge(g, "ego", Relation::inFrontOf, "det:1"));
  CHECK(has_edge(g, "det:1", Relation::isIn, "lane:middle"));
  CHECK(validate(g).empty());
}

TEST_CASE("side objects read as left/right and land in side lanes")
{
  const SceneGraph g = build_scene_graph(
    "f3",
    {make_det(NodeLabel::drum, 700, 260, 20, 20, 8.0, 1),   // right of center
     make_det(NodeLabel::cone, 240, 260, 20, 20, 8.0, 2)},  // left of center
    test_cfg());
  CHECK(has_edge(g, "ego", Relation::toRightOf, "det:1"));
  CHECK(has_edge(g, "det:1", Relation::isIn, "lane:right"));
  CHECK(has_edge(g, "ego", Relation::toLeftOf, "det:2"));
  CHECK(has_edge(g, "det:2", Relation::isIn, "lane:left"));
}

TEST_CASE("duplicate instance ids are a schema error")
{
  CHECK_THROWS_AS(
    build_scene_graph(
      "f4",
      {make_det(NodeLabel::cone, 100, 100, 10, 10, 5.0, 1),
       make_det(NodeLabel::drum, 200, 200, 10, 10, 5.0, 1)},
      test_cfg()),
    Error);
}

TEST_CASE("category parsing accepts table spellings and rejects unknowns")
{
  CHECK(parse_category("work vehicle") == NodeLabel::work_vehicle);
  CHECK(parse_category("work_vehicle") == NodeLabel::work_vehicle);
  CHECK(parse_category("ttc sign") == NodeLabel::ttc_sign);
  CHECK_THROWS_AS(parse_category("bollard"), Error);
  CHECK_THROWS_AS(parse_category("ego"), Error);  // aux labels are not categories
}

TEST_CASE("node and edge counts follow the construction rules")
{
  std::mt19937_64 rng(31);
  const auto cfg = test_cfg();
  for (int i = 0; i < 50; ++i) {
    const SceneGraph g = test_support::random_scene_graph(rng, cfg, 8);
    const std::size_t dets = g.nodes.size() - 5;
    std::size_t dir = 0, is_in = 0;
    for (const auto & e : g.edges) {
      if (relation_family(e.relation) == RelationFamily::direction) ++dir;
      if (e.relation == Relation::isIn) ++is_in;
    }
    CHECK(dir == dets);
    CHECK(is_in == dets + 3);
    CHECK(validate(g).empty());
  }
}

TEST_CASE("serialization is canonical and deterministic")
{
  const auto cfg = test_cfg();
  const std::vector<Detection> dets = {
    make_det(NodeLabel::cone, 470, 260, 20, 20, 3.0, 2),
    make_det(NodeLabel::drum, 700, 260, 20, 20, 8.0, 1),
  };
  std::vector<Detection> reversed(dets.rbegin(), dets.rend());
  const std::string a = serialize(build_scene_graph("f", dets, cfg));
  const std::string b = serialize(build_scene_graph("f", reversed, cfg));
  CHECK(a == b);
  CHECK(a.find("scene-graph/v1") == 0);
}

TEST_CASE("validate flags missing lane membership")
{
  SceneGraph g = build_scene_graph(
    "f5", {make_det(NodeLabel::cone, 470, 260, 20, 20, 3.0, 1)}, test_cfg());
  std::erase_if(g.edges, [](const Edge & e) {
    return e.relation == Relation::isIn && e.src == "det:1";
  });
  const auto violations = validate(g);
  REQUIRE(violations.size() == 1);
  CHECK(violations[0].find("det:1") != std::string::npos);
}

TEST_CASE("validate flags a second ego node")
{
  SceneGraph g = build_scene_graph("f6", {}, test_cfg());
  g.nodes["ego2"] = Node{NodeLabel::ego, geometry::EgoPoint{0, 0}, {}, {}};
  const auto violations = validate(g);
  REQUIRE_FALSE(violations.empty());
  CHECK(violations[0].find("multiple ego nodes") != std::string::npos);
}

TEST_CASE("validate flags direction edges not sourced at ego")
{
  SceneGraph g = build_scene_graph(
    "f7",
    {make_det(NodeLabel::cone, 470, 260, 20, 20, 3.0, 1),
     make_det(NodeLabel::drum, 700, 260, 20, 20, 8.0, 2)},
    test_cfg());
  g.edges.push_back({"det:1", "det:2", Relation::toLeftOf});
  const auto violations = validate(g);
  REQUIRE_FALSE(violations.empty());
}
