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

#ifndef WZPLAN_SCENE_GRAPH_HPP_
#define WZPLAN_SCENE_GRAPH_HPP_

#include "wzplan/geometry.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace wzplan::scene_graph
{

/// Node labels: the ten work-zone categories plus the auxiliary structure
/// nodes (ego, three virtual lanes, road root).
enum class NodeLabel {
  drum,
  cone,
  work_vehicle,
  ttc_sign,
  fence,
  barricade,
  barrier,
  worker,
  tubular_marker,
  vertical_panel,
  ego,
  LeftLane,
  MiddleLane,
  RightLane,
  RootRoad,
};

constexpr int kWorkzoneCategoryCount = 10;

bool is_workzone_category(NodeLabel label);

/// Canonical single-token form ("work_vehicle"); used in serialized graphs.
const char * label_token(NodeLabel label);
/// Display form as found in detection files ("work vehicle").
const char * label_display(NodeLabel label);
/// Accepts both the display and token spellings. Throws schema error otherwise.
NodeLabel parse_category(const std::string & text);
NodeLabel parse_label(const std::string & text);

/// Edge relations: three direction labels, five proximity labels, and isIn.
enum class Relation {
  inFrontOf,
  toLeftOf,
  toRightOf,
  near_collision,
  super_near,
  very_near,
  near_,
  visible,
  isIn,
};

constexpr int kRelationCount = 9;

enum class RelationFamily { direction, proximity, membership };

RelationFamily relation_family(Relation r);
const char * relation_token(Relation r);
Relation parse_relation(const std::string & text);

Relation to_relation(geometry::DirRelation r);
Relation to_relation(geometry::ProxRelation r);

/// One ingested work-zone detection. Depth and appearance come with the
/// data; nothing is estimated here.
struct Detection
{
  NodeLabel category = NodeLabel::cone;
  geometry::PixelBox bbox;
  double depth = 0.0;  // meters
  std::int64_t instance_id = 0;
  std::optional<Eigen::VectorXd> appearance;  // unit-norm embedding
};

struct Node
{
  NodeLabel label = NodeLabel::ego;
  std::optional<geometry::EgoPoint> position;  // ego-plane meters
  std::optional<geometry::PixelBox> bbox;
  std::optional<double> depth;
};

struct Edge
{
  std::string src;
  std::string dst;
  Relation relation = Relation::isIn;

  friend bool operator==(const Edge &, const Edge &) = default;
};

/// Directed labeled multigraph over ego + work-zone entities + virtual lanes.
/// Node ids are stable: "ego", "lane:left", "lane:middle", "lane:right",
/// "road:root", "det:<instance_id>".
struct SceneGraph
{
  std::string frame_id;
  std::map<std::string, Node> nodes;
  std::vector<Edge> edges;
};

inline const char * kEgoId = "ego";
inline const char * kRootRoadId = "road:root";

std::string lane_node_id(geometry::LaneId lane);
std::string detection_node_id(std::int64_t instance_id);

/// Builds the per-frame graph: auxiliary nodes, one node per detection,
/// ego-sourced direction edges, ego-sourced proximity edges for depths
/// under 25 m, and lane-membership edges. Direction uses the bearing from
/// the ego forward axis so that an object at the image center reads as
/// dead ahead. Throws schema errors on unknown categories or duplicate
/// instance ids.
SceneGraph build_scene_graph(
  const std::string & frame_id, const std::vector<Detection> & detections,
  const geometry::EgoConfig & cfg);

/// Returns an empty list iff all structural invariants hold; otherwise one
/// human-readable violation per broken rule, naming the node or edge.
std::vector<std::string> validate(const SceneGraph & graph);

/// Canonical text form: sorted node ids, sorted edge triplets, shortest
/// round-trip float formatting. Byte-stable for golden tests.
std::string serialize(const SceneGraph & graph);

}  // namespace wzplan::scene_graph

#endif  // WZPLAN_SCENE_GRAPH_HPP_
