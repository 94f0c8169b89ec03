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

#include "wzplan/errors.hpp"
#include "wzplan/util.hpp"

#include <algorithm>
#include <set>
#include <sstream>
#include <unordered_set>

namespace wzplan::scene_graph
{

namespace
{

struct LabelEntry
{
  NodeLabel label;
  const char * token;
  const char * display;
};

constexpr LabelEntry kLabels[] = {
  {NodeLabel::drum, "drum", "drum"},
  {NodeLabel::cone, "cone", "cone"},
  {NodeLabel::work_vehicle, "work_vehicle", "work vehicle"},
  {NodeLabel::ttc_sign, "ttc_sign", "ttc sign"},
  {NodeLabel::fence, "fence", "fence"},
  {NodeLabel::barricade, "barricade", "barricade"},
  {NodeLabel::barrier, "barrier", "barrier"},
  {NodeLabel::worker, "worker", "worker"},
  {NodeLabel::tubular_marker, "tubular_marker", "tubular marker"},
  {NodeLabel::vertical_panel, "vertical_panel", "vertical panel"},
  {NodeLabel::ego, "ego", "ego"},
  {NodeLabel::LeftLane, "LeftLane", "Left Lane"},
  {NodeLabel::MiddleLane, "MiddleLane", "Middle Lane"},
  {NodeLabel::RightLane, "RightLane", "Right Lane"},
  {NodeLabel::RootRoad, "RootRoad", "Root Road"},
};

constexpr const char * kRelationTokens[] = {
  "inFrontOf", "toLeftOf",  "toRightOf", "near_collision", "super_near",
  "very_near", "near",      "visible",   "isIn",
};

}  // namespace

bool is_workzone_category(NodeLabel label)
{
  return static_cast<int>(label) < kWorkzoneCategoryCount;
}

const char * label_token(NodeLabel label)
{
  return kLabels[static_cast<int>(label)].token;
}

const char * label_display(NodeLabel label)
{
  return kLabels[static_cast<int>(label)].display;
}

NodeLabel parse_label(const std::string & text)
{
  for (const auto & entry : kLabels) {
    if (text == entry.token || text == entry.display) {
      return entry.label;
    }
  }
  throw Error(ErrorKind::schema, "unknown node label: '" + text + "'");
}

NodeLabel parse_category(const std::string & text)
{
  const NodeLabel label = parse_label(text);
  if (!is_workzone_category(label)) {
    throw Error(ErrorKind::schema, "not a work-zone category: '" + text + "'");
  }
  return label;
}

RelationFamily relation_family(Relation r)
{
  switch (r) {
    case Relation::inFrontOf:
    case Relation::toLeftOf:
    case Relation::toRightOf:
      return RelationFamily::direction;
    case Relation::near_collision:
    case Relation::super_near:
    case Relation::very_near:
    case Relation::near_:
    case Relation::visible:
      return RelationFamily::proximity;
    case Relation::isIn:
      return RelationFamily::membership;
  }
  return RelationFamily::membership;
}

const char * relation_token(Relation r)
{
  return kRelationTokens[static_cast<int>(r)];
}

Relation parse_relation(const std::string & text)
{
  for (int i = 0; i < kRelationCount; ++i) {
    if (text == kRelationTokens[i]) {
      return static_cast<Relation>(i);
    }
  }
  throw Error(ErrorKind::schema, "unknown relation: '" + text + "'");
}

Relation to_relation(geometry::DirRelation r)
{
  switch (r) {
    case geometry::DirRelation::inFrontOf: return Relation::inFrontOf;
    case geometry::DirRelation::toLeftOf:  return Relation::toLeftOf;
    case geometry::DirRelation::toRightOf: return Relation::toRightOf;
  }
  return Relation::inFrontOf;
}

Relation to_relation(geometry::ProxRelation r)
{
  switch (r) {
    case geometry::ProxRelation::near_collision: return Relation::near_collision;
    case geometry::ProxRelation::super_near:     return Relation::super_near;
    case geometry::ProxRelation::very_near:      return Relation::very_near;
    case geometry::ProxRelation::near_:          return Relation::near_;
    case geometry::ProxRelation::visible:        return Relation::visible;
  }
  return Relation::visible;
}

std::string lane_node_id(geometry::LaneId lane)
{
  switch (lane) {
    case geometry::LaneId::LeftLane:   return "lane:left";
    case geometry::LaneId::MiddleLane: return "lane:middle";
    case geometry::LaneId::RightLane:  return "lane:right";
  }
  return "lane:middle";
}

std::string detection_node_id(std::int64_t instance_id)
{
  return "det:" + std::to_string(instance_id);
}

SceneGraph build_scene_graph(
  const std::string & frame_id, const std::vector<Detection> & detections,
  const geometry::EgoConfig & cfg)
{
  if (!cfg.valid()) {
    throw Error(ErrorKind::invalid_input, "build_scene_graph: invalid ego config");
  }

  SceneGraph g;
  g.frame_id = frame_id;
  g.nodes[kEgoId] = Node{NodeLabel::ego, geometry::EgoPoint{0.0, 0.0}, {}, {}};
  g.nodes[lane_node_id(geometry::LaneId::LeftLane)] = Node{NodeLabel::LeftLane, {}, {}, {}};
  g.nodes[lane_node_id(geometry::LaneId::MiddleLane)] = Node{NodeLabel::MiddleLane, {}, {}, {}};
  g.nodes[lane_node_id(geometry::LaneId::RightLane)] = Node{NodeLabel::RightLane, {}, {}, {}};
  g.nodes[kRootRoadId] = Node{NodeLabel::RootRoad, {}, {}, {}};

  const geometry::Pose ego_pose{};  // origin, psi = 0

  std::unordered_set<std::int64_t> seen_ids;
  for (const Detection & det : detections) {
    if (!is_workzone_category(det.category)) {
      throw Error(ErrorKind::schema, frame_id + ": detection label is not a work-zone category");
    }
    if (!seen_ids.insert(det.instance_id).second) {
      throw Error(
        ErrorKind::schema,
        frame_id + ": duplicate instance_id " + std::to_string(det.instance_id));
    }
    if (det.depth < 0.0) {
      throw Error(
        ErrorKind::schema,
        frame_id + ": negative depth on instance " + std::to_string(det.instance_id));
    }

    const geometry::EgoPoint pos = geometry::pixel_to_ego(det.bbox, cfg);
    const std::string id = detection_node_id(det.instance_id);
    g.nodes[id] = Node{det.category, pos, det.bbox, det.depth};

    const double theta = geometry::bearing_from_forward(ego_pose, pos);
    const auto dir = geometry::classify_direction(theta, cfg.alpha);
    g.edges.push_back({kEgoId, id, to_relation(dir)});

    if (const auto prox = geometry::classify_proximity(det.depth)) {
      g.edges.push_back({kEgoId, id, to_relation(*prox)});
    }

    const auto lane = geometry::assign_lane(pos.x(), cfg.lane_half_width);
    g.edges.push_back({id, lane_node_id(lane), Relation::isIn});
  }

  for (auto lane : {geometry::LaneId::LeftLane, geometry::LaneId::MiddleLane,
                    geometry::LaneId::RightLane}) {
    g.edges.push_back({lane_node_id(lane), kRootRoadId, Relation::isIn});
  }

  return g;
}

std::vector<std::string> validate(const SceneGraph & graph)
{
  std::vector<std::string> violations;
  auto flag = [&violations](const std::string & message) { violations.push_back(message); };

  int ego_count = 0;
  int root_count = 0;
  std::set<NodeLabel> lanes_seen;
  for (const auto & [id, node] : graph.nodes) {
    switch (node.label) {
      case NodeLabel::ego:
        ++ego_count;
        break;
      case NodeLabel::RootRoad:
        ++root_count;
        break;
      case NodeLabel::LeftLane:
      case NodeLabel::MiddleLane:
      case NodeLabel::RightLane:
        if (!lanes_seen.insert(node.label).second) {
          flag("duplicate lane node '" + id + "'");
        }
        break;
      default:
        break;
    }
  }
  if (ego_count != 1) {
    flag(ego_count == 0 ? "missing ego node" : "multiple ego nodes");
  }
  if (root_count != 1) {
    flag(root_count == 0 ? "missing RootRoad node" : "multiple RootRoad nodes");
  }
  if (lanes_seen.size() != 3) {
    flag("expected exactly three lane nodes");
  }

  auto label_of = [&graph](const std::string & id) -> std::optional<NodeLabel> {
    auto it = graph.nodes.find(id);
    if (it == graph.nodes.end()) return std::nullopt;
    return it->second.label;
  };
  auto is_lane = [](NodeLabel l) {
    return l == NodeLabel::LeftLane || l == NodeLabel::MiddleLane || l == NodeLabel::RightLane;
  };

  std::map<std::string, int> dir_edges, prox_edges, is_in_edges;
  for (const Edge & e : graph.edges) {
    const std::string desc =
      "edge (" + e.src + ", " + relation_token(e.relation) + ", " + e.dst + ")";
    if (e.src == e.dst) {
      flag(desc + ": self loop");
      continue;
    }
    const auto src_label = label_of(e.src);
    const auto dst_label = label_of(e.dst);
    if (!src_label || !dst_label) {
      flag(desc + ": endpoint not in node set");
      continue;
    }
    switch (relation_family(e.relation)) {
      case RelationFamily::direction:
        if (*src_label != NodeLabel::ego || !is_workzone_category(*dst_label)) {
          flag(desc + ": direction edges must go ego -> work-zone entity");
        } else {
          ++dir_edges[e.dst];
        }
        break;
      case RelationFamily::proximity:
        if (*src_label != NodeLabel::ego || !is_workzone_category(*dst_label)) {
          flag(desc + ": proximity edges must go ego -> work-zone entity");
        } else {
          ++prox_edges[e.dst];
        }
        break;
      case RelationFamily::membership:
        if (is_workzone_category(*src_label) && is_lane(*dst_label)) {
          ++is_in_edges[e.src];
        } else if (is_lane(*src_label) && *dst_label == NodeLabel::RootRoad) {
          ++is_in_edges[e.src];
        } else {
          flag(desc + ": isIn edges must go entity -> lane or lane -> RootRoad");
        }
        break;
    }
  }

  for (const auto & [id, node] : graph.nodes) {
    if (is_workzone_category(node.label)) {
      if (dir_edges[id] != 1) {
        flag("node '" + id + "': expected exactly one direction edge from ego, found " +
             std::to_string(dir_edges[id]));
      }
      if (prox_edges[id] > 1) {
        flag("node '" + id + "': more than one proximity edge from ego");
      }
      if (is_in_edges[id] != 1) {
        flag("node '" + id + "': expected exactly one isIn edge to a lane, found " +
             std::to_string(is_in_edges[id]));
      }
    } else if (is_lane(node.label)) {
      if (is_in_edges[id] != 1) {
        flag("node '" + id + "': lane must have exactly one isIn edge to RootRoad");
      }
    }
  }

  return violations;
}

std::string serialize(const SceneGraph & graph)
{
  std::ostringstream out;
  out << "scene-graph/v1\n";
  out << "frame " << graph.frame_id << "\n";
  for (const auto & [id, node] : graph.nodes) {
    out << "node " << id << " " << label_token(node.label);
    if (node.position) {
      out << " pos " << util::fmt_double(node.position->x()) << " "
          << util::fmt_double(node.position->y());
    }
    if (node.bbox) {
      out << " bbox " << util::fmt_double(node.bbox->x) << " " << util::fmt_double(node.bbox->y)
          << " " << util::fmt_double(node.bbox->w) << " " << util::fmt_double(node.bbox->h);
    }
    if (node.depth) {
      out << " depth " << util::fmt_double(*node.depth);
    }
    out << "\n";
  }

  std::vector<std::string> lines;
  lines.reserve(graph.edges.size());
  for (const Edge & e : graph.edges) {
    lines.push_back("edge " + e.src + " " + std::string(relation_token(e.relation)) + " " + e.dst);
  }
  std::sort(lines.begin(), lines.end());
  for (const std::string & line : lines) {
    out << line << "\n";
  }
  return out.str();
}

}  // namespace wzplan::scene_graph
