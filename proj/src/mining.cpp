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

#include "wzplan/mining.hpp"

#include "wzplan/errors.hpp"
#include "wzplan/util.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <deque>
#include <numeric>
#include <set>
#include <sstream>
#include <tuple>

namespace wzplan::mining
{

namespace
{

using scene_graph::NodeLabel;
using scene_graph::Relation;

/// Plain union-find over candidate indices.
class DisjointSet
{
public:
  explicit DisjointSet(std::size_t n) : parent_(n)
  {
    std::iota(parent_.begin(), parent_.end(), 0);
  }

  std::size_t find(std::size_t x)
  {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  void unite(std::size_t a, std::size_t b)
  {
    a = find(a);
    b = find(b);
    if (a != b) {
      parent_[std::max(a, b)] = std::min(a, b);
    }
  }

private:
  std::vector<std::size_t> parent_;
};

}  // namespace

std::optional<CandidateSubgraph> extract_candidate(
  const scene_graph::SceneGraph & graph, const geometry::EgoConfig & cfg, int hop_limit,
  int min_size)
{
  if (hop_limit < 1 || min_size < 1) {
    throw Error(ErrorKind::invalid_input, "extract_candidate: hop_limit and min_size must be >= 1");
  }
  if (auto violations = scene_graph::validate(graph); !violations.empty()) {
    std::string msg = "extract_candidate: invalid scene graph:";
    for (const auto & v : violations) {
      msg += " [" + v + "]";
    }
    throw Error(ErrorKind::schema, msg);
  }

  // adjacency over outgoing edges
  std::map<std::string, std::vector<std::string>> out_adj;
  for (const auto & e : graph.edges) {
    out_adj[e.src].push_back(e.dst);
  }

  std::map<std::string, int> dist;
  dist[scene_graph::kEgoId] = 0;
  std::deque<std::string> queue{scene_graph::kEgoId};
  std::set<std::string> selected;
  while (!queue.empty()) {
    const std::string cur = queue.front();
    queue.pop_front();
    const int d = dist[cur];
    if (d == hop_limit) {
      continue;
    }
    auto it = out_adj.find(cur);
    if (it == out_adj.end()) {
      continue;
    }
    for (const std::string & next : it->second) {
      if (dist.count(next)) {
        continue;
      }
      const NodeLabel label = graph.nodes.at(next).label;
      if (!scene_graph::is_workzone_category(label)) {
        continue;  // lanes and road are neither kept nor expanded
      }
      dist[next] = d + 1;
      selected.insert(next);
      queue.push_back(next);
    }
  }

  if (1 + static_cast<int>(selected.size()) < min_size) {
    return std::nullopt;
  }

  CandidateSubgraph sub;
  sub.source_frame = graph.frame_id;
  sub.nodes[scene_graph::kEgoId] = NodeLabel::ego;
  double depth_sum = 0.0;
  double radius_sum = 0.0;
  for (const std::string & id : selected) {
    const scene_graph::Node & node = graph.nodes.at(id);
    sub.nodes[id] = node.label;
    if (!node.depth || !node.bbox) {
      throw Error(ErrorKind::schema, "extract_candidate: work-zone node without depth/bbox: " + id);
    }
    depth_sum += *node.depth;
    radius_sum += (node.bbox->center() - cfg.center).norm();
  }
  if (!selected.empty()) {
    sub.mean_depth = depth_sum / static_cast<double>(selected.size());
    sub.mean_pixel_radius = radius_sum / static_cast<double>(selected.size());
  }
  for (const auto & e : graph.edges) {
    if (sub.nodes.count(e.src) && sub.nodes.count(e.dst)) {
      sub.edges.push_back(e);
    }
  }
  return sub;
}

Signature signature(const CandidateSubgraph & sub)
{
  Signature sig;
  sig.node_count = static_cast<int>(sub.nodes.size());
  sig.edge_count = static_cast<int>(sub.edges.size());
  sig.labels.reserve(sub.nodes.size());
  for (const auto & [id, label] : sub.nodes) {
    sig.labels.push_back(label);
  }
  sig.relations.reserve(sub.edges.size());
  for (const auto & e : sub.edges) {
    sig.relations.push_back(e.relation);
  }
  std::sort(sig.labels.begin(), sig.labels.end());
  std::sort(sig.relations.begin(), sig.relations.end());
  return sig;
}

bool gate(
  const CandidateSubgraph & a, const CandidateSubgraph & b, double depth_gate, double radius_gate)
{
  return std::abs(a.mean_depth - b.mean_depth) <= depth_gate &&
         std::abs(a.mean_pixel_radius - b.mean_pixel_radius) <= radius_gate;
}

namespace
{

struct IndexedGraph
{
  std::vector<NodeLabel> labels;
  std::vector<std::tuple<int, int, Relation>> edges;
  std::set<std::tuple<int, int, Relation>> edge_set;

  explicit IndexedGraph(const CandidateSubgraph & sub)
  {
    std::map<std::string, int> index;
    labels.reserve(sub.nodes.size());
    for (const auto & [id, label] : sub.nodes) {
      index[id] = static_cast<int>(labels.size());
      labels.push_back(label);
    }
    for (const auto & e : sub.edges) {
      auto t = std::make_tuple(index.at(e.src), index.at(e.dst), e.relation);
      edges.push_back(t);
      edge_set.insert(t);
    }
  }
};

bool extend_mapping(
  const IndexedGraph & s, const IndexedGraph & l, std::vector<int> & mapping,
  std::vector<bool> & used, std::size_t next)
{
  if (next == s.labels.size()) {
    return true;
  }
  for (int cand = 0; cand < static_cast<int>(l.labels.size()); ++cand) {
    if (used[cand] || l.labels[cand] != s.labels[next]) {
      continue;
    }
    // An edge constrains the search once both of its endpoints are mapped,
    // i.e. exactly when its larger endpoint index equals `next`.
    bool ok = true;
    for (const auto & [u, v, r] : s.edges) {
      const std::size_t un = static_cast<std::size_t>(u);
      const std::size_t vn = static_cast<std::size_t>(v);
      if (std::max(un, vn) != next) {
        continue;
      }
      const int mu = un == next ? cand : mapping[un];
      const int mv = vn == next ? cand : mapping[vn];
      if (!l.edge_set.count({mu, mv, r})) {
        ok = false;
        break;
      }
    }
    if (!ok) {
      continue;
    }
    mapping[next] = cand;
    used[cand] = true;
    if (extend_mapping(s, l, mapping, used, next + 1)) {
      return true;
    }
    used[cand] = false;
    mapping[next] = -1;
  }
  return false;
}

}  // namespace

bool contains(const CandidateSubgraph & small, const CandidateSubgraph & large)
{
  if (small.nodes.size() > large.nodes.size()) {
    throw Error(
      ErrorKind::invalid_input, "contains: first argument must not have more nodes; swap them");
  }

  // label-count pruning
  std::map<NodeLabel, int> small_counts, large_counts;
  for (const auto & [id, label] : small.nodes) ++small_counts[label];
  for (const auto & [id, label] : large.nodes) ++large_counts[label];
  for (const auto & [label, count] : small_counts) {
    if (large_counts[label] < count) {
      return false;
    }
  }
  std::map<Relation, int> small_rels, large_rels;
  for (const auto & e : small.edges) ++small_rels[e.relation];
  for (const auto & e : large.edges) ++large_rels[e.relation];
  for (const auto & [rel, count] : small_rels) {
    if (large_rels[rel] < count) {
      return false;
    }
  }

  const IndexedGraph s(small);
  const IndexedGraph l(large);
  std::vector<int> mapping(s.labels.size(), -1);
  std::vector<bool> used(l.labels.size(), false);
  return extend_mapping(s, l, mapping, used, 0);
}

std::vector<PrototypeCluster> merge(
  const std::vector<CandidateSubgraph> & candidates, const MiningParams & params)
{
  std::map<Signature, std::vector<std::size_t>> buckets;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    buckets[signature(candidates[i])].push_back(i);
  }

  DisjointSet dsu(candidates.size());
  for (const auto & [sig, members] : buckets) {
    for (std::size_t a = 0; a < members.size(); ++a) {
      for (std::size_t b = a + 1; b < members.size(); ++b) {
        const CandidateSubgraph & x = candidates[members[a]];
        const CandidateSubgraph & y = candidates[members[b]];
        if (!gate(x, y, params.depth_gate, params.radius_gate)) {
          continue;
        }
        const bool x_small = x.nodes.size() <= y.nodes.size();
        if (contains(x_small ? x : y, x_small ? y : x)) {
          dsu.unite(members[a], members[b]);
        }
      }
    }
  }

  std::map<std::size_t, std::vector<std::size_t>> components;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    components[dsu.find(i)].push_back(i);
  }

  std::vector<PrototypeCluster> clusters;
  clusters.reserve(components.size());
  for (const auto & [root, members] : components) {
    PrototypeCluster cluster;
    std::size_t best = members.front();
    std::string best_form = serialize(candidates[best]);
    for (std::size_t idx : members) {
      cluster.member_frames.push_back(candidates[idx].source_frame);
      if (idx == best) {
        continue;
      }
      const std::string form = serialize(candidates[idx]);
      const auto a = candidates[idx].nodes.size();
      const auto b = candidates[best].nodes.size();
      if (a < b || (a == b && form < best_form)) {
        best = idx;
        best_form = form;
      }
    }
    cluster.representative = candidates[best];
    std::sort(cluster.member_frames.begin(), cluster.member_frames.end());
    clusters.push_back(std::move(cluster));
  }

  std::sort(clusters.begin(), clusters.end(), [](const auto & a, const auto & b) {
    return serialize(a.representative) < serialize(b.representative);
  });
  return clusters;
}

std::string serialize(const CandidateSubgraph & sub)
{
  std::ostringstream out;
  out << "candidate/v1\n";
  out << "frame " << sub.source_frame << "\n";
  out << "stats " << util::fmt_double(sub.mean_depth) << " "
      << util::fmt_double(sub.mean_pixel_radius) << "\n";
  for (const auto & [id, label] : sub.nodes) {
    out << "node " << id << " " << scene_graph::label_token(label) << "\n";
  }
  std::vector<std::string> lines;
  lines.reserve(sub.edges.size());
  for (const auto & e : sub.edges) {
    lines.push_back(
      "edge " + e.src + " " + std::string(scene_graph::relation_token(e.relation)) + " " + e.dst);
  }
  std::sort(lines.begin(), lines.end());
  for (const auto & line : lines) {
    out << line << "\n";
  }
  return out.str();
}

namespace
{

nlohmann::json candidate_to_json(const CandidateSubgraph & sub)
{
  nlohmann::json nodes = nlohmann::json::object();
  for (const auto & [id, label] : sub.nodes) {
    nodes[id] = scene_graph::label_token(label);
  }
  nlohmann::json edges = nlohmann::json::array();
  std::vector<scene_graph::Edge> sorted = sub.edges;
  std::sort(sorted.begin(), sorted.end(), [](const auto & a, const auto & b) {
    return std::tie(a.src, a.relation, a.dst) < std::tie(b.src, b.relation, b.dst);
  });
  for (const auto & e : sorted) {
    edges.push_back({e.src, scene_graph::relation_token(e.relation), e.dst});
  }
  return {
    {"source_frame", sub.source_frame},
    {"nodes", nodes},
    {"edges", edges},
    {"mean_depth", sub.mean_depth},
    {"mean_pixel_radius", sub.mean_pixel_radius},
  };
}

CandidateSubgraph candidate_from_json(const nlohmann::json & j)
{
  CandidateSubgraph sub;
  sub.source_frame = j.at("source_frame").get<std::string>();
  for (const auto & [id, label] : j.at("nodes").items()) {
    sub.nodes[id] = scene_graph::parse_label(label.get<std::string>());
  }
  for (const auto & e : j.at("edges")) {
    sub.edges.push_back(
      {e.at(0).get<std::string>(), e.at(2).get<std::string>(),
       scene_graph::parse_relation(e.at(1).get<std::string>())});
  }
  sub.mean_depth = j.at("mean_depth").get<double>();
  sub.mean_pixel_radius = j.at("mean_pixel_radius").get<double>();
  return sub;
}

}  // namespace

std::string manifest_to_json(const std::vector<PrototypeCluster> & clusters)
{
  nlohmann::json out;
  out["schema"] = "prototypes/v1";
  nlohmann::json list = nlohmann::json::array();
  for (const auto & cluster : clusters) {
    const Signature sig = signature(cluster.representative);
    nlohmann::json labels = nlohmann::json::array();
    for (auto l : sig.labels) labels.push_back(scene_graph::label_token(l));
    nlohmann::json relations = nlohmann::json::array();
    for (auto r : sig.relations) relations.push_back(scene_graph::relation_token(r));
    list.push_back({
      {"members", cluster.member_frames},
      {"representative", candidate_to_json(cluster.representative)},
      {"signature",
       {{"labels", labels},
        {"relations", relations},
        {"node_count", sig.node_count},
        {"edge_count", sig.edge_count}}},
    });
  }
  out["clusters"] = list;
  return out.dump(2) + "\n";
}

std::vector<PrototypeCluster> parse_manifest(const std::string & json_text)
{
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error & e) {
    throw Error(ErrorKind::parse, std::string("prototype manifest: ") + e.what());
  }
  if (j.value("schema", "") != "prototypes/v1") {
    throw Error(ErrorKind::version_mismatch, "prototype manifest: unsupported schema");
  }
  std::vector<PrototypeCluster> clusters;
  for (const auto & c : j.at("clusters")) {
    PrototypeCluster cluster;
    cluster.member_frames = c.at("members").get<std::vector<std::string>>();
    cluster.representative = candidate_from_json(c.at("representative"));
    clusters.push_back(std::move(cluster));
  }
  return clusters;
}

}  // namespace wzplan::mining
