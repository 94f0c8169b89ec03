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

#ifndef WZPLAN_MINING_HPP_
#define WZPLAN_MINING_HPP_

#include "wzplan/scene_graph.hpp"

#include <compare>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace wzplan::mining
{

/// Ego-rooted, hop-limited, work-zone-labeled vertex-induced subgraph.
/// mean_depth is the mean ingested monocular depth (meters) and
/// mean_pixel_radius the mean distance of bbox centers to the image center,
/// both over the work-zone nodes.
struct CandidateSubgraph
{
  std::string source_frame;
  std::map<std::string, scene_graph::NodeLabel> nodes;
  std::vector<scene_graph::Edge> edges;
  double mean_depth = 0.0;
  double mean_pixel_radius = 0.0;
};

/// Structural signature: node-label multiset, relation multiset, node and
/// edge counts. Stored sorted, so equality is order-independent.
struct Signature
{
  std::vector<scene_graph::NodeLabel> labels;
  std::vector<scene_graph::Relation> relations;
  int node_count = 0;
  int edge_count = 0;

  auto operator<=>(const Signature &) const = default;
};

struct PrototypeCluster
{
  std::vector<std::string> member_frames;  // sorted
  CandidateSubgraph representative;
};

struct MiningParams
{
  int hop_limit = 2;        // BFS depth D
  int min_size = 3;         // minimum |V^S| including ego
  double depth_gate = 1.0;  // meters
  double radius_gate = 150.0;  // pixels
};

/// Depth-limited BFS from ego over outgoing edges, keeping only work-zone
/// nodes; returns nullopt when the vertex set is smaller than `min_size`.
/// The config supplies the image center for the pixel-radius statistic.
/// Throws schema error when the graph fails validation.
std::optional<CandidateSubgraph> extract_candidate(
  const scene_graph::SceneGraph & graph, const geometry::EgoConfig & cfg,
  int hop_limit = 2, int min_size = 3);

Signature signature(const CandidateSubgraph & sub);

/// Scale gate: true iff |d-bar(a) - d-bar(b)| <= depth_gate and
/// |delta-bar(a) - delta-bar(b)| <= radius_gate. Symmetric.
bool gate(
  const CandidateSubgraph & a, const CandidateSubgraph & b, double depth_gate = 1.0,
  double radius_gate = 150.0);

/// Relation-preserving subgraph containment: true iff an injection from
/// small's nodes into large's nodes preserves labels and maps every edge
/// triplet of small onto an edge triplet of large. Throws invalid_input
/// when small has more nodes than large.
bool contains(const CandidateSubgraph & small, const CandidateSubgraph & large);

/// Four-step merge: signature bucketing, scale gating, containment check,
/// union-find. Each resulting cluster is represented by its minimal-node-
/// count member (ties broken by smallest canonical serialization). Output
/// clusters are sorted by representative form, members by frame id, so the
/// result is independent of input order.
std::vector<PrototypeCluster> merge(
  const std::vector<CandidateSubgraph> & candidates, const MiningParams & params = {});

/// Canonical text form; doubles printed shortest round-trip.
std::string serialize(const CandidateSubgraph & sub);

/// Prototype manifest (JSON): representative forms, member frames, bucket
/// signatures. Round-trips through parse_manifest.
std::string manifest_to_json(const std::vector<PrototypeCluster> & clusters);
std::vector<PrototypeCluster> parse_manifest(const std::string & json_text);

}  // namespace wzplan::mining

#endif  // WZPLAN_MINING_HPP_
