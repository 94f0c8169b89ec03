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

#ifndef WZPLAN_CLUSTERING_HPP_
#define WZPLAN_CLUSTERING_HPP_

#include "wzplan/mining.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <map>
#include <vector>

namespace wzplan::clustering
{

/// Structural part: label histogram (10) + relation histogram (9) +
/// node count + edge count + mean depth + mean pixel radius.
constexpr int kStructuralDims = 23;

/// Raw (un-normalized) feature pair for one prototype.
struct FeatureVector
{
  Eigen::VectorXd structural;  // kStructuralDims
  Eigen::VectorXd appearance;  // run-wide embedding dimension
};

/// Per-dimension z-score parameters; constant dimensions get scale 0.
struct Normalization
{
  Eigen::VectorXd mean;
  Eigen::VectorXd scale;
};

struct FeatureMatrix
{
  Eigen::MatrixXd rows;  // one normalized, concatenated vector per sample
  Normalization structural_norm;
  Normalization appearance_norm;
};

struct ClusterModel
{
  int k = 0;
  Eigen::MatrixXd centroids;     // k x dims
  std::vector<int> assignments;  // sample -> cluster id
  double sse = 0.0;
};

struct ElbowResult
{
  int k_star = 0;
  double max_distance = 0.0;
  bool monotone = true;  // false when the SSE curve increased somewhere
};

/// Mean of the instance embeddings, renormalized to unit length.
/// Throws invalid_input on an empty list or mismatched dimensions.
Eigen::VectorXd aggregate_appearance(const std::vector<Eigen::VectorXd> & instance_embeddings);

/// Structural statistics of the cluster representative plus the aggregated
/// appearance embedding. Histograms count work-zone labels only.
FeatureVector extract_features(
  const mining::PrototypeCluster & proto, const Eigen::VectorXd & appearance);

/// Z-scores the structural and appearance parts separately over the sample
/// set, then concatenates. Throws schema error on mixed appearance dims.
FeatureMatrix normalize_features(const std::vector<FeatureVector> & features);

/// Lloyd iterations from a k-means++ seeding; fully deterministic for a
/// fixed seed. Empty clusters are reseeded from the farthest sample.
/// Converges when the max centroid shift drops below 1e-8 (300 iter cap).
ClusterModel kmeans(const Eigen::MatrixXd & samples, int k, std::uint64_t seed);

/// Knee of the SSE curve: the interior K with the largest perpendicular
/// distance to the chord between the first and last sweep points, both
/// axes scaled to [0,1]. Ties pick the smallest K.
ElbowResult elbow_select(const std::map<int, double> & sse_by_k);

}  // namespace wzplan::clustering

#endif  // WZPLAN_CLUSTERING_HPP_
