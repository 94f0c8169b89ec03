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

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace wzplan::clustering
{

namespace
{

/// Uniform double in [0, 1) built from the generator's raw bits; avoids
/// std::uniform_real_distribution, whose output is implementation-defined.
double next_double(std::mt19937_64 & rng)
{
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

Eigen::VectorXd aggregate_appearance(const std::vector<Eigen::VectorXd> & instance_embeddings)
{
  if (instance_embeddings.empty()) {
    throw Error(ErrorKind::invalid_input, "aggregate_appearance: empty embedding list");
  }
  const Eigen::Index dim = instance_embeddings.front().size();
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(dim);
  for (const auto & v : instance_embeddings) {
    if (v.size() != dim) {
      throw Error(ErrorKind::invalid_input, "aggregate_appearance: mixed dimensions");
    }
    sum += v;
  }
  sum /= static_cast<double>(instance_embeddings.size());
  const double norm = sum.norm();
  if (norm == 0.0) {
    throw Error(ErrorKind::invalid_input, "aggregate_appearance: zero mean vector");
  }
  return sum / norm;
}

FeatureVector extract_features(
  const mining::PrototypeCluster & proto, const Eigen::VectorXd & appearance)
{
  const mining::CandidateSubgraph & rep = proto.representative;
  FeatureVector f;
  f.structural = Eigen::VectorXd::Zero(kStructuralDims);
  for (const auto & [id, label] : rep.nodes) {
    if (scene_graph::is_workzone_category(label)) {
      f.structural[static_cast<int>(label)] += 1.0;
    }
  }
  for (const auto & e : rep.edges) {
    f.structural[scene_graph::kWorkzoneCategoryCount + static_cast<int>(e.relation)] += 1.0;
  }
  const int base = scene_graph::kWorkzoneCategoryCount + scene_graph::kRelationCount;
  f.structural[base + 0] = static_cast<double>(rep.nodes.size());
  f.structural[base + 1] = static_cast<double>(rep.edges.size());
  f.structural[base + 2] = rep.mean_depth;
  f.structural[base + 3] = rep.mean_pixel_radius;
  f.appearance = appearance;
  return f;
}

namespace
{

void zscore_in_place(Eigen::MatrixXd & block)
{
  const double n = static_cast<double>(block.rows());
  for (Eigen::Index c = 0; c < block.cols(); ++c) {
    const double mean = block.col(c).mean();
    block.col(c).array() -= mean;
    const double var = block.col(c).squaredNorm() / n;
    const double sd = std::sqrt(var);
    if (sd > 0.0) {
      block.col(c) /= sd;
    } else {
      block.col(c).setZero();
    }
  }
}

Normalization compute_norm(const Eigen::MatrixXd & block)
{
  Normalization norm;
  const double n = static_cast<double>(block.rows());
  norm.mean = block.colwise().mean();
  norm.scale = Eigen::VectorXd::Zero(block.cols());
  for (Eigen::Index c = 0; c < block.cols(); ++c) {
    const double var = (block.col(c).array() - norm.mean[c]).square().sum() / n;
    const double sd = std::sqrt(var);
    norm.scale[c] = sd > 0.0 ? 1.0 / sd : 0.0;
  }
  return norm;
}

}  // namespace

FeatureMatrix normalize_features(const std::vector<FeatureVector> & features)
{
  if (features.empty()) {
    throw Error(ErrorKind::invalid_input, "normalize_features: empty feature set");
  }
  const Eigen::Index n = static_cast<Eigen::Index>(features.size());
  const Eigen::Index app_dim = features.front().appearance.size();

  Eigen::MatrixXd structural(n, kStructuralDims);
  Eigen::MatrixXd appearance(n, app_dim);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (features[i].structural.size() != kStructuralDims) {
      throw Error(ErrorKind::schema, "normalize_features: bad structural dimension");
    }
    if (features[i].appearance.size() != app_dim) {
      throw Error(ErrorKind::schema, "normalize_features: mixed appearance dimensions");
    }
    structural.row(i) = features[i].structural;
    appearance.row(i) = features[i].appearance;
  }

  FeatureMatrix out;
  out.structural_norm = compute_norm(structural);
  out.appearance_norm = compute_norm(appearance);
  zscore_in_place(structural);
  zscore_in_place(appearance);
  out.rows.resize(n, kStructuralDims + app_dim);
  out.rows << structural, appearance;
  return out;
}

ClusterModel kmeans(const Eigen::MatrixXd & samples, int k, std::uint64_t seed)
{
  const Eigen::Index n = samples.rows();
  if (k < 1 || k > n) {
    throw Error(ErrorKind::invalid_input, "kmeans: need 1 <= k <= sample count");
  }

  std::mt19937_64 rng(seed);
  const Eigen::Index dims = samples.cols();

  // k-means++ seeding
  Eigen::MatrixXd centroids(k, dims);
  std::vector<double> dist2(static_cast<std::size_t>(n), 0.0);
  {
    Eigen::Index first = static_cast<Eigen::Index>(next_double(rng) * static_cast<double>(n));
    first = std::min(first, n - 1);
    centroids.row(0) = samples.row(first);
    for (int c = 1; c < k; ++c) {
      double total = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (int j = 0; j < c; ++j) {
          best = std::min(best, (samples.row(i) - centroids.row(j)).squaredNorm());
        }
        dist2[static_cast<std::size_t>(i)] = best;
        total += best;
      }
      Eigen::Index chosen = 0;
      if (total > 0.0) {
        const double r = next_double(rng) * total;
        double acc = 0.0;
        chosen = n - 1;
        for (Eigen::Index i = 0; i < n; ++i) {
          acc += dist2[static_cast<std::size_t>(i)];
          if (acc > r) {
            chosen = i;
            break;
          }
        }
      } else {
        // all remaining points coincide with a centroid; pick by index
        chosen = std::min<Eigen::Index>(c, n - 1);
      }
      centroids.row(c) = samples.row(chosen);
    }
  }

  ClusterModel model;
  model.k = k;
  model.assignments.assign(static_cast<std::size_t>(n), 0);

  double prev_sse = std::numeric_limits<double>::infinity();
  for (int iter = 0; iter < 300; ++iter) {
    // assignment step
    double sse = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      int best_j = 0;
      for (int j = 0; j < k; ++j) {
        const double d = (samples.row(i) - centroids.row(j)).squaredNorm();
        if (d < best) {
          best = d;
          best_j = j;
        }
      }
      model.assignments[static_cast<std::size_t>(i)] = best_j;
      sse += best;
    }
    if (sse > prev_sse + 1e-9) {
      throw Error(ErrorKind::invalid_input, "kmeans: SSE increased across an iteration");
    }
    prev_sse = sse;

    // update step
    Eigen::MatrixXd next = Eigen::MatrixXd::Zero(k, dims);
    std::vector<Eigen::Index> counts(static_cast<std::size_t>(k), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      next.row(model.assignments[static_cast<std::size_t>(i)]) += samples.row(i);
      ++counts[static_cast<std::size_t>(model.assignments[static_cast<std::size_t>(i)])];
    }
    for (int j = 0; j < k; ++j) {
      if (counts[static_cast<std::size_t>(j)] > 0) {
        next.row(j) /= static_cast<double>(counts[static_cast<std::size_t>(j)]);
      } else {
        // reseed from the sample farthest from its assigned centroid
        double far_d = -1.0;
        Eigen::Index far_i = 0;
        for (Eigen::Index i = 0; i < n; ++i) {
          const double d =
            (samples.row(i) - centroids.row(model.assignments[static_cast<std::size_t>(i)]))
              .squaredNorm();
          if (d > far_d) {
            far_d = d;
            far_i = i;
          }
        }
        next.row(j) = samples.row(far_i);
      }
    }

    const double shift = (next - centroids).rowwise().norm().maxCoeff();
    centroids = next;
    if (shift < 1e-8) {
      break;
    }
  }

  // final assignment against the converged centroids
  double sse = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    double best = std::numeric_limits<double>::infinity();
    int best_j = 0;
    for (int j = 0; j < k; ++j) {
      const double d = (samples.row(i) - centroids.row(j)).squaredNorm();
      if (d < best) {
        best = d;
        best_j = j;
      }
    }
    model.assignments[static_cast<std::size_t>(i)] = best_j;
    sse += best;
  }
  model.centroids = centroids;
  model.sse = sse;
  return model;
}

ElbowResult elbow_select(const std::map<int, double> & sse_by_k)
{
  if (sse_by_k.size() < 3) {
    throw Error(ErrorKind::invalid_input, "elbow_select: need at least 3 sweep points");
  }

  std::vector<std::pair<int, double>> pts(sse_by_k.begin(), sse_by_k.end());
  ElbowResult result;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    if (pts[i].second > pts[i - 1].second) {
      result.monotone = false;
    }
  }

  const double k_lo = pts.front().first;
  const double k_hi = pts.back().first;
  double sse_lo = pts.front().second;
  double sse_hi = pts.back().second;
  double sse_min = sse_hi, sse_max = sse_lo;
  for (const auto & [k, sse] : pts) {
    sse_min = std::min(sse_min, sse);
    sse_max = std::max(sse_max, sse);
  }
  const double sse_span = sse_max - sse_min;

  auto scale_x = [&](double k) { return (k - k_lo) / (k_hi - k_lo); };
  auto scale_y = [&](double s) { return sse_span > 0.0 ? (s - sse_min) / sse_span : 0.0; };

  const double x0 = scale_x(k_lo), y0 = scale_y(sse_lo);
  const double x1 = scale_x(k_hi), y1 = scale_y(sse_hi);
  const double chord = std::hypot(x1 - x0, y1 - y0);

  result.k_star = pts[1].first;
  result.max_distance = -1.0;
  for (std::size_t i = 1; i + 1 < pts.size(); ++i) {  // interior points only
    const double x = scale_x(pts[i].first);
    const double y = scale_y(pts[i].second);
    const double dist =
      chord > 0.0 ? std::abs((x1 - x0) * (y0 - y) - (x0 - x) * (y1 - y0)) / chord : 0.0;
    if (dist > result.max_distance + 1e-12) {
      result.max_distance = dist;
      result.k_star = pts[i].first;
    }
  }
  result.max_distance = std::max(result.max_distance, 0.0);
  return result;
}

}  // namespace wzplan::clustering
