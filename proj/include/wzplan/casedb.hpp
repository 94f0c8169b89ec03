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

#ifndef WZPLAN_CASEDB_HPP_
#define WZPLAN_CASEDB_HPP_

#include "wzplan/constraints.hpp"
#include "wzplan/mining.hpp"

#include <Eigen/Core>

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace wzplan::casedb
{

/// Planner knobs stored with each case. The planner engine itself is fixed;
/// cases only carry declarative parameters, never code.
struct MitigationConfig
{
  double inflate_margin_px = 5.0;
  double cluster_gap_px = 20.0;
  double forward_clearance_px = 40.0;
  int smoothing_passes = 24;

  friend bool operator==(const MitigationConfig &, const MitigationConfig &) = default;
};

struct CheckResult
{
  bool pass = false;
  double value = 0.0;
  double threshold = 0.0;

  friend bool operator==(const CheckResult &, const CheckResult &) = default;
};

struct VerificationRecord
{
  CheckResult drivability;
  std::optional<CheckResult> destination;  // absent in online (no-GT) mode
  int attempts = 0;
  bool pass = false;

  friend bool operator==(const VerificationRecord &, const VerificationRecord &) = default;
};

/// One verified failure case: the scene it came from, the resolved
/// constraints, the planner parameters, and the retrieval keys.
struct CaseRecord
{
  std::string case_id;
  std::string pattern_tag;  // P1..P8
  std::string frame_id;
  std::string detections_file;
  std::string prototype_ref;  // source frame of the merged prototype representative
  ConstraintSet constraints;
  MitigationConfig mitigation;
  mining::CandidateSubgraph subgraph;  // the scene's own candidate subgraph
  Eigen::VectorXd appearance;          // unit-norm
  VerificationRecord verification;
  std::string sequence_id;
  int frame_index = 0;
};

/// In-memory store with pattern, sequence, and appearance indices.
/// Only verification-passed records are accepted.
class CaseDatabase
{
public:
  CaseDatabase() = default;
  explicit CaseDatabase(int embedding_dim) : embedding_dim_(embedding_dim) {}

  /// Persists the record and refreshes all indices. Throws verification
  /// error for unverified records and conflict for duplicate case ids.
  std::string add_case(CaseRecord record);

  const CaseRecord * find(const std::string & case_id) const;
  std::vector<const CaseRecord *> by_pattern(const std::string & pattern_tag) const;
  std::vector<const CaseRecord *> by_sequence(const std::string & sequence_id) const;

  /// Brute-force cosine scan over all records, best first; ties broken by
  /// case id. Returns (record, cosine) pairs.
  std::vector<std::pair<const CaseRecord *, double>> nearest_appearance(
    const Eigen::VectorXd & query, std::size_t k) const;

  /// Records in canonical (case-id) order.
  const std::map<std::string, CaseRecord> & records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  int embedding_dim() const { return embedding_dim_; }

private:
  int embedding_dim_ = 0;  // 0 until the first record fixes it
  std::map<std::string, CaseRecord> records_;
  std::map<std::string, std::vector<std::string>> pattern_index_;
  std::map<std::string, std::vector<std::string>> sequence_index_;
};

/// Canonical serialization: a header line (schema version, embedding
/// dimension, record count) followed by one JSON record per line in
/// case-id order. Byte-identical for semantically equal databases.
std::string to_canonical_text(const CaseDatabase & db);

void save(const CaseDatabase & db, const std::filesystem::path & path);

/// Strict load: version and record-count checks, per-record verification
/// gate. Parse failures report the byte offset; nothing partial escapes.
CaseDatabase load(const std::filesystem::path & path);

}  // namespace wzplan::casedb

#endif  // WZPLAN_CASEDB_HPP_
