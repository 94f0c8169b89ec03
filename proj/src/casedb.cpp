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

#include "wzplan/casedb.hpp"

#include "wzplan/errors.hpp"
#include "wzplan/util.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <sstream>

namespace wzplan::casedb
{

std::string CaseDatabase::add_case(CaseRecord record)
{
  if (!record.verification.pass) {
    throw Error(
      ErrorKind::verification,
      "add_case: record '" + record.case_id + "' has not passed verification");
  }
  if (record.case_id.empty()) {
    throw Error(ErrorKind::invalid_input, "add_case: empty case_id");
  }
  if (records_.count(record.case_id)) {
    throw Error(ErrorKind::conflict, "add_case: duplicate case_id '" + record.case_id + "'");
  }
  if (record.pattern_tag.size() != 2 || record.pattern_tag[0] != 'P' ||
      record.pattern_tag[1] < '1' || record.pattern_tag[1] > '8') {
    throw Error(
      ErrorKind::schema,
      "add_case: pattern_tag must be P1..P8, got '" + record.pattern_tag + "'");
  }
  const int dim = static_cast<int>(record.appearance.size());
  if (embedding_dim_ == 0) {
    embedding_dim_ = dim;
  } else if (dim != embedding_dim_) {
    throw Error(
      ErrorKind::schema, "add_case: appearance dimension " + std::to_string(dim) +
                           " does not match database dimension " + std::to_string(embedding_dim_));
  }

  const std::string id = record.case_id;
  pattern_index_[record.pattern_tag].push_back(id);
  sequence_index_[record.sequence_id].push_back(id);
  records_.emplace(id, std::move(record));
  return id;
}

const CaseRecord * CaseDatabase::find(const std::string & case_id) const
{
  auto it = records_.find(case_id);
  return it == records_.end() ? nullptr : &it->second;
}

std::vector<const CaseRecord *> CaseDatabase::by_pattern(const std::string & pattern_tag) const
{
  std::vector<const CaseRecord *> out;
  auto it = pattern_index_.find(pattern_tag);
  if (it == pattern_index_.end()) return out;
  for (const auto & id : it->second) {
    out.push_back(&records_.at(id));
  }
  return out;
}

std::vector<const CaseRecord *> CaseDatabase::by_sequence(const std::string & sequence_id) const
{
  std::vector<const CaseRecord *> out;
  auto it = sequence_index_.find(sequence_id);
  if (it == sequence_index_.end()) return out;
  for (const auto & id : it->second) {
    out.push_back(&records_.at(id));
  }
  return out;
}

std::vector<std::pair<const CaseRecord *, double>> CaseDatabase::nearest_appearance(
  const Eigen::VectorXd & query, std::size_t k) const
{
  const double qnorm = query.norm();
  std::vector<std::pair<const CaseRecord *, double>> scored;
  scored.reserve(records_.size());
  for (const auto & [id, rec] : records_) {
    double cosine = 0.0;
    const double rnorm = rec.appearance.norm();
    if (qnorm > 0.0 && rnorm > 0.0 && rec.appearance.size() == query.size()) {
      cosine = rec.appearance.dot(query) / (qnorm * rnorm);
    }
    scored.emplace_back(&rec, cosine);
  }
  std::stable_sort(scored.begin(), scored.end(), [](const auto & a, const auto & b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first->case_id < b.first->case_id;
  });
  if (scored.size() > k) {
    scored.resize(k);
  }
  return scored;
}

namespace
{

nlohmann::json check_to_json(const CheckResult & c)
{
  return {{"pass", c.pass}, {"value", c.value}, {"threshold", c.threshold}};
}

CheckResult check_from_json(const nlohmann::json & j)
{
  return {j.at("pass").get<bool>(), j.at("value").get<double>(), j.at("threshold").get<double>()};
}

nlohmann::json subgraph_to_json(const mining::CandidateSubgraph & sub)
{
  nlohmann::json nodes = nlohmann::json::object();
  for (const auto & [id, label] : sub.nodes) {
    nodes[id] = scene_graph::label_token(label);
  }
  nlohmann::json edges = nlohmann::json::array();
  auto sorted = sub.edges;
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

mining::CandidateSubgraph subgraph_from_json(const nlohmann::json & j)
{
  mining::CandidateSubgraph sub;
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

nlohmann::json record_to_json(const CaseRecord & rec)
{
  nlohmann::json verification = {
    {"drivability", check_to_json(rec.verification.drivability)},
    {"attempts", rec.verification.attempts},
    {"pass", rec.verification.pass},
  };
  if (rec.verification.destination) {
    verification["destination"] = check_to_json(*rec.verification.destination);
  } else {
    verification["destination"] = nullptr;
  }
  std::vector<double> appearance(rec.appearance.data(),
                                 rec.appearance.data() + rec.appearance.size());
  return {
    {"case_id", rec.case_id},
    {"pattern_tag", rec.pattern_tag},
    {"frame_id", rec.frame_id},
    {"detections_file", rec.detections_file},
    {"prototype_ref", rec.prototype_ref},
    {"constraints", to_slot_map(rec.constraints)},
    {"mitigation",
     {{"inflate_margin_px", rec.mitigation.inflate_margin_px},
      {"cluster_gap_px", rec.mitigation.cluster_gap_px},
      {"forward_clearance_px", rec.mitigation.forward_clearance_px},
      {"smoothing_passes", rec.mitigation.smoothing_passes}}},
    {"subgraph", subgraph_to_json(rec.subgraph)},
    {"appearance", appearance},
    {"verification", verification},
    {"sequence_id", rec.sequence_id},
    {"frame_index", rec.frame_index},
  };
}

CaseRecord record_from_json(const nlohmann::json & j)
{
  CaseRecord rec;
  rec.case_id = j.at("case_id").get<std::string>();
  rec.pattern_tag = j.at("pattern_tag").get<std::string>();
  rec.frame_id = j.at("frame_id").get<std::string>();
  rec.detections_file = j.at("detections_file").get<std::string>();
  rec.prototype_ref = j.at("prototype_ref").get<std::string>();
  std::map<std::string, std::string> slots;
  for (const auto & [key, value] : j.at("constraints").items()) {
    slots[key] = value.get<std::string>();
  }
  rec.constraints = resolve_constraints(slots);
  const auto & m = j.at("mitigation");
  rec.mitigation.inflate_margin_px = m.at("inflate_margin_px").get<double>();
  rec.mitigation.cluster_gap_px = m.at("cluster_gap_px").get<double>();
  rec.mitigation.forward_clearance_px = m.at("forward_clearance_px").get<double>();
  rec.mitigation.smoothing_passes = m.at("smoothing_passes").get<int>();
  rec.subgraph = subgraph_from_json(j.at("subgraph"));
  const auto appearance = j.at("appearance").get<std::vector<double>>();
  rec.appearance = Eigen::Map<const Eigen::VectorXd>(appearance.data(),
                                                     static_cast<Eigen::Index>(appearance.size()));
  const auto & v = j.at("verification");
  rec.verification.drivability = check_from_json(v.at("drivability"));
  if (!v.at("destination").is_null()) {
    rec.verification.destination = check_from_json(v.at("destination"));
  }
  rec.verification.attempts = v.at("attempts").get<int>();
  rec.verification.pass = v.at("pass").get<bool>();
  rec.sequence_id = j.at("sequence_id").get<std::string>();
  rec.frame_index = j.at("frame_index").get<int>();
  return rec;
}

}  // namespace

std::string to_canonical_text(const CaseDatabase & db)
{
  std::ostringstream out;
  nlohmann::json header = {
    {"schema", "casedb/v1"},
    {"embedding_dim", db.embedding_dim()},
    {"record_count", db.size()},
  };
  out << header.dump() << "\n";
  for (const auto & [id, rec] : db.records()) {
    out << record_to_json(rec).dump() << "\n";
  }
  return out.str();
}

void save(const CaseDatabase & db, const std::filesystem::path & path)
{
  util::write_file_atomic(path, to_canonical_text(db));
}

CaseDatabase load(const std::filesystem::path & path)
{
  const std::string text = util::read_file(path);

  std::size_t offset = 0;
  auto next_line = [&](std::string & line) -> bool {
    if (offset >= text.size()) return false;
    const std::size_t end = text.find('\n', offset);
    if (end == std::string::npos) {
      throw Error(
        ErrorKind::parse, path.string() + ": missing trailing newline at byte offset " +
                            std::to_string(text.size()));
    }
    line = text.substr(offset, end - offset);
    offset = end + 1;
    return true;
  };

  std::string line;
  if (!next_line(line)) {
    throw Error(ErrorKind::parse, path.string() + ": empty database file (byte offset 0)");
  }

  nlohmann::json header;
  try {
    header = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error & e) {
    throw Error(
      ErrorKind::parse, path.string() + ": bad header at byte offset 0: " + e.what());
  }
  if (header.value("schema", "") != "casedb/v1") {
    throw Error(
      ErrorKind::version_mismatch,
      path.string() + ": unsupported database schema '" + header.value("schema", "") + "'");
  }
  const auto expected = header.at("record_count").get<std::size_t>();
  const int dim = header.at("embedding_dim").get<int>();

  CaseDatabase db(dim);
  for (std::size_t i = 0; i < expected; ++i) {
    const std::size_t line_offset = offset;
    if (!next_line(line)) {
      throw Error(
        ErrorKind::parse, path.string() + ": truncated: expected " + std::to_string(expected) +
                            " records, got " + std::to_string(i) + " (byte offset " +
                            std::to_string(line_offset) + ")");
    }
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error & e) {
      throw Error(
        ErrorKind::parse, path.string() + ": bad record at byte offset " +
                            std::to_string(line_offset) + ": " + e.what());
    }
    CaseRecord rec;
    try {
      rec = record_from_json(j);
    } catch (const nlohmann::json::exception & e) {
      throw Error(
        ErrorKind::parse, path.string() + ": bad record at byte offset " +
                            std::to_string(line_offset) + ": " + e.what());
    }
    db.add_case(std::move(rec));  // re-applies the verification gate
  }
  if (offset != text.size()) {
    throw Error(
      ErrorKind::parse, path.string() + ": trailing data at byte offset " + std::to_string(offset));
  }
  return db;
}

}  // namespace wzplan::casedb
