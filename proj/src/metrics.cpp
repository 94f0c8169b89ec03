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

#include "wzplan/metrics.hpp"

#include "wzplan/errors.hpp"
#include "wzplan/util.hpp"

#include <nlohmann/json.hpp>

#include <sstream>

namespace wzplan::metrics
{

double ade(const planner::Polyline & pred, const planner::Polyline & gt)
{
  if (pred.empty() || gt.empty()) {
    throw Error(ErrorKind::invalid_input, "ade: empty trajectory");
  }
  const planner::Polyline aligned =
    gt.size() == pred.size() ? gt : planner::resample_polyline(gt, static_cast<int>(pred.size()));
  if (aligned.size() != pred.size()) {
    throw Error(ErrorKind::invalid_input, "ade: length mismatch after resampling");
  }
  double sum = 0.0;
  for (std::size_t t = 0; t < pred.size(); ++t) {
    sum += (pred[t] - aligned[t]).norm();
  }
  return sum / static_cast<double>(pred.size());
}

double fde(const planner::Polyline & pred, const planner::Polyline & gt)
{
  if (pred.empty() || gt.empty()) {
    throw Error(ErrorKind::invalid_input, "fde: empty trajectory");
  }
  return (pred.back() - gt.back()).norm();
}

bool collision(
  const planner::Polyline & trajectory, const std::vector<geometry::PixelBox> & obstacles,
  double margin)
{
  for (const auto & p : trajectory) {
    for (const auto & box : obstacles) {
      if (p.x() > box.x - margin && p.x() < box.x + box.w + margin && p.y() > box.y - margin &&
          p.y() < box.y + box.h + margin) {
        return true;
      }
    }
  }
  return false;
}

double cr(const std::vector<bool> & collisions)
{
  if (collisions.empty()) {
    throw Error(ErrorKind::invalid_input, "cr: empty collision list");
  }
  std::size_t hits = 0;
  for (bool c : collisions) {
    hits += c ? 1 : 0;
  }
  return static_cast<double>(hits) / static_cast<double>(collisions.size());
}

bool classify_case_failure(double ade_px, double fde_px)
{
  return ade_px > 50.0 && fde_px > 100.0;
}

bool classify_scenario_failure(const std::vector<bool> & case_failures)
{
  if (case_failures.empty()) {
    throw Error(ErrorKind::invalid_input, "classify_scenario_failure: empty case list");
  }
  std::size_t failing = 0;
  for (bool f : case_failures) {
    failing += f ? 1 : 0;
  }
  return static_cast<double>(failing) > 0.5 * static_cast<double>(case_failures.size());
}

MetricsReport evaluate(const std::vector<EvalCase> & cases, double collision_margin)
{
  MetricsReport report;
  std::map<std::string, std::vector<bool>> failures_by_sequence;

  for (const EvalCase & c : cases) {
    CaseMetrics m;
    m.case_id = c.case_id;
    m.pattern_tag = c.pattern_tag;
    m.sequence_id = c.sequence_id;
    m.ade = ade(c.pred, c.gt);
    m.fde = fde(c.pred, c.gt);
    m.collided = collision(c.pred, c.obstacles, collision_margin);
    m.failure = classify_case_failure(m.ade, m.fde);
    report.cases.push_back(m);
    failures_by_sequence[c.sequence_id].push_back(m.failure);

    auto accumulate = [&m](Aggregate & agg) {
      ++agg.count;
      agg.ade += m.ade;
      agg.fde += m.fde;
      agg.cr += m.collided ? 1.0 : 0.0;
      agg.failures += m.failure ? 1 : 0;
    };
    accumulate(report.by_pattern[c.pattern_tag]);
    accumulate(report.overall);
  }

  auto finish = [](Aggregate & agg) {
    if (agg.count > 0) {
      agg.ade /= agg.count;
      agg.fde /= agg.count;
      agg.cr /= agg.count;
    }
  };
  for (auto & [tag, agg] : report.by_pattern) {
    finish(agg);
  }
  finish(report.overall);

  for (const auto & [seq, flags] : failures_by_sequence) {
    report.scenario_failure_by_sequence[seq] = classify_scenario_failure(flags);
  }
  return report;
}

std::string report_to_table(const MetricsReport & report)
{
  std::ostringstream out;
  out << "case_id\tpattern\tsequence\tade\tfde\tcollided\tfailure\n";
  for (const auto & m : report.cases) {
    out << m.case_id << "\t" << m.pattern_tag << "\t" << m.sequence_id << "\t"
        << util::fmt_double(m.ade) << "\t" << util::fmt_double(m.fde) << "\t"
        << (m.collided ? 1 : 0) << "\t" << (m.failure ? 1 : 0) << "\n";
  }
  out << "\npattern\tn\tade\tfde\tcr\tfailures\n";
  for (const auto & [tag, agg] : report.by_pattern) {
    out << tag << "\t" << agg.count << "\t" << util::fmt_double(agg.ade) << "\t"
        << util::fmt_double(agg.fde) << "\t" << util::fmt_double(agg.cr) << "\t" << agg.failures
        << "\n";
  }
  out << "overall\t" << report.overall.count << "\t" << util::fmt_double(report.overall.ade)
      << "\t" << util::fmt_double(report.overall.fde) << "\t"
      << util::fmt_double(report.overall.cr) << "\t" << report.overall.failures << "\n";
  out << "\nsequence\tscenario_failure\n";
  for (const auto & [seq, failed] : report.scenario_failure_by_sequence) {
    out << seq << "\t" << (failed ? 1 : 0) << "\n";
  }
  return out.str();
}

std::string report_to_json(const MetricsReport & report)
{
  nlohmann::json cases = nlohmann::json::array();
  for (const auto & m : report.cases) {
    cases.push_back({
      {"case_id", m.case_id},
      {"pattern_tag", m.pattern_tag},
      {"sequence_id", m.sequence_id},
      {"ade", m.ade},
      {"fde", m.fde},
      {"collided", m.collided},
      {"failure", m.failure},
    });
  }
  nlohmann::json patterns = nlohmann::json::object();
  auto agg_json = [](const Aggregate & a) {
    return nlohmann::json{
      {"count", a.count}, {"ade", a.ade}, {"fde", a.fde}, {"cr", a.cr}, {"failures", a.failures}};
  };
  for (const auto & [tag, agg] : report.by_pattern) {
    patterns[tag] = agg_json(agg);
  }
  nlohmann::json scenarios = nlohmann::json::object();
  for (const auto & [seq, failed] : report.scenario_failure_by_sequence) {
    scenarios[seq] = failed;
  }
  nlohmann::json j = {
    {"schema", "metrics-report/v1"},
    {"cases", cases},
    {"by_pattern", patterns},
    {"overall", agg_json(report.overall)},
    {"scenario_failure_by_sequence", scenarios},
  };
  return j.dump(2) + "\n";
}

}  // namespace wzplan::metrics
