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

#include "wzplan/vlm_adapter.hpp"

#include "wzplan/constraints.hpp"
#include "wzplan/errors.hpp"
#include "wzplan/util.hpp"

#include <httplib.h>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <sstream>

namespace wzplan::vlm
{

std::string PromptBundle::hash() const
{
  return util::fnv1a64_hex(text);
}

PromptBundle render_prompt(const PromptContext & context)
{
  if (context.failure_overlay_ref.empty()) {
    throw Error(ErrorKind::incomplete_context, "render_prompt: missing failure overlay reference");
  }
  if (context.gt_overlay_ref.empty()) {
    throw Error(ErrorKind::incomplete_context, "render_prompt: missing reference overlay");
  }

  auto slot_value = [&context](const char * name) -> std::string {
    auto it = context.prefilled.find(name);
    return it == context.prefilled.end() ? "UNKNOWN" : it->second;
  };

  std::ostringstream out;
  out << "# Work-zone constraint request " << kTemplateVersion << "\n\n";
  out << "## Background\n"
         "You write work-zone driving constraint rules and trajectory planning code,\n"
         "and you keep them consistent with the scene. Reason step by step before\n"
         "you answer.\n\n";
  out << "## Task\n"
         "You are given:\n"
         "1) a front-view image overlaid with the failed trajectory and its\n"
         "   destination marker: "
      << context.failure_overlay_ref
      << "\n"
         "2) a partially pre-filled work-zone constraints template (below);\n"
         "3) an annotated reference image with the expected trajectory, the\n"
         "   work-zone boundaries, and the road-mask overlay: "
      << context.gt_overlay_ref
      << "\n"
         "Return exactly two blocks, in order, with no extra commentary:\n"
         "(A) the completed constraints JSON;\n"
         "(B) Python code defining segment_drivable_mask and plan_destination.\n\n";
  out << "## Constraints Template\n"
         "Fill every \"UNKNOWN\" slot without changing the structure.\n"
         "{\n"
         "  \"constraints\": {\n";
  for (std::size_t i = 0; i < casedb::kSlotNames.size(); ++i) {
    out << "    \"" << casedb::kSlotNames[i] << "\": \"" << slot_value(casedb::kSlotNames[i])
        << "\"" << (i + 1 < casedb::kSlotNames.size() ? "," : "") << "\n";
  }
  out << "  }\n"
         "}\n\n";
  out << "## Code Requirements\n"
         "Provide both functions, complete and runnable:\n"
         "1) def segment_drivable_mask(original_road_mask, workzone_info):\n"
         "   apply the constraints to the road mask, blocking the regions the rules\n"
         "   forbid (for example, detour_side = \"left\" blocks the right side of the\n"
         "   road across the work zone).\n"
         "2) def plan_destination(drivable_road_mask, workzone_info):\n"
         "   choose the destination point implied by the constraints (for example,\n"
         "   return_to_original_lane_after_workzone = \"True\" places it near the\n"
         "   original lane past the work zone).\n\n";
  out << "## Expected Results\n"
         "- the completed constraints JSON block;\n"
         "- full implementations of both functions;\n"
         "- no placeholders and no text outside the two blocks.\n";
  if (!context.feedback.empty()) {
    out << "\n## Feedback\n"
           "Previous attempts failed verification:\n";
    for (const std::string & line : context.feedback) {
      out << "- " << line << "\n";
    }
  }

  PromptBundle bundle;
  bundle.text = out.str();
  bundle.case_key = context.case_key;
  bundle.image_refs = {context.failure_overlay_ref, context.gt_overlay_ref};
  bundle.template_version = kTemplateVersion;
  return bundle;
}

namespace
{

/// First balanced JSON object starting at or after `from`; advances `from`
/// past it. Skips braces inside string literals.
std::string balanced_object(const std::string & text, std::size_t & from)
{
  const std::size_t start = text.find('{', from);
  if (start == std::string::npos) {
    from = text.size();
    return {};
  }
  int depth = 0;
  bool in_string = false;
  for (std::size_t i = start; i < text.size(); ++i) {
    const char c = text[i];
    if (in_string) {
      if (c == '\\') {
        ++i;
      } else if (c == '"') {
        in_string = false;
      }
    } else if (c == '"') {
      in_string = true;
    } else if (c == '{') {
      ++depth;
    } else if (c == '}') {
      --depth;
      if (depth == 0) {
        from = i + 1;
        return text.substr(start, i - start + 1);
      }
    }
  }
  from = text.size();
  return {};
}

std::string slot_value_to_string(const nlohmann::json & value)
{
  if (value.is_string()) return value.get<std::string>();
  if (value.is_boolean()) return value.get<bool>() ? "True" : "False";
  return value.dump();
}

/// Fenced blocks in order of appearance: (tag, body).
std::vector<std::pair<std::string, std::string>> fenced_blocks(const std::string & text)
{
  std::vector<std::pair<std::string, std::string>> blocks;
  std::size_t pos = 0;
  while (true) {
    const std::size_t open = text.find("```", pos);
    if (open == std::string::npos) break;
    const std::size_t tag_end = text.find('\n', open + 3);
    if (tag_end == std::string::npos) break;
    const std::size_t close = text.find("```", tag_end + 1);
    if (close == std::string::npos) break;
    std::string tag = text.substr(open + 3, tag_end - open - 3);
    tag.erase(std::remove_if(tag.begin(), tag.end(), ::isspace), tag.end());
    blocks.emplace_back(tag, text.substr(tag_end + 1, close - tag_end - 1));
    pos = close + 3;
  }
  return blocks;
}

}  // namespace

std::map<std::string, std::string> parse_constraints(
  const std::string & raw_text, ParseDiagnostics * diagnostics)
{
  // candidate JSON payloads: fenced blocks first, then any balanced object
  std::vector<std::string> payloads;
  for (const auto & [tag, body] : fenced_blocks(raw_text)) {
    if (tag.empty() || tag == "json") {
      payloads.push_back(body);
    }
  }
  std::size_t scan = 0;
  while (scan < raw_text.size()) {
    const std::string obj = balanced_object(raw_text, scan);
    if (obj.empty()) break;
    payloads.push_back(obj);
  }

  for (const std::string & payload : payloads) {
    nlohmann::json j = nlohmann::json::parse(payload, nullptr, false);
    if (j.is_discarded()) {
      continue;
    }
    nlohmann::json slots_json;
    if (j.is_object() && j.contains("constraints") && j["constraints"].is_object()) {
      slots_json = j["constraints"];
    } else if (j.is_object()) {
      // accept a bare slot map if it names at least one known slot
      bool any = false;
      for (const char * name : casedb::kSlotNames) {
        if (j.contains(name)) {
          any = true;
          break;
        }
      }
      if (!any) continue;
      slots_json = j;
    } else {
      continue;
    }

    std::map<std::string, std::string> slots;
    ParseDiagnostics diag;
    for (const auto & [key, value] : slots_json.items()) {
      const bool known =
        std::find_if(casedb::kSlotNames.begin(), casedb::kSlotNames.end(), [&key](const char * n) {
          return key == n;
        }) != casedb::kSlotNames.end();
      if (!known) {
        diag.unknown_keys.push_back(key);
        continue;
      }
      slots[key] = slot_value_to_string(value);
    }
    for (const char * name : casedb::kSlotNames) {
      if (!slots.count(name)) {
        diag.missing_slots.push_back(name);
      }
    }
    if (diagnostics) {
      *diagnostics = diag;
    }
    return slots;
  }

  throw Error(ErrorKind::parse, "parse_constraints: no constraints block found in response");
}

std::string extract_python_block(const std::string & raw_text)
{
  for (const auto & [tag, body] : fenced_blocks(raw_text)) {
    if (tag == "python" || (tag.empty() && body.find("def ") != std::string::npos)) {
      return body;
    }
  }
  return {};
}

AdapterResponse parse_response(const std::string & raw_text)
{
  AdapterResponse response;
  response.raw_text = raw_text;
  response.slots = parse_constraints(raw_text, &response.diagnostics);
  response.python_code = extract_python_block(raw_text);
  return response;
}

namespace
{

std::map<std::string, std::vector<std::string>> parse_response_map(const nlohmann::json & j)
{
  std::map<std::string, std::vector<std::string>> out;
  if (!j.is_object()) {
    return out;
  }
  for (const auto & [key, value] : j.items()) {
    if (value.is_string()) {
      out[key] = {value.get<std::string>()};
    } else if (value.is_array()) {
      std::vector<std::string> list;
      for (const auto & item : value) {
        list.push_back(item.get<std::string>());
      }
      out[key] = std::move(list);
    }
  }
  return out;
}

nlohmann::json parse_fixture(const std::string & fixture_json, const char * who)
{
  nlohmann::json j = nlohmann::json::parse(fixture_json, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw Error(ErrorKind::parse, std::string(who) + ": malformed fixture file");
  }
  if (j.value("schema", "") != "adapter-fixtures/v1") {
    throw Error(ErrorKind::version_mismatch, std::string(who) + ": unsupported fixture schema");
  }
  return j;
}

/// Per-key list consumption; the last entry repeats once exhausted.
const std::string & take(
  const std::vector<std::string> & list, std::map<std::string, std::size_t> & cursor,
  const std::string & key)
{
  std::size_t & pos = cursor[key];
  const std::size_t idx = std::min(pos, list.size() - 1);
  ++pos;
  return list[idx];
}

}  // namespace

StubBackend::StubBackend(const std::string & fixture_json)
{
  const nlohmann::json j = parse_fixture(fixture_json, "stub backend");
  if (j.contains("by_hash")) by_hash_ = parse_response_map(j["by_hash"]);
  if (j.contains("by_case")) by_case_ = parse_response_map(j["by_case"]);
  if (j.contains("script")) {
    for (const auto & item : j["script"]) {
      script_.push_back(item.get<std::string>());
    }
  }
}

StubBackend StubBackend::from_file(const std::filesystem::path & path)
{
  return StubBackend(util::read_file(path));
}

std::string StubBackend::generate(const PromptBundle & prompt)
{
  const std::string hash = prompt.hash();
  if (auto it = by_hash_.find(hash); it != by_hash_.end() && !it->second.empty()) {
    return take(it->second, cursor_, "hash:" + hash);
  }
  if (auto it = by_case_.find(prompt.case_key); it != by_case_.end() && !it->second.empty()) {
    return take(it->second, cursor_, "case:" + prompt.case_key);
  }
  if (script_cursor_ < script_.size()) {
    return script_[script_cursor_++];
  }
  throw Error(
    ErrorKind::fixture_miss, "stub backend: no scripted response for prompt " + hash +
                               " (case '" + prompt.case_key + "')");
}

ReplayBackend::ReplayBackend(const std::string & fixture_json)
{
  const nlohmann::json j = parse_fixture(fixture_json, "replay backend");
  if (j.contains("by_hash")) by_hash_ = parse_response_map(j["by_hash"]);
}

ReplayBackend ReplayBackend::from_file(const std::filesystem::path & path)
{
  return ReplayBackend(util::read_file(path));
}

std::string ReplayBackend::generate(const PromptBundle & prompt)
{
  const std::string hash = prompt.hash();
  auto it = by_hash_.find(hash);
  if (it == by_hash_.end() || it->second.empty()) {
    throw Error(ErrorKind::fixture_miss, "replay backend: no transcript for prompt " + hash);
  }
  return take(it->second, cursor_, hash);
}

RemoteBackend::RemoteBackend(Config config) : config_(std::move(config)) {}

std::string RemoteBackend::generate(const PromptBundle & prompt)
{
  httplib::Client client(config_.host, config_.port);
  const auto timeout_s = static_cast<time_t>(config_.timeout_s);
  const auto timeout_us =
    static_cast<time_t>((config_.timeout_s - std::floor(config_.timeout_s)) * 1e6);
  client.set_connection_timeout(timeout_s, timeout_us);
  client.set_read_timeout(timeout_s, timeout_us);

  httplib::Headers headers;
  if (!config_.auth_env.empty()) {
    if (const char * token = std::getenv(config_.auth_env.c_str())) {
      headers.emplace("Authorization", std::string("Bearer ") + token);
    }
  }

  const nlohmann::json body = {
    {"prompt", prompt.text},
    {"images", prompt.image_refs},
    {"template_version", prompt.template_version},
  };
  const auto res = client.Post(config_.path, headers, body.dump(), "application/json");
  if (!res) {
    throw Error(
      ErrorKind::transport,
      "remote backend: request failed (" + httplib::to_string(res.error()) + ")");
  }
  if (res->status != 200) {
    throw Error(
      ErrorKind::transport, "remote backend: HTTP status " + std::to_string(res->status));
  }

  std::string text = res->body;
  const nlohmann::json parsed = nlohmann::json::parse(text, nullptr, false);
  if (!parsed.is_discarded() && parsed.is_object() && parsed.contains("text") &&
      parsed["text"].is_string()) {
    text = parsed["text"].get<std::string>();
  }
  transcript_[prompt.hash()].push_back(text);
  return text;
}

std::string RemoteBackend::transcript_json() const
{
  nlohmann::json by_hash = nlohmann::json::object();
  for (const auto & [hash, list] : transcript_) {
    by_hash[hash] = list;
  }
  const nlohmann::json j = {{"schema", "adapter-fixtures/v1"}, {"by_hash", by_hash}};
  return j.dump(2) + "\n";
}

}  // namespace wzplan::vlm
