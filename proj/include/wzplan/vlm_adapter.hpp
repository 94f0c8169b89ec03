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

#ifndef WZPLAN_VLM_ADAPTER_HPP_
#define WZPLAN_VLM_ADAPTER_HPP_

#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

namespace wzplan::vlm
{

inline constexpr const char * kTemplateVersion = "tpl/v1";

struct PromptContext
{
  std::string case_key;             // stable key for scripted fixtures (frame id)
  std::string failure_overlay_ref;  // required image reference
  std::string gt_overlay_ref;       // required image reference
  std::map<std::string, std::string> prefilled;  // optional pre-filled slots
  std::vector<std::string> feedback;             // prior attempts' verification feedback
};

struct PromptBundle
{
  std::string text;
  std::string case_key;
  std::vector<std::string> image_refs;
  std::string template_version;

  /// Replay key: hash of the canonical byte rendering.
  std::string hash() const;
};

/// Deterministic, byte-stable rendering of the constraint-generation
/// prompt. Sections: Background, Task, Constraints Template, Code
/// Requirements, Expected Results; any retry feedback is appended after
/// them. Every slot not pre-filled renders as "UNKNOWN". Throws
/// incomplete_context when an overlay reference is missing.
PromptBundle render_prompt(const PromptContext & context);

struct ParseDiagnostics
{
  std::vector<std::string> unknown_keys;
  std::vector<std::string> missing_slots;
};

/// Extracts the first constraints JSON block from a response and maps the
/// slot values to strings (booleans become "True"/"False"). Unknown keys
/// and missing slots are reported via `diagnostics`; a response with no
/// parsable block throws a parse error (which counts as a failed attempt).
std::map<std::string, std::string> parse_constraints(
  const std::string & raw_text, ParseDiagnostics * diagnostics = nullptr);

/// First fenced Python block, if any. Kept for the record only; generated
/// code is never executed, the native planner consumes the constraints.
std::string extract_python_block(const std::string & raw_text);

struct AdapterResponse
{
  std::string raw_text;
  std::map<std::string, std::string> slots;
  ParseDiagnostics diagnostics;
  std::string python_code;
};

/// Parses a raw backend reply into slots + diagnostics. Throws parse error
/// when no constraints block is found.
AdapterResponse parse_response(const std::string & raw_text);

class Backend
{
public:
  virtual ~Backend() = default;
  /// Returns the raw model reply. Throws fixture_miss (stub/replay) or
  /// transport errors (remote).
  virtual std::string generate(const PromptBundle & prompt) = 0;
};

/// Scripted responses from a fixture file. Lookup order: prompt hash,
/// case key, then the global script; list entries are consumed per call
/// with the last one repeating.
class StubBackend : public Backend
{
public:
  explicit StubBackend(const std::string & fixture_json);
  static StubBackend from_file(const std::filesystem::path & path);
  std::string generate(const PromptBundle & prompt) override;

private:
  std::map<std::string, std::vector<std::string>> by_hash_;
  std::map<std::string, std::vector<std::string>> by_case_;
  std::vector<std::string> script_;
  std::map<std::string, std::size_t> cursor_;
  std::size_t script_cursor_ = 0;
};

/// Recorded transcripts, strictly keyed by prompt hash. A miss is an
/// error; there is no network fallback.
class ReplayBackend : public Backend
{
public:
  explicit ReplayBackend(const std::string & fixture_json);
  static ReplayBackend from_file(const std::filesystem::path & path);
  std::string generate(const PromptBundle & prompt) override;

private:
  std::map<std::string, std::vector<std::string>> by_hash_;
  std::map<std::string, std::size_t> cursor_;
};

/// Plain text/JSON HTTP exchange. The reply body (or its "text" field when
/// the body is JSON) is the raw response. Every exchange is recorded so a
/// replay fixture can be written afterwards.
class RemoteBackend : public Backend
{
public:
  struct Config
  {
    std::string host = "localhost";
    int port = 8080;
    std::string path = "/generate";
    std::string auth_env = "WZPLAN_AUTH_TOKEN";  // bearer token env var
    double timeout_s = 10.0;
  };

  explicit RemoteBackend(Config config);
  std::string generate(const PromptBundle & prompt) override;

  /// Replay fixture of everything exchanged so far.
  std::string transcript_json() const;

private:
  Config config_;
  std::map<std::string, std::vector<std::string>> transcript_;
};

}  // namespace wzplan::vlm

#endif  // WZPLAN_VLM_ADAPTER_HPP_
