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

#ifndef WZPLAN_UTIL_HPP_
#define WZPLAN_UTIL_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace wzplan::util
{

/// Shortest round-trip decimal form of a double; deterministic across runs.
std::string fmt_double(double value);

/// FNV-1a 64-bit hash, printed as 16 hex digits. Used for replay keys.
std::uint64_t fnv1a64(std::string_view text);
std::string fnv1a64_hex(std::string_view text);

std::string read_file(const std::filesystem::path & path);

/// Writes via a temporary file then renames, so readers never observe a
/// partially written file.
void write_file_atomic(const std::filesystem::path & path, std::string_view content);

}  // namespace wzplan::util

#endif  // WZPLAN_UTIL_HPP_
