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

#ifndef WZPLAN_SUITE_HPP_
#define WZPLAN_SUITE_HPP_

#include <filesystem>
#include <string>
#include <vector>

namespace wzplan::suite
{

/// Writes the bundled synthetic scenario suite: eight authored work-zone
/// scenes (one per pattern P1..P8) plus a perturbed query twin for each,
/// with road masks, ground-truth and failing baseline trajectories,
/// scripted adapter fixtures and a ready-to-run config. Fully
/// deterministic. Returns the path of the written config file.
std::filesystem::path make_suite(const std::filesystem::path & root);

/// Frame ids of the authored failure scenes ("p1_build" .. "p8_build").
std::vector<std::string> build_frames();
/// Frame ids of the perturbed twins ("p1_query" .. "p8_query").
std::vector<std::string> query_frames();

}  // namespace wzplan::suite

#endif  // WZPLAN_SUITE_HPP_
