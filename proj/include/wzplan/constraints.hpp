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

#ifndef WZPLAN_CONSTRAINTS_HPP_
#define WZPLAN_CONSTRAINTS_HPP_

#include <array>
#include <map>
#include <string>

namespace wzplan::casedb
{

enum class DetourSide { none, left, right };

/// The eight work-zone rule slots. Slot "no_cross_workzone" takes the
/// values "yes" (cross through the zone) and "no" (bypass it); it is kept
/// here as the positive `cross_workzone` flag.
struct ConstraintSet
{
  bool cross_workzone = false;
  DetourSide detour_side = DetourSide::none;
  bool return_to_original_lane_after_workzone = false;
  bool follow_lane_center = false;
  bool turn_to_avoid_work_zone = false;
  bool return_center_line_after_crossing = false;
  bool follow_sign = false;
  bool follow_front_car = false;

  friend bool operator==(const ConstraintSet &, const ConstraintSet &) = default;
};

/// Slot names, frozen in the file format and the prompt template.
inline constexpr std::array<const char *, 8> kSlotNames = {
  "no_cross_workzone",
  "detour_side",
  "return_to_original_lane_after_workzone",
  "follow_lane_center",
  "turn_to_avoid_work_zone",
  "return_center_line_after_crossing",
  "follow_sign",
  "follow_front_car",
};

/// Resolves a parsed slot map into a ConstraintSet. Every slot must be
/// present and filled (no "UNKNOWN"); cross-slot rules are enforced:
/// a detour side requires no_cross_workzone = "no", and turning to avoid
/// the zone excludes crossing it. Throws incomplete_constraints or
/// inconsistent_constraints naming the violated rule.
ConstraintSet resolve_constraints(const std::map<std::string, std::string> & slots);

/// Canonical slot map for serialization and prompt echoes.
std::map<std::string, std::string> to_slot_map(const ConstraintSet & constraints);

const char * to_string(DetourSide side);
DetourSide parse_detour_side(const std::string & text);

}  // namespace wzplan::casedb

#endif  // WZPLAN_CONSTRAINTS_HPP_
