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

#include "wzplan/constraints.hpp"

#include "wzplan/errors.hpp"

namespace wzplan::casedb
{

namespace
{

bool parse_bool_slot(const std::string & slot, const std::string & value)
{
  if (value == "True" || value == "true") return true;
  if (value == "False" || value == "false") return false;
  throw Error(
    ErrorKind::incomplete_constraints,
    "slot '" + slot + "': expected True or False, got '" + value + "'");
}

}  // namespace

ConstraintSet resolve_constraints(const std::map<std::string, std::string> & slots)
{
  for (const char * name : kSlotNames) {
    auto it = slots.find(name);
    if (it == slots.end()) {
      throw Error(ErrorKind::incomplete_constraints, std::string("missing slot '") + name + "'");
    }
    if (it->second == "UNKNOWN") {
      throw Error(
        ErrorKind::incomplete_constraints, std::string("slot '") + name + "' is still UNKNOWN");
    }
  }

  ConstraintSet c;
  const std::string & cross = slots.at("no_cross_workzone");
  if (cross == "yes") {
    c.cross_workzone = true;
  } else if (cross == "no") {
    c.cross_workzone = false;
  } else {
    throw Error(
      ErrorKind::incomplete_constraints,
      "slot 'no_cross_workzone': expected yes or no, got '" + cross + "'");
  }
  c.detour_side = parse_detour_side(slots.at("detour_side"));
  c.return_to_original_lane_after_workzone =
    parse_bool_slot("return_to_original_lane_after_workzone",
                    slots.at("return_to_original_lane_after_workzone"));
  c.follow_lane_center = parse_bool_slot("follow_lane_center", slots.at("follow_lane_center"));
  c.turn_to_avoid_work_zone =
    parse_bool_slot("turn_to_avoid_work_zone", slots.at("turn_to_avoid_work_zone"));
  c.return_center_line_after_crossing = parse_bool_slot(
    "return_center_line_after_crossing", slots.at("return_center_line_after_crossing"));
  c.follow_sign = parse_bool_slot("follow_sign", slots.at("follow_sign"));
  c.follow_front_car = parse_bool_slot("follow_front_car", slots.at("follow_front_car"));

  if (c.detour_side != DetourSide::none && c.cross_workzone) {
    throw Error(
      ErrorKind::inconsistent_constraints,
      "detour_side is set but no_cross_workzone is 'yes': detouring requires bypassing the zone");
  }
  if (c.turn_to_avoid_work_zone && c.cross_workzone) {
    throw Error(
      ErrorKind::inconsistent_constraints,
      "turn_to_avoid_work_zone and crossing the zone (no_cross_workzone = 'yes') are mutually "
      "exclusive");
  }
  return c;
}

std::map<std::string, std::string> to_slot_map(const ConstraintSet & c)
{
  return {
    {"no_cross_workzone", c.cross_workzone ? "yes" : "no"},
    {"detour_side", to_string(c.detour_side)},
    {"return_to_original_lane_after_workzone",
     c.return_to_original_lane_after_workzone ? "True" : "False"},
    {"follow_lane_center", c.follow_lane_center ? "True" : "False"},
    {"turn_to_avoid_work_zone", c.turn_to_avoid_work_zone ? "True" : "False"},
    {"return_center_line_after_crossing", c.return_center_line_after_crossing ? "True" : "False"},
    {"follow_sign", c.follow_sign ? "True" : "False"},
    {"follow_front_car", c.follow_front_car ? "True" : "False"},
  };
}

const char * to_string(DetourSide side)
{
  switch (side) {
    case DetourSide::none:  return "none";
    case DetourSide::left:  return "left";
    case DetourSide::right: return "right";
  }
  return "none";
}

DetourSide parse_detour_side(const std::string & text)
{
  if (text == "none") return DetourSide::none;
  if (text == "left") return DetourSide::left;
  if (text == "right") return DetourSide::right;
  throw Error(
    ErrorKind::incomplete_constraints,
    "slot 'detour_side': expected left, right or none, got '" + text + "'");
}

}  // namespace wzplan::casedb
