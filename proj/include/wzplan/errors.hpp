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

#ifndef WZPLAN_ERRORS_HPP_
#define WZPLAN_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace wzplan
{

enum class ErrorKind {
  invalid_input,
  schema,
  parse,
  degenerate_geometry,
  incomplete_constraints,
  inconsistent_constraints,
  incomplete_context,
  no_drivable_space,
  infeasible_destination,
  no_path,
  fixture_miss,
  transport,
  version_mismatch,
  conflict,
  verification,
  io,
};

/// Single exception type for the whole library; `kind()` drives the CLI
/// exit-code mapping (data/schema errors vs. verification failures).
class Error : public std::runtime_error
{
public:
  Error(ErrorKind kind, const std::string & message)
  : std::runtime_error(message), kind_(kind)
  {
  }

  ErrorKind kind() const { return kind_; }

private:
  ErrorKind kind_;
};

inline const char * to_string(ErrorKind kind)
{
  switch (kind) {
    case ErrorKind::invalid_input:            return "invalid_input";
    case ErrorKind::schema:                   return "schema";
    case ErrorKind::parse:                    return "parse";
    case ErrorKind::degenerate_geometry:      return "degenerate_geometry";
    case ErrorKind::incomplete_constraints:   return "incomplete_constraints";
    case ErrorKind::inconsistent_constraints: return "inconsistent_constraints";
    case ErrorKind::incomplete_context:       return "incomplete_context";
    case ErrorKind::no_drivable_space:        return "no_drivable_space";
    case ErrorKind::infeasible_destination:   return "infeasible_destination";
    case ErrorKind::no_path:                  return "no_path";
    case ErrorKind::fixture_miss:             return "fixture_miss";
    case ErrorKind::transport:                return "transport";
    case ErrorKind::version_mismatch:         return "version_mismatch";
    case ErrorKind::conflict:                 return "conflict";
    case ErrorKind::verification:             return "verification";
    case ErrorKind::io:                       return "io";
  }
  return "unknown";
}

}  // namespace wzplan

#endif  // WZPLAN_ERRORS_HPP_
