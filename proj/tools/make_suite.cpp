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

#include "wzplan/suite.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char ** argv)
{
  CLI::App app{"materialize the bundled synthetic work-zone scenario suite"};
  std::string out = "suite";
  app.add_option("--out", out, "target directory");

  CLI11_PARSE(app, argc, argv);

  try {
    const auto config = wzplan::suite::make_suite(out);
    std::cout << "suite written; config at " << config.string() << "\n";
  } catch (const std::exception & e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
