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

#include "wzplan/mask.hpp"

#include "wzplan/errors.hpp"
#include "wzplan/util.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

namespace wzplan::planner
{

RoadMask make_mask(int width, int height, bool drivable)
{
  if (width <= 0 || height <= 0) {
    throw Error(ErrorKind::invalid_input, "make_mask: non-positive dimensions");
  }
  RoadMask mask;
  mask.width = width;
  mask.height = height;
  mask.grid.setConstant(height, width, drivable ? 1 : 0);
  return mask;
}

double DistanceField::at(double x, double y) const
{
  const int xi = std::clamp(static_cast<int>(std::lround(x)), 0, width - 1);
  const int yi = std::clamp(static_cast<int>(std::lround(y)), 0, height - 1);
  return grid(yi, xi);
}

namespace
{

constexpr double kInf = 1e18;

/// 1D squared-distance transform (lower envelope of parabolas).
void dt_1d(const double * f, double * out, int n, std::vector<int> & v, std::vector<double> & z)
{
  v.assign(static_cast<std::size_t>(n), 0);
  z.assign(static_cast<std::size_t>(n) + 1, 0.0);
  int k = 0;
  v[0] = 0;
  z[0] = -kInf;
  z[1] = kInf;
  for (int q = 1; q < n; ++q) {
    double s = ((f[q] + static_cast<double>(q) * q) -
                (f[v[k]] + static_cast<double>(v[k]) * v[k])) /
               (2.0 * q - 2.0 * v[k]);
    while (s <= z[k]) {
      --k;
      s = ((f[q] + static_cast<double>(q) * q) -
           (f[v[k]] + static_cast<double>(v[k]) * v[k])) /
          (2.0 * q - 2.0 * v[k]);
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = kInf;
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[k + 1] < q) {
      ++k;
    }
    const double d = static_cast<double>(q) - v[k];
    out[q] = d * d + f[v[k]];
  }
}

}  // namespace

DistanceField distance_transform(const RoadMask & mask)
{
  DistanceField field;
  field.width = mask.width;
  field.height = mask.height;
  field.grid.resize(mask.height, mask.width);

  Eigen::ArrayXXd sq(mask.height, mask.width);
  for (int y = 0; y < mask.height; ++y) {
    for (int x = 0; x < mask.width; ++x) {
      sq(y, x) = mask.grid(y, x) != 0 ? 0.0 : kInf;
    }
  }

  std::vector<int> v;
  std::vector<double> z;
  std::vector<double> f(static_cast<std::size_t>(std::max(mask.width, mask.height)));
  std::vector<double> out(f.size());

  // columns first, then rows
  for (int x = 0; x < mask.width; ++x) {
    for (int y = 0; y < mask.height; ++y) f[static_cast<std::size_t>(y)] = sq(y, x);
    dt_1d(f.data(), out.data(), mask.height, v, z);
    for (int y = 0; y < mask.height; ++y) sq(y, x) = out[static_cast<std::size_t>(y)];
  }
  for (int y = 0; y < mask.height; ++y) {
    for (int x = 0; x < mask.width; ++x) f[static_cast<std::size_t>(x)] = sq(y, x);
    dt_1d(f.data(), out.data(), mask.width, v, z);
    for (int x = 0; x < mask.width; ++x) sq(y, x) = out[static_cast<std::size_t>(x)];
  }

  for (int y = 0; y < mask.height; ++y) {
    for (int x = 0; x < mask.width; ++x) {
      field.grid(y, x) =
        sq(y, x) >= kInf ? std::numeric_limits<double>::infinity() : std::sqrt(sq(y, x));
    }
  }
  return field;
}

void save_pgm(const RoadMask & mask, const std::filesystem::path & path)
{
  std::ostringstream out;
  out << "P5\n" << mask.width << " " << mask.height << "\n255\n";
  std::string body;
  body.reserve(static_cast<std::size_t>(mask.width) * mask.height);
  for (int y = 0; y < mask.height; ++y) {
    for (int x = 0; x < mask.width; ++x) {
      body.push_back(mask.grid(y, x) != 0 ? static_cast<char>(255) : static_cast<char>(0));
    }
  }
  util::write_file_atomic(path, out.str() + body);
}

namespace
{

/// Reads the next whitespace-delimited token, skipping '#' comments.
std::string next_token(const std::string & text, std::size_t & pos)
{
  while (pos < text.size()) {
    if (std::isspace(static_cast<unsigned char>(text[pos]))) {
      ++pos;
    } else if (text[pos] == '#') {
      while (pos < text.size() && text[pos] != '\n') ++pos;
    } else {
      break;
    }
  }
  const std::size_t start = pos;
  while (pos < text.size() && !std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  return text.substr(start, pos - start);
}

}  // namespace

RoadMask load_pgm(const std::filesystem::path & path)
{
  const std::string text = util::read_file(path);
  std::size_t pos = 0;
  const std::string magic = next_token(text, pos);
  if (magic != "P5" && magic != "P2") {
    throw Error(ErrorKind::parse, path.string() + ": not a PGM file (want P2 or P5)");
  }
  int width = 0, height = 0, maxval = 0;
  try {
    width = std::stoi(next_token(text, pos));
    height = std::stoi(next_token(text, pos));
    maxval = std::stoi(next_token(text, pos));
  } catch (const std::exception &) {
    throw Error(ErrorKind::parse, path.string() + ": malformed PGM header");
  }
  if (width <= 0 || height <= 0 || maxval <= 0 || maxval > 255) {
    throw Error(ErrorKind::parse, path.string() + ": unsupported PGM geometry");
  }

  RoadMask mask = make_mask(width, height, false);
  if (magic == "P5") {
    ++pos;  // single whitespace after maxval
    const std::size_t need = static_cast<std::size_t>(width) * height;
    if (text.size() - pos < need) {
      throw Error(ErrorKind::parse, path.string() + ": truncated PGM payload");
    }
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) {
        const auto value = static_cast<unsigned char>(text[pos++]);
        mask.grid(y, x) = value >= 128 ? 1 : 0;
      }
    }
  } else {
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) {
        const std::string token = next_token(text, pos);
        if (token.empty()) {
          throw Error(ErrorKind::parse, path.string() + ": truncated PGM payload");
        }
        mask.grid(y, x) = std::stoi(token) >= 128 ? 1 : 0;
      }
    }
  }
  return mask;
}

}  // namespace wzplan::planner
