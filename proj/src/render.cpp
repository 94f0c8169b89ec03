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

#include "wzplan/render.hpp"

#include "wzplan/errors.hpp"
#include "wzplan/util.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace wzplan::render
{

void Image::set(int x, int y, const Color & c)
{
  if (x < 0 || x >= width || y < 0 || y >= height) {
    return;
  }
  const std::size_t base = (static_cast<std::size_t>(y) * width + x) * 3;
  rgb[base] = c[0];
  rgb[base + 1] = c[1];
  rgb[base + 2] = c[2];
}

namespace
{

void draw_line(Image & img, const Eigen::Vector2d & a, const Eigen::Vector2d & b, const Color & c)
{
  const double len = (b - a).norm();
  const int steps = std::max(1, static_cast<int>(std::ceil(len)));
  for (int i = 0; i <= steps; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(steps);
    const Eigen::Vector2d p = a + t * (b - a);
    img.set(
      static_cast<int>(std::lround(p.x())), static_cast<int>(std::lround(p.y())), c);
  }
}

void draw_dot(Image & img, const Eigen::Vector2d & p, const Color & c)
{
  const int cx = static_cast<int>(std::lround(p.x()));
  const int cy = static_cast<int>(std::lround(p.y()));
  for (int dy = -1; dy <= 1; ++dy) {
    for (int dx = -1; dx <= 1; ++dx) {
      img.set(cx + dx, cy + dy, c);
    }
  }
}

void draw_box(Image & img, const geometry::PixelBox & box, const Color & c)
{
  const Eigen::Vector2d tl{box.x, box.y};
  const Eigen::Vector2d tr{box.x + box.w, box.y};
  const Eigen::Vector2d bl{box.x, box.y + box.h};
  const Eigen::Vector2d br{box.x + box.w, box.y + box.h};
  draw_line(img, tl, tr, c);
  draw_line(img, tr, br, c);
  draw_line(img, br, bl, c);
  draw_line(img, bl, tl, c);
}

}  // namespace

Image render_scene(
  const planner::RoadMask & mask, const std::vector<planner::WorkzoneBox> & workzone,
  const std::vector<Overlay> & overlays)
{
  Image img;
  img.width = mask.width;
  img.height = mask.height;
  img.rgb.assign(static_cast<std::size_t>(mask.width) * mask.height * 3, 0);
  for (int y = 0; y < mask.height; ++y) {
    for (int x = 0; x < mask.width; ++x) {
      const std::uint8_t v = mask.grid(y, x) != 0 ? 190 : 45;
      img.set(x, y, {v, v, v});
    }
  }
  for (const auto & wz : workzone) {
    draw_box(img, wz.bbox, kBoxColor);
  }
  for (const auto & overlay : overlays) {
    for (std::size_t i = 1; i < overlay.line.size(); ++i) {
      draw_line(img, overlay.line[i - 1], overlay.line[i], overlay.color);
    }
    for (const auto & p : overlay.line) {
      draw_dot(img, p, overlay.color);
    }
  }
  return img;
}

void save_ppm(const Image & image, const std::filesystem::path & path)
{
  if (image.width <= 0 || image.height <= 0) {
    throw Error(ErrorKind::invalid_input, "save_ppm: empty image");
  }
  std::ostringstream header;
  header << "P6\n" << image.width << " " << image.height << "\n255\n";
  std::string payload = header.str();
  payload.append(reinterpret_cast<const char *>(image.rgb.data()), image.rgb.size());
  util::write_file_atomic(path, payload);
}

}  // namespace wzplan::render
