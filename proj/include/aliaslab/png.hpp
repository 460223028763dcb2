// SPDX-License-Identifier: Apache-2.0
//
// aliaslab - microphone-array spatial aliasing laboratory
// Copyright (C) 2026 The aliaslab authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------


#pragma once

#include <algorithm>
#include <array>
#include <csetjmp>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include <png.h>

#include "aliaslab/common.hpp"
#include "aliaslab/spatial_eval.hpp"

namespace aliaslab {

struct Rgb {
  std::uint8_t r, g, b;
};

/// RGB raster, row-major, row 0 at the top.
struct Image {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<Rgb> pixels;

  Image(std::size_t w, std::size_t h, Rgb fill = {0, 0, 0}) : width(w), height(h), pixels(w * h, fill) {}
  Rgb& at(std::size_t x, std::size_t y) { return pixels[y * width + x]; }
  const Rgb& at(std::size_t x, std::size_t y) const { return pixels[y * width + x]; }
};

// Perceptually ordered dark-blue -> teal -> yellow ramp, t in [0, 1].
inline Rgb colormap(double t) {
  static constexpr std::array<std::array<double, 3>, 5> stops{{{68, 1, 84},
                                                               {59, 82, 139},
                                                               {33, 145, 140},
                                                               {94, 201, 98},
                                                               {253, 231, 37}}};
  t = std::clamp(t, 0.0, 1.0) * static_cast<double>(stops.size() - 1);
  const auto i = std::min<std::size_t>(static_cast<std::size_t>(t), stops.size() - 2);
  const double u = t - static_cast<double>(i);
  auto mix = [&](int c) { return static_cast<std::uint8_t>(std::lround(stops[i][c] + u * (stops[i + 1][c] - stops[i][c]))); };
  return {mix(0), mix(1), mix(2)};
}

inline void write_png(const std::filesystem::path& path, const Image& img) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::FILE* fp = std::fopen(path.string().c_str(), "wb");
  if (!fp) throw std::runtime_error("cannot open " + path.string() + " for writing");
  std::unique_ptr<std::FILE, int (*)(std::FILE*)> file(fp, &std::fclose);

  std::vector<png_byte> row(img.width * 3);
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw std::runtime_error("png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info || setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, info ? &info : nullptr);
    throw std::runtime_error("libpng error while writing " + path.string());
  }
  png_init_io(png, fp);
  png_set_IHDR(png, info, static_cast<png_uint_32>(img.width), static_cast<png_uint_32>(img.height), 8,
               PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (std::size_t y = 0; y < img.height; ++y) {
    for (std::size_t x = 0; x < img.width; ++x) {
      const Rgb& p = img.at(x, y);
      row[3 * x] = p.r;
      row[3 * x + 1] = p.g;
      row[3 * x + 2] = p.b;
    }
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

struct HeatmapStyle {
  std::size_t cell_width = 4;
  std::size_t cell_height = 2;
  double db_min = -40.0;
  double db_max = 10.0;
  std::size_t dash = 6;
};

/// Angle on the horizontal axis, frequency upwards. Dashed white verticals
/// mark the look direction and its mirror; a dashed white horizontal marks f_a
/// when it falls inside the frequency range.
inline Image render_heatmap(const BeampatternGrid& g, const HeatmapStyle& style = {}) {
  g.validate();
  const std::size_t na = g.num_angles(), nf = g.num_freqs();
  Image img(na * style.cell_width, nf * style.cell_height);
  for (std::size_t i = 0; i < na; ++i)
    for (std::size_t k = 0; k < nf; ++k) {
      const Rgb c = colormap((g.amplitude_db[i][k] - style.db_min) / (style.db_max - style.db_min));
      const std::size_t y0 = (nf - 1 - k) * style.cell_height;
      for (std::size_t dy = 0; dy < style.cell_height; ++dy)
        for (std::size_t dx = 0; dx < style.cell_width; ++dx) img.at(i * style.cell_width + dx, y0 + dy) = c;
    }

  const Rgb white{255, 255, 255};
  auto dashed = [&](std::size_t pos) { return (pos / style.dash) % 2 == 0; };
  const double a0 = g.angles.front(), a1 = g.angles.back();
  for (double theta : {g.look_direction, -g.look_direction}) {
    if (theta < a0 || theta > a1 || a1 <= a0) continue;
    const auto x = static_cast<std::size_t>(std::lround((theta - a0) / (a1 - a0) * static_cast<double>(img.width - 1)));
    for (std::size_t y = 0; y < img.height; ++y)
      if (dashed(y)) img.at(x, y) = white;
  }
  const double f0 = g.freqs.front(), f1 = g.freqs.back();
  if (g.f_alias >= f0 && g.f_alias <= f1 && f1 > f0) {
    const double frac = (g.f_alias - f0) / (f1 - f0);
    const auto y = static_cast<std::size_t>(std::lround((1.0 - frac) * static_cast<double>(img.height - 1)));
    for (std::size_t x = 0; x < img.width; ++x)
      if (dashed(x)) img.at(x, y) = white;
  }
  return img;
}

} // namespace aliaslab
