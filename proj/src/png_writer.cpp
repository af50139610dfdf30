/*
 * SPDX-FileCopyrightText: Copyright (c) 2026 The parf-forge Authors. All rights reserved.
 * SPDX-License-Identifier: Apache-2.0
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "parf/png_writer.hpp"

#include <png.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <memory>
#include <stdexcept>

namespace parf {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};

void write_png(const std::filesystem::path& path, std::size_t width, std::size_t height,
               int bit_depth, int color_type, const std::vector<png_bytep>& rows) {
  std::unique_ptr<std::FILE, FileCloser> file(std::fopen(path.c_str(), "wb"));
  if (!file) throw std::runtime_error("cannot open " + path.string() + " for writing");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (png == nullptr) throw std::runtime_error("libpng initialization failed");
  png_infop info = png_create_info_struct(png);
  if (info == nullptr || setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw std::runtime_error("libpng failed writing " + path.string());
  }
  png_init_io(png, file.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height),
               bit_depth, color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, const_cast<png_bytepp>(rows.data()));
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

// Piecewise-linear dark blue -> cyan -> yellow -> white.
std::array<std::uint8_t, 3> colormap(double t) {
  static constexpr std::array<std::array<double, 3>, 5> stops{{
      {0.0, 0.0, 0.1}, {0.1, 0.2, 0.6}, {0.0, 0.7, 0.8}, {0.95, 0.85, 0.2}, {1.0, 1.0, 1.0}}};
  t = std::clamp(t, 0.0, 1.0) * (stops.size() - 1);
  const auto i = std::min(static_cast<std::size_t>(t), stops.size() - 2);
  const double w = t - static_cast<double>(i);
  std::array<std::uint8_t, 3> rgb{};
  for (int c = 0; c < 3; ++c) {
    const double v = stops[i][c] + w * (stops[i + 1][c] - stops[i][c]);
    rgb[c] = static_cast<std::uint8_t>(std::lround(255.0 * v));
  }
  return rgb;
}

}  // namespace

void write_png_gray16(const std::filesystem::path& path, const Image2D& image) {
  if (image.rows == 0 || image.cols == 0) throw std::invalid_argument("empty image");
  double peak = 0.0;
  for (double v : image.data) {
    if (std::isfinite(v)) peak = std::max(peak, v);
  }
  std::vector<std::uint8_t> bytes(2 * image.data.size());
  for (std::size_t i = 0; i < image.data.size(); ++i) {
    const double v = image.data[i];
    const double scaled = peak > 0.0 && std::isfinite(v) ? std::clamp(v / peak, 0.0, 1.0) : 0.0;
    const auto q = static_cast<std::uint16_t>(std::lround(65535.0 * scaled));
    bytes[2 * i] = static_cast<std::uint8_t>(q >> 8);  // PNG samples are big-endian
    bytes[2 * i + 1] = static_cast<std::uint8_t>(q & 0xff);
  }
  std::vector<png_bytep> rows(image.rows);
  for (std::size_t r = 0; r < image.rows; ++r) rows[r] = bytes.data() + 2 * r * image.cols;
  write_png(path, image.cols, image.rows, 16, PNG_COLOR_TYPE_GRAY, rows);
}

void write_png_rgb(const std::filesystem::path& path, const RgbImage& image) {
  if (image.width == 0 || image.height == 0) throw std::invalid_argument("empty image");
  std::vector<std::uint8_t> bytes = image.pixels;
  std::vector<png_bytep> rows(image.height);
  for (std::size_t r = 0; r < image.height; ++r) rows[r] = bytes.data() + 3 * r * image.width;
  write_png(path, image.width, image.height, 8, PNG_COLOR_TYPE_RGB, rows);
}

RgbImage render_heatmap(const Image2D& image, double lo, double hi) {
  RgbImage out(image.cols, image.rows);
  const double span = hi > lo ? hi - lo : 1.0;
  for (std::size_t r = 0; r < image.rows; ++r) {
    for (std::size_t c = 0; c < image.cols; ++c) {
      const auto rgb = colormap((image.at(r, c) - lo) / span);
      out.set(c, image.rows - 1 - r, rgb[0], rgb[1], rgb[2]);
    }
  }
  return out;
}

void draw_polyline(RgbImage& image, const std::vector<std::pair<double, double>>& points,
                   std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  auto plot = [&](double x, double y) {
    const long ix = std::lround(x), iy = std::lround(y);
    if (ix >= 0 && iy >= 0 && static_cast<std::size_t>(ix) < image.width &&
        static_cast<std::size_t>(iy) < image.height) {
      image.set(static_cast<std::size_t>(ix), static_cast<std::size_t>(iy), r, g, b);
    }
  };
  for (std::size_t i = 0; i + 1 < points.size(); ++i) {
    const auto [x0, y0] = points[i];
    const auto [x1, y1] = points[i + 1];
    const int steps = std::max(1, static_cast<int>(std::ceil(std::max(std::abs(x1 - x0), std::abs(y1 - y0)))));
    for (int s = 0; s <= steps; ++s) {
      const double w = static_cast<double>(s) / steps;
      plot(x0 + w * (x1 - x0), y0 + w * (y1 - y0));
    }
  }
  if (points.size() == 1) plot(points[0].first, points[0].second);
}

}  // namespace parf
