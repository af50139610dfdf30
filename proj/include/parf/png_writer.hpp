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

#pragma once

#include <cstdint>
#include <filesystem>
#include <utility>
#include <vector>

#include "parf/image.hpp"

namespace parf {

struct RgbImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> pixels;  // RGB triplets, row-major, top row first

  RgbImage() = default;
  RgbImage(std::size_t w, std::size_t h) : width(w), height(h), pixels(3 * w * h, 0) {}
  void set(std::size_t x, std::size_t y, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
    std::uint8_t* p = &pixels[3 * (y * width + x)];
    p[0] = r;
    p[1] = g;
    p[2] = b;
  }
};

/// 16-bit grayscale; pixel = round(65535 * v / max), negatives clamp to 0.
void write_png_gray16(const std::filesystem::path& path, const Image2D& image);

void write_png_rgb(const std::filesystem::path& path, const RgbImage& image);

/// Maps values in [lo, hi] to a dark-to-bright colormap; row 0 of `image` becomes the bottom row.
RgbImage render_heatmap(const Image2D& image, double lo, double hi);

/// Draws a polyline given in pixel coordinates (x right, y down).
void draw_polyline(RgbImage& image, const std::vector<std::pair<double, double>>& points,
                   std::uint8_t r, std::uint8_t g, std::uint8_t b);

}  // namespace parf
