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
#include <iosfwd>
#include <span>
#include <vector>

#include "parf/frame.hpp"
#include "parf/geometry.hpp"
#include "parf/image.hpp"

namespace parf {

enum class VolumeKind : std::uint8_t { Ubp = 0, Cf = 1, CfWeighted = 2, MipSource = 3 };

/// Scalar field on a FovGrid, x fastest.
struct Volume {
  FovGrid grid;
  VolumeKind kind = VolumeKind::Ubp;
  std::vector<double> data;

  Volume() = default;
  Volume(const FovGrid& g, VolumeKind k) : grid(g), kind(k), data(g.voxel_count(), 0.0) {}

  std::size_t index(std::size_t ix, std::size_t iy, std::size_t iz) const {
    return (iz * grid.n + iy) * grid.n + ix;
  }
  double& at(std::size_t ix, std::size_t iy, std::size_t iz) { return data[index(ix, iy, iz)]; }
  double at(std::size_t ix, std::size_t iy, std::size_t iz) const { return data[index(ix, iy, iz)]; }
  /// Flat index of the largest |value| (first on ties).
  std::size_t argmax_abs() const;
  bool all_finite() const;
};

enum class Interpolation { Linear, Nearest };

struct BeamformResult {
  Volume p;   // delay-and-sum back-projection
  Volume cf;  // intensity coherence factor
};

/// Sensor positions for a frame's columns: the physical layout for a physical-sized
/// frame, the interleaved map for an interleaved-sized one.
std::vector<Vec3> sensor_positions_for(const ParfFrame& frame, const TransducerGeometry& geom,
                                       const SensorIndexMap& map);

/// Back-projection and coherence factor in one pass. Arrival times are straight-ray
/// |r_k - r| / c; samples outside the window contribute 0. The CF normalizer is the
/// frame's column count. Throws ConfigError if no voxel sees any sample.
BeamformResult beamform(const ParfFrame& frame, std::span<const Vec3> sensors, double c,
                        const FovGrid& grid, Interpolation interp = Interpolation::Linear);

Volume ubp(const ParfFrame& frame, const TransducerGeometry& geom, const SensorIndexMap& map,
           const FovGrid& grid, Interpolation interp = Interpolation::Linear);
Volume coherence_factor(const ParfFrame& frame, const TransducerGeometry& geom,
                        const SensorIndexMap& map, const FovGrid& grid,
                        Interpolation interp = Interpolation::Linear);

/// Elementwise p * cf; throws std::invalid_argument on grid mismatch.
Volume cf_weighted(const Volume& p, const Volume& cf);

/// Share of sum(value^2) lying farther than `radius_voxels` pitches from `center`.
/// Throws NumericalError for an all-zero volume.
double out_of_ball_energy_fraction(const Volume& vol, const Vec3& center, double radius_voxels);

/// Maximum |value| along an axis (0 = x, 1 = y, 2 = z). The image rows/cols are the
/// remaining axes in (slow, fast) order: z-axis -> (y, x), y-axis -> (z, x), x-axis -> (z, y).
Image2D mip(const Volume& vol, int axis);

void write_volume(std::ostream& os, const Volume& vol);
Volume read_volume(std::istream& is);
void save_volume(const std::filesystem::path& path, const Volume& vol);
Volume load_volume(const std::filesystem::path& path);

/// Plain CSV of an image, one row per line.
void save_image_csv(const std::filesystem::path& path, const Image2D& image);

}  // namespace parf
