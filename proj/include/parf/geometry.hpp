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

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "parf/vec3.hpp"

namespace parf {

inline constexpr double kFocalRadius = 0.030;      // m
inline constexpr double kSpeedOfSound = 1475.0;    // m/s
inline constexpr std::size_t kPhysicalSensors = 256;
inline constexpr int kRingCount = 7;

struct Sensor {
  Vec3 position;  // m
  int ring_id = 0;
};

/// Hemispherical bowl of point receivers, ordered ring by ring.
struct TransducerGeometry {
  std::vector<Sensor> sensors;
  double speed_of_sound = kSpeedOfSound;
  Vec3 focal_point{};
  double focal_radius = kFocalRadius;

  std::size_t n_physical() const { return sensors.size(); }
  std::size_t n_virtual_total() const { return sensors.empty() ? 0 : 2 * sensors.size() - 1; }
  std::vector<Vec3> positions() const;
  std::vector<int> ring_ids() const;
};

/// Cubic voxel grid centered on the focal point.
struct FovGrid {
  std::size_t n = 86;
  double side_length = 2e-3;  // m
  Vec3 center{};

  double pitch() const { return side_length / static_cast<double>(n - 1); }
  Vec3 origin() const {
    const double h = 0.5 * side_length;
    return center - Vec3{h, h, h};
  }
  Vec3 voxel_center(std::size_t ix, std::size_t iy, std::size_t iz) const {
    const double p = pitch();
    return origin() + Vec3{p * static_cast<double>(ix), p * static_cast<double>(iy),
                           p * static_cast<double>(iz)};
  }
  std::size_t voxel_count() const { return n * n * n; }
  bool contains(const Vec3& r) const;
  bool operator==(const FovGrid&) const = default;
};

enum class SensorKind { Physical, Virtual };

/// One entry of the 1-based interleaved index k = 1 .. 2N-1.
struct IndexEntry {
  SensorKind kind = SensorKind::Physical;
  Vec3 position;
  int ring_id = 0;           // virtual entries inherit the ring of their lower flank
  std::size_t physical = 0;  // 0-based physical sensor for odd k
  std::size_t lower = 0;     // flanking global indices for even k (k-1, k+1)
  std::size_t upper = 0;
};

/// Physical (odd k) and interpolated virtual (even k) sensors.
class SensorIndexMap {
 public:
  SensorIndexMap() = default;
  explicit SensorIndexMap(std::vector<IndexEntry> entries) : entries_(std::move(entries)) {}

  std::size_t size() const { return entries_.size(); }
  const IndexEntry& entry(std::size_t k) const;  // 1-based, throws std::out_of_range
  std::span<const IndexEntry> entries() const { return entries_; }
  std::vector<Vec3> positions() const;
  std::vector<int> ring_ids() const;

 private:
  std::vector<IndexEntry> entries_;
};

/// Default 256-element, 7-ring quarter-pi bowl (rings equally spaced in polar angle).
TransducerGeometry build_default_geometry();

/// Inserts a virtual sensor at the sphere-projected midpoint of every adjacent pair.
SensorIndexMap interleave_virtual(const TransducerGeometry& geom);

/// Position of global 1-based index k: physical for odd k, virtual midpoint for even k.
Vec3 sensor_position(const SensorIndexMap& map, std::size_t k);

/// Point on the focal sphere halfway (geodesically) between a and b.
Vec3 sphere_midpoint(const Vec3& a, const Vec3& b, const Vec3& center, double radius);

/// Median over sensors of the distance to the nearest other sensor.
double median_nearest_neighbor_pitch(std::span<const Vec3> positions);

// Text format: header "# parf-forge geometry v1", then "index ring x y z" per sensor.
void write_geometry(std::ostream& os, const TransducerGeometry& geom);
TransducerGeometry read_geometry(std::istream& is, double speed_of_sound = kSpeedOfSound,
                                 Vec3 focal_point = {}, double focal_radius = kFocalRadius);

}  // namespace parf
