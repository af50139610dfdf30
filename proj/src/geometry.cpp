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

#include "parf/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <numbers>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "parf/error.hpp"

namespace parf {

namespace {

constexpr const char* kGeometryHeader = "# parf-forge geometry v1";

// Largest-remainder apportionment of `total` sensors proportional to `weights`.
std::vector<int> apportion(std::span<const double> weights, int total) {
  const double sum = std::accumulate(weights.begin(), weights.end(), 0.0);
  std::vector<int> counts(weights.size());
  std::vector<double> remainder(weights.size());
  int assigned = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const double exact = total * weights[i] / sum;
    counts[i] = static_cast<int>(std::lround(exact));
    remainder[i] = exact - counts[i];
    assigned += counts[i];
  }
  while (assigned != total) {
    // Positive deficit: bump the ring that was rounded down the most, and vice versa.
    const bool add = assigned < total;
    std::size_t best = 0;
    for (std::size_t i = 1; i < weights.size(); ++i) {
      if (add ? remainder[i] > remainder[best] : remainder[i] < remainder[best]) best = i;
    }
    counts[best] += add ? 1 : -1;
    remainder[best] += add ? -1.0 : 1.0;
    assigned += add ? 1 : -1;
  }
  return counts;
}

}  // namespace

std::vector<Vec3> TransducerGeometry::positions() const {
  std::vector<Vec3> out;
  out.reserve(sensors.size());
  for (const auto& s : sensors) out.push_back(s.position);
  return out;
}

std::vector<int> TransducerGeometry::ring_ids() const {
  std::vector<int> out;
  out.reserve(sensors.size());
  for (const auto& s : sensors) out.push_back(s.ring_id);
  return out;
}

bool FovGrid::contains(const Vec3& r) const {
  const Vec3 lo = origin();
  const double tol = 1e-12;
  return r.x >= lo.x - tol && r.x <= lo.x + side_length + tol && r.y >= lo.y - tol &&
         r.y <= lo.y + side_length + tol && r.z >= lo.z - tol && r.z <= lo.z + side_length + tol;
}

const IndexEntry& SensorIndexMap::entry(std::size_t k) const {
  if (k < 1 || k > entries_.size()) {
    throw std::out_of_range("sensor index " + std::to_string(k) + " outside [1, " +
                            std::to_string(entries_.size()) + "]");
  }
  return entries_[k - 1];
}

std::vector<Vec3> SensorIndexMap::positions() const {
  std::vector<Vec3> out;
  out.reserve(entries_.size());
  for (const auto& e : entries_) out.push_back(e.position);
  return out;
}

std::vector<int> SensorIndexMap::ring_ids() const {
  std::vector<int> out;
  out.reserve(entries_.size());
  for (const auto& e : entries_) out.push_back(e.ring_id);
  return out;
}

TransducerGeometry build_default_geometry() {
  TransducerGeometry geom;
  const double aperture = std::numbers::pi / 4.0;
  std::vector<double> polar(kRingCount);
  std::vector<double> circumference(kRingCount);
  for (int i = 0; i < kRingCount; ++i) {
    polar[i] = (i + 1) * aperture / kRingCount;
    circumference[i] = std::sin(polar[i]);
  }
  const auto counts = apportion(circumference, static_cast<int>(kPhysicalSensors));

  geom.sensors.reserve(kPhysicalSensors);
  for (int ring = 0; ring < kRingCount; ++ring) {
    const int n = counts[ring];
    const double step = 2.0 * std::numbers::pi / n;
    const double stagger = (ring % 2) * 0.5 * step;
    const double rho = geom.focal_radius * std::sin(polar[ring]);
    const double z = -geom.focal_radius * std::cos(polar[ring]);
    for (int j = 0; j < n; ++j) {
      // Serpentine: odd rings run clockwise so ring ends stay close.
      const int slot = (ring % 2 == 0) ? j : n - 1 - j;
      const double phi = stagger + step * slot;
      geom.sensors.push_back(
          {geom.focal_point + Vec3{rho * std::cos(phi), rho * std::sin(phi), z}, ring});
    }
  }
  return geom;
}

Vec3 sphere_midpoint(const Vec3& a, const Vec3& b, const Vec3& center, double radius) {
  const Vec3 ua = a - center;
  const Vec3 ub = b - center;
  Vec3 mid = (ua + ub) * 0.5;
  double len = mid.norm();
  if (len < 1e-12 * radius) {
    // Antipodal pair: the geodesic midpoint is not unique. Take the great-circle point
    // orthogonal to the pair that lies furthest toward -z (the bowl apex side).
    const Vec3 axis = ua / ua.norm();
    Vec3 down = Vec3{0.0, 0.0, -1.0} - axis * (-axis.z);
    if (down.norm() < 1e-12) down = Vec3{1.0, 0.0, 0.0} - axis * axis.x;
    mid = down;
    len = mid.norm();
  }
  return center + mid * (radius / len);
}

SensorIndexMap interleave_virtual(const TransducerGeometry& geom) {
  const std::size_t n = geom.sensors.size();
  if (n < 2) throw std::invalid_argument("interleave_virtual needs at least 2 sensors");
  std::vector<IndexEntry> entries;
  entries.reserve(2 * n - 1);
  for (std::size_t j = 0; j < n; ++j) {
    IndexEntry phys;
    phys.kind = SensorKind::Physical;
    phys.position = geom.sensors[j].position;
    phys.ring_id = geom.sensors[j].ring_id;
    phys.physical = j;
    entries.push_back(phys);
    if (j + 1 == n) break;
    IndexEntry virt;
    virt.kind = SensorKind::Virtual;
    virt.position = sphere_midpoint(geom.sensors[j].position, geom.sensors[j + 1].position,
                                    geom.focal_point, geom.focal_radius);
    virt.ring_id = geom.sensors[j].ring_id;
    const std::size_t k = 2 * (j + 1);  // 1-based even index
    virt.lower = k - 1;
    virt.upper = k + 1;
    entries.push_back(virt);
  }
  return SensorIndexMap(std::move(entries));
}

Vec3 sensor_position(const SensorIndexMap& map, std::size_t k) { return map.entry(k).position; }

double median_nearest_neighbor_pitch(std::span<const Vec3> positions) {
  if (positions.size() < 2) throw std::invalid_argument("pitch needs at least 2 sensors");
  std::vector<double> nearest(positions.size(), std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < positions.size(); ++i) {
    for (std::size_t j = 0; j < positions.size(); ++j) {
      if (i != j) nearest[i] = std::min(nearest[i], distance(positions[i], positions[j]));
    }
  }
  const auto mid = nearest.begin() + static_cast<std::ptrdiff_t>(nearest.size() / 2);
  std::nth_element(nearest.begin(), mid, nearest.end());
  if (nearest.size() % 2 == 1) return *mid;
  const double upper = *mid;
  const double lower = *std::max_element(nearest.begin(), mid);
  return 0.5 * (lower + upper);
}

void write_geometry(std::ostream& os, const TransducerGeometry& geom) {
  os << kGeometryHeader << '\n';
  std::ostringstream line;
  line << std::setprecision(9);
  for (std::size_t i = 0; i < geom.sensors.size(); ++i) {
    const auto& s = geom.sensors[i];
    line.str({});
    line << i << ' ' << s.ring_id << ' ' << s.position.x << ' ' << s.position.y << ' '
         << s.position.z << '\n';
    os << line.str();
  }
}

TransducerGeometry read_geometry(std::istream& is, double speed_of_sound, Vec3 focal_point,
                                 double focal_radius) {
  std::string line;
  if (!std::getline(is, line) || line != kGeometryHeader) {
    throw FormatError("geometry file: missing header '" + std::string(kGeometryHeader) + "'");
  }
  TransducerGeometry geom;
  geom.speed_of_sound = speed_of_sound;
  geom.focal_point = focal_point;
  geom.focal_radius = focal_radius;
  std::size_t expected = 0;
  while (std::getline(is, line)) {
    if (line.empty() || line.front() == '#') continue;
    std::istringstream fields(line);
    std::size_t index = 0;
    Sensor s;
    if (!(fields >> index >> s.ring_id >> s.position.x >> s.position.y >> s.position.z)) {
      throw FormatError("geometry file: malformed line '" + line + "'");
    }
    if (index != expected) throw FormatError("geometry file: indices must be 0,1,2,...");
    if (!geom.sensors.empty() && s.ring_id < geom.sensors.back().ring_id) {
      throw FormatError("geometry file: ring ids must be non-decreasing");
    }
    const Vec3 rel = s.position - focal_point;
    if (std::abs(rel.norm() - focal_radius) > 1e-6) {
      throw FormatError("geometry file: sensor " + std::to_string(index) +
                        " is not on the focal sphere");
    }
    if (std::hypot(rel.x, rel.y) < 1e-9) {
      throw FormatError("geometry file: sensor " + std::to_string(index) + " lies on the axis");
    }
    geom.sensors.push_back(s);
    ++expected;
  }
  if (geom.sensors.size() < 2) throw FormatError("geometry file: fewer than 2 sensors");
  return geom;
}

}  // namespace parf
