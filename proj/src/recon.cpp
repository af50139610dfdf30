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

#include "parf/recon.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "parf/binary_io.hpp"
#include "parf/error.hpp"
#include "parf/parallel.hpp"

namespace parf {

namespace {

constexpr std::string_view kMagic = "PAVL1";

}  // namespace

std::size_t Volume::argmax_abs() const {
  std::size_t best = 0;
  for (std::size_t i = 1; i < data.size(); ++i) {
    if (std::abs(data[i]) > std::abs(data[best])) best = i;
  }
  return best;
}

bool Volume::all_finite() const {
  return std::all_of(data.begin(), data.end(), [](double v) { return std::isfinite(v); });
}

std::vector<Vec3> sensor_positions_for(const ParfFrame& frame, const TransducerGeometry& geom,
                                       const SensorIndexMap& map) {
  if (frame.n_sensors() == geom.n_physical()) return geom.positions();
  if (frame.n_sensors() == map.size()) return map.positions();
  throw std::invalid_argument("frame has " + std::to_string(frame.n_sensors()) +
                              " columns, expected " + std::to_string(geom.n_physical()) + " or " +
                              std::to_string(map.size()));
}

BeamformResult beamform(const ParfFrame& frame, std::span<const Vec3> sensors, double c,
                        const FovGrid& grid, Interpolation interp) {
  if (sensors.size() != frame.n_sensors()) {
    throw std::invalid_argument("sensor count does not match frame columns");
  }
  if (frame.n_time() == 0 || sensors.empty()) throw std::invalid_argument("empty frame");

  BeamformResult out{Volume(grid, VolumeKind::Ubp), Volume(grid, VolumeKind::Cf)};
  const std::size_t n = grid.n, nt = frame.n_time(), ns = frame.n_sensors();
  const double fs = frame.sample_rate(), t0 = frame.t0();
  const double last = static_cast<double>(nt - 1);
  const double inv_n = 1.0 / static_cast<double>(ns);
  std::atomic<bool> any_in_window{false};

  parallel_for(n * n, [&](std::size_t begin, std::size_t end) {
    bool seen = false;
    for (std::size_t row = begin; row < end; ++row) {
      const std::size_t iy = row % n, iz = row / n;
      for (std::size_t ix = 0; ix < n; ++ix) {
        const Vec3 r = grid.voxel_center(ix, iy, iz);
        double sum = 0.0, energy = 0.0;
        for (std::size_t k = 0; k < ns; ++k) {
          const double u = (distance(sensors[k], r) / c - t0) * fs;
          if (!(u >= 0.0 && u <= last)) continue;
          seen = true;
          const auto trace = frame.trace(k);
          double s;
          if (interp == Interpolation::Nearest) {
            s = trace[static_cast<std::size_t>(std::lround(u))];
          } else {
            const auto i0 = static_cast<std::size_t>(u);
            const double w = u - static_cast<double>(i0);
            s = i0 + 1 < nt ? trace[i0] + w * (trace[i0 + 1] - trace[i0]) : trace[i0];
          }
          sum += s;
          energy += s * s;
        }
        const std::size_t idx = out.p.index(ix, iy, iz);
        out.p.data[idx] = sum;
        out.cf.data[idx] = energy > 0.0 ? std::min(1.0, inv_n * sum * sum / energy) : 0.0;
      }
    }
    if (seen) any_in_window.store(true, std::memory_order_relaxed);
  });
  if (!any_in_window) {
    throw ConfigError("reconstruction grid lies outside the acquisition time window");
  }
  return out;
}

Volume ubp(const ParfFrame& frame, const TransducerGeometry& geom, const SensorIndexMap& map,
           const FovGrid& grid, Interpolation interp) {
  const auto sensors = sensor_positions_for(frame, geom, map);
  return beamform(frame, sensors, geom.speed_of_sound, grid, interp).p;
}

Volume coherence_factor(const ParfFrame& frame, const TransducerGeometry& geom,
                        const SensorIndexMap& map, const FovGrid& grid, Interpolation interp) {
  const auto sensors = sensor_positions_for(frame, geom, map);
  return beamform(frame, sensors, geom.speed_of_sound, grid, interp).cf;
}

Volume cf_weighted(const Volume& p, const Volume& cf) {
  if (!(p.grid == cf.grid) || p.data.size() != cf.data.size()) {
    throw std::invalid_argument("cf_weighted: grid mismatch");
  }
  Volume out(p.grid, VolumeKind::CfWeighted);
  for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] = p.data[i] * cf.data[i];
  return out;
}

double out_of_ball_energy_fraction(const Volume& vol, const Vec3& center, double radius_voxels) {
  const std::size_t n = vol.grid.n;
  const double r = radius_voxels * vol.grid.pitch();
  double total = 0.0, outside = 0.0;
  for (std::size_t iz = 0; iz < n; ++iz) {
    for (std::size_t iy = 0; iy < n; ++iy) {
      for (std::size_t ix = 0; ix < n; ++ix) {
        const double e = vol.at(ix, iy, iz) * vol.at(ix, iy, iz);
        total += e;
        if (distance(vol.grid.voxel_center(ix, iy, iz), center) > r) outside += e;
      }
    }
  }
  if (!(total > 0.0)) throw NumericalError("energy fraction of an all-zero volume");
  return outside / total;
}

Image2D mip(const Volume& vol, int axis) {
  if (axis < 0 || axis > 2) throw std::invalid_argument("mip axis must be 0, 1 or 2");
  const std::size_t n = vol.grid.n;
  Image2D img(n, n, 0.0);
  for (std::size_t iz = 0; iz < n; ++iz) {
    for (std::size_t iy = 0; iy < n; ++iy) {
      for (std::size_t ix = 0; ix < n; ++ix) {
        const double v = std::abs(vol.at(ix, iy, iz));
        double& px = axis == 2 ? img.at(iy, ix) : axis == 1 ? img.at(iz, ix) : img.at(iz, iy);
        px = std::max(px, v);
      }
    }
  }
  return img;
}

void write_volume(std::ostream& os, const Volume& vol) {
  const auto n = static_cast<std::uint32_t>(vol.grid.n);
  io::write_magic(os, kMagic);
  for (int i = 0; i < 3; ++i) io::write_le<std::uint32_t>(os, n);
  io::write_le<double>(os, vol.grid.pitch());
  const Vec3 o = vol.grid.origin();
  io::write_le<double>(os, o.x);
  io::write_le<double>(os, o.y);
  io::write_le<double>(os, o.z);
  io::write_le<std::uint8_t>(os, static_cast<std::uint8_t>(vol.kind));
  for (double v : vol.data) io::write_le<float>(os, static_cast<float>(v));
  if (!os) throw std::runtime_error("volume write failed");
}

Volume read_volume(std::istream& is) {
  io::expect_magic(is, kMagic);
  const auto nx = io::read_le<std::uint32_t>(is);
  const auto ny = io::read_le<std::uint32_t>(is);
  const auto nz = io::read_le<std::uint32_t>(is);
  if (nx != ny || ny != nz || nx < 2 || nx > 4096) {
    throw FormatError("volume must be a cube of at least 2 voxels per side");
  }
  const double pitch = io::read_le<double>(is);
  Vec3 origin;
  origin.x = io::read_le<double>(is);
  origin.y = io::read_le<double>(is);
  origin.z = io::read_le<double>(is);
  const auto kind = io::read_le<std::uint8_t>(is);
  if (kind > 3) throw FormatError("unknown volume kind");
  if (!(pitch > 0.0) || !std::isfinite(pitch)) throw FormatError("bad voxel pitch");

  FovGrid grid;
  grid.n = nx;
  grid.side_length = pitch * static_cast<double>(nx - 1);
  grid.center = origin + Vec3{0.5 * grid.side_length, 0.5 * grid.side_length, 0.5 * grid.side_length};
  Volume vol(grid, static_cast<VolumeKind>(kind));
  for (double& v : vol.data) v = io::read_le<float>(is);
  return vol;
}

void save_volume(const std::filesystem::path& path, const Volume& vol) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write_volume(os, vol);
}

Volume load_volume(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  return read_volume(is);
}

void save_image_csv(const std::filesystem::path& path, const Image2D& image) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  os.precision(9);
  for (std::size_t r = 0; r < image.rows; ++r) {
    for (std::size_t c = 0; c < image.cols; ++c) {
      if (c) os << ',';
      os << image.at(r, c);
    }
    os << '\n';
  }
}

}  // namespace parf
