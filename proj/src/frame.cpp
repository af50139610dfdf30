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

#include "parf/frame.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "parf/binary_io.hpp"
#include "parf/error.hpp"

namespace parf {

ParfFrame::ParfFrame(std::size_t n_time, std::size_t n_sensors, double sample_rate, double t0,
                     SensorAxis axis)
    : n_time_(n_time),
      n_sensors_(n_sensors),
      sample_rate_(sample_rate),
      t0_(t0),
      axis_(axis),
      data_(n_time * n_sensors, 0.0) {
  if (!(sample_rate > 0.0)) throw std::invalid_argument("sample rate must be positive");
}

ParfFrame ParfFrame::zeros_like() const {
  return ParfFrame(n_time_, n_sensors_, sample_rate_, t0_, axis_);
}

bool ParfFrame::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

double ParfFrame::mean_square() const {
  if (data_.empty()) return 0.0;
  double acc = 0.0;
  for (double v : data_) acc += v * v;
  return acc / static_cast<double>(data_.size());
}

double ParfFrame::max_abs() const {
  double m = 0.0;
  for (double v : data_) m = std::max(m, std::abs(v));
  return m;
}

ParfFrame& ParfFrame::operator+=(const ParfFrame& o) {
  if (!same_shape(o)) throw std::invalid_argument("frame shape mismatch");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
  return *this;
}

ParfFrame physical_columns(const ParfFrame& interleaved) {
  const std::size_t n = (interleaved.n_sensors() + 1) / 2;
  ParfFrame out(interleaved.n_time(), n, interleaved.sample_rate(), interleaved.t0(),
                SensorAxis::Physical);
  for (std::size_t j = 0; j < n; ++j) {
    const auto src = interleaved.trace(2 * j);
    std::copy(src.begin(), src.end(), out.trace(j).begin());
  }
  return out;
}

void write_parf(std::ostream& os, const ParfFrame& frame) {
  if (frame.n_time() > std::numeric_limits<std::uint32_t>::max() ||
      frame.n_sensors() > std::numeric_limits<std::uint32_t>::max()) {
    throw std::invalid_argument("frame too large for PARF container");
  }
  io::write_magic(os, "PARF1");
  io::write_le<std::uint32_t>(os, static_cast<std::uint32_t>(frame.n_time()));
  io::write_le<std::uint32_t>(os, static_cast<std::uint32_t>(frame.n_sensors()));
  io::write_le<std::uint8_t>(os, static_cast<std::uint8_t>(frame.axis()));
  io::write_le<double>(os, frame.sample_rate());
  io::write_le<double>(os, frame.t0());
  for (double v : frame.data()) io::write_le<float>(os, static_cast<float>(v));
}

ParfFrame read_parf(std::istream& is) {
  io::expect_magic(is, "PARF1");
  const auto n_time = io::read_le<std::uint32_t>(is);
  const auto n_sensors = io::read_le<std::uint32_t>(is);
  const auto axis = io::read_le<std::uint8_t>(is);
  if (axis > 1) throw FormatError("PARF: unknown sensor axis tag");
  const auto fs = io::read_le<double>(is);
  const auto t0 = io::read_le<double>(is);
  if (!(fs > 0.0)) throw FormatError("PARF: non-positive sample rate");
  ParfFrame frame(n_time, n_sensors, fs, t0, static_cast<SensorAxis>(axis));
  for (double& v : frame.data()) v = io::read_le<float>(is);
  return frame;
}

void save_parf(const std::filesystem::path& path, const ParfFrame& frame) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write_parf(os, frame);
  if (!os) throw std::runtime_error("write failed: " + path.string());
}

ParfFrame load_parf(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  return read_parf(is);
}

}  // namespace parf
