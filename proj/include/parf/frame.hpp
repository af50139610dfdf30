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
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

namespace parf {

inline constexpr double kSampleRate = 62.5e6;  // Hz
inline constexpr std::size_t kTimeSamples = 256;

/// Which sensor set the columns of a frame belong to (file tag values are fixed).
enum class SensorAxis : std::uint8_t { Physical = 0, Interleaved = 1 };

/// Sensor-wise RF matrix, n_time x n_sensors, stored sensor-major so each trace is
/// contiguous. Column k is 0-based here; column k holds global sensor index k+1.
class ParfFrame {
 public:
  ParfFrame() = default;
  ParfFrame(std::size_t n_time, std::size_t n_sensors, double sample_rate, double t0,
            SensorAxis axis);

  std::size_t n_time() const { return n_time_; }
  std::size_t n_sensors() const { return n_sensors_; }
  double sample_rate() const { return sample_rate_; }
  double t0() const { return t0_; }
  SensorAxis axis() const { return axis_; }
  void set_axis(SensorAxis axis) { axis_ = axis; }

  double& at(std::size_t t, std::size_t k) { return data_[k * n_time_ + t]; }
  double at(std::size_t t, std::size_t k) const { return data_[k * n_time_ + t]; }
  std::span<double> trace(std::size_t k) { return {data_.data() + k * n_time_, n_time_}; }
  std::span<const double> trace(std::size_t k) const {
    return {data_.data() + k * n_time_, n_time_};
  }
  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

  /// Same shape and metadata, all samples zero.
  ParfFrame zeros_like() const;
  bool same_shape(const ParfFrame& o) const {
    return n_time_ == o.n_time_ && n_sensors_ == o.n_sensors_;
  }
  bool all_finite() const;
  double mean_square() const;
  double max_abs() const;

  ParfFrame& operator+=(const ParfFrame& o);
  friend ParfFrame operator+(ParfFrame a, const ParfFrame& b) { return a += b; }

 private:
  std::size_t n_time_ = 0;
  std::size_t n_sensors_ = 0;
  double sample_rate_ = kSampleRate;
  double t0_ = 0.0;
  SensorAxis axis_ = SensorAxis::Physical;
  std::vector<double> data_;
};

/// Odd global indices (0-based even columns) of an interleaved frame.
ParfFrame physical_columns(const ParfFrame& interleaved);

// PARF container: magic "PARF1\0", u32 n_time, u32 n_sensors, u8 axis, f64 fs, f64 t0,
// then float32 samples sensor-major. All little-endian.
void write_parf(std::ostream& os, const ParfFrame& frame);
ParfFrame read_parf(std::istream& is);
void save_parf(const std::filesystem::path& path, const ParfFrame& frame);
ParfFrame load_parf(const std::filesystem::path& path);

}  // namespace parf
