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
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "parf/fft.hpp"
#include "parf/frame.hpp"
#include "parf/geometry.hpp"
#include "parf/vec3.hpp"

namespace parf {

struct Sphere {
  double radius = 50e-6;  // m
  Vec3 center;            // m
};

struct SphereSet {
  std::vector<Sphere> spheres;
  std::uint64_t seed = 0;

  std::size_t size() const { return spheres.size(); }
};

/// Receive window: n_time samples at sample_rate starting at t0.
struct AcquisitionWindow {
  std::size_t n_time = kTimeSamples;
  double sample_rate = kSampleRate;
  double t0 = 0.0;

  /// Window whose center sample (n_time/2) is the arrival time from the focal radius.
  static AcquisitionWindow centered(double focal_radius = kFocalRadius,
                                    double speed_of_sound = kSpeedOfSound,
                                    std::size_t n_time = kTimeSamples,
                                    double sample_rate = kSampleRate);
  double time_of(std::size_t i) const { return t0 + static_cast<double>(i) / sample_rate; }
};

/// Bipolar N-shaped pressure of a uniformly absorbing sphere seen at sensor_pos:
/// (r - ct) / (2r) for |r - ct| <= R, else 0. Throws if the sensor is inside the sphere.
double nshape_signal(const Sphere& sphere, const Vec3& sensor_pos, double speed_of_sound,
                     double t);

/// Superposition of N-shapes on the given sensors (sphere-major, ascending order).
ParfFrame synthesize_frame(const SphereSet& spheres, std::span<const Vec3> sensors,
                           double speed_of_sound, const AcquisitionWindow& acq, SensorAxis axis);

/// Ideal frame over all interleaved sensors of `index_map`.
ParfFrame synthesize_ideal_frame(const SphereSet& spheres, const TransducerGeometry& geom,
                                 const SensorIndexMap& index_map, const AcquisitionWindow& acq);

/// Sensor impulse response: odd, symmetric taps centered at lag 0.
class PsfKernel {
 public:
  PsfKernel() = default;
  /// Wraps measured taps. Throws unless the length is odd.
  PsfKernel(std::vector<double> taps, double sample_rate, double center_frequency = 0.0,
            std::pair<double, double> band = {0.0, 0.0});

  std::span<const double> taps() const { return taps_; }
  std::size_t half_length() const { return taps_.size() / 2; }
  double sample_rate() const { return sample_rate_; }
  double center_frequency() const { return center_frequency_; }
  std::pair<double, double> band() const { return band_; }

  /// Spectrum on an n_fft-point grid (n_fft/2+1 bins) with the center tap at lag 0.
  std::vector<cdouble> spectrum(std::size_t n_fft) const;

 private:
  std::vector<double> taps_;
  double sample_rate_ = kSampleRate;
  double center_frequency_ = 0.0;
  std::pair<double, double> band_{0.0, 0.0};
};

/// Gaussian-windowed cosine whose -6 dB points sit at band.first (and mirror about
/// center_hz), truncated at +/-4 sigma_t and scaled to unit peak spectral magnitude.
PsfKernel make_psf(double center_hz = 12e6, std::pair<double, double> band = {8e6, 16e6},
                   double sample_rate = kSampleRate);

/// Single unit tap (H == 1).
PsfKernel delta_psf(double sample_rate = kSampleRate);

struct DegradeConfig {
  double snr_db = 30.0;  // +inf disables noise
  std::uint64_t noise_seed = 0;

  static constexpr double kNoiseless = std::numeric_limits<double>::infinity();
};

/// Same-length zero-padded convolution of one trace with centered taps.
std::vector<double> convolve_same(std::span<const double> x, std::span<const double> taps);

/// Per-sensor PSF convolution then white Gaussian noise at snr_db relative to the
/// mean-square power of the whole convolved frame.
ParfFrame degrade_frame(const ParfFrame& ideal, const PsfKernel& psf, const DegradeConfig& cfg);

struct SphereSampler {
  std::size_t count = 4;
  double radius_mu = 50e-6;     // m
  double radius_sigma = 45e-6;  // m
};

/// Radii |X|, X ~ Normal(mu, sigma^2) (zero draws are redrawn); centers uniform in the cube.
SphereSet sample_spheres(std::uint64_t seed, const SphereSampler& sampler, const FovGrid& fov);

/// Everything needed to turn a seed into a training pair.
struct SimulationSetup {
  TransducerGeometry geometry;
  SensorIndexMap index_map;
  PsfKernel psf;
  AcquisitionWindow window;
  FovGrid fov;
  SphereSampler sampler;
  double snr_db = 30.0;

  static SimulationSetup defaults();
};

struct TrainingPair {
  ParfFrame input;   // degraded, physical columns only
  ParfFrame target;  // ideal, all interleaved columns
  SphereSet spheres;
};

/// Independent seeds for the sphere draw and the noise draw of one pair.
std::pair<std::uint64_t, std::uint64_t> split_seed(std::uint64_t seed);

TrainingPair make_training_pair(const SimulationSetup& setup, std::uint64_t seed);

}  // namespace parf
