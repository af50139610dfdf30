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

#include "parf/forward.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

#include "parf/error.hpp"
#include "parf/parallel.hpp"

namespace parf {

namespace {

// Shared by the scalar model and the frame synthesizer so both agree bit for bit.
inline double nshape_value(double r, double radius, double ct) {
  const double lag = r - ct;
  return std::abs(lag) <= radius ? lag / (2.0 * r) : 0.0;
}

}  // namespace

AcquisitionWindow AcquisitionWindow::centered(double focal_radius, double speed_of_sound,
                                              std::size_t n_time, double sample_rate) {
  AcquisitionWindow w;
  w.n_time = n_time;
  w.sample_rate = sample_rate;
  w.t0 = focal_radius / speed_of_sound - static_cast<double>(n_time / 2) / sample_rate;
  return w;
}

double nshape_signal(const Sphere& sphere, const Vec3& sensor_pos, double speed_of_sound,
                     double t) {
  const double r = distance(sensor_pos, sphere.center);
  if (r <= sphere.radius) throw std::invalid_argument("sensor lies inside the absorber");
  return nshape_value(r, sphere.radius, speed_of_sound * t);
}

ParfFrame synthesize_frame(const SphereSet& spheres, std::span<const Vec3> sensors,
                           double speed_of_sound, const AcquisitionWindow& acq, SensorAxis axis) {
  ParfFrame frame(acq.n_time, sensors.size(), acq.sample_rate, acq.t0, axis);
  const auto n = static_cast<long>(acq.n_time);
  for (const Sphere& q : spheres.spheres) {
    if (!(q.radius > 0.0)) throw std::invalid_argument("sphere radius must be positive");
    for (std::size_t k = 0; k < sensors.size(); ++k) {
      const double r = distance(sensors[k], q.center);
      if (r <= q.radius) throw std::invalid_argument("sensor lies inside the absorber");
      // Candidate samples around the support, widened by one so the exact
      // inclusion test below decides the edges.
      const double first = ((r - q.radius) / speed_of_sound - acq.t0) * acq.sample_rate;
      const double last = ((r + q.radius) / speed_of_sound - acq.t0) * acq.sample_rate;
      const long i0 = std::max(0L, static_cast<long>(std::floor(first)) - 1);
      const long i1 = std::min(n - 1, static_cast<long>(std::ceil(last)) + 1);
      auto trace = frame.trace(k);
      for (long i = i0; i <= i1; ++i) {
        const double t = acq.time_of(static_cast<std::size_t>(i));
        trace[static_cast<std::size_t>(i)] += nshape_value(r, q.radius, speed_of_sound * t);
      }
    }
  }
  return frame;
}

ParfFrame synthesize_ideal_frame(const SphereSet& spheres, const TransducerGeometry& geom,
                                 const SensorIndexMap& index_map, const AcquisitionWindow& acq) {
  const auto positions = index_map.positions();
  return synthesize_frame(spheres, positions, geom.speed_of_sound, acq, SensorAxis::Interleaved);
}

PsfKernel::PsfKernel(std::vector<double> taps, double sample_rate, double center_frequency,
                     std::pair<double, double> band)
    : taps_(std::move(taps)),
      sample_rate_(sample_rate),
      center_frequency_(center_frequency),
      band_(band) {
  if (taps_.empty() || taps_.size() % 2 == 0) {
    throw std::invalid_argument("PSF must have an odd, non-zero number of taps");
  }
  if (!(sample_rate > 0.0)) throw std::invalid_argument("PSF sample rate must be positive");
}

std::vector<cdouble> PsfKernel::spectrum(std::size_t n_fft) const {
  if (n_fft < taps_.size()) throw std::invalid_argument("FFT shorter than the PSF");
  std::vector<double> wrapped(n_fft, 0.0);
  const long half = static_cast<long>(half_length());
  const long n = static_cast<long>(n_fft);
  for (long m = -half; m <= half; ++m) {
    wrapped[static_cast<std::size_t>((m + n) % n)] = taps_[static_cast<std::size_t>(m + half)];
  }
  RealFft fft(n_fft);
  return fft.forward(wrapped);
}

PsfKernel make_psf(double center_hz, std::pair<double, double> band, double sample_rate) {
  const auto [low, high] = band;
  if (!(0.0 < low && low < center_hz && center_hz < high && high < 0.5 * sample_rate)) {
    throw std::invalid_argument("PSF requires 0 < band.low < center < band.high < fs/2");
  }
  const double sigma_f = (center_hz - low) / std::sqrt(2.0 * std::numbers::ln2);
  const double sigma_t = 1.0 / (2.0 * std::numbers::pi * sigma_f);
  const auto half = static_cast<std::size_t>(std::floor(4.0 * sigma_t * sample_rate));

  std::vector<double> taps(2 * half + 1);
  for (std::size_t m = 0; m <= half; ++m) {
    const double t = static_cast<double>(m) / sample_rate;
    const double v = std::exp(-t * t / (2.0 * sigma_t * sigma_t)) *
                     std::cos(2.0 * std::numbers::pi * center_hz * t);
    taps[half + m] = v;
    taps[half - m] = v;
  }

  // Zero-phase taps: H(f) = h0 + 2 sum h_m cos(2 pi f m / fs).
  auto response = [&](double f) {
    double acc = taps[half];
    for (std::size_t m = 1; m <= half; ++m) {
      acc += 2.0 * taps[half + m] * std::cos(2.0 * std::numbers::pi * f * static_cast<double>(m) / sample_rate);
    }
    return std::abs(acc);
  };
  const std::size_t grid = 4096;
  const double step = 0.5 * sample_rate / static_cast<double>(grid);
  std::size_t best = 0;
  for (std::size_t i = 1; i <= grid; ++i) {
    if (response(step * static_cast<double>(i)) > response(step * static_cast<double>(best))) best = i;
  }
  // Golden-section refinement around the best grid frequency.
  double a = std::max(0.0, step * (static_cast<double>(best) - 1.0));
  double b = std::min(0.5 * sample_rate, step * (static_cast<double>(best) + 1.0));
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  for (int it = 0; it < 100; ++it) {
    const double c = b - g * (b - a), d = a + g * (b - a);
    if (response(c) > response(d)) b = d;
    else a = c;
  }
  const double peak = std::max(response(0.5 * (a + b)), response(step * static_cast<double>(best)));
  for (double& v : taps) v /= peak;
  return PsfKernel(std::move(taps), sample_rate, center_hz, band);
}

PsfKernel delta_psf(double sample_rate) { return PsfKernel({1.0}, sample_rate); }

std::vector<double> convolve_same(std::span<const double> x, std::span<const double> taps) {
  const long n = static_cast<long>(x.size());
  const long half = static_cast<long>(taps.size() / 2);
  std::vector<double> y(x.size(), 0.0);
  for (long i = 0; i < n; ++i) {
    double acc = 0.0;
    const long m0 = std::max(-half, i - (n - 1));
    const long m1 = std::min(half, i);
    for (long m = m0; m <= m1; ++m) {
      acc += taps[static_cast<std::size_t>(m + half)] * x[static_cast<std::size_t>(i - m)];
    }
    y[static_cast<std::size_t>(i)] = acc;
  }
  return y;
}

ParfFrame degrade_frame(const ParfFrame& ideal, const PsfKernel& psf, const DegradeConfig& cfg) {
  if (std::isnan(cfg.snr_db) || cfg.snr_db == -std::numeric_limits<double>::infinity()) {
    throw std::invalid_argument("snr_db must be finite or +inf");
  }
  if (!ideal.all_finite()) throw NumericalError("ideal frame contains non-finite samples");

  ParfFrame out = ideal.zeros_like();
  parallel_for(ideal.n_sensors(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t k = begin; k < end; ++k) {
      const auto y = convolve_same(ideal.trace(k), psf.taps());
      std::copy(y.begin(), y.end(), out.trace(k).begin());
    }
  });

  if (std::isinf(cfg.snr_db)) return out;
  const double signal_power = out.mean_square();
  if (!(signal_power > 0.0)) {
    throw NumericalError("cannot set noise for a finite SNR on an all-zero frame");
  }
  const double noise_sigma = std::sqrt(signal_power * std::pow(10.0, -cfg.snr_db / 10.0));
  std::mt19937_64 rng(cfg.noise_seed);
  std::normal_distribution<double> noise(0.0, noise_sigma);
  for (double& v : out.data()) v += noise(rng);
  return out;
}

SphereSet sample_spheres(std::uint64_t seed, const SphereSampler& sampler, const FovGrid& fov) {
  if (sampler.count < 1) throw std::invalid_argument("sphere count must be at least 1");
  if (!(sampler.radius_sigma >= 0.0)) throw std::invalid_argument("radius sigma must be >= 0");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> radius(sampler.radius_mu, sampler.radius_sigma);
  const Vec3 lo = fov.origin();
  std::uniform_real_distribution<double> ux(lo.x, lo.x + fov.side_length);
  std::uniform_real_distribution<double> uy(lo.y, lo.y + fov.side_length);
  std::uniform_real_distribution<double> uz(lo.z, lo.z + fov.side_length);

  SphereSet set;
  set.seed = seed;
  set.spheres.reserve(sampler.count);
  for (std::size_t q = 0; q < sampler.count; ++q) {
    double r = 0.0;
    while (r == 0.0) r = std::abs(radius(rng));
    Sphere s;
    s.radius = r;
    s.center.x = ux(rng);
    s.center.y = uy(rng);
    s.center.z = uz(rng);
    set.spheres.push_back(s);
  }
  return set;
}

SimulationSetup SimulationSetup::defaults() {
  SimulationSetup s;
  s.geometry = build_default_geometry();
  s.index_map = interleave_virtual(s.geometry);
  s.psf = make_psf();
  s.window = AcquisitionWindow::centered(s.geometry.focal_radius, s.geometry.speed_of_sound);
  s.fov.center = s.geometry.focal_point;
  return s;
}

std::pair<std::uint64_t, std::uint64_t> split_seed(std::uint64_t seed) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    0x50415246u};
  std::uint32_t words[4];
  seq.generate(words, words + 4);
  return {(std::uint64_t{words[0]} << 32) | words[1], (std::uint64_t{words[2]} << 32) | words[3]};
}

TrainingPair make_training_pair(const SimulationSetup& setup, std::uint64_t seed) {
  auto [sphere_seed, noise_seed] = split_seed(seed);
  TrainingPair pair;
  pair.spheres = sample_spheres(sphere_seed, setup.sampler, setup.fov);
  pair.target = synthesize_ideal_frame(pair.spheres, setup.geometry, setup.index_map, setup.window);
  // A draw of only vanishingly small spheres can miss every sample; redraw from a
  // derived seed so noise power stays defined.
  while (pair.target.max_abs() == 0.0) {
    sphere_seed = split_seed(sphere_seed).first;
    pair.spheres = sample_spheres(sphere_seed, setup.sampler, setup.fov);
    pair.target =
        synthesize_ideal_frame(pair.spheres, setup.geometry, setup.index_map, setup.window);
  }
  const auto degraded = degrade_frame(pair.target, setup.psf, {setup.snr_db, noise_seed});
  pair.input = physical_columns(degraded);
  return pair;
}

}  // namespace parf
