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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

#include "parf/error.hpp"
#include "parf/fft.hpp"
#include "parf/forward.hpp"

using namespace parf;

namespace {

constexpr double kC = 1475.0;

// Independent N-shape: explicit lobe-by-lobe evaluation.
double nshape_oracle(double R, double r, double ct) {
  const double d = r - ct;
  if (d > R || d < -R) return 0.0;
  return d / (2.0 * r);
}

double snr_db(const ParfFrame& clean, const ParfFrame& noisy) {
  double ps = 0.0, pn = 0.0;
  for (std::size_t i = 0; i < clean.data().size(); ++i) {
    ps += clean.data()[i] * clean.data()[i];
    const double n = noisy.data()[i] - clean.data()[i];
    pn += n * n;
  }
  return 10.0 * std::log10(ps / pn);
}

double folded_normal_mean(double mu, double sigma) {
  const double phi = 0.5 * std::erfc((mu / sigma) / std::numbers::sqrt2);  // Phi(-mu/sigma)
  return sigma * std::sqrt(2.0 / std::numbers::pi) * std::exp(-mu * mu / (2.0 * sigma * sigma)) +
         mu * (1.0 - 2.0 * phi);
}

SphereSet one_sphere(double radius, Vec3 center) {
  SphereSet s;
  s.spheres.push_back({radius, center});
  return s;
}

}  // namespace

TEST_CASE("N-shape lobes at R = 50 um, r = 30 mm") {
  const Sphere q{50e-6, {0.0, 0.0, 0.0}};
  const Vec3 sensor{0.0, 0.0, -0.030};
  const double r = 0.030, R = 50e-6;
  const double edge = R * (1.0 - 1e-12);  // just inside the support
  CHECK(nshape_signal(q, sensor, kC, (r - edge) / kC) == doctest::Approx(R / (2 * r)).epsilon(1e-9));
  CHECK(R / (2 * r) == doctest::Approx(8.333e-4).epsilon(1e-3));
  CHECK(std::abs(nshape_signal(q, sensor, kC, r / kC)) < 1e-12);
  CHECK(nshape_signal(q, sensor, kC, (r + edge) / kC) == doctest::Approx(-R / (2 * r)).epsilon(1e-9));
  CHECK(nshape_signal(q, sensor, kC, (r + 2 * R) / kC) == 0.0);
  CHECK_THROWS_AS(nshape_signal(q, Vec3{0.0, 0.0, 10e-6}, kC, 0.0), std::invalid_argument);
}

TEST_CASE("N-shape peak follows 1/r") {
  const Sphere q{40e-6, {0.0, 0.0, 0.0}};
  for (double r : {0.01, 0.02, 0.03}) {
    const double edge = q.radius * (1.0 - 1e-12);
    const double p1 = nshape_signal(q, Vec3{0.0, 0.0, -r}, kC, (r - edge) / kC);
    const double p2 = nshape_signal(q, Vec3{0.0, 0.0, -2 * r}, kC, (2 * r - edge) / kC);
    CHECK(std::abs(p2 / p1 - 0.5) < 1e-9);
  }
}

TEST_CASE("synthesized samples match the closed form") {
  const auto setup = SimulationSetup::defaults();
  const auto positions = setup.index_map.positions();
  const auto spheres = sample_spheres(11, setup.sampler, setup.fov);
  const auto frame = synthesize_ideal_frame(spheres, setup.geometry, setup.index_map, setup.window);
  REQUIRE(frame.n_sensors() == 511);
  REQUIRE(frame.n_time() == 256);
  for (std::size_t k = 0; k < 511; k += 17) {
    for (std::size_t i = 0; i < 256; ++i) {
      double expected = 0.0;
      for (const auto& q : spheres.spheres) {
        expected += nshape_oracle(q.radius, distance(positions[k], q.center),
                                  kC * (setup.window.t0 + static_cast<double>(i) / 62.5e6));
      }
      CHECK(std::abs(frame.at(i, k) - expected) <= 1e-12 * std::max(1.0, std::abs(expected)));
    }
  }
}

TEST_CASE("empty sphere set gives a zero frame") {
  const auto setup = SimulationSetup::defaults();
  const auto frame = synthesize_ideal_frame({}, setup.geometry, setup.index_map, setup.window);
  CHECK(frame.max_abs() == 0.0);
}

TEST_CASE("sphere at the focus arrives at the center sample on every sensor") {
  const auto setup = SimulationSetup::defaults();
  const auto frame = synthesize_ideal_frame(one_sphere(80e-6, {}), setup.geometry, setup.index_map,
                                            setup.window);
  const long expected = std::lround((0.030 / kC - setup.window.t0) * 62.5e6);
  CHECK(expected == 128);
  for (std::size_t k = 0; k < frame.n_sensors(); ++k) {
    // Zero crossing between the positive and negative lobes.
    const auto tr = frame.trace(k);
    long cross = -1;
    for (std::size_t i = 1; i < tr.size(); ++i) {
      if (tr[i - 1] > 0.0 && tr[i] <= 0.0) cross = static_cast<long>(i);
    }
    CHECK(std::abs(cross - expected) <= 1);
  }
}

TEST_CASE("superposition of sphere sets") {
  const auto setup = SimulationSetup::defaults();
  const auto a = sample_spheres(1, setup.sampler, setup.fov);
  const auto b = sample_spheres(2, setup.sampler, setup.fov);
  SphereSet ab = a;
  ab.spheres.insert(ab.spheres.end(), b.spheres.begin(), b.spheres.end());
  const auto fa = synthesize_ideal_frame(a, setup.geometry, setup.index_map, setup.window);
  const auto fb = synthesize_ideal_frame(b, setup.geometry, setup.index_map, setup.window);
  const auto fab = synthesize_ideal_frame(ab, setup.geometry, setup.index_map, setup.window);
  for (std::size_t i = 0; i < fab.data().size(); ++i) {
    CHECK(std::abs(fab.data()[i] - fa.data()[i] - fb.data()[i]) <= 1e-12);
  }
}

TEST_CASE("radial displacement shifts the zero crossing") {
  const auto setup = SimulationSetup::defaults();
  const Vec3 sensor = setup.geometry.sensors[100].position;
  const Vec3 dir = (Vec3{} - sensor) / sensor.norm();  // toward the focus
  const std::vector<Vec3> one{sensor};
  const double dr = 10 * kC / 62.5e6;  // ten samples
  auto crossing = [&](Vec3 center) {
    const auto f = synthesize_frame(one_sphere(100e-6, center), one, kC, setup.window,
                                    SensorAxis::Physical);
    for (std::size_t i = 1; i < f.n_time(); ++i) {
      if (f.at(i - 1, 0) > 0.0 && f.at(i, 0) <= 0.0) return static_cast<long>(i);
    }
    return -1L;
  };
  const long c0 = crossing(Vec3{} - dir * 0.2e-3);
  const long c1 = crossing(Vec3{} - dir * 0.2e-3 + dir * dr);
  CHECK(c1 - c0 == std::lround(dr / kC * 62.5e6));
}

TEST_CASE("PSF: symmetric taps, peak at 12 MHz, -6 dB at 8 MHz") {
  const auto psf = make_psf();
  const auto h = psf.taps();
  REQUIRE(h.size() % 2 == 1);
  CHECK(h.size() == 23);
  for (std::size_t i = 0; i < h.size(); ++i) CHECK(h[i] == h[h.size() - 1 - i]);

  const std::size_t n = 8192;
  const double df = 62.5e6 / n;
  const auto H = psf.spectrum(n);
  std::size_t peak = 0;
  for (std::size_t i = 1; i < H.size(); ++i) {
    if (std::abs(H[i]) > std::abs(H[peak])) peak = i;
  }
  CHECK(std::abs(static_cast<double>(peak) * df - 12e6) <= df);
  // Grid samples never exceed the continuous peak of 1.
  CHECK(std::abs(H[peak]) <= 1.0 + 1e-12);
  CHECK(std::abs(H[peak]) >= 1.0 - 1e-6);
  const double ratio = std::abs(H[static_cast<std::size_t>(std::lround(8e6 / df))]) /
                       std::abs(H[static_cast<std::size_t>(std::lround(12e6 / df))]);
  CHECK(std::abs(ratio - 0.5) <= 0.02 * 0.5);
  CHECK_THROWS_AS(make_psf(12e6, {13e6, 16e6}), std::invalid_argument);
  CHECK_THROWS_AS(make_psf(12e6, {8e6, 40e6}), std::invalid_argument);
}

TEST_CASE("convolve_same against direct full convolution") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  std::vector<double> x(40), taps(7);
  for (double& v : x) v = g(rng);
  for (double& v : taps) v = g(rng);
  const auto y = convolve_same(x, taps);
  // Full convolution then crop so the center tap sits at lag 0.
  std::vector<double> full(x.size() + taps.size() - 1, 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = 0; j < taps.size(); ++j) full[i + j] += x[i] * taps[j];
  }
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(y[i] == doctest::Approx(full[i + 3]).epsilon(1e-12));
}

TEST_CASE("degradation SNR within half a dB of 30 dB") {
  const auto setup = SimulationSetup::defaults();
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto spheres = sample_spheres(100 + seed, setup.sampler, setup.fov);
    const auto ideal = synthesize_ideal_frame(spheres, setup.geometry, setup.index_map, setup.window);
    const auto clean = degrade_frame(ideal, setup.psf, {DegradeConfig::kNoiseless, 0});
    const auto noisy = degrade_frame(ideal, setup.psf, {30.0, seed});
    CHECK(std::abs(snr_db(clean, noisy) - 30.0) <= 0.5);
  }
}

TEST_CASE("noiseless degradation is band-limited to the PSF band") {
  const auto setup = SimulationSetup::defaults();
  const auto ideal = synthesize_ideal_frame(one_sphere(60e-6, {0.2e-3, -0.1e-3, 0.3e-3}),
                                            setup.geometry, setup.index_map, setup.window);
  const auto clean = degrade_frame(ideal, setup.psf, {DegradeConfig::kNoiseless, 0});
  const std::size_t n = 4096;
  RealFft fft(n);
  const auto X = fft.forward(clean.trace(200));
  double peak = 0.0;
  for (const auto& z : X) peak = std::max(peak, std::abs(z));
  const double df = 62.5e6 / n;
  for (std::size_t i = 0; i < X.size(); ++i) {
    if (std::abs(X[i]) >= 0.5 * peak) {
      const double f = static_cast<double>(i) * df;
      CHECK(f >= 7.5e6);
      CHECK(f <= 16.5e6);
    }
  }
}

TEST_CASE("degradation: determinism, linearity, zero-frame rejection") {
  const auto setup = SimulationSetup::defaults();
  const auto a = synthesize_ideal_frame(sample_spheres(5, setup.sampler, setup.fov), setup.geometry,
                                        setup.index_map, setup.window);
  const auto b = synthesize_ideal_frame(sample_spheres(6, setup.sampler, setup.fov), setup.geometry,
                                        setup.index_map, setup.window);
  const auto n1 = degrade_frame(a, setup.psf, {30.0, 9});
  const auto n2 = degrade_frame(a, setup.psf, {30.0, 9});
  CHECK(std::equal(n1.data().begin(), n1.data().end(), n2.data().begin()));

  const DegradeConfig off{DegradeConfig::kNoiseless, 0};
  const auto lhs = degrade_frame(a + b, setup.psf, off);
  const auto ra = degrade_frame(a, setup.psf, off);
  const auto rb = degrade_frame(b, setup.psf, off);
  for (std::size_t i = 0; i < lhs.data().size(); ++i) {
    CHECK(std::abs(lhs.data()[i] - ra.data()[i] - rb.data()[i]) <= 1e-9 * std::max(1e-3, std::abs(lhs.data()[i])));
  }
  CHECK_THROWS_AS(degrade_frame(a.zeros_like(), setup.psf, {30.0, 1}), NumericalError);
  CHECK_NOTHROW(degrade_frame(a.zeros_like(), setup.psf, off));
}

TEST_CASE("sphere sampler: count, positivity, FOV, folded-normal mean") {
  const auto setup = SimulationSetup::defaults();
  const auto s = sample_spheres(123, setup.sampler, setup.fov);
  CHECK(s.size() == 4);
  for (const auto& q : s.spheres) {
    CHECK(q.radius > 0.0);
    CHECK(setup.fov.contains(q.center));
  }
  SphereSampler many = setup.sampler;
  many.count = 100000;
  const auto big = sample_spheres(7, many, setup.fov);
  double sum = 0.0;
  for (const auto& q : big.spheres) {
    REQUIRE(q.radius > 0.0);
    sum += q.radius;
  }
  const double oracle = folded_normal_mean(50e-6, 45e-6);
  CHECK(std::abs(sum / 1e5 - oracle) <= 0.02 * oracle);
  // Same seed, same draw.
  const auto again = sample_spheres(123, setup.sampler, setup.fov);
  for (std::size_t i = 0; i < 4; ++i) CHECK(again.spheres[i].center == s.spheres[i].center);
}

TEST_CASE("training pair shapes, determinism and column restriction") {
  auto setup = SimulationSetup::defaults();
  const auto p1 = make_training_pair(setup, 77);
  const auto p2 = make_training_pair(setup, 77);
  CHECK(p1.input.n_sensors() == 256);
  CHECK(p1.target.n_sensors() == 511);
  CHECK(p1.input.axis() == SensorAxis::Physical);
  CHECK(p1.target.axis() == SensorAxis::Interleaved);
  CHECK(std::equal(p1.input.data().begin(), p1.input.data().end(), p2.input.data().begin()));
  CHECK(std::equal(p1.target.data().begin(), p1.target.data().end(), p2.target.data().begin()));

  setup.snr_db = DegradeConfig::kNoiseless;
  const auto quiet = make_training_pair(setup, 78);
  const auto conv = degrade_frame(quiet.target, setup.psf, {DegradeConfig::kNoiseless, 0});
  for (std::size_t j = 0; j < 256; ++j) {
    for (std::size_t i = 0; i < 256; ++i) CHECK(quiet.input.at(i, j) == conv.at(i, 2 * j));
  }
}

TEST_CASE("split_seed gives distinct, reproducible streams") {
  const auto [a, b] = split_seed(5);
  CHECK(a != b);
  CHECK(split_seed(5) == std::make_pair(a, b));
  CHECK(split_seed(6) != split_seed(5));
}

TEST_CASE("PARF container round trip") {
  const auto setup = SimulationSetup::defaults();
  const auto f = make_training_pair(setup, 3).target;
  std::stringstream ss;
  write_parf(ss, f);
  const auto back = read_parf(ss);
  CHECK(back.n_time() == f.n_time());
  CHECK(back.n_sensors() == f.n_sensors());
  CHECK(back.axis() == SensorAxis::Interleaved);
  CHECK(back.t0() == f.t0());
  CHECK(back.sample_rate() == f.sample_rate());
  for (std::size_t i = 0; i < f.data().size(); ++i) {
    CHECK(back.data()[i] == static_cast<double>(static_cast<float>(f.data()[i])));
  }
  const std::string bytes = ss.str();
  CHECK(bytes.compare(0, 6, std::string("PARF1\0", 6)) == 0);
  std::stringstream bad("PARF2\0garbage");
  CHECK_THROWS_AS(read_parf(bad), FormatError);
}
