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

#include <cmath>
#include <random>
#include <stdexcept>

#include "parf/error.hpp"
#include "parf/fft.hpp"
#include "parf/filters.hpp"
#include "parf/forward.hpp"

using namespace parf;

namespace {

ParfFrame random_frame(std::size_t nt, std::size_t ns, std::uint64_t seed) {
  ParfFrame f(nt, ns, kSampleRate, 0.0, SensorAxis::Physical);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  for (double& v : f.data()) v = g(rng);
  return f;
}

std::vector<double> magnitude_db(std::span<const double> x) {
  RealFft fft(x.size());
  const auto X = fft.forward(x);
  std::vector<double> out;
  for (const auto& z : X) out.push_back(20.0 * std::log10(std::abs(z)));
  return out;
}

}  // namespace

TEST_CASE("Wiener with a delta PSF and beta 0 is the identity on odd indices") {
  const auto obs = random_frame(256, 256, 1);
  const auto out = wiener_filter(obs, delta_psf(), {0.0, 30.0});
  REQUIRE(out.n_sensors() == 511);
  REQUIRE(out.axis() == SensorAxis::Interleaved);
  for (std::size_t j = 0; j < 256; ++j) {
    for (std::size_t t = 0; t < 256; ++t) CHECK(std::abs(out.at(t, 2 * j) - obs.at(t, j)) < 1e-9);
  }
}

TEST_CASE("Wiener output is zero on even global indices") {
  const auto out = wiener_filter(random_frame(256, 256, 2), make_psf());
  for (std::size_t j = 0; j + 1 < 256; ++j) {
    for (std::size_t t = 0; t < 256; ++t) REQUIRE(out.at(t, 2 * j + 1) == 0.0);
  }
}

TEST_CASE("Wiener is linear") {
  const auto a = random_frame(256, 8, 3), b = random_frame(256, 8, 4);
  const auto psf = make_psf();
  const auto lhs = wiener_filter(a + b, psf);
  const auto ra = wiener_filter(a, psf), rb = wiener_filter(b, psf);
  for (std::size_t i = 0; i < lhs.data().size(); ++i) {
    CHECK(std::abs(lhs.data()[i] - ra.data()[i] - rb.data()[i]) < 1e-9);
  }
}

TEST_CASE("Wiener restores the in-band spectrum of a noiseless sphere trace") {
  const auto setup = SimulationSetup::defaults();
  SphereSet s;
  s.spheres.push_back({30e-6, {0.0, 0.0, 0.0}});
  const auto ideal = physical_columns(
      synthesize_ideal_frame(s, setup.geometry, setup.index_map, setup.window));
  const auto obs = degrade_frame(ideal, setup.psf, {DegradeConfig::kNoiseless, 0});
  const auto restored = wiener_filter(obs, setup.psf, {1e-4, 30.0});
  const auto ref = magnitude_db(ideal.trace(0));
  const auto got = magnitude_db(restored.trace(0));
  const double df = kSampleRate / 256.0;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    const double f = static_cast<double>(i) * df;
    if (f >= 8e6 && f <= 16e6) CHECK(std::abs(got[i] - ref[i]) <= 1.0);
  }
}

TEST_CASE("Wiener rejects empty frames") {
  ParfFrame empty(0, 0, kSampleRate, 0.0, SensorAxis::Physical);
  CHECK_THROWS(wiener_filter(empty, make_psf()));
}

TEST_CASE("laser filter removes ring means and is a projection") {
  const auto geom = build_default_geometry();
  const auto rings = geom.ring_ids();
  ParfFrame constant(16, 256, kSampleRate, 0.0, SensorAxis::Physical);
  for (std::size_t k = 0; k < 256; ++k) {
    for (std::size_t t = 0; t < 16; ++t) constant.at(t, k) = 1.0 + rings[k] + 0.1 * t;
  }
  CHECK(laser_artefact_filter(constant, geom).max_abs() < 1e-12);

  const auto f = random_frame(32, 256, 5);
  const auto once = laser_artefact_filter(f, geom);
  const auto twice = laser_artefact_filter(once, geom);
  for (std::size_t i = 0; i < once.data().size(); ++i) {
    CHECK(std::abs(once.data()[i] - twice.data()[i]) < 1e-12);
  }
  for (int ring = 0; ring < 7; ++ring) {
    for (std::size_t t = 0; t < 32; ++t) {
      double m = 0.0;
      for (std::size_t k = 0; k < 256; ++k) {
        if (rings[k] == ring) m += once.at(t, k);
      }
      CHECK(std::abs(m) < 1e-12);
    }
  }
}

TEST_CASE("laser filter accepts the interleaved layout and rejects empty rings") {
  const auto geom = build_default_geometry();
  const auto f = random_frame(8, 511, 6);
  CHECK_NOTHROW(laser_artefact_filter(f, geom));
  const std::vector<int> gap{0, 0, 2, 2};
  CHECK_THROWS_AS(laser_artefact_filter(random_frame(4, 4, 7), gap), std::invalid_argument);
  CHECK_THROWS_AS(laser_artefact_filter(random_frame(4, 100, 7), geom), std::invalid_argument);
}

TEST_CASE("linear interpolation inserts midpoints") {
  ParfFrame f(2, 2, kSampleRate, 0.0, SensorAxis::Physical);
  f.at(0, 0) = 1.0;
  f.at(0, 1) = 3.0;
  f.at(1, 0) = -2.0;
  f.at(1, 1) = 4.0;
  const auto li = linear_interpolate_sensors(f);
  REQUIRE(li.n_sensors() == 3);
  CHECK(li.at(0, 1) == 2.0);
  CHECK(li.at(1, 1) == 1.0);
  CHECK(li.at(0, 2) == 3.0);

  const auto big = linear_interpolate_sensors(random_frame(4, 256, 8));
  CHECK(big.n_sensors() == 511);
  ParfFrame c(4, 256, kSampleRate, 0.0, SensorAxis::Physical);
  for (double& v : c.data()) v = 0.7;
  const auto ci = linear_interpolate_sensors(c);
  for (double v : ci.data()) CHECK(v == 0.7);
  CHECK_THROWS_AS(linear_interpolate_sensors(random_frame(4, 1, 9)), std::invalid_argument);
}

TEST_CASE("interpolated in-ring columns keep the flank mean") {
  const auto geom = build_default_geometry();
  const auto rings = geom.ring_ids();
  const auto f = random_frame(8, 256, 10);
  const auto li = linear_interpolate_sensors(f);
  for (std::size_t j = 0; j + 1 < 256; ++j) {
    if (rings[j] != rings[j + 1]) continue;
    for (std::size_t t = 0; t < 8; ++t) {
      CHECK(li.at(t, 2 * j + 1) == doctest::Approx(0.5 * (f.at(t, j) + f.at(t, j + 1))));
    }
  }
}

TEST_CASE("normalization schemes and round trip") {
  auto f = random_frame(16, 8, 11);
  f.at(3, 2) = -2.0 * f.max_abs();
  const auto [sym, rs] = normalize(f, NormalizationScheme::Symmetric);
  CHECK(sym.max_abs() == doctest::Approx(1.0));
  const auto [aff, ra] = normalize(f, NormalizationScheme::Affine);
  double lo = 1e9, hi = -1e9;
  for (double v : aff.data()) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  CHECK(lo == doctest::Approx(0.0));
  CHECK(hi == doctest::Approx(1.0));
  for (const auto& [n, r] : {std::pair{sym, rs}, std::pair{aff, ra}}) {
    const auto back = denormalize(n, r);
    for (std::size_t i = 0; i < f.data().size(); ++i) {
      CHECK(std::abs(back.data()[i] - f.data()[i]) <= 1e-6 * std::abs(f.data()[i]) + 1e-15);
    }
  }
  ParfFrame two(1, 1, kSampleRate, 0.0, SensorAxis::Physical);
  two.at(0, 0) = 2.0;
  CHECK(normalize(two, NormalizationScheme::Symmetric).first.at(0, 0) == 1.0);
  ParfFrame constant(4, 4, kSampleRate, 0.0, SensorAxis::Physical);
  for (double& v : constant.data()) v = 3.0;
  CHECK_THROWS_AS(normalize(constant, NormalizationScheme::Affine), NumericalError);
}
