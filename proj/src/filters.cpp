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

#include "parf/filters.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "parf/error.hpp"
#include "parf/fft.hpp"

namespace parf {

ParfFrame wiener_filter(const ParfFrame& obs, const PsfKernel& psf, const WienerConfig& cfg) {
  if (obs.n_time() == 0 || obs.n_sensors() == 0) throw std::invalid_argument("empty frame");
  if (!(cfg.beta >= 0.0)) throw std::invalid_argument("Wiener beta must be >= 0");

  // Linear (not circular) deconvolution: pad to at least twice the trace length.
  const std::size_t n_fft =
      next_pow2(std::max(2 * obs.n_time(), obs.n_time() + psf.taps().size()));
  const auto H = psf.spectrum(n_fft);
  const double noise_to_signal = std::pow(10.0, -cfg.snr_db / 10.0);
  std::vector<cdouble> gain(H.size());
  for (std::size_t i = 0; i < H.size(); ++i) {
    const double denom = std::norm(H[i]) + cfg.beta * noise_to_signal;
    gain[i] = denom > 0.0 ? std::conj(H[i]) / denom : cdouble{0.0, 0.0};
  }

  ParfFrame out(obs.n_time(), 2 * obs.n_sensors() - 1, obs.sample_rate(), obs.t0(),
                SensorAxis::Interleaved);
  RealFft fft(n_fft);
  std::vector<cdouble> spec(fft.bins());
  std::vector<double> restored(n_fft);
  for (std::size_t k = 0; k < obs.n_sensors(); ++k) {
    fft.forward(obs.trace(k), spec);
    for (std::size_t i = 0; i < spec.size(); ++i) spec[i] *= gain[i];
    fft.inverse(spec, restored);
    std::copy_n(restored.begin(), obs.n_time(), out.trace(2 * k).begin());
  }
  return out;
}

ParfFrame laser_artefact_filter(const ParfFrame& obs, std::span<const int> ring_of_column) {
  if (ring_of_column.size() != obs.n_sensors()) {
    throw std::invalid_argument("ring assignment does not cover every column");
  }
  if (ring_of_column.empty()) return obs;
  const int max_ring = *std::max_element(ring_of_column.begin(), ring_of_column.end());
  if (*std::min_element(ring_of_column.begin(), ring_of_column.end()) < 0) {
    throw std::invalid_argument("negative ring id");
  }
  std::vector<std::vector<std::size_t>> members(static_cast<std::size_t>(max_ring) + 1);
  for (std::size_t k = 0; k < ring_of_column.size(); ++k) {
    members[static_cast<std::size_t>(ring_of_column[k])].push_back(k);
  }
  for (std::size_t ring = 0; ring < members.size(); ++ring) {
    if (members[ring].empty()) {
      throw std::invalid_argument("ring " + std::to_string(ring) + " has no sensors");
    }
  }

  ParfFrame out = obs;
  std::vector<double> mean(obs.n_time());
  for (const auto& cols : members) {
    std::fill(mean.begin(), mean.end(), 0.0);
    for (std::size_t k : cols) {
      const auto tr = obs.trace(k);
      for (std::size_t t = 0; t < mean.size(); ++t) mean[t] += tr[t];
    }
    for (double& m : mean) m /= static_cast<double>(cols.size());
    for (std::size_t k : cols) {
      auto tr = out.trace(k);
      for (std::size_t t = 0; t < mean.size(); ++t) tr[t] -= mean[t];
    }
  }
  return out;
}

ParfFrame laser_artefact_filter(const ParfFrame& obs, const TransducerGeometry& geom) {
  if (obs.n_sensors() == geom.n_physical()) return laser_artefact_filter(obs, geom.ring_ids());
  if (obs.n_sensors() == geom.n_virtual_total()) {
    return laser_artefact_filter(obs, interleave_virtual(geom).ring_ids());
  }
  throw std::invalid_argument("frame columns match neither the physical nor interleaved layout");
}

ParfFrame linear_interpolate_sensors(const ParfFrame& obs) {
  if (obs.n_sensors() < 2) throw std::invalid_argument("interpolation needs at least 2 columns");
  ParfFrame out(obs.n_time(), 2 * obs.n_sensors() - 1, obs.sample_rate(), obs.t0(),
                SensorAxis::Interleaved);
  for (std::size_t j = 0; j < obs.n_sensors(); ++j) {
    const auto a = obs.trace(j);
    std::copy(a.begin(), a.end(), out.trace(2 * j).begin());
    if (j + 1 == obs.n_sensors()) break;
    const auto b = obs.trace(j + 1);
    auto mid = out.trace(2 * j + 1);
    for (std::size_t t = 0; t < obs.n_time(); ++t) mid[t] = 0.5 * (a[t] + b[t]);
  }
  return out;
}

std::pair<ParfFrame, NormalizationRecord> normalize(const ParfFrame& frame,
                                                    NormalizationScheme scheme) {
  NormalizationRecord rec;
  rec.scheme = scheme;
  const auto data = frame.data();
  if (data.empty()) throw std::invalid_argument("cannot normalize an empty frame");
  if (scheme == NormalizationScheme::Symmetric) {
    rec.scale = frame.max_abs();
    rec.offset = 0.0;
    if (!(rec.scale > 0.0)) throw NumericalError("symmetric normalization of an all-zero frame");
  } else {
    const auto [lo, hi] = std::minmax_element(data.begin(), data.end());
    rec.offset = *lo;
    rec.scale = *hi - *lo;
    if (!(rec.scale > 0.0)) throw NumericalError("affine normalization of a constant frame");
  }
  return {apply_normalization(frame, rec), rec};
}

ParfFrame apply_normalization(const ParfFrame& frame, const NormalizationRecord& record) {
  if (record.scale == 0.0) throw std::invalid_argument("normalization scale must be non-zero");
  ParfFrame out = frame;
  for (double& v : out.data()) v = (v - record.offset) / record.scale;
  return out;
}

ParfFrame denormalize(const ParfFrame& frame, const NormalizationRecord& record) {
  if (record.scale == 0.0) throw std::invalid_argument("normalization scale must be non-zero");
  ParfFrame out = frame;
  for (double& v : out.data()) v = v * record.scale + record.offset;
  return out;
}

}  // namespace parf
