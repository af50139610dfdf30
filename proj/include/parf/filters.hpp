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

#include <span>
#include <utility>

#include "parf/forward.hpp"
#include "parf/frame.hpp"
#include "parf/geometry.hpp"

namespace parf {

struct WienerConfig {
  double beta = 0.01;
  double snr_db = 30.0;
};

/// Frequency-domain Wiener deconvolution of each physical trace with a flat N/S of
/// 10^(-snr_db/10). Output is interleaved: odd global indices carry the restored
/// traces, even ones are zero.
ParfFrame wiener_filter(const ParfFrame& obs, const PsfKernel& psf, const WienerConfig& cfg = {});

/// Subtracts, per ring and per time sample, the mean over that ring's columns.
/// ring_of_column[k] is the ring of column k; every ring id in [0, max] must be used.
ParfFrame laser_artefact_filter(const ParfFrame& obs, std::span<const int> ring_of_column);

/// Picks ring ids from the physical geometry (256 columns) or its interleaved map (511).
ParfFrame laser_artefact_filter(const ParfFrame& obs, const TransducerGeometry& geom);

/// Inserts the two-column average between every pair of adjacent columns.
ParfFrame linear_interpolate_sensors(const ParfFrame& obs);

enum class NormalizationScheme { Symmetric, Affine };

/// out = (v - offset) / scale.
struct NormalizationRecord {
  NormalizationScheme scheme = NormalizationScheme::Symmetric;
  double scale = 1.0;
  double offset = 0.0;
};

/// Symmetric: divide by max|v| (range [-1, 1]). Affine: map [min, max] to [0, 1].
std::pair<ParfFrame, NormalizationRecord> normalize(const ParfFrame& frame,
                                                    NormalizationScheme scheme);
ParfFrame apply_normalization(const ParfFrame& frame, const NormalizationRecord& record);
ParfFrame denormalize(const ParfFrame& frame, const NormalizationRecord& record);

}  // namespace parf
