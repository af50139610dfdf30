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

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "parf/forward.hpp"
#include "parf/frame.hpp"
#include "parf/geometry.hpp"
#include "parf/image.hpp"
#include "parf/nn/model.hpp"
#include "parf/recon.hpp"

namespace parf {

/// Nominal sensor pitches used for wavenumber axes.
inline constexpr double kNominalPhysicalPitch = 2.44e-3;     // m
inline constexpr double kNominalInterleavedPitch = 1.22e-3;  // m
inline constexpr std::array<double, 2> kDefaultContourLevels{-6.0, -12.0};

/// Binary region on a FovGrid.
struct MaskVolume {
  FovGrid grid;
  std::vector<std::uint8_t> inside;  // x fastest, 1 = inside
  std::string provenance;

  MaskVolume() = default;
  explicit MaskVolume(const FovGrid& g) : grid(g), inside(g.voxel_count(), 0) {}
  std::size_t count_inside() const;
};

/// Mask as a 0/1 volume (kind mip-source) for the PAVL container, and back (> 0.5 is inside).
Volume mask_to_volume(const MaskVolume& mask);
MaskVolume mask_from_volume(const Volume& vol, std::string provenance = {});

/// Logical OR of the mask along an axis, laid out like mip().
Image2D mask_mip(const MaskVolume& mask, int axis);

/// (mean_in - mean_out) / std_out over |values| (population std). Throws
/// std::invalid_argument if either region is empty, NumericalError if std_out is 0.
double cnr(std::span<const double> values, std::span<const std::uint8_t> mask);
double cnr(const Volume& vol, const MaskVolume& mask);
double cnr(const Image2D& image, const Image2D& mask);

/// Min-max rescale to [0, 1]; a constant input maps to zeros.
std::vector<double> rescale_unit(std::span<const double> values);

/// SSIM with an 11-wide Gaussian window (sigma 1.5), K1 = 0.01, K2 = 0.03, L = 1,
/// averaged over all fully contained windows. dims = {fast, mid, slow}; a dimension
/// of 1 is not windowed. Inputs are used as given (rescale first if needed).
double ssim(std::span<const double> a, std::span<const double> b, std::array<std::size_t, 3> dims);
double ssim(const Image2D& a, const Image2D& b);
double ssim(const Volume& a, const Volume& b);

struct ContourLine {
  double level_db = 0.0;
  /// Polylines in (wavenumber mm^-1, frequency MHz).
  std::vector<std::vector<std::pair<double, double>>> polylines;
  double max_frequency_mhz = 0.0;     // highest frequency bin at or above the level
  double max_wavenumber_per_mm = 0.0; // largest |wavenumber| bin at or above the level
};

struct SpectrumReport {
  Image2D magnitude;  // rows: frequency 0 .. fs/2; cols: wavenumber ascending (zero centered)
  Image2D db;         // 20 log10(magnitude / max), floored at -300
  std::vector<double> frequency_mhz;
  std::vector<double> wavenumber_per_mm;
  double nyquist_frequency_mhz = 0.0;
  double nyquist_wavenumber_per_mm = 0.0;  // 1 / (2 pitch)
  double energy = 0.0;  // sum |X|^2 / (rows * cols) over the full two-sided spectrum
  std::vector<ContourLine> contours;
};

/// One-sided (in time) magnitude of the 2D DFT, columns fft-shifted. `energy` receives
/// the Parseval-normalized spectral energy.
Image2D spectrum_magnitude(const ParfFrame& frame, double* energy = nullptr);

/// Report from a (possibly averaged) magnitude grid.
SpectrumReport make_spectrum_report(Image2D magnitude, std::size_t n_time, std::size_t n_sensors,
                                    double sample_rate, double pitch_m,
                                    std::span<const double> levels_db = kDefaultContourLevels);

SpectrumReport spectrum2d(const ParfFrame& frame, double pitch_m);

/// Marching-squares isolines of `field` at `level`, in fractional (col, row) coordinates.
std::vector<std::vector<std::pair<double, double>>> marching_squares(const Image2D& field,
                                                                     double level);

/// Spread (max - min, dB) of the per-frequency power averaged over wavenumber, within [lo, hi] MHz.
double band_flatness_db(const SpectrumReport& report, double lo_mhz, double hi_mhz);

struct ProbeConfig {
  std::size_t draws = 16;
  std::uint64_t seed = 0;
  std::size_t n_time = kTimeSamples;
  std::size_t n_physical = 256;
  double pitch_m = kNominalInterleavedPitch;
};

/// Averages the output magnitude spectrum of the model over normalized Gaussian noise inputs.
SpectrumReport probe_inductive_bias(nn::Model<float>& model, const ProbeConfig& cfg);

void save_spectrum_csv(const std::filesystem::path& path, const SpectrumReport& report);
/// Heatmap (frequency up, wavenumber right) with the contours drawn on top.
void save_spectrum_png(const std::filesystem::path& path, const SpectrumReport& report,
                       double floor_db = -40.0);

enum class PhantomKind { Helix, SphereCluster };

struct PhantomParams {
  PhantomKind kind = PhantomKind::Helix;
  std::size_t count = 50;
  double sphere_radius = 50e-6;  // m
  double helix_radius = 0.6e-3;  // m
  double helix_length = 1.2e-3;  // m, along z
  double turns = 2.0;
  double cluster_radius = 0.5e-3;  // m
  std::uint64_t seed = 0;          // sphere-cluster placement
};

struct Phantom {
  SphereSet spheres;
  MaskVolume mask;
};

/// Spheres along a helix (or in a ball) about the grid center, and the mask of voxels
/// within one radius of a center plus each center's nearest voxel. Throws ConfigError
/// if any sphere leaves the grid.
Phantom make_digital_phantom(const PhantomParams& params, const FovGrid& grid);

}  // namespace parf
