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

#include "parf/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numbers>
#include <random>
#include <stdexcept>

#include "parf/error.hpp"
#include "parf/fft.hpp"
#include "parf/filters.hpp"
#include "parf/png_writer.hpp"

namespace parf {

namespace {

constexpr std::size_t kSsimWidth = 11;
constexpr double kSsimSigma = 1.5;
constexpr double kSsimC1 = 0.01 * 0.01;
constexpr double kSsimC2 = 0.03 * 0.03;
constexpr double kDbFloor = -300.0;

std::array<double, kSsimWidth> gaussian_window() {
  std::array<double, kSsimWidth> w{};
  double sum = 0.0;
  for (std::size_t i = 0; i < kSsimWidth; ++i) {
    const double d = static_cast<double>(i) - 0.5 * (kSsimWidth - 1);
    w[i] = std::exp(-d * d / (2.0 * kSsimSigma * kSsimSigma));
    sum += w[i];
  }
  for (double& v : w) v /= sum;
  return w;
}

// Valid-mode filtering of a {fast, mid, slow} array along one axis.
std::vector<double> filter_axis(const std::vector<double>& in, std::array<std::size_t, 3>& dims,
                                int axis, const std::array<double, kSsimWidth>& w) {
  std::array<std::size_t, 3> od = dims;
  od[axis] = dims[axis] - (kSsimWidth - 1);
  const std::array<std::size_t, 3> stride{1, dims[0], dims[0] * dims[1]};
  std::vector<double> out(od[0] * od[1] * od[2]);
  std::size_t o = 0;
  for (std::size_t s = 0; s < od[2]; ++s) {
    for (std::size_t m = 0; m < od[1]; ++m) {
      for (std::size_t f = 0; f < od[0]; ++f) {
        const std::size_t base = f * stride[0] + m * stride[1] + s * stride[2];
        double acc = 0.0;
        for (std::size_t i = 0; i < kSsimWidth; ++i) acc += w[i] * in[base + i * stride[axis]];
        out[o++] = acc;
      }
    }
  }
  dims = od;
  return out;
}

std::vector<double> smooth(std::vector<double> v, std::array<std::size_t, 3> dims) {
  const auto w = gaussian_window();
  for (int axis = 0; axis < 3; ++axis) {
    if (dims[axis] > 1) v = filter_axis(v, dims, axis, w);
  }
  return v;
}

// Edge ids for marching squares: horizontal edges first, then vertical.
struct EdgePoint {
  std::size_t id;
  double x, y;
};

}  // namespace

std::size_t MaskVolume::count_inside() const {
  return static_cast<std::size_t>(std::count(inside.begin(), inside.end(), std::uint8_t{1}));
}

Volume mask_to_volume(const MaskVolume& mask) {
  Volume vol(mask.grid, VolumeKind::MipSource);
  for (std::size_t i = 0; i < vol.data.size(); ++i) vol.data[i] = mask.inside[i] ? 1.0 : 0.0;
  return vol;
}

MaskVolume mask_from_volume(const Volume& vol, std::string provenance) {
  MaskVolume mask(vol.grid);
  for (std::size_t i = 0; i < vol.data.size(); ++i) mask.inside[i] = vol.data[i] > 0.5 ? 1 : 0;
  mask.provenance = std::move(provenance);
  return mask;
}

Image2D mask_mip(const MaskVolume& mask, int axis) {
  Volume v = mask_to_volume(mask);
  return mip(v, axis);
}

double cnr(std::span<const double> values, std::span<const std::uint8_t> mask) {
  if (values.size() != mask.size()) throw std::invalid_argument("cnr: mask size mismatch");
  double sum_in = 0.0, sum_out = 0.0;
  std::size_t n_in = 0, n_out = 0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double v = std::abs(values[i]);
    if (mask[i]) {
      sum_in += v;
      ++n_in;
    } else {
      sum_out += v;
      ++n_out;
    }
  }
  if (n_in == 0 || n_out == 0) {
    throw std::invalid_argument("cnr: mask needs both inside and outside elements");
  }
  const double mu_in = sum_in / static_cast<double>(n_in);
  const double mu_out = sum_out / static_cast<double>(n_out);
  double var = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!mask[i]) {
      const double d = std::abs(values[i]) - mu_out;
      var += d * d;
    }
  }
  const double sigma = std::sqrt(var / static_cast<double>(n_out));
  if (!(sigma > 0.0)) throw NumericalError("cnr: zero variance outside the mask");
  return (mu_in - mu_out) / sigma;
}

double cnr(const Volume& vol, const MaskVolume& mask) {
  if (!(vol.grid == mask.grid)) throw std::invalid_argument("cnr: grid mismatch");
  return cnr(vol.data, mask.inside);
}

double cnr(const Image2D& image, const Image2D& mask) {
  if (image.rows != mask.rows || image.cols != mask.cols) {
    throw std::invalid_argument("cnr: mask shape mismatch");
  }
  std::vector<std::uint8_t> m(mask.data.size());
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = mask.data[i] > 0.5 ? 1 : 0;
  return cnr(image.data, m);
}

std::vector<double> rescale_unit(std::span<const double> values) {
  std::vector<double> out(values.begin(), values.end());
  if (out.empty()) return out;
  const auto [lo, hi] = std::minmax_element(out.begin(), out.end());
  const double a = *lo, range = *hi - *lo;
  for (double& v : out) v = range > 0.0 ? (v - a) / range : 0.0;
  return out;
}

double ssim(std::span<const double> a, std::span<const double> b,
            std::array<std::size_t, 3> dims) {
  const std::size_t n = dims[0] * dims[1] * dims[2];
  if (a.size() != n || b.size() != n) throw std::invalid_argument("ssim: shape mismatch");
  bool windowed = false;
  for (std::size_t d : dims) {
    if (d == 0) throw std::invalid_argument("ssim: empty input");
    if (d > 1 && d < kSsimWidth) {
      throw std::invalid_argument("ssim: every windowed dimension needs at least 11 samples");
    }
    windowed = windowed || d > 1;
  }
  if (!windowed) throw std::invalid_argument("ssim: input must have a windowed dimension");

  std::vector<double> aa(n), bb(n), ab(n);
  for (std::size_t i = 0; i < n; ++i) {
    aa[i] = a[i] * a[i];
    bb[i] = b[i] * b[i];
    ab[i] = a[i] * b[i];
  }
  const auto mu_a = smooth({a.begin(), a.end()}, dims);
  const auto mu_b = smooth({b.begin(), b.end()}, dims);
  const auto e_aa = smooth(std::move(aa), dims);
  const auto e_bb = smooth(std::move(bb), dims);
  const auto e_ab = smooth(std::move(ab), dims);

  double total = 0.0;
  for (std::size_t i = 0; i < mu_a.size(); ++i) {
    const double ma = mu_a[i], mb = mu_b[i];
    const double va = e_aa[i] - ma * ma, vb = e_bb[i] - mb * mb, cov = e_ab[i] - ma * mb;
    total += ((2.0 * ma * mb + kSsimC1) * (2.0 * cov + kSsimC2)) /
             ((ma * ma + mb * mb + kSsimC1) * (va + vb + kSsimC2));
  }
  return total / static_cast<double>(mu_a.size());
}

double ssim(const Image2D& a, const Image2D& b) {
  if (a.rows != b.rows || a.cols != b.cols) throw std::invalid_argument("ssim: shape mismatch");
  return ssim(a.data, b.data, {a.cols, a.rows, 1});
}

double ssim(const Volume& a, const Volume& b) {
  if (a.grid.n != b.grid.n) throw std::invalid_argument("ssim: shape mismatch");
  return ssim(a.data, b.data, {a.grid.n, a.grid.n, a.grid.n});
}

Image2D spectrum_magnitude(const ParfFrame& frame, double* energy) {
  const std::size_t nt = frame.n_time(), ns = frame.n_sensors();
  if (nt == 0 || ns == 0) throw std::invalid_argument("spectrum of an empty frame");
  // Sensor-major storage is a (sensor, time) row-major array.
  const auto X = fft2_real(frame.data(), ns, nt);
  if (energy != nullptr) {
    double e = 0.0;
    for (const auto& z : X) e += std::norm(z);
    *energy = e / static_cast<double>(nt * ns);
  }
  const std::size_t rows = nt / 2 + 1;
  Image2D mag(rows, ns);
  for (std::size_t j = 0; j < ns; ++j) {
    const std::size_t src = (j + ns - ns / 2) % ns;
    for (std::size_t f = 0; f < rows; ++f) mag.at(f, j) = std::abs(X[src * nt + f]);
  }
  return mag;
}

std::vector<std::vector<std::pair<double, double>>> marching_squares(const Image2D& field,
                                                                     double level) {
  std::vector<std::vector<std::pair<double, double>>> lines;
  if (field.rows < 2 || field.cols < 2) return lines;
  const std::size_t R = field.rows, C = field.cols;
  const std::size_t n_horizontal = R * (C - 1);
  auto inside = [&](std::size_t r, std::size_t c) { return field.at(r, c) >= level; };
  auto crossing = [&](double v0, double v1) {
    const double d = v1 - v0;
    return d != 0.0 ? std::clamp((level - v0) / d, 0.0, 1.0) : 0.5;
  };
  auto h_edge = [&](std::size_t r, std::size_t c) {
    return EdgePoint{r * (C - 1) + c, static_cast<double>(c) + crossing(field.at(r, c), field.at(r, c + 1)),
                     static_cast<double>(r)};
  };
  auto v_edge = [&](std::size_t r, std::size_t c) {
    return EdgePoint{n_horizontal + r * C + c, static_cast<double>(c),
                     static_cast<double>(r) + crossing(field.at(r, c), field.at(r + 1, c))};
  };

  std::vector<std::pair<EdgePoint, EdgePoint>> segments;
  for (std::size_t r = 0; r + 1 < R; ++r) {
    for (std::size_t c = 0; c + 1 < C; ++c) {
      const bool tl = inside(r, c), tr = inside(r, c + 1), br = inside(r + 1, c + 1),
                 bl = inside(r + 1, c);
      std::vector<EdgePoint> e;  // order: top, right, bottom, left
      const bool t = tl != tr, rt = tr != br, b = bl != br, l = tl != bl;
      if (t) e.push_back(h_edge(r, c));
      if (rt) e.push_back(v_edge(r, c + 1));
      if (b) e.push_back(h_edge(r + 1, c));
      if (l) e.push_back(v_edge(r, c));
      if (e.size() == 2) {
        segments.emplace_back(e[0], e[1]);
      } else if (e.size() == 4) {
        const double center =
            0.25 * (field.at(r, c) + field.at(r, c + 1) + field.at(r + 1, c + 1) + field.at(r + 1, c));
        // Isolate the corners whose state differs from the center's.
        const bool center_in = center >= level;
        if (tl != center_in) {  // tl and br isolated: pair (top, left) and (right, bottom)
          segments.emplace_back(e[0], e[3]);
          segments.emplace_back(e[1], e[2]);
        } else {  // tr and bl isolated: pair (top, right) and (bottom, left)
          segments.emplace_back(e[0], e[1]);
          segments.emplace_back(e[2], e[3]);
        }
      }
    }
  }

  // Chain segments that share an edge crossing.
  std::map<std::size_t, std::vector<std::size_t>> by_edge;
  for (std::size_t i = 0; i < segments.size(); ++i) {
    by_edge[segments[i].first.id].push_back(i);
    by_edge[segments[i].second.id].push_back(i);
  }
  std::vector<bool> used(segments.size(), false);
  auto walk = [&](std::size_t seg, std::size_t from_edge) {
    std::vector<std::pair<double, double>> line;
    const EdgePoint& start = segments[seg].first.id == from_edge ? segments[seg].first : segments[seg].second;
    line.emplace_back(start.x, start.y);
    std::size_t cur = seg, edge = from_edge;
    while (true) {
      used[cur] = true;
      const EdgePoint& next = segments[cur].first.id == edge ? segments[cur].second : segments[cur].first;
      line.emplace_back(next.x, next.y);
      edge = next.id;
      std::size_t follow = segments.size();
      for (std::size_t s : by_edge[edge]) {
        if (!used[s]) follow = s;
      }
      if (follow == segments.size()) break;
      cur = follow;
    }
    return line;
  };
  for (const auto& [edge, segs] : by_edge) {
    if (segs.size() == 1 && !used[segs[0]]) lines.push_back(walk(segs[0], edge));
  }
  for (std::size_t i = 0; i < segments.size(); ++i) {
    if (!used[i]) lines.push_back(walk(i, segments[i].first.id));
  }
  return lines;
}

SpectrumReport make_spectrum_report(Image2D magnitude, std::size_t n_time, std::size_t n_sensors,
                                    double sample_rate, double pitch_m,
                                    std::span<const double> levels_db) {
  if (magnitude.rows != n_time / 2 + 1 || magnitude.cols != n_sensors) {
    throw std::invalid_argument("spectrum magnitude has the wrong shape");
  }
  if (!(pitch_m > 0.0)) throw std::invalid_argument("sensor pitch must be positive");
  SpectrumReport rep;
  const double pitch_mm = pitch_m * 1e3;
  for (std::size_t f = 0; f < magnitude.rows; ++f) {
    rep.frequency_mhz.push_back(static_cast<double>(f) * sample_rate / static_cast<double>(n_time) * 1e-6);
  }
  for (std::size_t j = 0; j < n_sensors; ++j) {
    const double m = static_cast<double>(j) - static_cast<double>(n_sensors / 2);
    rep.wavenumber_per_mm.push_back(m / (static_cast<double>(n_sensors) * pitch_mm));
  }
  rep.nyquist_frequency_mhz = 0.5 * sample_rate * 1e-6;
  rep.nyquist_wavenumber_per_mm = 1.0 / (2.0 * pitch_mm);

  const double peak = *std::max_element(magnitude.data.begin(), magnitude.data.end());
  rep.db = Image2D(magnitude.rows, magnitude.cols, kDbFloor);
  if (peak > 0.0) {
    for (std::size_t i = 0; i < magnitude.data.size(); ++i) {
      const double v = magnitude.data[i];
      rep.db.data[i] = v > 0.0 ? std::max(kDbFloor, 20.0 * std::log10(v / peak)) : kDbFloor;
    }
  }
  rep.magnitude = std::move(magnitude);

  const double df = rep.frequency_mhz.size() > 1 ? rep.frequency_mhz[1] : 0.0;
  const double dk = 1.0 / (static_cast<double>(n_sensors) * pitch_mm);
  const double k0 = rep.wavenumber_per_mm.front();
  for (double level : levels_db) {
    ContourLine line;
    line.level_db = level;
    for (auto& poly : marching_squares(rep.db, level)) {
      std::vector<std::pair<double, double>> pts;
      for (auto [x, y] : poly) pts.emplace_back(k0 + x * dk, y * df);
      line.polylines.push_back(std::move(pts));
    }
    for (std::size_t f = 0; f < rep.db.rows; ++f) {
      for (std::size_t j = 0; j < rep.db.cols; ++j) {
        if (rep.db.at(f, j) >= level) {
          line.max_frequency_mhz = std::max(line.max_frequency_mhz, rep.frequency_mhz[f]);
          line.max_wavenumber_per_mm =
              std::max(line.max_wavenumber_per_mm, std::abs(rep.wavenumber_per_mm[j]));
        }
      }
    }
    rep.contours.push_back(std::move(line));
  }
  return rep;
}

SpectrumReport spectrum2d(const ParfFrame& frame, double pitch_m) {
  double energy = 0.0;
  auto mag = spectrum_magnitude(frame, &energy);
  auto rep = make_spectrum_report(std::move(mag), frame.n_time(), frame.n_sensors(),
                                  frame.sample_rate(), pitch_m);
  rep.energy = energy;
  return rep;
}

double band_flatness_db(const SpectrumReport& report, double lo_mhz, double hi_mhz) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (std::size_t f = 0; f < report.magnitude.rows; ++f) {
    const double freq = report.frequency_mhz[f];
    if (freq < lo_mhz || freq > hi_mhz) continue;
    double power = 0.0;
    for (std::size_t j = 0; j < report.magnitude.cols; ++j) {
      const double m = report.magnitude.at(f, j);
      power += m * m;
    }
    const double db = 10.0 * std::log10(power / static_cast<double>(report.magnitude.cols));
    lo = std::min(lo, db);
    hi = std::max(hi, db);
  }
  if (!(hi >= lo)) throw std::invalid_argument("band contains no frequency bins");
  return hi - lo;
}

SpectrumReport probe_inductive_bias(nn::Model<float>& model, const ProbeConfig& cfg) {
  if (cfg.draws == 0) throw std::invalid_argument("probe needs at least one draw");
  Image2D sum;
  std::size_t n_out = 0;
  double energy = 0.0;
  for (std::size_t d = 0; d < cfg.draws; ++d) {
    std::seed_seq seq{static_cast<std::uint32_t>(cfg.seed), static_cast<std::uint32_t>(cfg.seed >> 32),
                      static_cast<std::uint32_t>(d), 0x50524f42u};
    std::mt19937_64 rng(seq);
    std::normal_distribution<double> gauss(0.0, 1.0);
    ParfFrame noise(cfg.n_time, cfg.n_physical, kSampleRate, 0.0, SensorAxis::Physical);
    for (double& v : noise.data()) v = gauss(rng);
    auto [normalized, record] = normalize(noise, model.config().input_range);
    const ParfFrame out = nn::model_forward(model, linear_interpolate_sensors(normalized));
    double e = 0.0;
    auto mag = spectrum_magnitude(out, &e);
    energy += e / static_cast<double>(cfg.draws);
    if (d == 0) {
      sum = std::move(mag);
      n_out = out.n_sensors();
    } else {
      for (std::size_t i = 0; i < sum.data.size(); ++i) sum.data[i] += mag.data[i];
    }
  }
  for (double& v : sum.data) v /= static_cast<double>(cfg.draws);
  auto rep = make_spectrum_report(std::move(sum), cfg.n_time, n_out, kSampleRate, cfg.pitch_m);
  rep.energy = energy;
  return rep;
}

void save_spectrum_csv(const std::filesystem::path& path, const SpectrumReport& report) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  os.precision(9);
  os << "frequency_mhz,wavenumber_per_mm,magnitude,db\n";
  for (std::size_t f = 0; f < report.magnitude.rows; ++f) {
    for (std::size_t j = 0; j < report.magnitude.cols; ++j) {
      os << report.frequency_mhz[f] << ',' << report.wavenumber_per_mm[j] << ','
         << report.magnitude.at(f, j) << ',' << report.db.at(f, j) << '\n';
    }
  }
}

void save_spectrum_png(const std::filesystem::path& path, const SpectrumReport& report,
                       double floor_db) {
  RgbImage img = render_heatmap(report.db, floor_db, 0.0);
  const double df = report.frequency_mhz.size() > 1 ? report.frequency_mhz[1] : 1.0;
  const double k0 = report.wavenumber_per_mm.front();
  const double dk = report.wavenumber_per_mm.size() > 1
                        ? report.wavenumber_per_mm[1] - report.wavenumber_per_mm[0]
                        : 1.0;
  const std::array<std::array<std::uint8_t, 3>, 2> colors{{{255, 255, 255}, {255, 64, 64}}};
  for (std::size_t i = 0; i < report.contours.size(); ++i) {
    const auto& rgb = colors[std::min(i, colors.size() - 1)];
    for (const auto& poly : report.contours[i].polylines) {
      std::vector<std::pair<double, double>> px;
      for (auto [k, f] : poly) {
        px.emplace_back((k - k0) / dk, static_cast<double>(img.height - 1) - f / df);
      }
      draw_polyline(img, px, rgb[0], rgb[1], rgb[2]);
    }
  }
  write_png_rgb(path, img);
}

Phantom make_digital_phantom(const PhantomParams& params, const FovGrid& grid) {
  if (params.count == 0) throw ConfigError("phantom needs at least one sphere");
  if (!(params.sphere_radius > 0.0)) throw ConfigError("phantom sphere radius must be positive");
  Phantom ph;
  ph.spheres.seed = params.seed;
  const Vec3 c = grid.center;
  if (params.kind == PhantomKind::Helix) {
    for (std::size_t i = 0; i < params.count; ++i) {
      const double t = params.count > 1 ? static_cast<double>(i) / static_cast<double>(params.count - 1) : 0.5;
      const double a = 2.0 * std::numbers::pi * params.turns * t;
      ph.spheres.spheres.push_back(
          {params.sphere_radius,
           c + Vec3{params.helix_radius * std::cos(a), params.helix_radius * std::sin(a),
                    params.helix_length * (t - 0.5)}});
    }
  } else {
    std::mt19937_64 rng(params.seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    while (ph.spheres.spheres.size() < params.count) {
      const Vec3 d{u(rng), u(rng), u(rng)};
      if (d.dot(d) > 1.0) continue;
      ph.spheres.spheres.push_back({params.sphere_radius, c + d * params.cluster_radius});
    }
  }

  const Vec3 lo = grid.origin();
  const double side = grid.side_length;
  for (const auto& s : ph.spheres.spheres) {
    const Vec3 p = s.center - lo;
    for (double v : {p.x, p.y, p.z}) {
      if (v - s.radius < 0.0 || v + s.radius > side) throw ConfigError("phantom exceeds the field of view");
    }
  }

  ph.mask = MaskVolume(grid);
  ph.mask.provenance = params.kind == PhantomKind::Helix ? "helix" : "sphere-cluster";
  const double pitch = grid.pitch();
  const std::size_t n = grid.n;
  auto to_index = [&](double v) {
    return static_cast<std::size_t>(std::clamp(std::lround(v / pitch), 0L, static_cast<long>(n - 1)));
  };
  for (const auto& s : ph.spheres.spheres) {
    const Vec3 p = s.center - lo;
    const std::size_t cx = to_index(p.x), cy = to_index(p.y), cz = to_index(p.z);
    ph.mask.inside[(cz * n + cy) * n + cx] = 1;
    const auto reach = static_cast<long>(std::ceil(s.radius / pitch));
    auto range = [&](std::size_t ci) {
      const long a = std::max(0L, static_cast<long>(ci) - reach);
      const long b = std::min(static_cast<long>(n - 1), static_cast<long>(ci) + reach);
      return std::pair<std::size_t, std::size_t>(a, b);
    };
    const auto [x0, x1] = range(cx);
    const auto [y0, y1] = range(cy);
    const auto [z0, z1] = range(cz);
    for (std::size_t iz = z0; iz <= z1; ++iz) {
      for (std::size_t iy = y0; iy <= y1; ++iy) {
        for (std::size_t ix = x0; ix <= x1; ++ix) {
          if (distance(grid.voxel_center(ix, iy, iz), s.center) <= s.radius) {
            ph.mask.inside[(iz * n + iy) * n + ix] = 1;
          }
        }
      }
    }
  }
  return ph;
}

}  // namespace parf
