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

#include "parf/pipeline/commands.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>

#include "parf/error.hpp"
#include "parf/filters.hpp"
#include "parf/metrics.hpp"
#include "parf/nn/checkpoint.hpp"
#include "parf/png_writer.hpp"
#include "parf/recon.hpp"
#include "parf/pipeline/manifest.hpp"

namespace parf::pipeline {

namespace fs = std::filesystem;

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

std::uint64_t require_seed(const Config& cfg) {
  if (!cfg.has("seed")) throw ConfigError("a seed is required (config key 'seed' or --seed)");
  return cfg.require_u64("seed");
}

void record_spheres(Manifest& m, const SphereSet& set) {
  m.add("sphere_seed", std::to_string(set.seed));
  for (std::size_t i = 0; i < set.size(); ++i) {
    const auto& s = set.spheres[i];
    m.add("sphere", std::to_string(i) + " " + fmt(s.radius) + " " + fmt(s.center.x) + " " +
                        fmt(s.center.y) + " " + fmt(s.center.z));
  }
}

const char* scheme_name(NormalizationScheme s) {
  return s == NormalizationScheme::Affine ? "affine" : "symmetric";
}

Interpolation interpolation_from(const Config& cfg) {
  const std::string v = cfg.get_string("recon.interpolation", "linear");
  if (v == "linear") return Interpolation::Linear;
  if (v == "nearest") return Interpolation::Nearest;
  throw ConfigError("recon.interpolation must be linear or nearest");
}

int axis_from(const Config& cfg, const std::string& key) {
  const auto axis = cfg.get_int(key, 2);
  if (axis < 0 || axis > 2) throw ConfigError(key + " must be 0, 1 or 2");
  return static_cast<int>(axis);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream is(s);
  for (std::string item; std::getline(is, item, ',');) {
    const auto a = item.find_first_not_of(' '), b = item.find_last_not_of(' ');
    if (a != std::string::npos) out.push_back(item.substr(a, b - a + 1));
  }
  return out;
}

nn::Checkpoint load_checkpoint_checked(const Config& cfg) {
  const auto path = cfg.require_existing_path("checkpoint");
  nn::Checkpoint ckpt = nn::load_checkpoint(path);
  bool explicit_model = false;
  for (const auto& line : cfg.canonical_lines()) explicit_model = explicit_model || line.starts_with("model.");
  if (explicit_model && model_config_from(cfg).digest() != ckpt.model.digest()) {
    throw ConfigError("checkpoint " + path.string() + " was trained with a different model config (" +
                      ckpt.model.canonical() + ")");
  }
  return ckpt;
}

void write_loss_csv(const fs::path& path, std::uint64_t first_iteration,
                    const std::vector<double>& losses) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  os << "iteration,loss\n" << std::setprecision(9);
  for (std::size_t i = 0; i < losses.size(); ++i) os << first_iteration + i << ',' << losses[i] << '\n';
}

void write_histograms(const fs::path& dir, const std::vector<nn::LayerHistogram>& hists) {
  std::ofstream os(dir / "preact_hist.csv");
  std::ofstream summary(dir / "preact_summary.csv");
  if (!os || !summary) throw std::runtime_error("cannot write histogram files in " + dir.string());
  os << "layer,bin_lo,bin_hi,fraction\n" << std::setprecision(9);
  summary << "layer,fraction_outside_half_pi,min,max\n" << std::setprecision(9);
  constexpr double inf = std::numeric_limits<double>::infinity();
  for (const auto& h : hists) {
    const std::size_t bins = h.fractions.size() - 2;
    const double w = (h.hi - h.lo) / static_cast<double>(bins);
    os << h.name << ',' << -inf << ',' << h.lo << ',' << h.fractions.front() << '\n';
    for (std::size_t b = 0; b < bins; ++b) {
      os << h.name << ',' << h.lo + w * b << ',' << h.lo + w * (b + 1) << ',' << h.fractions[b + 1] << '\n';
    }
    os << h.name << ',' << h.hi << ',' << inf << ',' << h.fractions.back() << '\n';
    summary << h.name << ',' << h.fraction_outside_half_pi << ',' << h.min << ',' << h.max << '\n';
  }
}

}  // namespace

const std::vector<std::string>& known_keys() {
  static const std::vector<std::string> keys{
      "seed", "out", "geometry", "speed_of_sound", "psf.center_mhz", "psf.low_mhz", "psf.high_mhz",
      "snr_db", "spheres.count", "spheres.radius_mu_um", "spheres.radius_sigma_um", "grid.n",
      "grid.side_mm", "phantom", "phantom.count", "phantom.radius_um", "phantom.helix_radius_mm",
      "phantom.helix_length_mm", "phantom.turns", "phantom.cluster_radius_mm",
      "enhance.input", "enhance.method", "enhance.laser_filter", "wiener.beta", "wiener.snr_db",
      "checkpoint", "model.architecture", "model.activation", "model.levels",
      "model.base_channels", "model.zero_head", "model.global_skip", "train.iterations_phase1",
      "train.lr1", "train.iterations_phase2", "train.lr2", "train.batch_size",
      "train.spheres_per_iteration", "train.checkpoint_every", "train.log_every", "train.resume",
      "recon.input", "recon.interpolation", "recon.mip_axis", "evaluate.volume",
      "evaluate.reference", "evaluate.mask", "evaluate.metrics", "evaluate.domain",
      "evaluate.mip_axis", "probe.draws", "probe.pitch_mm", "probe.identity",
      "probe.floor_db"};
  return keys;
}

SimulationSetup setup_from_config(const Config& cfg) {
  SimulationSetup s = SimulationSetup::defaults();
  if (cfg.has("geometry")) {
    const auto path = cfg.require_existing_path("geometry");
    std::ifstream is(path);
    try {
      s.geometry = read_geometry(is, cfg.get_double("speed_of_sound", kSpeedOfSound));
    } catch (const FormatError& e) {
      throw ConfigError("geometry " + path.string() + ": " + e.what());
    }
    s.index_map = interleave_virtual(s.geometry);
  }
  s.geometry.speed_of_sound = cfg.get_double("speed_of_sound", s.geometry.speed_of_sound);
  if (!(s.geometry.speed_of_sound > 0.0)) throw ConfigError("speed_of_sound must be positive");
  const double fc = cfg.get_double("psf.center_mhz", 12.0) * 1e6;
  const double lo = cfg.get_double("psf.low_mhz", 8.0) * 1e6;
  const double hi = cfg.get_double("psf.high_mhz", 16.0) * 1e6;
  if (!(lo > 0.0 && lo < fc && fc < hi)) throw ConfigError("psf band must satisfy 0 < low < center < high");
  s.psf = make_psf(fc, {lo, hi});
  s.window = AcquisitionWindow::centered(s.geometry.focal_radius, s.geometry.speed_of_sound);
  s.snr_db = cfg.get_double("snr_db", 30.0);
  s.sampler.count = static_cast<std::size_t>(cfg.get_u64("spheres.count", 4));
  s.sampler.radius_mu = cfg.get_double("spheres.radius_mu_um", 50.0) * 1e-6;
  s.sampler.radius_sigma = cfg.get_double("spheres.radius_sigma_um", 45.0) * 1e-6;
  if (s.sampler.count == 0 || !(s.sampler.radius_sigma >= 0.0)) {
    throw ConfigError("sphere sampler needs count >= 1 and sigma >= 0");
  }
  s.fov.n = static_cast<std::size_t>(cfg.get_u64("grid.n", 86));
  s.fov.side_length = cfg.get_double("grid.side_mm", 2.0) * 1e-3;
  if (s.fov.n < 2 || !(s.fov.side_length > 0.0)) throw ConfigError("grid needs n >= 2 and a positive side");
  s.fov.center = s.geometry.focal_point;
  return s;
}

nn::ModelConfig model_config_from(const Config& cfg) {
  const auto arch = nn::parse_architecture(cfg.get_string("model.architecture", "unet"));
  const auto act = nn::parse_activation(cfg.get_string("model.activation", "sine"));
  auto m = nn::ModelConfig::make(arch, act, static_cast<int>(cfg.get_int("model.levels", 3)),
                                 static_cast<int>(cfg.get_int("model.base_channels", 16)));
  m.zero_head = cfg.get_bool("model.zero_head", m.zero_head);
  m.global_skip = cfg.get_bool("model.global_skip", m.global_skip);
  m.init_seed = cfg.get_u64("seed", 0);
  m.validate();
  return m;
}

nn::TrainConfig train_config_from(const Config& cfg) {
  nn::TrainConfig t;
  t.iterations_phase1 = cfg.get_u64("train.iterations_phase1", t.iterations_phase1);
  t.lr1 = cfg.get_double("train.lr1", t.lr1);
  t.iterations_phase2 = cfg.get_u64("train.iterations_phase2", t.iterations_phase2);
  t.lr2 = cfg.get_double("train.lr2", t.lr2);
  t.batch_size = static_cast<std::size_t>(cfg.get_u64("train.batch_size", t.batch_size));
  t.spheres_per_iteration =
      static_cast<std::size_t>(cfg.get_u64("train.spheres_per_iteration", t.spheres_per_iteration));
  t.seed = require_seed(cfg);
  t.validate();
  return t;
}

void cmd_simulate(const Config& cfg, const fs::path& out, std::ostream& log) {
  const std::uint64_t seed = require_seed(cfg);
  const SimulationSetup setup = setup_from_config(cfg);
  Manifest m("simulate");
  m.add("seed", std::to_string(seed));
  m.add_config(cfg.canonical_lines());

  ParfFrame ideal, degraded;
  SphereSet spheres;
  const std::string phantom = cfg.get_string("phantom", "none");
  if (phantom == "none") {
    auto pair = make_training_pair(setup, seed);
    ideal = std::move(pair.target);
    degraded = std::move(pair.input);
    spheres = std::move(pair.spheres);
  } else {
    PhantomParams pp;
    if (phantom == "helix") pp.kind = PhantomKind::Helix;
    else if (phantom == "sphere-cluster") pp.kind = PhantomKind::SphereCluster;
    else throw ConfigError("phantom must be none, helix or sphere-cluster");
    pp.count = static_cast<std::size_t>(cfg.get_u64("phantom.count", pp.count));
    pp.sphere_radius = cfg.get_double("phantom.radius_um", pp.sphere_radius * 1e6) * 1e-6;
    pp.helix_radius = cfg.get_double("phantom.helix_radius_mm", pp.helix_radius * 1e3) * 1e-3;
    pp.helix_length = cfg.get_double("phantom.helix_length_mm", pp.helix_length * 1e3) * 1e-3;
    pp.turns = cfg.get_double("phantom.turns", pp.turns);
    pp.cluster_radius = cfg.get_double("phantom.cluster_radius_mm", pp.cluster_radius * 1e3) * 1e-3;
    pp.seed = split_seed(seed).first;
    const Phantom ph = make_digital_phantom(pp, setup.fov);
    spheres = ph.spheres;
    ideal = synthesize_ideal_frame(spheres, setup.geometry, setup.index_map, setup.window);
    degraded = physical_columns(
        degrade_frame(ideal, setup.psf, {setup.snr_db, split_seed(seed).second}));
    save_volume(out / "mask.pavl", mask_to_volume(ph.mask));
    m.add("phantom", ph.mask.provenance);
  }
  record_spheres(m, spheres);
  save_parf(out / "ideal_511.parf", ideal);
  save_parf(out / "degraded_256.parf", degraded);
  m.add_output(out / "ideal_511.parf");
  m.add_output(out / "degraded_256.parf");
  if (phantom != "none") m.add_output(out / "mask.pavl");
  m.write(out / "manifest.txt");
  log << "simulate: " << spheres.size() << " spheres, ideal " << ideal.n_time() << "x"
      << ideal.n_sensors() << ", degraded " << degraded.n_time() << "x" << degraded.n_sensors()
      << " -> " << out.string() << '\n';
}

void cmd_train(const Config& cfg, const fs::path& out, std::ostream& log) {
  const nn::ModelConfig mcfg = model_config_from(cfg);
  const nn::TrainConfig tcfg = train_config_from(cfg);
  const SimulationSetup setup = setup_from_config(cfg);
  const auto log_every = cfg.get_u64("train.log_every", 100);

  std::optional<nn::Checkpoint> resume;
  if (cfg.has("train.resume")) resume = nn::load_checkpoint(cfg.require_existing_path("train.resume"));
  const std::uint64_t first = resume ? resume->iteration : 0;

  nn::TrainHooks hooks;
  hooks.checkpoint_every = cfg.get_u64("train.checkpoint_every", 0);
  hooks.on_checkpoint = [&](const nn::Checkpoint& c) {
    nn::save_checkpoint(out / ("checkpoint_" + std::to_string(c.iteration) + ".pawt"), c);
  };
  double window = 0.0;
  hooks.on_iteration = [&](std::uint64_t it, double loss) {
    window += loss;
    if (log_every > 0 && (it + 1) % log_every == 0) {
      log << "train: iteration " << it + 1 << " mean loss " << window / static_cast<double>(log_every) << '\n';
      window = 0.0;
    }
  };

  nn::TrainResult result;
  try {
    result = nn::train(mcfg, tcfg, setup, hooks, resume ? &*resume : nullptr);
  } catch (const nn::TrainingDiverged& e) {
    nn::save_checkpoint(out / "diverged.pawt", e.checkpoint());
    log << "train: diverged, state saved to " << (out / "diverged.pawt").string() << '\n';
    throw;
  }
  nn::save_checkpoint(out / "model.pawt", result.checkpoint);
  write_loss_csv(out / "loss.csv", first, result.losses);

  Manifest m("train");
  m.add("seed", std::to_string(tcfg.seed));
  m.add_config(cfg.canonical_lines());
  m.add("model", mcfg.canonical());
  m.add_output(out / "model.pawt");
  m.add_output(out / "loss.csv");
  if (mcfg.activation == nn::Activation::Sine) {
    nn::Model<float> model(mcfg, result.checkpoint.params);
    write_histograms(out, nn::preactivation_histogram(model, tcfg.seed));
    m.add_output(out / "preact_hist.csv");
    m.add_output(out / "preact_summary.csv");
  }
  m.write(out / "manifest.txt");
  log << "train: " << result.losses.size() << " iterations -> " << (out / "model.pawt").string() << '\n';
}

void cmd_enhance(const Config& cfg, const fs::path& out, std::ostream& log) {
  const auto in_path = cfg.require_existing_path("enhance.input");
  const SimulationSetup setup = setup_from_config(cfg);
  ParfFrame obs = load_parf(in_path);
  const std::string method = cfg.get_string("enhance.method", "wiener");

  Manifest m("enhance");
  m.add_config(cfg.canonical_lines());
  m.add_input(in_path);
  m.add("method", method);

  if (cfg.get_bool("enhance.laser_filter", false)) obs = laser_artefact_filter(obs, setup.geometry);

  const bool physical = obs.n_sensors() == setup.geometry.n_physical();
  if (method != "none" && !physical) {
    throw ConfigError("enhance." + method + " expects a " + std::to_string(setup.geometry.n_physical()) +
                      "-column frame, got " + std::to_string(obs.n_sensors()));
  }
  ParfFrame result;
  if (method == "none") {
    result = obs;
  } else if (method == "linear-interp") {
    result = linear_interpolate_sensors(obs);
  } else if (method == "wiener") {
    WienerConfig wc;
    wc.beta = cfg.get_double("wiener.beta", wc.beta);
    wc.snr_db = cfg.get_double("wiener.snr_db", setup.snr_db);
    result = wiener_filter(obs, setup.psf, wc);
  } else if (method == "model") {
    const nn::Checkpoint ckpt = load_checkpoint_checked(cfg);
    m.add_input(cfg.require_existing_path("checkpoint"));
    nn::Model<float> model(ckpt.model, ckpt.params);
    auto [normalized, record] = normalize(obs, ckpt.model.input_range);
    result = denormalize(nn::model_forward(model, linear_interpolate_sensors(normalized)), record);
    m.add("normalization", std::string(scheme_name(record.scheme)) + " " + fmt(record.scale) + " " +
                               fmt(record.offset));
  } else {
    throw ConfigError("enhance.method must be none, wiener, linear-interp or model");
  }
  save_parf(out / "enhanced.parf", result);
  m.add_output(out / "enhanced.parf");
  m.write(out / "manifest.txt");
  log << "enhance: " << method << " " << obs.n_sensors() << " -> " << result.n_sensors()
      << " columns\n";
}

void cmd_reconstruct(const Config& cfg, const fs::path& out, std::ostream& log) {
  const auto in_path = cfg.require_existing_path("recon.input");
  const SimulationSetup setup = setup_from_config(cfg);
  const ParfFrame frame = load_parf(in_path);
  const auto sensors = sensor_positions_for(frame, setup.geometry, setup.index_map);
  const int axis = axis_from(cfg, "recon.mip_axis");

  const auto t_start = std::chrono::steady_clock::now();
  BeamformResult bf = beamform(frame, sensors, setup.geometry.speed_of_sound, setup.fov,
                               interpolation_from(cfg));
  const Volume pcf = cf_weighted(bf.p, bf.cf);
  const double ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t_start).count();

  save_volume(out / "p.pavl", bf.p);
  save_volume(out / "cf.pavl", bf.cf);
  save_volume(out / "pcf.pavl", pcf);
  const Image2D mp = mip(pcf, axis);
  write_png_gray16(out / "mip_pcf.png", mp);
  save_image_csv(out / "mip_pcf.csv", mp);

  std::ostringstream timing;
  timing << "timing: reconstruct " << setup.fov.n << "^3 voxels x " << frame.n_sensors()
         << " sensors in " << std::fixed << std::setprecision(1) << ms << " ms";
  log << timing.str() << '\n';
  std::ofstream(out / "reconstruct.log") << timing.str() << '\n';

  Manifest m("reconstruct");
  m.add_config(cfg.canonical_lines());
  m.add_input(in_path);
  for (const char* name : {"p.pavl", "cf.pavl", "pcf.pavl", "mip_pcf.png", "mip_pcf.csv"}) {
    m.add_output(out / name);
  }
  m.write(out / "manifest.txt");
}

void cmd_evaluate(const Config& cfg, const fs::path& out, std::ostream& log) {
  const auto vol_path = cfg.require_existing_path("evaluate.volume");
  const auto metrics = split_list(cfg.get_string("evaluate.metrics", "ssim"));
  const std::string domain = cfg.get_string("evaluate.domain", "both");
  if (domain != "volume" && domain != "mip" && domain != "both") {
    throw ConfigError("evaluate.domain must be volume, mip or both");
  }
  const bool do_volume = domain != "mip", do_mip = domain != "volume";
  const int axis = axis_from(cfg, "evaluate.mip_axis");
  const Volume vol = load_volume(vol_path);

  Manifest m("evaluate");
  m.add_config(cfg.canonical_lines());
  m.add_input(vol_path);

  std::ofstream os(out / "metrics.csv");
  if (!os) throw std::runtime_error("cannot write metrics.csv");
  os << "metric,domain,value\n" << std::setprecision(12);
  for (const auto& metric : metrics) {
    if (metric == "cnr") {
      if (!cfg.has("evaluate.mask")) throw ConfigError("CNR requested but evaluate.mask is not set");
      const auto mask_path = cfg.require_existing_path("evaluate.mask");
      m.add_input(mask_path);
      const MaskVolume mask = mask_from_volume(load_volume(mask_path));
      if (!(mask.grid.n == vol.grid.n)) throw ConfigError("mask and volume grids differ");
      MaskVolume aligned = mask;
      aligned.grid = vol.grid;
      if (do_volume) os << "cnr,volume," << cnr(vol, aligned) << '\n';
      if (do_mip) os << "cnr,mip," << cnr(mip(vol, axis), mask_mip(aligned, axis)) << '\n';
    } else if (metric == "ssim") {
      if (!cfg.has("evaluate.reference")) {
        throw ConfigError("SSIM requested but evaluate.reference is not set");
      }
      const auto ref_path = cfg.require_existing_path("evaluate.reference");
      m.add_input(ref_path);
      const Volume ref = load_volume(ref_path);
      if (ref.grid.n != vol.grid.n) throw ConfigError("reference and volume grids differ");
      const std::array<std::size_t, 3> dims{vol.grid.n, vol.grid.n, vol.grid.n};
      if (do_volume) {
        os << "ssim,volume," << ssim(rescale_unit(vol.data), rescale_unit(ref.data), dims) << '\n';
      }
      if (do_mip) {
        const Image2D a = mip(vol, axis), b = mip(ref, axis);
        os << "ssim,mip," << ssim(rescale_unit(a.data), rescale_unit(b.data), {a.cols, a.rows, 1})
           << '\n';
      }
    } else {
      throw ConfigError("unknown metric '" + metric + "' (expected cnr or ssim)");
    }
  }
  os.close();
  m.add_output(out / "metrics.csv");
  m.write(out / "manifest.txt");
  log << "evaluate: wrote " << (out / "metrics.csv").string() << '\n';
}

void cmd_probe(const Config& cfg, const fs::path& out, std::ostream& log) {
  ProbeConfig pc;
  pc.seed = require_seed(cfg);
  pc.draws = static_cast<std::size_t>(cfg.get_u64("probe.draws", pc.draws));
  pc.pitch_m = cfg.get_double("probe.pitch_mm", pc.pitch_m * 1e3) * 1e-3;

  Manifest m("probe");
  m.add("seed", std::to_string(pc.seed));
  m.add_config(cfg.canonical_lines());

  std::optional<nn::Model<float>> model;
  if (cfg.get_bool("probe.identity", false)) {
    auto mc = model_config_from(cfg);
    mc.zero_head = true;
    mc.global_skip = true;
    model.emplace(mc);
  } else {
    const nn::Checkpoint ckpt = load_checkpoint_checked(cfg);
    m.add_input(cfg.require_existing_path("checkpoint"));
    model.emplace(ckpt.model, ckpt.params);
  }
  const SpectrumReport rep = probe_inductive_bias(*model, pc);
  save_spectrum_csv(out / "spectrum.csv", rep);
  save_spectrum_png(out / "spectrum.png", rep, cfg.get_double("probe.floor_db", -40.0));
  {
    std::ofstream os(out / "bandwidth.csv");
    os << "level_db,max_frequency_mhz,max_wavenumber_per_mm,polylines\n" << std::setprecision(9);
    for (const auto& c : rep.contours) {
      os << c.level_db << ',' << c.max_frequency_mhz << ',' << c.max_wavenumber_per_mm << ','
         << c.polylines.size() << '\n';
    }
    os << "# in-band (8-16 MHz) flatness_db," << band_flatness_db(rep, 8.0, 16.0) << '\n';
  }
  {
    std::ofstream os(out / "contours.csv");
    os << "level_db,polyline,wavenumber_per_mm,frequency_mhz\n" << std::setprecision(9);
    for (const auto& c : rep.contours) {
      for (std::size_t i = 0; i < c.polylines.size(); ++i) {
        for (auto [k, f] : c.polylines[i]) os << c.level_db << ',' << i << ',' << k << ',' << f << '\n';
      }
    }
  }
  for (const char* name : {"spectrum.csv", "spectrum.png", "bandwidth.csv", "contours.csv"}) {
    m.add_output(out / name);
  }
  m.write(out / "manifest.txt");
  for (const auto& c : rep.contours) {
    log << "probe: " << c.level_db << " dB extent " << c.max_frequency_mhz << " MHz, "
        << c.max_wavenumber_per_mm << " mm^-1\n";
  }
}

void run_command(const std::string& name, const Config& cfg, const fs::path& out,
                 std::ostream& log) {
  cfg.check_keys(known_keys());
  using Fn = void (*)(const Config&, const fs::path&, std::ostream&);
  static const std::vector<std::pair<std::string, Fn>> table{
      {"simulate", cmd_simulate}, {"train", cmd_train},     {"enhance", cmd_enhance},
      {"reconstruct", cmd_reconstruct}, {"evaluate", cmd_evaluate}, {"probe", cmd_probe}};
  for (const auto& [n, fn] : table) {
    if (n == name) {
      fs::create_directories(out);
      fn(cfg, out, log);
      return;
    }
  }
  throw ConfigError("unknown command '" + name + "'");
}

}  // namespace parf::pipeline
