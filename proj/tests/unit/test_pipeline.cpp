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

#include <sys/wait.h>
#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "parf/error.hpp"
#include "parf/frame.hpp"
#include "parf/nn/checkpoint.hpp"
#include "parf/pipeline/config.hpp"
#include "parf/pipeline/manifest.hpp"
#include "parf/recon.hpp"

namespace fs = std::filesystem;
using namespace parf;
using namespace parf::pipeline;

namespace {

const fs::path kDefaultConfig = fs::path(PARF_SOURCE_DIR) / "configs" / "default.cfg";

fs::path scratch() {
  static const fs::path dir = [] {
    auto d = fs::temp_directory_path() / ("parf_pipeline_" + std::to_string(::getpid()));
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

struct RunResult {
  int code = -1;
  std::string output;
};

RunResult run(const std::string& args) {
  const fs::path log = scratch() / "last_run.txt";
  const std::string cmd = std::string(PARF_FORGE_EXE) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  RunResult r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream is(log);
  std::stringstream ss;
  ss << is.rdbuf();
  r.output = ss.str();
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

std::string base_args(const std::string& cmd, const fs::path& out) {
  return cmd + " --config " + kDefaultConfig.string() + " --out " + out.string() + " --set grid.n=21";
}

void write_text(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

}  // namespace

TEST_CASE("config: includes, overrides, relative paths") {
  const fs::path dir = scratch() / "cfg";
  fs::create_directories(dir / "sub");
  write_text(dir / "sub" / "base.cfg", "a = 1\nb = hello\nenhance.input = data.parf\n");
  write_text(dir / "top.cfg", "# comment\ninclude = sub/base.cfg\na = 2\nc = inf\n");
  const auto cfg = Config::load(dir / "top.cfg");
  CHECK(cfg.get_int("a", 0) == 2);
  CHECK(cfg.get_string("b", "") == "hello");
  CHECK(std::isinf(cfg.get_double("c", 0.0)));
  CHECK(cfg.get_path("enhance.input", "") == dir / "sub" / "data.parf");
  CHECK(cfg.get_double("missing", 4.5) == 4.5);
  CHECK_THROWS_AS(cfg.require_string("missing"), ConfigError);
  CHECK_THROWS_AS(cfg.get_int("b", 0), ConfigError);
  CHECK_THROWS_AS(cfg.require_existing_path("enhance.input"), ConfigError);
  CHECK_THROWS_AS(cfg.check_keys({"a", "b"}), ConfigError);
  CHECK_NOTHROW(cfg.check_keys({"a", "b", "c", "enhance.input"}));
  auto copy = cfg;
  copy.set("a", "7");
  CHECK(copy.get_int("a", 0) == 7);
  CHECK(cfg.canonical_lines().front() == "a=2");
}

TEST_CASE("config: malformed input") {
  CHECK_THROWS_AS(Config::parse("no equals sign\n"), ConfigError);
  CHECK_THROWS_AS(Config::parse(" = value\n"), ConfigError);
  CHECK(Config::parse("flag = true\n").get_bool("flag", false));
  CHECK_THROWS_AS(Config::parse("flag = maybe\n").get_bool("flag", false), ConfigError);
  const fs::path dir = scratch() / "cycle";
  fs::create_directories(dir);
  write_text(dir / "a.cfg", "include = b.cfg\n");
  write_text(dir / "b.cfg", "include = a.cfg\n");
  CHECK_THROWS_AS(Config::load(dir / "a.cfg"), ConfigError);
  CHECK_THROWS_AS(Config::load(dir / "absent.cfg"), ConfigError);
}

TEST_CASE("sha256 known answers") {
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  const fs::path p = scratch() / "abc.txt";
  write_text(p, "abc");
  CHECK(sha256_file(p) == sha256_hex("abc"));
}

TEST_CASE("simulate is reproducible and seed-sensitive") {
  const fs::path a = scratch() / "sim_a", b = scratch() / "sim_b", c = scratch() / "sim_c";
  REQUIRE(run("simulate --config " + kDefaultConfig.string() + " --out " + a.string()).code == 0);
  REQUIRE(run("simulate --config " + kDefaultConfig.string() + " --out " + b.string()).code == 0);
  REQUIRE(run("simulate --config " + kDefaultConfig.string() + " --seed 7 --out " + c.string()).code == 0);
  CHECK(slurp(a / "manifest.txt") == slurp(b / "manifest.txt"));
  CHECK(manifest_outputs(a / "manifest.txt") == manifest_outputs(b / "manifest.txt"));
  CHECK(manifest_outputs(a / "manifest.txt") != manifest_outputs(c / "manifest.txt"));
  std::ifstream is(a / "ideal_511.parf", std::ios::binary);
  const auto ideal = read_parf(is);
  CHECK(ideal.n_sensors() == 511);
  CHECK(ideal.n_time() == 256);
  std::ifstream ds(a / "degraded_256.parf", std::ios::binary);
  CHECK(read_parf(ds).n_sensors() == 256);
}

TEST_CASE("enhance, reconstruct and evaluate chain") {
  const fs::path sim = scratch() / "chain_sim";
  REQUIRE(run(base_args("simulate", sim) + " --set phantom=helix").code == 0);
  REQUIRE(fs::exists(sim / "mask.pavl"));

  for (const std::string method : {"none", "linear-interp", "wiener"}) {
    CAPTURE(method);
    const fs::path out = scratch() / ("chain_enh_" + method);
    const auto r = run(base_args("enhance", out) + " --set enhance.method=" + method +
                       " --set enhance.input=" + (sim / "degraded_256.parf").string());
    REQUIRE(r.code == 0);
    std::ifstream is(out / "enhanced.parf", std::ios::binary);
    const auto f = read_parf(is);
    CHECK(f.n_sensors() == (method == "none" ? 256u : 511u));
    CHECK(f.all_finite());
  }

  const fs::path rec = scratch() / "chain_rec";
  const auto r = run(base_args("reconstruct", rec) + " --set recon.input=" + (sim / "ideal_511.parf").string());
  REQUIRE(r.code == 0);
  CHECK(r.output.find("timing:") != std::string::npos);
  for (const char* name : {"p.pavl", "cf.pavl", "pcf.pavl", "mip_pcf.png", "mip_pcf.csv", "reconstruct.log"}) {
    CHECK(fs::exists(rec / name));
  }
  const auto pcf = load_volume(rec / "pcf.pavl");
  CHECK(pcf.grid.n == 21);
  CHECK(pcf.kind == VolumeKind::CfWeighted);

  const fs::path ev = scratch() / "chain_eval";
  const std::string vol = (rec / "pcf.pavl").string();
  REQUIRE(run(base_args("evaluate", ev) + " --set evaluate.volume=" + vol + " --set evaluate.reference=" + vol +
              " --set evaluate.metrics=ssim,cnr --set evaluate.mask=" + (sim / "mask.pavl").string())
              .code == 0);
  const std::string csv = slurp(ev / "metrics.csv");
  CHECK(csv.find("ssim,volume,1\n") != std::string::npos);
  CHECK(csv.find("ssim,mip,1\n") != std::string::npos);
  CHECK(csv.find("cnr,volume,") != std::string::npos);

  const auto no_mask = run(base_args("evaluate", ev) + " --set evaluate.volume=" + vol + " --set evaluate.metrics=cnr");
  CHECK(no_mask.code == 2);
}

TEST_CASE("configuration failures exit with code 2") {
  const fs::path out = scratch() / "bad";
  CHECK(run(base_args("simulate", out) + " --set no.such.key=1").code == 2);
  CHECK(run("simulate --config " + (scratch() / "absent.cfg").string()).code == 2);
  CHECK(run("simulate").code == 2);
  CHECK(run(base_args("enhance", out) + " --set enhance.input=" + (scratch() / "absent.parf").string()).code == 2);
  CHECK(run(base_args("train", out) + " --set train.lr1=0").code == 2);
  CHECK(run(base_args("simulate", out) + " --set phantom=torus").code == 2);
}

TEST_CASE("probe of the identity model") {
  const fs::path out = scratch() / "probe";
  const auto r = run(base_args("probe", out) + " --set probe.identity=true --set probe.draws=4");
  REQUIRE(r.code == 0);
  for (const char* name : {"spectrum.csv", "spectrum.png", "bandwidth.csv", "contours.csv", "manifest.txt"}) {
    CHECK(fs::exists(out / name));
  }
  CHECK(slurp(out / "bandwidth.csv").find("flatness_db") != std::string::npos);
}

TEST_CASE("train, resume and enhance with the model") {
  const fs::path a = scratch() / "train_a", b = scratch() / "train_b", full = scratch() / "train_full";
  const std::string model = " --set model.levels=2 --set model.base_channels=2 --set train.lr1=1e-3 --set train.lr2=5e-4";
  REQUIRE(run(base_args("train", full) + model + " --set train.iterations_phase1=2 --set train.iterations_phase2=2").code == 0);
  REQUIRE(run(base_args("train", a) + model + " --set train.iterations_phase1=2 --set train.iterations_phase2=0").code == 0);
  REQUIRE(run(base_args("train", b) + model + " --set train.iterations_phase1=2 --set train.iterations_phase2=2" +
              " --set train.resume=" + (a / "model.pawt").string())
              .code == 0);
  CHECK(fs::exists(full / "preact_summary.csv"));
  const auto ck_full = nn::load_checkpoint(full / "model.pawt");
  const auto ck_b = nn::load_checkpoint(b / "model.pawt");
  CHECK(ck_b.iteration == 4);
  CHECK(ck_full.params[0].values == ck_b.params[0].values);

  const std::string loss = slurp(b / "loss.csv");
  CHECK(loss.find("\n2,") != std::string::npos);

  // Resuming with a different architecture is refused.
  CHECK(run(base_args("train", scratch() / "train_bad") + model + " --set model.levels=3" +
            " --set train.resume=" + (a / "model.pawt").string())
            .code == 2);

  const fs::path sim = scratch() / "train_sim";
  REQUIRE(run(base_args("simulate", sim)).code == 0);
  const fs::path enh = scratch() / "train_enh";
  REQUIRE(run(base_args("enhance", enh) + " --set enhance.method=model --set checkpoint=" +
              (full / "model.pawt").string() + " --set enhance.input=" + (sim / "degraded_256.parf").string())
              .code == 0);
  std::ifstream is(enh / "enhanced.parf", std::ios::binary);
  CHECK(read_parf(is).n_sensors() == 511);
}
