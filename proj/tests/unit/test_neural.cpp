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
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

#include "parf/error.hpp"
#include "parf/nn/adam.hpp"
#include "parf/nn/checkpoint.hpp"
#include "parf/nn/model.hpp"
#include "parf/nn/network.hpp"
#include "parf/nn/train.hpp"
#include "support/oracles.hpp"

using namespace parf;
using namespace parf::nn;
using namespace parf::testing;

namespace {

const ActFn kAllFns[] = {ActFn::Sine, ActFn::Relu, ActFn::Elu, ActFn::MirroredRelu};

ParfFrame frame_of(std::size_t nt, std::size_t ns, std::uint64_t seed) {
  ParfFrame f(nt, ns, kSampleRate, 0.0, SensorAxis::Interleaved);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (double& v : f.data()) v = u(rng);
  return f;
}

}  // namespace

TEST_CASE("activation values") {
  GraphSpec g(1);
  const int s = g.activate(0, ActFn::Sine);
  (void)s;
  Tensor<double> x(1, 1, 3);
  x.data = {0.0, std::numbers::pi / 2, -3.0};
  ParameterSet<double> none;
  Executor<double> ex(g);
  const auto& y = ex.forward(none, x);
  CHECK(y.data[0] == 0.0);
  CHECK(y.data[1] == doctest::Approx(1.0));

  GraphSpec r(1);
  r.activate(0, ActFn::Relu);
  Executor<double> er(r);
  CHECK(er.forward(none, x).data[2] == 0.0);

  GraphSpec m(2);
  m.activate(0, ActFn::MirroredRelu);
  CHECK(m.channels(1) == 4);
  Executor<double> em(m);
  const auto xm = random_tensor<double>(2, 3, 3, 4);
  const auto& ym = em.forward(none, xm);
  REQUIRE(ym.channels == 4);
  for (std::size_t c = 0; c < 2; ++c) {
    for (std::size_t i = 0; i < 9; ++i) {
      CHECK(ym.channel(c)[i] + ym.channel(c + 2)[i] == doctest::Approx(std::abs(xm.channel(c)[i])));
    }
  }
}

TEST_CASE("gradient check: conv, head and every activation (float32)") {
  for (ActFn f : kAllFns) {
    CAPTURE(std::string(to_string(f)));
    const auto g = single_activation_graph(f);
    const auto x = random_tensor<float>(2, 8, 8, 2);
    const auto rep = check_gradients(g, smooth_parameters(g, x, 1e-3), x, 1e-3);
    CAPTURE(rep.where);
    CHECK(rep.worst < 1e-3);
  }
}

TEST_CASE("gradient check: down, upsample, concat, add (float32)") {
  for (ActFn f : kAllFns) {
    CAPTURE(std::string(to_string(f)));
    const auto g = resampling_graph(f);
    const auto x = random_tensor<float>(2, 8, 8, 4);
    const auto rep = check_gradients(g, smooth_parameters(g, x, 1e-3), x, 1e-3);
    CAPTURE(rep.where);
    CHECK(rep.worst < 1e-3);
  }
}

TEST_CASE("gradient check: every architecture and activation (double)") {
  for (auto arch : {Architecture::UNet, Architecture::FdUNet, Architecture::ResNet}) {
    for (auto act : {Activation::Sine, Activation::Relu, Activation::ReluElu, Activation::MirroredRelu}) {
      CAPTURE(std::string(to_string(arch)));
      CAPTURE(std::string(to_string(act)));
      auto cfg = ModelConfig::make(arch, act, 2, 2);
      cfg.zero_head = false;
      const auto g = build_graph(cfg);
      const auto x = random_tensor<double>(1, 8, 8, 6);
      const auto rep = check_gradients(g, smooth_parameters(g, x, 1e-6), x, 1e-6);
      CAPTURE(rep.where);
      CHECK(rep.worst < 1e-5);
    }
  }
}

TEST_CASE("mse loss gradient through the frame interface (float32)") {
  auto cfg = ModelConfig::make(Architecture::UNet, Activation::Sine, 2, 2);
  cfg.zero_head = false;
  cfg.init_seed = 8;
  Model<float> model(cfg);
  const auto input = frame_of(8, 7, 1), target = frame_of(8, 7, 2);
  const auto lg = backward(model, input, target);
  CHECK(lg.loss == doctest::Approx(mse_loss(model_forward(model, input), target)).epsilon(1e-6));
  // Spot-check one weight per tensor.
  for (std::size_t ti = 0; ti < model.params().size(); ++ti) {
    auto& v = model.params()[ti].values[0];
    const float saved = v;
    v = saved + 1e-3f;
    const double up = mse_loss(model_forward(model, input), target);
    v = saved - 1e-3f;
    const double down = mse_loss(model_forward(model, input), target);
    v = saved;
    const double fd = (up - down) / 2e-3;
    const double an = lg.grads[ti].values[0];
    CAPTURE(model.params()[ti].name);
    CHECK(std::abs(fd - an) <= 1e-3 * std::max(std::abs(an), 1e-2));
  }
}

TEST_CASE("linear head gradient equals feature/residual correlation") {
  GraphSpec g(3);
  g.conv1x1(0, 1, "head");
  auto p = g.make_parameters<double>();
  randomize(p, 11);
  const auto x = random_tensor<double>(3, 4, 5, 12);
  const auto t = random_tensor<double>(1, 4, 5, 13);
  Executor<double> ex(g);
  const auto& out = ex.forward(p, x);
  Tensor<double> grad_out(1, 4, 5);
  const double n = 20.0;
  for (std::size_t i = 0; i < 20; ++i) grad_out.data[i] = 2.0 * (out.data[i] - t.data[i]) / n;
  auto grads = p.zeros_like();
  ex.backward(p, grad_out, grads);
  for (std::size_t c = 0; c < 3; ++c) {
    double corr = 0.0;
    for (std::size_t i = 0; i < 20; ++i) corr += x.channel(c)[i] * 2.0 * (out.data[i] - t.data[i]) / n;
    CHECK(grads[0].values[c] == doctest::Approx(corr).epsilon(1e-12));
  }
  double bias = 0.0;
  for (double v : grad_out.data) bias += v;
  CHECK(grads[1].values[0] == doctest::Approx(bias).epsilon(1e-12));
}

TEST_CASE("zero input, zero target, zero bias: zero gradients") {
  for (auto act : {Activation::Sine, Activation::Relu}) {
    auto cfg = ModelConfig::make(Architecture::UNet, act, 2, 2);
    cfg.zero_head = false;
    Model<double> model(cfg);
    for (auto& t : model.params().tensors()) {
      if (t.name.ends_with(".bias")) std::fill(t.values.begin(), t.values.end(), 0.0);
    }
    ParfFrame zero(8, 8, kSampleRate, 0.0, SensorAxis::Interleaved);
    const auto lg = backward(model, zero, zero);
    CHECK(lg.loss == 0.0);
    for (const auto& t : lg.grads.tensors()) {
      for (double v : t.values) CHECK(v == 0.0);
    }
  }
}

TEST_CASE("zero-initialized head outputs zeros; shape is preserved") {
  for (auto arch : {Architecture::UNet, Architecture::FdUNet, Architecture::ResNet}) {
    for (auto act : {Activation::Sine, Activation::Relu, Activation::ReluElu, Activation::MirroredRelu}) {
      auto cfg = ModelConfig::make(arch, act, 3, 4);
      cfg.zero_head = true;
      Model<float> model(cfg);
      const auto in = frame_of(32, 511, 3);
      const auto out = model_forward(model, in);
      CHECK(out.n_time() == 32);
      CHECK(out.n_sensors() == 511);
      CHECK(out.max_abs() == 0.0);
      cfg.zero_head = false;
      Model<float> live(cfg);
      const auto out2 = model_forward(live, in);
      CHECK(out2.same_shape(in));
      CHECK(out2.all_finite());
      CHECK(out2.max_abs() > 0.0);
    }
  }
}

TEST_CASE("mirrored ReLU doubles channels at every activation site") {
  const auto g = build_graph(ModelConfig::make(Architecture::UNet, Activation::MirroredRelu, 3, 4));
  int sites = 0;
  for (const auto& n : g.nodes()) {
    if (n.op == OpKind::Activate) {
      CHECK(n.channels == 2 * g.node(n.inputs[0]).channels);
      ++sites;
    }
  }
  CHECK(sites == 8);
}

TEST_CASE("hybrid ReLU/ELU: ReLU in the encoder, ELU in the decoder") {
  const auto g = build_graph(ModelConfig::make(Architecture::UNet, Activation::ReluElu, 3, 4));
  for (const auto& n : g.nodes()) {
    if (n.op != OpKind::Activate) continue;
    const auto& src = g.node(n.inputs[0]).name;
    CAPTURE(src);
    CHECK(n.act == (src.starts_with("dec") ? ActFn::Elu : ActFn::Relu));
  }
}

TEST_CASE("forward is bit-reproducible") {
  auto cfg = ModelConfig::make(Architecture::UNet, Activation::Sine, 3, 4);
  cfg.zero_head = false;
  cfg.init_seed = 21;
  Model<float> a(cfg), b(cfg);
  const auto in = frame_of(64, 511, 5);
  const auto oa = model_forward(a, in), ob = model_forward(b, in);
  CHECK(std::equal(oa.data().begin(), oa.data().end(), ob.data().begin()));
}

TEST_CASE("model config: input range bound to activation") {
  CHECK(ModelConfig::make(Architecture::ResNet, Activation::Relu).input_range == NormalizationScheme::Affine);
  CHECK(ModelConfig::make(Architecture::UNet, Activation::Sine).input_range == NormalizationScheme::Symmetric);
  auto bad = ModelConfig::make(Architecture::UNet, Activation::Relu);
  bad.input_range = NormalizationScheme::Symmetric;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  auto bad2 = ModelConfig::make(Architecture::UNet, Activation::Sine);
  bad2.input_range = NormalizationScheme::Affine;
  CHECK_THROWS_AS(bad2.validate(), ConfigError);
  CHECK_THROWS_AS(parse_activation("tanh"), ConfigError);
  const auto cfg = ModelConfig::make(Architecture::FdUNet, Activation::ReluElu, 2, 8);
  const auto back = ModelConfig::parse_canonical(cfg.canonical());
  CHECK(back.digest() == cfg.digest());
  CHECK(ModelConfig::make(Architecture::FdUNet, Activation::ReluElu, 3, 8).digest() != cfg.digest());
}

TEST_CASE("mse loss examples") {
  ParfFrame a(1, 1, kSampleRate, 0.0, SensorAxis::Physical), b = a;
  a.at(0, 0) = 3.0;
  b.at(0, 0) = 1.0;
  CHECK(mse_loss(a, b) == 4.0);
  const auto f = frame_of(4, 5, 1);
  CHECK(mse_loss(f, f) == 0.0);
  auto g = f;
  for (double& v : g.data()) v += 1.0;
  CHECK(mse_loss(g, f) == doctest::Approx(1.0));
  CHECK_THROWS_AS(mse_loss(f, frame_of(4, 6, 1)), std::invalid_argument);
}

TEST_CASE("Adam on a 1-D quadratic follows the scalar recurrence") {
  ParameterSet<double> p;
  p.add("w", {1});
  auto state = AdamState<double>::zeros_like(p);
  double w = 0.0, m = 0.0, v = 0.0;
  for (int t = 1; t <= 500; ++t) {
    ParameterSet<double> g = p.zeros_like();
    g[0].values[0] = 2.0 * (p[0].values[0] - 3.0);
    adam_step(p, g, state, 0.1);
    // Oracle.
    const double gw = 2.0 * (w - 3.0);
    m = 0.9 * m + 0.1 * gw;
    v = 0.999 * v + 0.001 * gw * gw;
    w -= 0.1 * (m / (1 - std::pow(0.9, t))) / (std::sqrt(v / (1 - std::pow(0.999, t))) + 1e-8);
    REQUIRE(p[0].values[0] == doctest::Approx(w).epsilon(1e-12));
  }
  CHECK(std::abs(p[0].values[0] - 3.0) < 0.05);
  CHECK(state.step == 500);
}

TEST_CASE("Adam: zero gradient keeps params and decays moments; rejects NaN") {
  ParameterSet<float> p;
  p.add("w", {3});
  p[0].values = {1.0f, -2.0f, 0.5f};
  auto state = AdamState<float>::zeros_like(p);
  state.m[0].values = {0.1f, 0.1f, 0.1f};
  state.v[0].values = {0.01f, 0.01f, 0.01f};
  state.step = 3;
  const auto before = p[0].values;
  // m decays to 0.09 but the update is m_hat/(sqrt(v_hat)+eps) != 0, so use fresh moments
  // for the "unchanged" part.
  auto fresh = AdamState<float>::zeros_like(p);
  adam_step(p, p.zeros_like(), fresh, 0.1);
  CHECK(p[0].values == before);
  adam_step(p, p.zeros_like(), state, 0.0);
  CHECK(state.m[0].values[0] == doctest::Approx(0.09f));
  CHECK(state.v[0].values[0] == doctest::Approx(0.00999f));

  auto bad = p.zeros_like();
  bad[0].values[1] = std::nanf("");
  const auto snapshot = p[0].values;
  const auto m_before = state.m[0].values;
  CHECK_THROWS_AS(adam_step(p, bad, state, 0.1), NumericalError);
  CHECK(p[0].values == snapshot);
  CHECK(state.m[0].values == m_before);
}

TEST_CASE("checkpoint round trip is bit-identical") {
  auto cfg = ModelConfig::make(Architecture::UNet, Activation::Sine, 2, 4);
  cfg.zero_head = false;
  cfg.init_seed = 4;
  Checkpoint ck;
  ck.model = cfg;
  Model<float> model(cfg);
  ck.params = model.params();
  ck.adam = AdamState<float>::zeros_like(ck.params);
  randomize(ck.adam.m, 7, 1e-3);
  ck.adam.step = 12;
  ck.iteration = 12;
  ck.lr = 5e-6;
  ck.rng_state = "pair-seed 9";
  std::stringstream ss;
  write_checkpoint(ss, ck);
  const std::string bytes = ss.str();
  CHECK(bytes.compare(0, 6, std::string("PAWT1\0", 6)) == 0);
  const auto back = read_checkpoint(ss);
  CHECK(back.iteration == 12);
  CHECK(back.lr == 5e-6);
  CHECK(back.adam.step == 12);
  CHECK(back.rng_state == "pair-seed 9");
  CHECK(back.model.digest() == cfg.digest());
  CHECK(back.adam.m[0].values == ck.adam.m[0].values);
  Model<float> reloaded(back.model, back.params);
  const auto in = frame_of(16, 31, 3);
  const auto a = model_forward(model, in), b = model_forward(reloaded, in);
  CHECK(std::equal(a.data().begin(), a.data().end(), b.data().begin()));

  std::string corrupt = bytes;
  corrupt[0] = 'X';
  std::stringstream cs(corrupt);
  CHECK_THROWS_AS(read_checkpoint(cs), FormatError);
  std::stringstream truncated(bytes.substr(0, bytes.size() / 2));
  CHECK_THROWS_AS(read_checkpoint(truncated), FormatError);
}

TEST_CASE("train config validation and schedule") {
  TrainConfig t;
  CHECK_NOTHROW(t.validate());
  CHECK(t.lr_at(0) == 5e-6);
  CHECK(t.lr_at(100000) == 1e-6);
  t.lr2 = 1e-5;
  CHECK_THROWS_AS(t.validate(), ConfigError);
  t.lr2 = 1e-6;
  t.lr1 = 0.0;
  CHECK_THROWS_AS(t.validate(), ConfigError);
}

TEST_CASE("training: first loss with zero head, determinism, resume") {
  const auto setup = SimulationSetup::defaults();
  auto mcfg = ModelConfig::make(Architecture::UNet, Activation::Sine, 2, 2);
  mcfg.zero_head = true;
  TrainConfig t;
  t.iterations_phase1 = 2;
  t.iterations_phase2 = 2;
  t.lr1 = 1e-3;
  t.lr2 = 5e-4;
  t.seed = 17;
  const auto a = train(mcfg, t, setup);
  const auto b = train(mcfg, t, setup);
  REQUIRE(a.losses.size() == 4);
  CHECK(a.losses == b.losses);

  const auto pair = make_training_pair(setup, pair_seed(17, 0, 0));
  const auto sample = prepare_sample(pair, mcfg.input_range);
  CHECK(a.losses[0] == doctest::Approx(sample.target.mean_square()).epsilon(1e-6));

  TrainConfig half = t;
  half.iterations_phase2 = 0;
  const auto first = train(mcfg, half, setup);
  const auto rest = train(mcfg, t, setup, {}, &first.checkpoint);
  REQUIRE(rest.losses.size() == 2);
  CHECK(rest.losses[0] == a.losses[2]);
  CHECK(rest.losses[1] == a.losses[3]);
  CHECK(rest.checkpoint.params[0].values == a.checkpoint.params[0].values);
}

TEST_CASE("training aborts with a diagnostic checkpoint on non-finite loss") {
  const auto setup = SimulationSetup::defaults();
  const auto mcfg = ModelConfig::make(Architecture::UNet, Activation::Sine, 2, 2);
  TrainConfig t;
  t.iterations_phase1 = 3;
  t.iterations_phase2 = 0;
  t.seed = 1;
  Checkpoint broken;
  broken.model = mcfg;
  broken.params = Model<float>(mcfg).params();
  broken.params[0].values[0] = std::nanf("");
  try {
    train(mcfg, t, setup, {}, &broken);
    FAIL("expected divergence");
  } catch (const TrainingDiverged& e) {
    CHECK(e.checkpoint().iteration == 0);
    CHECK(std::isnan(e.checkpoint().params[0].values[0]));
  }
}

TEST_CASE("pre-activation histogram") {
  auto cfg = ModelConfig::make(Architecture::UNet, Activation::Sine, 2, 2);
  cfg.zero_head = false;
  Model<float> model(cfg);
  const auto hists = preactivation_histogram(model, 3, 16, 16);
  REQUIRE(!hists.empty());
  for (const auto& h : hists) {
    double sum = 0.0;
    for (double f : h.fractions) sum += f;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  }
  // All weights zero: pre-activations equal the biases.
  for (auto& t : model.params().tensors()) {
    const bool bias = t.name.ends_with(".bias");
    for (std::size_t i = 0; i < t.values.size(); ++i) t.values[i] = bias ? 0.25f * (1 + i) : 0.0f;
  }
  const auto flat = preactivation_histogram(model, 3, 16, 16);
  for (const auto& h : flat) {
    CHECK(h.min == doctest::Approx(0.25));
    CHECK(h.fraction_outside_half_pi == 0.0);
  }
  Model<float> relu(ModelConfig::make(Architecture::UNet, Activation::Relu, 2, 2));
  CHECK_THROWS_AS(preactivation_histogram(relu, 3, 16, 16), std::invalid_argument);
}
