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

#include "parf/nn/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

#include "parf/error.hpp"

namespace parf::nn {

namespace {

ActFn encoder_fn(Activation a) {
  switch (a) {
    case Activation::Sine: return ActFn::Sine;
    case Activation::Relu: return ActFn::Relu;
    case Activation::ReluElu: return ActFn::Relu;
    case Activation::MirroredRelu: return ActFn::MirroredRelu;
  }
  return ActFn::Relu;
}

// Hybrid ReLU/ELU puts ELU on the decoder so negative amplitudes reach the head.
ActFn decoder_fn(Activation a) { return a == Activation::ReluElu ? ActFn::Elu : encoder_fn(a); }

int block(GraphSpec& g, int x, std::size_t channels, ActFn f, const std::string& name) {
  return g.activate(g.conv3x3(x, channels, name), f);
}

std::size_t round_up(std::size_t n, std::size_t m) { return (n + m - 1) / m * m; }

}  // namespace

const char* to_string(Architecture a) {
  switch (a) {
    case Architecture::UNet: return "unet";
    case Architecture::FdUNet: return "fd-unet";
    case Architecture::ResNet: return "resnet";
  }
  return "?";
}

const char* to_string(Activation a) {
  switch (a) {
    case Activation::Sine: return "sine";
    case Activation::Relu: return "relu";
    case Activation::ReluElu: return "relu-elu";
    case Activation::MirroredRelu: return "mirrored-relu";
  }
  return "?";
}

Architecture parse_architecture(std::string_view s) {
  if (s == "unet") return Architecture::UNet;
  if (s == "fd-unet") return Architecture::FdUNet;
  if (s == "resnet") return Architecture::ResNet;
  throw ConfigError("unknown architecture '" + std::string(s) + "'");
}

Activation parse_activation(std::string_view s) {
  if (s == "sine") return Activation::Sine;
  if (s == "relu") return Activation::Relu;
  if (s == "relu-elu") return Activation::ReluElu;
  if (s == "mirrored-relu") return Activation::MirroredRelu;
  throw ConfigError("unknown activation '" + std::string(s) + "'");
}

ModelConfig ModelConfig::make(Architecture arch, Activation act, int levels, int base) {
  ModelConfig cfg;
  cfg.architecture = arch;
  cfg.activation = act;
  cfg.levels = levels;
  cfg.base_channels = base;
  cfg.input_range =
      act == Activation::Relu ? NormalizationScheme::Affine : NormalizationScheme::Symmetric;
  return cfg;
}

void ModelConfig::validate() const {
  if (levels < 1) throw ConfigError("model levels must be >= 1");
  if (architecture != Architecture::ResNet && levels > 8) {
    throw ConfigError("UNet levels must be <= 8");
  }
  if (base_channels < 1) throw ConfigError("base channel count must be >= 1");
  const auto wanted =
      activation == Activation::Relu ? NormalizationScheme::Affine : NormalizationScheme::Symmetric;
  if (input_range != wanted) {
    throw ConfigError(std::string("activation '") + to_string(activation) + "' requires the " +
                      (wanted == NormalizationScheme::Affine ? "[0, 1]" : "[-1, 1]") +
                      " input range");
  }
}

std::string ModelConfig::canonical() const {
  std::ostringstream os;
  os << "architecture=" << to_string(architecture) << ";activation=" << to_string(activation)
     << ";levels=" << levels << ";base_channels=" << base_channels
     << ";input_range=" << (input_range == NormalizationScheme::Affine ? "affine" : "symmetric")
     << ";zero_head=" << (zero_head ? 1 : 0) << ";global_skip=" << (global_skip ? 1 : 0);
  return os.str();
}

std::uint64_t ModelConfig::digest() const { return fnv1a64(canonical()); }

ModelConfig ModelConfig::parse_canonical(std::string_view text) {
  ModelConfig cfg;
  std::string item;
  std::istringstream is{std::string(text)};
  while (std::getline(is, item, ';')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw FormatError("bad model config item '" + item + "'");
    const std::string key = item.substr(0, eq), value = item.substr(eq + 1);
    if (key == "architecture") cfg.architecture = parse_architecture(value);
    else if (key == "activation") cfg.activation = parse_activation(value);
    else if (key == "levels") cfg.levels = std::stoi(value);
    else if (key == "base_channels") cfg.base_channels = std::stoi(value);
    else if (key == "input_range")
      cfg.input_range =
          value == "affine" ? NormalizationScheme::Affine : NormalizationScheme::Symmetric;
    else if (key == "zero_head") cfg.zero_head = value == "1";
    else if (key == "global_skip") cfg.global_skip = value == "1";
    else throw FormatError("unknown model config key '" + key + "'");
  }
  return cfg;
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

GraphSpec build_graph(const ModelConfig& cfg) {
  cfg.validate();
  GraphSpec g(1);
  const auto base = static_cast<std::size_t>(cfg.base_channels);
  const ActFn enc = encoder_fn(cfg.activation);
  const ActFn dec = decoder_fn(cfg.activation);
  const bool dense = cfg.architecture == Architecture::FdUNet;
  int x = 0;

  if (cfg.architecture == Architecture::ResNet) {
    x = block(g, x, base, enc, "stem");
    for (int p = 0; p < cfg.levels; ++p) {
      const std::string name = "res" + std::to_string(p);
      int y = block(g, x, base, enc, name + ".conv0");
      y = block(g, y, base, enc, name + ".conv1");
      x = g.add(x, y);
    }
  } else {
    std::vector<int> skips;
    for (int l = 0; l < cfg.levels; ++l) {
      const std::string name = "enc" + std::to_string(l);
      const std::size_t c = base << l;
      const int y1 = block(g, x, c, enc, name + ".conv0");
      x = block(g, dense ? g.concat({x, y1}) : y1, c, enc, name + ".conv1");
      if (l + 1 < cfg.levels) {
        skips.push_back(x);
        x = g.down2x2(x, g.channels(x), name + ".down");
      }
    }
    for (int l = cfg.levels - 2; l >= 0; --l) {
      const std::string name = "dec" + std::to_string(l);
      const std::size_t c = base << l;
      const int merged = g.concat({g.upsample(x), skips[static_cast<std::size_t>(l)]});
      x = block(g, merged, c, dec, name + ".conv0");
      if (dense) x = block(g, g.concat({merged, x}), c, dec, name + ".conv1");
    }
  }
  const int head = g.conv1x1(x, 1, "head", cfg.zero_head);
  if (cfg.global_skip) g.add(head, 0);
  return g;
}

template <typename T>
Model<T>::Model(const ModelConfig& cfg)
    : cfg_(cfg), graph_(build_graph(cfg)), params_(graph_.make_parameters<T>()), exec_(graph_) {
  std::mt19937_64 rng(cfg.init_seed);
  const auto specs = graph_.params();
  for (std::size_t i = 0; i < specs.size(); ++i) {
    if (specs[i].zero_init) continue;
    const double bound = 1.0 / std::sqrt(static_cast<double>(specs[i].fan_in));
    std::uniform_real_distribution<double> u(-bound, bound);
    for (T& v : params_[i].values) v = static_cast<T>(u(rng));
  }
}

template <typename T>
Model<T>::Model(const ModelConfig& cfg, ParameterSet<T> params)
    : cfg_(cfg), graph_(build_graph(cfg)), params_(std::move(params)), exec_(graph_) {
  if (!params_.same_layout(graph_.make_parameters<T>())) {
    throw std::invalid_argument("parameters do not match the model configuration");
  }
}

template <typename T>
Model<T>::Model(const Model& other)
    : cfg_(other.cfg_), graph_(other.graph_), params_(other.params_), exec_(graph_) {}

template <typename T>
const Tensor<T>& Model<T>::forward(const Tensor<T>& input) {
  const std::size_t m = spatial_multiple();
  if (input.height % m != 0 || input.width % m != 0) {
    throw std::invalid_argument("input size must be divisible by " + std::to_string(m));
  }
  return exec_.forward(params_, input);
}

template <typename T>
void Model<T>::backward(const Tensor<T>& grad_output, ParameterSet<T>& grads) {
  exec_.backward(params_, grad_output, grads);
}

template <typename T>
std::vector<std::pair<std::string, const Tensor<T>*>> Model<T>::sine_preactivations() const {
  std::vector<std::pair<std::string, const Tensor<T>*>> out;
  if (!exec_.has_values()) return out;
  for (const Node& n : graph_.nodes()) {
    if (n.op == OpKind::Activate && n.act == ActFn::Sine) {
      out.emplace_back(graph_.node(n.inputs[0]).name, &exec_.value(n.inputs[0]));
    }
  }
  return out;
}

template <typename T>
std::size_t Model<T>::spatial_multiple() const {
  if (cfg_.architecture == Architecture::ResNet) return 1;
  return std::size_t{1} << (cfg_.levels - 1);
}

template <typename T>
Tensor<T> frame_to_tensor(const ParfFrame& frame, std::size_t multiple) {
  if (frame.n_time() == 0 || frame.n_sensors() == 0) throw std::invalid_argument("empty frame");
  const std::size_t H = round_up(frame.n_time(), multiple);
  const std::size_t W = round_up(frame.n_sensors(), multiple);
  Tensor<T> t(1, H, W);
  for (std::size_t x = 0; x < W; ++x) {
    const auto trace = frame.trace(std::min(x, frame.n_sensors() - 1));
    for (std::size_t y = 0; y < H; ++y) {
      t.at(0, y, x) = static_cast<T>(trace[std::min(y, frame.n_time() - 1)]);
    }
  }
  return t;
}

template <typename T>
ParfFrame model_forward(Model<T>& model, const ParfFrame& input) {
  const auto& out = model.forward(frame_to_tensor<T>(input, model.spatial_multiple()));
  ParfFrame result = input.zeros_like();
  for (std::size_t k = 0; k < input.n_sensors(); ++k) {
    auto trace = result.trace(k);
    for (std::size_t t = 0; t < input.n_time(); ++t) trace[t] = static_cast<double>(out.at(0, t, k));
  }
  return result;
}

double mse_loss(const ParfFrame& pred, const ParfFrame& target) {
  if (!pred.same_shape(target)) throw std::invalid_argument("loss: frame shape mismatch");
  if (pred.data().empty()) throw std::invalid_argument("loss: empty frames");
  const auto p = pred.data(), t = target.data();
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double d = p[i] - t[i];
    acc += d * d;
  }
  return acc / static_cast<double>(p.size());
}

template <typename T>
LossAndGrads<T> backward(Model<T>& model, const ParfFrame& input, const ParfFrame& target) {
  if (!input.same_shape(target)) throw std::invalid_argument("input/target shape mismatch");
  const auto& out = model.forward(frame_to_tensor<T>(input, model.spatial_multiple()));
  const std::size_t nt = input.n_time(), ns = input.n_sensors();
  const double n = static_cast<double>(nt * ns);

  LossAndGrads<T> result;
  Tensor<T> grad_out(out.channels, out.height, out.width);
  double acc = 0.0;
  for (std::size_t k = 0; k < ns; ++k) {
    const auto tgt = target.trace(k);
    for (std::size_t t = 0; t < nt; ++t) {
      const double d = static_cast<double>(out.at(0, t, k)) - tgt[t];
      acc += d * d;
      grad_out.at(0, t, k) = static_cast<T>(2.0 * d / n);
    }
  }
  result.loss = acc / n;
  if (!std::isfinite(result.loss)) throw NumericalError("non-finite loss in forward pass");
  result.grads = model.params().zeros_like();
  model.backward(grad_out, result.grads);
  if (!result.grads.all_finite()) throw NumericalError("non-finite gradient");
  return result;
}

std::vector<LayerHistogram> preactivation_histogram(Model<float>& model, std::uint64_t noise_seed,
                                                    std::size_t n_time, std::size_t n_physical,
                                                    std::size_t bins) {
  if (model.config().activation != Activation::Sine) {
    throw std::invalid_argument("model has no sine activations");
  }
  if (bins == 0) throw std::invalid_argument("histogram needs at least one bin");
  ParfFrame noise(n_time, n_physical, kSampleRate, 0.0, SensorAxis::Physical);
  std::mt19937_64 rng(noise_seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (double& v : noise.data()) v = gauss(rng);
  auto [normalized, record] = normalize(noise, model.config().input_range);
  model_forward(model, linear_interpolate_sensors(normalized));

  const double lo = -4.0 * std::numbers::pi, hi = 4.0 * std::numbers::pi;
  const double half_pi = 0.5 * std::numbers::pi;
  std::vector<LayerHistogram> out;
  for (const auto& [name, tensor] : model.sine_preactivations()) {
    LayerHistogram h;
    h.name = name;
    h.lo = lo;
    h.hi = hi;
    h.fractions.assign(bins + 2, 0.0);
    h.min = std::numeric_limits<double>::infinity();
    h.max = -std::numeric_limits<double>::infinity();
    std::size_t outside = 0;
    for (float fv : tensor->data) {
      const double v = fv;
      h.min = std::min(h.min, v);
      h.max = std::max(h.max, v);
      if (std::abs(v) > half_pi) ++outside;
      std::size_t slot;
      if (v < lo) slot = 0;
      else if (v >= hi) slot = bins + 1;
      else slot = 1 + std::min(bins - 1, static_cast<std::size_t>((v - lo) / (hi - lo) * bins));
      h.fractions[slot] += 1.0;
    }
    const double n = static_cast<double>(tensor->size());
    for (double& f : h.fractions) f /= n;
    h.fraction_outside_half_pi = static_cast<double>(outside) / n;
    out.push_back(std::move(h));
  }
  if (out.empty()) throw std::invalid_argument("model has no sine activations");
  return out;
}

template class Model<float>;
template class Model<double>;
template Tensor<float> frame_to_tensor<float>(const ParfFrame&, std::size_t);
template Tensor<double> frame_to_tensor<double>(const ParfFrame&, std::size_t);
template ParfFrame model_forward<float>(Model<float>&, const ParfFrame&);
template ParfFrame model_forward<double>(Model<double>&, const ParfFrame&);
template LossAndGrads<float> backward<float>(Model<float>&, const ParfFrame&, const ParfFrame&);
template LossAndGrads<double> backward<double>(Model<double>&, const ParfFrame&,
                                               const ParfFrame&);

}  // namespace parf::nn
