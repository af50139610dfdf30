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

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "parf/filters.hpp"
#include "parf/frame.hpp"
#include "parf/nn/network.hpp"
#include "parf/nn/tensor.hpp"

namespace parf::nn {

enum class Architecture { UNet, FdUNet, ResNet };
enum class Activation { Sine, Relu, ReluElu, MirroredRelu };

const char* to_string(Architecture a);
const char* to_string(Activation a);
Architecture parse_architecture(std::string_view s);
Activation parse_activation(std::string_view s);

/// Network family and size. The input range follows the activation: ReLU-only
/// networks take [0, 1] inputs, every other activation takes [-1, 1].
struct ModelConfig {
  Architecture architecture = Architecture::UNet;
  Activation activation = Activation::Sine;
  int levels = 3;  // resolution levels (UNet family) or residual pairs (ResNet)
  int base_channels = 16;
  NormalizationScheme input_range = NormalizationScheme::Symmetric;
  bool zero_head = false;    // final 1x1 layer starts at zero instead of fan-in uniform
  bool global_skip = false;  // adds the network input to the head output
  std::uint64_t init_seed = 0;

  /// Config with the input range implied by the activation.
  static ModelConfig make(Architecture arch, Activation act, int levels = 3, int base = 16);
  void validate() const;  // throws ConfigError
  /// Structural description (no seed); stable text used for the config digest.
  std::string canonical() const;
  std::uint64_t digest() const;
  static ModelConfig parse_canonical(std::string_view text);
};

std::uint64_t fnv1a64(std::string_view bytes);

/// Builds the dataflow graph for a configuration.
GraphSpec build_graph(const ModelConfig& cfg);

/// Spatiotemporal enhancement network: graph, parameters, and the last forward pass.
template <typename T>
class Model {
 public:
  explicit Model(const ModelConfig& cfg);  // fan-in scaled uniform init from cfg.init_seed
  Model(const ModelConfig& cfg, ParameterSet<T> params);
  Model(const Model& other);
  Model& operator=(const Model&) = delete;

  const ModelConfig& config() const { return cfg_; }
  const GraphSpec& graph() const { return graph_; }
  ParameterSet<T>& params() { return params_; }
  const ParameterSet<T>& params() const { return params_; }

  /// Raw tensor forward (1 x H x W, H and W divisible by 2^(levels-1)).
  const Tensor<T>& forward(const Tensor<T>& input);
  void backward(const Tensor<T>& grad_output, ParameterSet<T>& grads);

  /// (layer name, tensor entering the sine) for every sine site of the last forward pass.
  std::vector<std::pair<std::string, const Tensor<T>*>> sine_preactivations() const;
  /// Spatial padding multiple required by the resampling stages.
  std::size_t spatial_multiple() const;

 private:
  ModelConfig cfg_;
  GraphSpec graph_;
  ParameterSet<T> params_;
  Executor<T> exec_;
};

/// Frame (time x sensors) to a 1-channel tensor, edge-replicating up to `multiple`.
template <typename T>
Tensor<T> frame_to_tensor(const ParfFrame& frame, std::size_t multiple);

/// Enhances a normalized interleaved frame; output has the input's shape and metadata.
template <typename T>
ParfFrame model_forward(Model<T>& model, const ParfFrame& input);

/// Mean over all entries of the squared difference.
double mse_loss(const ParfFrame& pred, const ParfFrame& target);

template <typename T>
struct LossAndGrads {
  double loss = 0.0;
  ParameterSet<T> grads;
};

/// MSE loss and its gradient with respect to every parameter.
template <typename T>
LossAndGrads<T> backward(Model<T>& model, const ParfFrame& input, const ParfFrame& target);

struct LayerHistogram {
  std::string name;
  double lo = 0.0;
  double hi = 0.0;
  std::vector<double> fractions;  // bins between lo and hi, plus underflow and overflow at ends
  double fraction_outside_half_pi = 0.0;
  double min = 0.0;
  double max = 0.0;
};

/// Feeds symmetric-normalized Gaussian noise (n_time x n_physical, then linear
/// interpolation) and histograms the values entering every sine activation.
std::vector<LayerHistogram> preactivation_histogram(Model<float>& model, std::uint64_t noise_seed,
                                                    std::size_t n_time = kTimeSamples,
                                                    std::size_t n_physical = 256,
                                                    std::size_t bins = 64);

extern template class Model<float>;
extern template class Model<double>;

}  // namespace parf::nn
