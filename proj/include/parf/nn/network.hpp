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

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "parf/nn/tensor.hpp"

namespace parf::nn {

enum class OpKind { Input, Conv3x3, Down2x2, Conv1x1, Upsample2x, Concat, Activate, Add };

enum class ActFn { Sine, Relu, Elu, MirroredRelu };

const char* to_string(ActFn f);

/// Declared trainable tensor and its initialization fan-in.
struct ParamSpec {
  std::string name;
  std::vector<std::size_t> shape;
  std::size_t fan_in = 1;
  bool zero_init = false;
};

struct Node {
  OpKind op = OpKind::Input;
  std::vector<int> inputs;
  int weight = -1;  // index into the parameter list
  int bias = -1;
  ActFn act = ActFn::Relu;
  std::size_t channels = 0;  // output channels
  std::string name;
};

/// Static dataflow graph in topological order; node 0 is the input.
class GraphSpec {
 public:
  explicit GraphSpec(std::size_t input_channels = 1);

  int conv3x3(int x, std::size_t out_channels, const std::string& name);
  int down2x2(int x, std::size_t out_channels, const std::string& name);
  int conv1x1(int x, std::size_t out_channels, const std::string& name, bool zero_init = false);
  int upsample(int x);
  int concat(const std::vector<int>& xs);
  int activate(int x, ActFn f);
  int add(int a, int b);

  std::span<const Node> nodes() const { return nodes_; }
  const Node& node(int i) const { return nodes_[static_cast<std::size_t>(i)]; }
  int output() const { return static_cast<int>(nodes_.size()) - 1; }
  std::span<const ParamSpec> params() const { return params_; }
  std::size_t channels(int node) const { return nodes_[static_cast<std::size_t>(node)].channels; }

  /// Allocates parameters in declaration order (all zero).
  template <typename T>
  ParameterSet<T> make_parameters() const {
    ParameterSet<T> p;
    for (const auto& s : params_) p.add(s.name, s.shape);
    return p;
  }

 private:
  int push(Node n);
  std::vector<Node> nodes_;
  std::vector<ParamSpec> params_;
};

/// Runs a GraphSpec forward and backward, keeping every node value for the backward pass.
template <typename T>
class Executor {
 public:
  explicit Executor(const GraphSpec& graph) : graph_(&graph) {}

  const Tensor<T>& forward(const ParameterSet<T>& params, Tensor<T> input);
  /// Accumulates d(loss)/d(param) into grads given d(loss)/d(output).
  void backward(const ParameterSet<T>& params, const Tensor<T>& grad_output,
                ParameterSet<T>& grads);

  const Tensor<T>& value(int node) const { return values_[static_cast<std::size_t>(node)]; }
  bool has_values() const { return !values_.empty(); }

 private:
  const GraphSpec* graph_;
  std::vector<Tensor<T>> values_;
};

extern template class Executor<float>;
extern template class Executor<double>;

}  // namespace parf::nn
