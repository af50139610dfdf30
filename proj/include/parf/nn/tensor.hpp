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
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace parf::nn {

/// Dense C x H x W feature map, channel-major, rows contiguous.
template <typename T>
struct Tensor {
  std::size_t channels = 0;
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<T> data;

  Tensor() = default;
  Tensor(std::size_t c, std::size_t h, std::size_t w, T fill = T(0))
      : channels(c), height(h), width(w), data(c * h * w, fill) {}

  std::size_t plane() const { return height * width; }
  std::size_t size() const { return data.size(); }
  T* channel(std::size_t c) { return data.data() + c * plane(); }
  const T* channel(std::size_t c) const { return data.data() + c * plane(); }
  T& at(std::size_t c, std::size_t y, std::size_t x) { return data[(c * height + y) * width + x]; }
  T at(std::size_t c, std::size_t y, std::size_t x) const {
    return data[(c * height + y) * width + x];
  }
  bool same_shape(const Tensor& o) const {
    return channels == o.channels && height == o.height && width == o.width;
  }
};

template <typename T>
struct NamedTensor {
  std::string name;
  std::vector<std::size_t> shape;
  std::vector<T> values;
};

/// Ordered collection of named trainable tensors (also used for gradients).
template <typename T>
class ParameterSet {
 public:
  std::size_t add(std::string name, std::vector<std::size_t> shape);
  std::size_t size() const { return tensors_.size(); }
  NamedTensor<T>& operator[](std::size_t i) { return tensors_[i]; }
  const NamedTensor<T>& operator[](std::size_t i) const { return tensors_[i]; }
  const NamedTensor<T>* find(std::string_view name) const;
  std::span<NamedTensor<T>> tensors() { return tensors_; }
  std::span<const NamedTensor<T>> tensors() const { return tensors_; }

  /// Same names and shapes, all values zero.
  ParameterSet zeros_like() const;
  void set_zero();
  std::size_t scalar_count() const;
  bool same_layout(const ParameterSet& o) const;
  bool all_finite() const;

 private:
  std::vector<NamedTensor<T>> tensors_;
};

extern template struct Tensor<float>;
extern template struct Tensor<double>;
extern template class ParameterSet<float>;
extern template class ParameterSet<double>;

}  // namespace parf::nn
