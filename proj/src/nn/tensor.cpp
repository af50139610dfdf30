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

#include "parf/nn/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

namespace parf::nn {

template <typename T>
std::size_t ParameterSet<T>::add(std::string name, std::vector<std::size_t> shape) {
  const std::size_t count =
      std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
  tensors_.push_back({std::move(name), std::move(shape), std::vector<T>(count, T(0))});
  return tensors_.size() - 1;
}

template <typename T>
const NamedTensor<T>* ParameterSet<T>::find(std::string_view name) const {
  for (const auto& t : tensors_) {
    if (t.name == name) return &t;
  }
  return nullptr;
}

template <typename T>
ParameterSet<T> ParameterSet<T>::zeros_like() const {
  ParameterSet out;
  for (const auto& t : tensors_) out.add(t.name, t.shape);
  return out;
}

template <typename T>
void ParameterSet<T>::set_zero() {
  for (auto& t : tensors_) std::fill(t.values.begin(), t.values.end(), T(0));
}

template <typename T>
std::size_t ParameterSet<T>::scalar_count() const {
  std::size_t n = 0;
  for (const auto& t : tensors_) n += t.values.size();
  return n;
}

template <typename T>
bool ParameterSet<T>::same_layout(const ParameterSet& o) const {
  if (tensors_.size() != o.tensors_.size()) return false;
  for (std::size_t i = 0; i < tensors_.size(); ++i) {
    if (tensors_[i].name != o.tensors_[i].name || tensors_[i].shape != o.tensors_[i].shape) {
      return false;
    }
  }
  return true;
}

template <typename T>
bool ParameterSet<T>::all_finite() const {
  for (const auto& t : tensors_) {
    for (T v : t.values) {
      if (!std::isfinite(v)) return false;
    }
  }
  return true;
}

template struct Tensor<float>;
template struct Tensor<double>;
template class ParameterSet<float>;
template class ParameterSet<double>;

}  // namespace parf::nn
