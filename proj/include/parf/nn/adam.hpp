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

#include "parf/nn/tensor.hpp"

namespace parf::nn {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// First and second moment estimates plus the completed step count.
template <typename T>
struct AdamState {
  ParameterSet<T> m;
  ParameterSet<T> v;
  std::uint64_t step = 0;

  static AdamState zeros_like(const ParameterSet<T>& params) {
    return {params.zeros_like(), params.zeros_like(), 0};
  }
};

/// One bias-corrected Adam update. Throws NumericalError on a non-finite
/// gradient before touching params or state; invalid_argument on layout mismatch.
template <typename T>
void adam_step(ParameterSet<T>& params, const ParameterSet<T>& grads, AdamState<T>& state,
               double lr, const AdamConfig& cfg = {});

extern template void adam_step<float>(ParameterSet<float>&, const ParameterSet<float>&,
                                      AdamState<float>&, double, const AdamConfig&);
extern template void adam_step<double>(ParameterSet<double>&, const ParameterSet<double>&,
                                       AdamState<double>&, double, const AdamConfig&);

}  // namespace parf::nn
