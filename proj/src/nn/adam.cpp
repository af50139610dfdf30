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

#include "parf/nn/adam.hpp"

#include <cmath>
#include <stdexcept>

#include "parf/error.hpp"

namespace parf::nn {

template <typename T>
void adam_step(ParameterSet<T>& params, const ParameterSet<T>& grads, AdamState<T>& state,
               double lr, const AdamConfig& cfg) {
  if (!params.same_layout(grads) || !params.same_layout(state.m) ||
      !params.same_layout(state.v)) {
    throw std::invalid_argument("adam: parameter, gradient and state layouts differ");
  }
  if (!grads.all_finite()) throw NumericalError("adam: non-finite gradient, step rejected");

  const std::uint64_t t = state.step + 1;
  const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t));
  const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t));
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& p = params[i].values;
    const auto& g = grads[i].values;
    auto& m = state.m[i].values;
    auto& v = state.v[i].values;
    for (std::size_t j = 0; j < p.size(); ++j) {
      const double gj = g[j];
      const double mj = cfg.beta1 * m[j] + (1.0 - cfg.beta1) * gj;
      const double vj = cfg.beta2 * v[j] + (1.0 - cfg.beta2) * gj * gj;
      m[j] = static_cast<T>(mj);
      v[j] = static_cast<T>(vj);
      const double update = lr * (mj / c1) / (std::sqrt(vj / c2) + cfg.epsilon);
      p[j] = static_cast<T>(static_cast<double>(p[j]) - update);
    }
  }
  state.step = t;
}

template void adam_step<float>(ParameterSet<float>&, const ParameterSet<float>&,
                               AdamState<float>&, double, const AdamConfig&);
template void adam_step<double>(ParameterSet<double>&, const ParameterSet<double>&,
                                AdamState<double>&, double, const AdamConfig&);

}  // namespace parf::nn
