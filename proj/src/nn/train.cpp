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

#include "parf/nn/train.hpp"

#include <cmath>
#include <sstream>

namespace parf::nn {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

std::string rng_state_text(std::uint64_t seed) {
  return "pair-seed " + std::to_string(seed);
}

}  // namespace

void TrainConfig::validate() const {
  if (!(lr1 > 0.0) || !(lr2 > 0.0)) throw ConfigError("learning rates must be positive");
  if (!(lr2 < lr1)) throw ConfigError("phase 2 learning rate must be below phase 1");
  if (batch_size == 0) throw ConfigError("batch size must be >= 1");
  if (spheres_per_iteration == 0) throw ConfigError("spheres per iteration must be >= 1");
}

double TrainConfig::lr_at(std::uint64_t iteration) const {
  return iteration < iterations_phase1 ? lr1 : lr2;
}

TrainingSample prepare_sample(const TrainingPair& pair, NormalizationScheme scheme) {
  auto [normalized, record] = normalize(pair.input, scheme);
  TrainingSample s;
  s.input = linear_interpolate_sensors(normalized);
  s.target = apply_normalization(pair.target, record);
  s.record = record;
  return s;
}

std::uint64_t pair_seed(std::uint64_t seed, std::uint64_t iteration, std::size_t batch_index) {
  return splitmix64(splitmix64(seed ^ splitmix64(iteration)) + batch_index);
}

TrainResult train(const ModelConfig& model_cfg, const TrainConfig& tcfg,
                  const SimulationSetup& setup, const TrainHooks& hooks,
                  const Checkpoint* resume) {
  tcfg.validate();
  model_cfg.validate();
  if (resume != nullptr && resume->model.digest() != model_cfg.digest()) {
    throw ConfigError("checkpoint was written for a different model configuration");
  }

  SimulationSetup sim = setup;
  sim.sampler.count = tcfg.spheres_per_iteration;
  Model<float> model = resume != nullptr ? Model<float>(model_cfg, resume->params)
                                         : Model<float>(model_cfg);
  AdamState<float> adam = resume != nullptr && resume->adam.m.size() == model.params().size()
                              ? resume->adam
                              : AdamState<float>::zeros_like(model.params());
  std::uint64_t it = resume != nullptr ? resume->iteration : 0;

  auto snapshot = [&](std::uint64_t done) {
    Checkpoint c;
    c.model = model_cfg;
    c.params = model.params();
    c.adam = adam;
    c.iteration = done;
    c.lr = tcfg.lr_at(done);
    c.rng_state = rng_state_text(tcfg.seed);
    return c;
  };

  TrainResult result;
  const double inv_batch = 1.0 / static_cast<double>(tcfg.batch_size);
  for (; it < tcfg.total_iterations(); ++it) {
    double loss = 0.0;
    ParameterSet<float> grads = model.params().zeros_like();
    try {
      for (std::size_t b = 0; b < tcfg.batch_size; ++b) {
        const auto pair = make_training_pair(sim, pair_seed(tcfg.seed, it, b));
        const auto sample = prepare_sample(pair, model_cfg.input_range);
        auto lg = backward(model, sample.input, sample.target);
        loss += lg.loss * inv_batch;
        for (std::size_t i = 0; i < grads.size(); ++i) {
          auto& dst = grads[i].values;
          const auto& src = lg.grads[i].values;
          for (std::size_t j = 0; j < dst.size(); ++j) {
            dst[j] += static_cast<float>(src[j] * inv_batch);
          }
        }
      }
      if (!std::isfinite(loss)) throw NumericalError("non-finite loss");
      adam_step(model.params(), grads, adam, tcfg.lr_at(it));
    } catch (const NumericalError& e) {
      std::ostringstream msg;
      msg << "training diverged at iteration " << it << ": " << e.what();
      throw TrainingDiverged(msg.str(), snapshot(it));
    }
    result.losses.push_back(loss);
    if (hooks.on_iteration) hooks.on_iteration(it, loss);
    if (hooks.checkpoint_every > 0 && (it + 1) % hooks.checkpoint_every == 0 &&
        hooks.on_checkpoint) {
      hooks.on_checkpoint(snapshot(it + 1));
    }
  }
  result.checkpoint = snapshot(it);
  return result;
}

}  // namespace parf::nn
