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
#include <functional>
#include <vector>

#include "parf/error.hpp"
#include "parf/filters.hpp"
#include "parf/forward.hpp"
#include "parf/nn/checkpoint.hpp"
#include "parf/nn/model.hpp"

namespace parf::nn {

struct TrainConfig {
  std::uint64_t iterations_phase1 = 100000;
  double lr1 = 5e-6;
  std::uint64_t iterations_phase2 = 200000;
  double lr2 = 1e-6;
  std::size_t spheres_per_iteration = 4;
  std::size_t batch_size = 1;
  std::uint64_t seed = 0;

  void validate() const;  // throws ConfigError
  std::uint64_t total_iterations() const { return iterations_phase1 + iterations_phase2; }
  double lr_at(std::uint64_t iteration) const;
};

/// Network-ready pair: normalized, interpolated input and the target scaled by the same record.
struct TrainingSample {
  ParfFrame input;
  ParfFrame target;
  NormalizationRecord record;
};

/// Normalizes the degraded physical frame, interpolates to the interleaved axis, and
/// applies the input's record to the ideal target.
TrainingSample prepare_sample(const TrainingPair& pair, NormalizationScheme scheme);

/// Seed of pair `batch_index` at `iteration`.
std::uint64_t pair_seed(std::uint64_t seed, std::uint64_t iteration, std::size_t batch_index);

struct TrainHooks {
  std::function<void(std::uint64_t iteration, double loss)> on_iteration;
  std::function<void(const Checkpoint&)> on_checkpoint;
  std::uint64_t checkpoint_every = 0;  // 0 disables periodic checkpoints
};

struct TrainResult {
  Checkpoint checkpoint;
  std::vector<double> losses;  // one entry per iteration run in this call
};

/// Raised when the loss or a gradient turns non-finite; carries the state
/// from before the failing iteration.
class TrainingDiverged : public NumericalError {
 public:
  TrainingDiverged(const std::string& what, Checkpoint ckpt)
      : NumericalError(what), checkpoint_(std::move(ckpt)) {}
  const Checkpoint& checkpoint() const { return checkpoint_; }

 private:
  Checkpoint checkpoint_;
};

/// Adam on freshly simulated pairs with the two-phase learning-rate schedule.
/// With `resume`, continues from its iteration, parameters and optimizer state.
TrainResult train(const ModelConfig& model_cfg, const TrainConfig& tcfg,
                  const SimulationSetup& setup, const TrainHooks& hooks = {},
                  const Checkpoint* resume = nullptr);

}  // namespace parf::nn
