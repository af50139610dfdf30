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
#include <filesystem>
#include <iosfwd>
#include <string>

#include "parf/nn/adam.hpp"
#include "parf/nn/model.hpp"

namespace parf::nn {

/// Everything needed to resume training or run inference.
struct Checkpoint {
  ModelConfig model;
  ParameterSet<float> params;
  AdamState<float> adam;
  std::uint64_t iteration = 0;  // completed iterations
  double lr = 0.0;
  std::string rng_state;
};

/// PAWT1 container. Adam moments are stored as extra tensors named
/// "adam.m/<param>" and "adam.v/<param>".
void write_checkpoint(std::ostream& os, const Checkpoint& ckpt);
Checkpoint read_checkpoint(std::istream& is);  // throws FormatError
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace parf::nn
