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

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "parf/forward.hpp"
#include "parf/nn/model.hpp"
#include "parf/nn/train.hpp"
#include "parf/pipeline/config.hpp"

namespace parf::pipeline {

/// Every key the commands understand; anything else is rejected.
const std::vector<std::string>& known_keys();

SimulationSetup setup_from_config(const Config& cfg);
nn::ModelConfig model_config_from(const Config& cfg);
nn::TrainConfig train_config_from(const Config& cfg);

void cmd_simulate(const Config& cfg, const std::filesystem::path& out, std::ostream& log);
void cmd_train(const Config& cfg, const std::filesystem::path& out, std::ostream& log);
void cmd_enhance(const Config& cfg, const std::filesystem::path& out, std::ostream& log);
void cmd_reconstruct(const Config& cfg, const std::filesystem::path& out, std::ostream& log);
void cmd_evaluate(const Config& cfg, const std::filesystem::path& out, std::ostream& log);
void cmd_probe(const Config& cfg, const std::filesystem::path& out, std::ostream& log);

/// Dispatches by name after validating keys; creates `out` if needed.
void run_command(const std::string& name, const Config& cfg, const std::filesystem::path& out,
                 std::ostream& log);

}  // namespace parf::pipeline
