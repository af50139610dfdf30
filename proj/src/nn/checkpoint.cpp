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

#include "parf/nn/checkpoint.hpp"

#include <fstream>
#include <limits>

#include "parf/binary_io.hpp"
#include "parf/error.hpp"

namespace parf::nn {

namespace {

constexpr std::string_view kMagic = "PAWT1";
constexpr std::string_view kMomentPrefix1 = "adam.m/";
constexpr std::string_view kMomentPrefix2 = "adam.v/";

void write_tensor(std::ostream& os, const std::string& name, const NamedTensor<float>& t) {
  if (name.size() > std::numeric_limits<std::uint16_t>::max()) {
    throw std::invalid_argument("tensor name too long: " + name);
  }
  io::write_le<std::uint16_t>(os, static_cast<std::uint16_t>(name.size()));
  os.write(name.data(), static_cast<std::streamsize>(name.size()));
  io::write_le<std::uint32_t>(os, static_cast<std::uint32_t>(t.shape.size()));
  for (std::size_t d : t.shape) io::write_le<std::uint32_t>(os, static_cast<std::uint32_t>(d));
  for (float v : t.values) io::write_le<float>(os, v);
}

std::string read_string(std::istream& is, std::size_t n) {
  std::string s(n, '\0');
  if (n > 0 && !is.read(s.data(), static_cast<std::streamsize>(n))) {
    throw FormatError("unexpected end of file");
  }
  return s;
}

void write_string32(std::ostream& os, const std::string& s) {
  io::write_le<std::uint32_t>(os, static_cast<std::uint32_t>(s.size()));
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string read_string32(std::istream& is) {
  const auto n = io::read_le<std::uint32_t>(is);
  if (n > (1u << 24)) throw FormatError("implausible string length in checkpoint");
  return read_string(is, n);
}

}  // namespace

void write_checkpoint(std::ostream& os, const Checkpoint& ckpt) {
  const bool with_moments = ckpt.adam.m.size() == ckpt.params.size() && ckpt.params.size() > 0;
  const std::size_t count = ckpt.params.size() * (with_moments ? 3 : 1);
  io::write_magic(os, kMagic);
  io::write_le<std::uint32_t>(os, static_cast<std::uint32_t>(count));
  for (const auto& t : ckpt.params.tensors()) write_tensor(os, t.name, t);
  if (with_moments) {
    for (const auto& t : ckpt.adam.m.tensors()) write_tensor(os, std::string(kMomentPrefix1) + t.name, t);
    for (const auto& t : ckpt.adam.v.tensors()) write_tensor(os, std::string(kMomentPrefix2) + t.name, t);
  }
  io::write_le<std::uint64_t>(os, ckpt.iteration);
  io::write_le<double>(os, ckpt.lr);
  io::write_le<std::uint64_t>(os, ckpt.model.digest());
  io::write_le<std::uint64_t>(os, ckpt.adam.step);
  write_string32(os, ckpt.model.canonical());
  write_string32(os, ckpt.rng_state);
  if (!os) throw std::runtime_error("checkpoint write failed");
}

Checkpoint read_checkpoint(std::istream& is) {
  io::expect_magic(is, kMagic);
  const auto count = io::read_le<std::uint32_t>(is);
  std::vector<NamedTensor<float>> tensors;
  tensors.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    NamedTensor<float> t;
    t.name = read_string(is, io::read_le<std::uint16_t>(is));
    const auto ndim = io::read_le<std::uint32_t>(is);
    if (ndim > 8) throw FormatError("tensor '" + t.name + "' has too many dimensions");
    std::size_t n = 1;
    for (std::uint32_t d = 0; d < ndim; ++d) {
      t.shape.push_back(io::read_le<std::uint32_t>(is));
      n *= t.shape.back();
    }
    if (n > (std::size_t{1} << 30)) throw FormatError("tensor '" + t.name + "' is implausibly large");
    t.values.resize(n);
    for (float& v : t.values) v = io::read_le<float>(is);
    tensors.push_back(std::move(t));
  }

  Checkpoint ckpt;
  ckpt.iteration = io::read_le<std::uint64_t>(is);
  ckpt.lr = io::read_le<double>(is);
  const auto digest = io::read_le<std::uint64_t>(is);
  ckpt.adam.step = io::read_le<std::uint64_t>(is);
  const std::string canonical = read_string32(is);
  ckpt.rng_state = read_string32(is);
  try {
    ckpt.model = ModelConfig::parse_canonical(canonical);
  } catch (const ConfigError& e) {
    throw FormatError(std::string("checkpoint model config: ") + e.what());
  }
  if (ckpt.model.digest() != digest) throw FormatError("checkpoint config digest mismatch");

  const GraphSpec graph = build_graph(ckpt.model);
  ckpt.params = graph.make_parameters<float>();
  ckpt.adam.m = ckpt.params.zeros_like();
  ckpt.adam.v = ckpt.params.zeros_like();
  std::size_t matched_params = 0, matched_moments = 0;
  for (auto& t : tensors) {
    ParameterSet<float>* target = &ckpt.params;
    std::string_view name = t.name;
    if (name.starts_with(kMomentPrefix1)) {
      target = &ckpt.adam.m;
      name.remove_prefix(kMomentPrefix1.size());
    } else if (name.starts_with(kMomentPrefix2)) {
      target = &ckpt.adam.v;
      name.remove_prefix(kMomentPrefix2.size());
    }
    NamedTensor<float>* slot = nullptr;
    for (auto& p : target->tensors()) {
      if (p.name == name) slot = &p;
    }
    if (slot == nullptr) throw FormatError("checkpoint has unknown tensor '" + t.name + "'");
    if (slot->shape != t.shape) throw FormatError("checkpoint tensor '" + t.name + "' has wrong shape");
    slot->values = std::move(t.values);
    (target == &ckpt.params ? matched_params : matched_moments) += 1;
  }
  if (matched_params != ckpt.params.size()) throw FormatError("checkpoint is missing parameters");
  if (matched_moments != 0 && matched_moments != 2 * ckpt.params.size()) {
    throw FormatError("checkpoint has partial optimizer state");
  }
  return ckpt;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write_checkpoint(os, ckpt);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  return read_checkpoint(is);
}

}  // namespace parf::nn
