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

#include "parf/pipeline/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "parf/error.hpp"

namespace parf::pipeline {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

template <typename T>
T parse_integer(const std::string& key, const std::string& value) {
  T out{};
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc{} || ptr != value.data() + value.size()) {
    throw ConfigError("config key '" + key + "': expected an integer, got '" + value + "'");
  }
  return out;
}

}  // namespace

Config Config::load(const std::filesystem::path& path) {
  Config cfg;
  std::vector<std::filesystem::path> stack{std::filesystem::weakly_canonical(path)};
  cfg.parse_into(read_file(path), path.parent_path().empty() ? "." : path.parent_path(), stack);
  return cfg;
}

Config Config::parse(std::string_view text, const std::filesystem::path& base_dir) {
  Config cfg;
  std::vector<std::filesystem::path> stack;
  cfg.parse_into(text, base_dir, stack);
  return cfg;
}

void Config::parse_into(std::string_view text, const std::filesystem::path& base_dir,
                        std::vector<std::filesystem::path>& stack) {
  std::istringstream is{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(is, raw)) {
    ++line_no;
    const std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    if (key.empty()) throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
    if (key == "include") {
      std::filesystem::path inc = value;
      if (inc.is_relative()) inc = base_dir / inc;
      const auto canon = std::filesystem::weakly_canonical(inc);
      if (std::find(stack.begin(), stack.end(), canon) != stack.end()) {
        throw ConfigError("config include cycle at " + inc.string());
      }
      stack.push_back(canon);
      parse_into(read_file(inc), inc.parent_path(), stack);
      stack.pop_back();
      continue;
    }
    entries_[key] = Entry{value, base_dir};
  }
}

void Config::set(const std::string& key, const std::string& value) {
  if (key.empty()) throw ConfigError("override with an empty key");
  entries_[key] = Entry{value, "."};
}

const Config::Entry& Config::require(const std::string& key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) throw ConfigError("missing required config key '" + key + "'");
  return it->second;
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
  return has(key) ? entries_.at(key).value : fallback;
}

std::string Config::require_string(const std::string& key) const { return require(key).value; }

double Config::get_double(const std::string& key, double fallback) const {
  if (!has(key)) return fallback;
  const std::string& v = entries_.at(key).value;
  if (v == "inf" || v == "+inf") return std::numeric_limits<double>::infinity();
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size() || !std::isfinite(d)) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': expected a number, got '" + v + "'");
  }
}

std::int64_t Config::get_int(const std::string& key, std::int64_t fallback) const {
  return has(key) ? parse_integer<std::int64_t>(key, entries_.at(key).value) : fallback;
}

std::uint64_t Config::get_u64(const std::string& key, std::uint64_t fallback) const {
  return has(key) ? parse_integer<std::uint64_t>(key, entries_.at(key).value) : fallback;
}

std::uint64_t Config::require_u64(const std::string& key) const {
  return parse_integer<std::uint64_t>(key, require(key).value);
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const std::string& v = entries_.at(key).value;
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError("config key '" + key + "': expected a boolean, got '" + v + "'");
}

std::filesystem::path Config::get_path(const std::string& key,
                                       const std::filesystem::path& fallback) const {
  if (!has(key)) return fallback;
  const Entry& e = entries_.at(key);
  std::filesystem::path p = e.value;
  return p.is_relative() ? e.base_dir / p : p;
}

std::filesystem::path Config::require_existing_path(const std::string& key) const {
  require(key);
  const auto p = get_path(key, {});
  if (!std::filesystem::exists(p)) {
    throw ConfigError("config key '" + key + "': file not found: " + p.string());
  }
  return p;
}

void Config::check_keys(const std::vector<std::string>& known) const {
  for (const auto& [key, entry] : entries_) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw ConfigError("unknown config key '" + key + "'");
    }
  }
}

std::vector<std::string> Config::canonical_lines() const {
  std::vector<std::string> out;
  for (const auto& [key, entry] : entries_) out.push_back(key + "=" + entry.value);
  return out;
}

}  // namespace parf::pipeline
