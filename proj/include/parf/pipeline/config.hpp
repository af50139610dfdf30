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
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace parf::pipeline {

/// Flat key = value configuration. Lines starting with '#' are comments;
/// "include = other.cfg" splices another file (relative to the including file).
/// Later assignments override earlier ones. Relative path values resolve
/// against the directory of the file that set them.
class Config {
 public:
  Config() = default;

  static Config load(const std::filesystem::path& path);
  static Config parse(std::string_view text, const std::filesystem::path& base_dir = ".");

  /// Override (e.g. from the command line); relative paths resolve against the working directory.
  void set(const std::string& key, const std::string& value);
  bool has(const std::string& key) const { return entries_.count(key) != 0; }

  std::string get_string(const std::string& key, const std::string& fallback) const;
  std::string require_string(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
  std::uint64_t require_u64(const std::string& key) const;
  bool get_bool(const std::string& key, bool fallback) const;
  /// Resolved path; throws ConfigError if the key is missing or the file does not exist.
  std::filesystem::path require_existing_path(const std::string& key) const;
  std::filesystem::path get_path(const std::string& key, const std::filesystem::path& fallback) const;

  /// Throws ConfigError naming the first key not in `known`.
  void check_keys(const std::vector<std::string>& known) const;

  /// Sorted "key=value" lines (raw values).
  std::vector<std::string> canonical_lines() const;

 private:
  struct Entry {
    std::string value;
    std::filesystem::path base_dir;
  };
  void parse_into(std::string_view text, const std::filesystem::path& base_dir,
                  std::vector<std::filesystem::path>& stack);
  const Entry& require(const std::string& key) const;

  std::map<std::string, Entry> entries_;
};

}  // namespace parf::pipeline
