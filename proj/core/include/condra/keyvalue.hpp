// Copyright 2026 The Condra Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace condra {

/// One `key = value` section of a TOML-style file. Values are kept as text;
/// quoted strings are unescaped.
class KeyValueTable {
 public:
  void set(std::string key, std::string value) { values_[std::move(key)] = std::move(value); }
  bool contains(std::string_view key) const { return values_.find(std::string(key)) != values_.end(); }
  const std::map<std::string, std::string>& entries() const noexcept { return values_; }

  std::optional<std::string> get(std::string_view key) const;
  std::string get_string(std::string_view key, std::string fallback) const;
  std::string require_string(std::string_view key) const;
  std::int64_t get_int(std::string_view key, std::int64_t fallback) const;
  double get_double(std::string_view key, double fallback) const;

 private:
  std::map<std::string, std::string> values_;
};

/// The subset of TOML used by corpus.toml and serve.toml: top-level keys,
/// `[table]` headers and `[[array]]` headers; strings, numbers, booleans.
struct KeyValueDocument {
  KeyValueTable root;
  std::map<std::string, KeyValueTable> tables;
  std::map<std::string, std::vector<KeyValueTable>> arrays;
};

KeyValueDocument parse_key_value(std::string_view text);
KeyValueDocument read_key_value_file(const std::filesystem::path& path);
std::string quote_value(std::string_view raw);

}  // namespace condra
