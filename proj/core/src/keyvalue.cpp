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

#include "condra/keyvalue.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "condra/error.hpp"

namespace condra {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

[[noreturn]] void fail(std::size_t line, const std::string& what) {
  throw Error(ErrorCode::kFormat, "line " + std::to_string(line) + ": " + what);
}

// Parses the value part of a line; drops trailing comments.
std::string parse_value(std::string_view v, std::size_t line) {
  v = trim(v);
  if (v.empty()) fail(line, "missing value");
  if (v.front() == '"') {
    std::string out;
    std::size_t i = 1;
    for (; i < v.size() && v[i] != '"'; ++i) {
      if (v[i] == '\\' && i + 1 < v.size()) {
        const char e = v[++i];
        switch (e) {
          case 'n': out.push_back('\n'); break;
          case 't': out.push_back('\t'); break;
          case '"': out.push_back('"'); break;
          case '\\': out.push_back('\\'); break;
          default: fail(line, std::string("unsupported escape \\") + e);
        }
      } else {
        out.push_back(v[i]);
      }
    }
    if (i >= v.size()) fail(line, "unterminated string");
    auto rest = trim(v.substr(i + 1));
    if (!rest.empty() && rest.front() != '#') fail(line, "trailing characters after string");
    return out;
  }
  if (auto hash = v.find('#'); hash != std::string_view::npos) v = trim(v.substr(0, hash));
  return std::string(v);
}

}  // namespace

std::optional<std::string> KeyValueTable::get(std::string_view key) const {
  auto it = values_.find(std::string(key));
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

std::string KeyValueTable::get_string(std::string_view key, std::string fallback) const {
  auto v = get(key);
  return v ? *v : std::move(fallback);
}

std::string KeyValueTable::require_string(std::string_view key) const {
  auto v = get(key);
  if (!v) throw Error(ErrorCode::kFormat, "missing key '" + std::string(key) + "'");
  return *v;
}

std::int64_t KeyValueTable::get_int(std::string_view key, std::int64_t fallback) const {
  auto v = get(key);
  if (!v) return fallback;
  std::int64_t out = 0;
  auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
  if (ec != std::errc() || ptr != v->data() + v->size()) {
    throw Error(ErrorCode::kFormat, "key '" + std::string(key) + "' is not an integer");
  }
  return out;
}

double KeyValueTable::get_double(std::string_view key, double fallback) const {
  auto v = get(key);
  if (!v) return fallback;
  try {
    std::size_t used = 0;
    double out = std::stod(*v, &used);
    if (used != v->size()) throw std::invalid_argument("trailing");
    return out;
  } catch (const std::exception&) {
    throw Error(ErrorCode::kFormat, "key '" + std::string(key) + "' is not a number");
  }
}

KeyValueDocument parse_key_value(std::string_view text) {
  KeyValueDocument doc;
  KeyValueTable* current = &doc.root;
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    auto nl = text.find('\n');
    std::string_view line = trim(text.substr(0, nl));
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (line.empty() || line.front() == '#') continue;
    if (line.starts_with("[[")) {
      auto end = line.find("]]");
      if (end == std::string_view::npos) fail(line_no, "unterminated [[array]] header");
      auto& arr = doc.arrays[std::string(trim(line.substr(2, end - 2)))];
      arr.emplace_back();
      current = &arr.back();
      continue;
    }
    if (line.front() == '[') {
      auto end = line.find(']');
      if (end == std::string_view::npos) fail(line_no, "unterminated [table] header");
      current = &doc.tables[std::string(trim(line.substr(1, end - 1)))];
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string_view::npos) fail(line_no, "expected key = value");
    auto key = trim(line.substr(0, eq));
    if (key.empty()) fail(line_no, "empty key");
    current->set(std::string(key), parse_value(line.substr(eq + 1), line_no));
  }
  return doc;
}

KeyValueDocument read_key_value_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_key_value(ss.str());
}

std::string quote_value(std::string_view raw) {
  std::string out = "\"";
  for (char c : raw) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default: out.push_back(c);
    }
  }
  out.push_back('"');
  return out;
}

}  // namespace condra
