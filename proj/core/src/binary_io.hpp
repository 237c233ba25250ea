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

// Little-endian stream helpers for the tree and index file formats.

#include <bit>
#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <type_traits>
#include <vector>

#include "condra/error.hpp"

namespace condra::detail {

static_assert(std::endian::native == std::endian::little,
              "index files are little-endian; big-endian hosts are not supported");

template <class T>
void put(std::ostream& out, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <class T>
void put_array(std::ostream& out, const std::vector<T>& values) {
  out.write(reinterpret_cast<const char*>(values.data()),
            static_cast<std::streamsize>(values.size() * sizeof(T)));
}

template <class T>
T get(std::istream& in) {
  T value{};
  if (!in.read(reinterpret_cast<char*>(&value), sizeof(T))) {
    throw Error(ErrorCode::kFormat, "unexpected end of file");
  }
  return value;
}

template <class T>
std::vector<T> get_array(std::istream& in, std::size_t count) {
  std::vector<T> values(count);
  if (count && !in.read(reinterpret_cast<char*>(values.data()),
                        static_cast<std::streamsize>(count * sizeof(T)))) {
    throw Error(ErrorCode::kFormat, "unexpected end of file");
  }
  return values;
}

inline void put_string(std::ostream& out, const std::string& s) {
  put<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline std::string get_string(std::istream& in) {
  const auto len = get<std::uint32_t>(in);
  std::string s(len, '\0');
  if (len && !in.read(s.data(), len)) throw Error(ErrorCode::kFormat, "unexpected end of file");
  return s;
}

inline void expect_magic(std::istream& in, const char (&magic)[5], const char* what) {
  char buf[4];
  if (!in.read(buf, 4) || std::string(buf, 4) != std::string(magic, 4)) {
    throw Error(ErrorCode::kFormat, std::string("bad magic for ") + what);
  }
}

}  // namespace condra::detail
