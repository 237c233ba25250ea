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

#include "condra/bitset.hpp"

namespace condra::detail {

std::vector<std::uint8_t> pack_bits(std::span<const std::uint64_t> words,
                                    std::size_t bits) {
  std::vector<std::uint8_t> out((bits + 7) / 8);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = static_cast<std::uint8_t>(words[i / 8] >> (8 * (i % 8)));
  }
  return out;
}

std::vector<std::uint64_t> unpack_bits(std::span<const std::uint8_t> bytes,
                                       std::size_t bits) {
  if (bytes.size() != (bits + 7) / 8) {
    throw Error(ErrorCode::kFormat, "bit array byte count does not match length");
  }
  std::vector<std::uint64_t> words((bits + 63) / 64, 0);
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    words[i / 8] |= std::uint64_t{bytes[i]} << (8 * (i % 8));
  }
  return words;
}

}  // namespace condra::detail
