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

#include <bit>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "condra/error.hpp"

namespace condra {

namespace detail {

// Packs/unpacks words to a little-endian byte stream of ceil(bits/8) bytes.
std::vector<std::uint8_t> pack_bits(std::span<const std::uint64_t> words,
                                    std::size_t bits);
std::vector<std::uint64_t> unpack_bits(std::span<const std::uint8_t> bytes,
                                       std::size_t bits);

}  // namespace detail

/// Fixed-length dense bit array. The tag keeps point-id sets and node-id sets
/// from being mixed up at compile time.
template <class Tag>
class BitArray {
 public:
  BitArray() = default;
  explicit BitArray(std::size_t size, bool value = false)
      : size_(size), words_((size + 63) / 64, value ? ~std::uint64_t{0} : 0) {
    trim();
  }

  static BitArray from_words(std::vector<std::uint64_t> words,
                             std::size_t size) {
    if (words.size() != (size + 63) / 64) {
      throw Error(ErrorCode::kFormat, "bit array word count does not match length");
    }
    BitArray out;
    out.size_ = size;
    out.words_ = std::move(words);
    out.trim();
    return out;
  }

  std::size_t size() const noexcept { return size_; }
  std::span<const std::uint64_t> words() const noexcept { return words_; }

  bool test(std::size_t i) const noexcept {
    return (words_[i >> 6] >> (i & 63)) & 1u;
  }
  void set(std::size_t i) noexcept { words_[i >> 6] |= std::uint64_t{1} << (i & 63); }
  void reset(std::size_t i) noexcept {
    words_[i >> 6] &= ~(std::uint64_t{1} << (i & 63));
  }
  bool operator[](std::size_t i) const noexcept { return test(i); }

  std::size_t count() const noexcept {
    std::size_t c = 0;
    for (auto w : words_) c += static_cast<std::size_t>(std::popcount(w));
    return c;
  }
  bool none() const noexcept {
    for (auto w : words_) {
      if (w) return false;
    }
    return true;
  }

  BitArray& operator|=(const BitArray& other) {
    check_same(other);
    for (std::size_t i = 0; i < words_.size(); ++i) words_[i] |= other.words_[i];
    return *this;
  }
  BitArray& operator&=(const BitArray& other) {
    check_same(other);
    for (std::size_t i = 0; i < words_.size(); ++i) words_[i] &= other.words_[i];
    return *this;
  }
  friend BitArray operator|(BitArray a, const BitArray& b) { return a |= b; }
  friend BitArray operator&(BitArray a, const BitArray& b) { return a &= b; }

  BitArray complement() const {
    BitArray out = *this;
    for (auto& w : out.words_) w = ~w;
    out.trim();
    return out;
  }

  bool is_subset_of(const BitArray& other) const {
    check_same(other);
    for (std::size_t i = 0; i < words_.size(); ++i) {
      if (words_[i] & ~other.words_[i]) return false;
    }
    return true;
  }

  // Calls fn(index) for every set bit in ascending order.
  template <class Fn>
  void for_each(Fn&& fn) const {
    for (std::size_t w = 0; w < words_.size(); ++w) {
      std::uint64_t bits = words_[w];
      while (bits) {
        const int tz = std::countr_zero(bits);
        fn(w * 64 + static_cast<std::size_t>(tz));
        bits &= bits - 1;
      }
    }
  }

  std::vector<std::uint32_t> to_ids() const {
    std::vector<std::uint32_t> ids;
    ids.reserve(count());
    for_each([&](std::size_t i) { ids.push_back(static_cast<std::uint32_t>(i)); });
    return ids;
  }

  std::vector<std::uint8_t> to_bytes() const { return detail::pack_bits(words_, size_); }
  static BitArray from_bytes(std::span<const std::uint8_t> bytes, std::size_t size) {
    return from_words(detail::unpack_bits(bytes, size), size);
  }

  friend bool operator==(const BitArray&, const BitArray&) = default;

 private:
  void trim() noexcept {
    if (size_ % 64 != 0 && !words_.empty()) {
      words_.back() &= (std::uint64_t{1} << (size_ % 64)) - 1;
    }
  }
  void check_same(const BitArray& other) const {
    if (other.size_ != size_) {
      throw Error(ErrorCode::kMismatch, "set algebra across arrays of different length");
    }
  }

  std::size_t size_ = 0;
  std::vector<std::uint64_t> words_;
};

struct PointTag {};
struct NodeTag {};

/// Set of point ids of one corpus.
using IdSet = BitArray<PointTag>;
/// Set of node ids of one tree.
using NodeSet = BitArray<NodeTag>;

}  // namespace condra
