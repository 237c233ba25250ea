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

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace condra {

enum class Metric : std::uint8_t {
  kEuclidean = 0,
  // Euclidean distance between unit-normalized vectors. Orders neighbors the
  // same way cosine distance does and keeps the triangle inequality.
  kAngular = 1,
};

std::string_view to_string(Metric metric);
Metric parse_metric(std::string_view text);

/// A categorical metadata column. Distinct values are kept sorted so value
/// codes are stable across builds of the same data.
class Attribute {
 public:
  Attribute(std::string name, const std::vector<std::string>& per_point_values);

  const std::string& name() const noexcept { return name_; }
  std::size_t size() const noexcept { return codes_.size(); }
  std::size_t cardinality() const noexcept { return values_.size(); }
  std::span<const std::string> values() const noexcept { return values_; }
  std::span<const std::uint32_t> codes() const noexcept { return codes_; }
  std::uint32_t code(std::size_t point) const { return codes_[point]; }
  const std::string& value_of(std::size_t point) const { return values_[codes_[point]]; }
  std::optional<std::uint32_t> find(std::string_view value) const;
  // Points per value code.
  std::vector<std::size_t> counts() const;

  friend bool operator==(const Attribute&, const Attribute&) = default;

 private:
  std::string name_;
  std::vector<std::string> values_;
  std::vector<std::uint32_t> codes_;
};

/// Columns that are carried through to clients but are not conditioning
/// facets (currently just `image_url`).
bool is_passthrough_attribute(std::string_view name);
bool is_valid_identifier(std::string_view name);

/// Immutable n x d matrix of 32-bit features plus per-point metadata.
class Corpus {
 public:
  /// Validates the invariants and, for the angular metric, normalizes rows
  /// to unit length. Throws condra::Error.
  Corpus(std::vector<float> vectors, std::size_t n, std::size_t d, Metric metric,
         std::vector<Attribute> attributes = {});

  std::size_t size() const noexcept { return n_; }
  std::size_t dim() const noexcept { return d_; }
  Metric metric() const noexcept { return metric_; }
  std::span<const float> data() const noexcept { return data_; }
  std::span<const float> row(std::size_t id) const noexcept {
    return {data_.data() + id * d_, d_};
  }

  const std::vector<Attribute>& attributes() const noexcept { return attributes_; }
  const Attribute* find_attribute(std::string_view name) const noexcept;
  /// Throws ErrorCode::kBind when the attribute does not exist.
  const Attribute& attribute(std::string_view name) const;
  /// Names of attributes usable as conditions (all but passthrough columns).
  std::vector<std::string> facet_names() const;

  /// Identity token for binding trees and indexes to this corpus.
  std::uint64_t fingerprint() const noexcept { return fingerprint_; }

  friend bool operator==(const Corpus& a, const Corpus& b) {
    return a.n_ == b.n_ && a.d_ == b.d_ && a.metric_ == b.metric_ &&
           a.data_ == b.data_ && a.attributes_ == b.attributes_;
  }

 private:
  std::size_t n_;
  std::size_t d_;
  Metric metric_;
  std::vector<float> data_;
  std::vector<Attribute> attributes_;
  std::uint64_t fingerprint_ = 0;
};

/// Squared L2 distance accumulated in double with a fixed summation order,
/// so every search path produces bit-identical values for the same pair.
double squared_l2(std::span<const float> a, std::span<const float> b) noexcept;

/// Distance under `metric`. Angular inputs must already be unit-normalized.
double distance(Metric metric, std::span<const float> a, std::span<const float> b);

/// Checks the query dimension and applies the corpus normalization.
std::vector<float> prepare_query(const Corpus& corpus, std::span<const float> q);

/// Rows `ids` of `corpus` (with their metadata) as a new corpus.
Corpus select_rows(const Corpus& corpus, std::span<const std::uint32_t> ids);
/// Stacks two corpora with identical dimension, metric and attribute names.
Corpus concat(const Corpus& a, const Corpus& b);

Corpus load_corpus(const std::filesystem::path& dir);
void save_corpus(const Corpus& corpus, const std::filesystem::path& dir);

}  // namespace condra
