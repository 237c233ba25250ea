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

#include "condra/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <set>
#include <unordered_map>

#include "condra/error.hpp"

namespace condra {

std::string_view to_string(Metric metric) {
  return metric == Metric::kAngular ? "angular" : "euclidean";
}

Metric parse_metric(std::string_view text) {
  if (text == "euclidean") return Metric::kEuclidean;
  if (text == "angular" || text == "cosine") return Metric::kAngular;
  throw Error(ErrorCode::kFormat, "unknown metric '" + std::string(text) + "'");
}

Attribute::Attribute(std::string name, const std::vector<std::string>& per_point_values)
    : name_(std::move(name)) {
  std::set<std::string_view> distinct(per_point_values.begin(), per_point_values.end());
  values_.assign(distinct.begin(), distinct.end());
  std::unordered_map<std::string_view, std::uint32_t> lookup;
  lookup.reserve(values_.size());
  for (std::uint32_t i = 0; i < values_.size(); ++i) lookup.emplace(values_[i], i);
  codes_.reserve(per_point_values.size());
  for (const auto& v : per_point_values) codes_.push_back(lookup.at(v));
}

std::optional<std::uint32_t> Attribute::find(std::string_view value) const {
  auto it = std::lower_bound(values_.begin(), values_.end(), value);
  if (it == values_.end() || *it != value) return std::nullopt;
  return static_cast<std::uint32_t>(it - values_.begin());
}

std::vector<std::size_t> Attribute::counts() const {
  std::vector<std::size_t> out(values_.size(), 0);
  for (auto c : codes_) ++out[c];
  return out;
}

bool is_passthrough_attribute(std::string_view name) { return name == "image_url"; }

bool is_valid_identifier(std::string_view name) {
  if (name.empty()) return false;
  auto alpha = [](char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; };
  if (!alpha(name[0])) return false;
  return std::all_of(name.begin() + 1, name.end(),
                     [&](char c) { return alpha(c) || (c >= '0' && c <= '9'); });
}

namespace {

std::uint64_t fnv1a(const void* bytes, std::size_t len, std::uint64_t h) {
  const auto* p = static_cast<const unsigned char*>(bytes);
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace

Corpus::Corpus(std::vector<float> vectors, std::size_t n, std::size_t d, Metric metric,
               std::vector<Attribute> attributes)
    : n_(n), d_(d), metric_(metric), data_(std::move(vectors)),
      attributes_(std::move(attributes)) {
  if (n_ == 0 || d_ == 0) throw Error(ErrorCode::kEmpty, "corpus needs n >= 1 and d >= 1");
  if (data_.size() != n_ * d_) {
    throw Error(ErrorCode::kConsistency, "vector payload size does not equal n*d");
  }
  for (std::size_t i = 0; i < data_.size(); ++i) {
    if (!std::isfinite(data_[i])) {
      throw Error(ErrorCode::kData, "non-finite coordinate at point " +
                                        std::to_string(i / d_) + ", dim " + std::to_string(i % d_));
    }
  }
  std::set<std::string_view> names;
  for (const auto& a : attributes_) {
    if (!is_valid_identifier(a.name()) || a.name() == "id") {
      throw Error(ErrorCode::kFormat, "invalid attribute name '" + a.name() + "'");
    }
    if (!names.insert(a.name()).second) {
      throw Error(ErrorCode::kFormat, "duplicate attribute '" + a.name() + "'");
    }
    if (a.size() != n_) {
      throw Error(ErrorCode::kConsistency, "attribute '" + a.name() + "' has " +
                                               std::to_string(a.size()) + " rows, expected " +
                                               std::to_string(n_));
    }
  }
  if (metric_ == Metric::kAngular) {
    for (std::size_t i = 0; i < n_; ++i) {
      float* r = data_.data() + i * d_;
      double sq = 0.0;
      for (std::size_t j = 0; j < d_; ++j) sq += double(r[j]) * double(r[j]);
      if (sq == 0.0) {
        throw Error(ErrorCode::kData, "zero vector at point " + std::to_string(i) +
                                          " cannot be normalized");
      }
      const double norm = std::sqrt(sq);
      // Rows that are already unit length are left untouched so that
      // save/load round trips stay bit-exact.
      if (std::abs(norm - 1.0) <= 1e-6) continue;
      for (std::size_t j = 0; j < d_; ++j) r[j] = static_cast<float>(r[j] / norm);
    }
  }
  std::uint64_t h = 1469598103934665603ull;
  const std::uint64_t header[3] = {n_, d_, static_cast<std::uint64_t>(metric_)};
  h = fnv1a(header, sizeof(header), h);
  fingerprint_ = fnv1a(data_.data(), data_.size() * sizeof(float), h);
}

const Attribute* Corpus::find_attribute(std::string_view name) const noexcept {
  for (const auto& a : attributes_) {
    if (a.name() == name) return &a;
  }
  return nullptr;
}

const Attribute& Corpus::attribute(std::string_view name) const {
  if (const auto* a = find_attribute(name)) return *a;
  throw Error(ErrorCode::kBind, "unknown attribute '" + std::string(name) + "'");
}

std::vector<std::string> Corpus::facet_names() const {
  std::vector<std::string> out;
  for (const auto& a : attributes_) {
    if (!is_passthrough_attribute(a.name())) out.push_back(a.name());
  }
  return out;
}

double squared_l2(std::span<const float> a, std::span<const float> b) noexcept {
  const std::size_t d = a.size();
  double s0 = 0, s1 = 0, s2 = 0, s3 = 0;
  std::size_t j = 0;
  for (; j + 4 <= d; j += 4) {
    const double t0 = double(a[j]) - double(b[j]);
    const double t1 = double(a[j + 1]) - double(b[j + 1]);
    const double t2 = double(a[j + 2]) - double(b[j + 2]);
    const double t3 = double(a[j + 3]) - double(b[j + 3]);
    s0 += t0 * t0;
    s1 += t1 * t1;
    s2 += t2 * t2;
    s3 += t3 * t3;
  }
  for (; j < d; ++j) {
    const double t = double(a[j]) - double(b[j]);
    s0 += t * t;
  }
  return (s0 + s1) + (s2 + s3);
}

double distance(Metric, std::span<const float> a, std::span<const float> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::kDimension, "distance between vectors of dimension " +
                                           std::to_string(a.size()) + " and " +
                                           std::to_string(b.size()));
  }
  return std::sqrt(squared_l2(a, b));
}

std::vector<float> prepare_query(const Corpus& corpus, std::span<const float> q) {
  if (q.size() != corpus.dim()) {
    throw Error(ErrorCode::kDimension, "query has dimension " + std::to_string(q.size()) +
                                           ", corpus has " + std::to_string(corpus.dim()));
  }
  std::vector<float> out(q.begin(), q.end());
  for (float v : out) {
    if (!std::isfinite(v)) throw Error(ErrorCode::kData, "non-finite query coordinate");
  }
  if (corpus.metric() == Metric::kAngular) {
    double sq = 0;
    for (float v : out) sq += double(v) * v;
    if (sq == 0) throw Error(ErrorCode::kData, "zero query vector under angular metric");
    const double norm = std::sqrt(sq);
    if (std::abs(norm - 1.0) > 1e-6) {
      for (float& v : out) v = static_cast<float>(v / norm);
    }
  }
  return out;
}

Corpus select_rows(const Corpus& corpus, std::span<const std::uint32_t> ids) {
  const std::size_t d = corpus.dim();
  std::vector<float> data;
  data.reserve(ids.size() * d);
  for (auto id : ids) {
    auto r = corpus.row(id);
    data.insert(data.end(), r.begin(), r.end());
  }
  std::vector<Attribute> attrs;
  for (const auto& a : corpus.attributes()) {
    std::vector<std::string> col;
    col.reserve(ids.size());
    for (auto id : ids) col.push_back(a.value_of(id));
    attrs.emplace_back(a.name(), col);
  }
  return Corpus(std::move(data), ids.size(), d, corpus.metric(), std::move(attrs));
}

Corpus concat(const Corpus& a, const Corpus& b) {
  if (a.dim() != b.dim()) throw Error(ErrorCode::kDimension, "concat of different dimensions");
  if (a.metric() != b.metric()) throw Error(ErrorCode::kMismatch, "concat of different metrics");
  if (a.attributes().size() != b.attributes().size()) {
    throw Error(ErrorCode::kConsistency, "concat of corpora with different attributes");
  }
  std::vector<float> data(a.data().begin(), a.data().end());
  data.insert(data.end(), b.data().begin(), b.data().end());
  std::vector<Attribute> attrs;
  for (std::size_t i = 0; i < a.attributes().size(); ++i) {
    const auto& left = a.attributes()[i];
    const auto& right = b.attribute(left.name());
    std::vector<std::string> col;
    col.reserve(a.size() + b.size());
    for (std::size_t p = 0; p < a.size(); ++p) col.push_back(left.value_of(p));
    for (std::size_t p = 0; p < b.size(); ++p) col.push_back(right.value_of(p));
    attrs.emplace_back(left.name(), col);
  }
  return Corpus(std::move(data), a.size() + b.size(), a.dim(), a.metric(), std::move(attrs));
}

}  // namespace condra
