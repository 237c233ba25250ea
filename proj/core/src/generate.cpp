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

#include "condra/generate.hpp"

#include <random>

#include "condra/error.hpp"

namespace condra {

Corpus generate_blobs(std::span<const MixtureComponent> components, std::uint64_t seed,
                      Metric metric) {
  if (components.empty()) throw Error(ErrorCode::kInvalidArgument, "no mixture components");
  const std::size_t d = components.front().mean.size();
  if (d == 0) throw Error(ErrorCode::kInvalidArgument, "component mean is empty");
  std::size_t n = 0;
  for (const auto& c : components) {
    if (c.count == 0) throw Error(ErrorCode::kInvalidArgument, "component '" + c.label + "' has count 0");
    if (c.mean.size() != d) throw Error(ErrorCode::kDimension, "component means differ in dimension");
    if (!c.transform.empty() && c.transform.size() != d * d) {
      throw Error(ErrorCode::kDimension, "component transform must be d x d");
    }
    n += c.count;
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<float> data;
  data.reserve(n * d);
  std::vector<std::string> labels;
  labels.reserve(n);
  std::vector<double> z(d);
  for (const auto& c : components) {
    for (std::size_t i = 0; i < c.count; ++i) {
      for (auto& v : z) v = normal(rng);
      for (std::size_t r = 0; r < d; ++r) {
        double v = c.mean[r];
        if (c.transform.empty()) {
          v += z[r];
        } else {
          for (std::size_t k = 0; k < d; ++k) v += c.transform[r * d + k] * z[k];
        }
        data.push_back(static_cast<float>(v));
      }
      labels.push_back(c.label);
    }
  }
  std::vector<Attribute> attrs;
  attrs.emplace_back("source", labels);
  return Corpus(std::move(data), n, d, metric, std::move(attrs));
}

Corpus generate_content_style(std::size_t n_content, std::size_t n_style, std::size_t d,
                              double style_strength, double noise, std::uint64_t seed) {
  if (n_content < 2 || n_style < 2) {
    throw Error(ErrorCode::kInvalidArgument, "need at least 2 contents and 2 styles");
  }
  if (d < 2) throw Error(ErrorCode::kInvalidArgument, "content/style corpus needs d >= 2");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> prototypes(n_content * d), offsets(n_style * d);
  for (auto& v : prototypes) v = normal(rng);
  for (auto& v : offsets) v = normal(rng);

  const std::size_t n = n_content * n_style;
  std::vector<float> data;
  data.reserve(n * d);
  std::vector<std::string> content, style;
  content.reserve(n);
  style.reserve(n);
  for (std::size_t c = 0; c < n_content; ++c) {
    for (std::size_t s = 0; s < n_style; ++s) {
      for (std::size_t j = 0; j < d; ++j) {
        double v = prototypes[c * d + j] + style_strength * offsets[s * d + j];
        if (noise != 0.0) v += noise * normal(rng);
        data.push_back(static_cast<float>(v));
      }
      content.push_back("c" + std::to_string(c));
      style.push_back("s" + std::to_string(s));
    }
  }
  std::vector<Attribute> attrs;
  attrs.emplace_back("content", content);
  attrs.emplace_back("style", style);
  return Corpus(std::move(data), n, d, Metric::kEuclidean, std::move(attrs));
}

Corpus generate_clustered_labels(std::size_t n, std::size_t d, std::size_t labels,
                                 std::size_t buckets, std::uint64_t seed, double spread) {
  if (n == 0 || d == 0 || labels == 0 || buckets == 0) {
    throw Error(ErrorCode::kInvalidArgument, "clustered corpus needs positive sizes");
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> pick_bucket(0, buckets - 1);
  std::vector<double> centers(labels * d);
  for (auto& v : centers) v = spread * normal(rng);
  std::vector<float> data;
  data.reserve(n * d);
  std::vector<std::string> label_col, bucket_col;
  label_col.reserve(n);
  bucket_col.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t l = i % labels;
    for (std::size_t j = 0; j < d; ++j) {
      data.push_back(static_cast<float>(centers[l * d + j] + normal(rng)));
    }
    label_col.push_back("l" + std::to_string(l));
    bucket_col.push_back("b" + std::to_string(pick_bucket(rng)));
  }
  std::vector<Attribute> attrs;
  attrs.emplace_back("label", label_col);
  attrs.emplace_back("bucket", bucket_col);
  return Corpus(std::move(data), n, d, Metric::kEuclidean, std::move(attrs));
}

}  // namespace condra
