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
#include <span>
#include <string>
#include <vector>

#include "condra/corpus.hpp"

namespace condra {

/// One Gaussian component: x = mean + transform * z with z ~ N(0, I).
/// An empty transform means identity.
struct MixtureComponent {
  std::string label;
  std::size_t count = 0;
  std::vector<double> mean;       // d entries
  std::vector<double> transform;  // d*d row-major, or empty
};

/// Samples every component in order; labels go to attribute `source`.
Corpus generate_blobs(std::span<const MixtureComponent> components, std::uint64_t seed,
                      Metric metric = Metric::kEuclidean);

/// One point per (content, style) pair:
///   content_prototype[c] + style_strength * style_offset[s] + noise * z
/// with prototypes and offsets drawn from N(0, I). Attributes `content` and
/// `style` hold "c<i>" / "s<j>" labels. Point id = c * n_style + s.
Corpus generate_content_style(std::size_t n_content, std::size_t n_style, std::size_t d,
                              double style_strength, double noise, std::uint64_t seed);

/// Benchmark corpus: `labels` Gaussian clusters (attribute `label`, values
/// "l<i>") with centers drawn from N(0, spread^2 I) and unit-variance points,
/// plus an attribute `bucket` with `buckets` uniformly random values "b<j>".
Corpus generate_clustered_labels(std::size_t n, std::size_t d, std::size_t labels,
                                 std::size_t buckets, std::uint64_t seed,
                                 double spread = 10.0);

}  // namespace condra
