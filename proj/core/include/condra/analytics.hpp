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
#include <string_view>
#include <utility>
#include <vector>

#include "condra/bitset.hpp"
#include "condra/corpus.hpp"
#include "condra/tree.hpp"

namespace condra {

/// Relative conditioner density of a node:
///   (|node ∩ S| / |node|) * (|X| / |S|)
/// 1 means the node mirrors the corpus-wide share of S. Throws kEmpty when
/// S is empty.
double rcd(const Tree& tree, const IdSet& members, std::size_t node);

/// Two-sided exact binomial test: sum of P(X = i) over all i with
/// P(X = i) <= P(X = successes), X ~ Binomial(trials, p).
double binomial_two_sided_p(std::size_t successes, std::size_t trials, double p);

struct NodeRcd {
  std::size_t node = 0;
  std::size_t depth = 0;
  std::size_t count = 0;    // |n|
  std::size_t members = 0;  // |n ∩ S|
  double rcd = 0.0;
  double p_value = 1.0;
  bool significant = false;  // p_value < alpha
};

struct RcdReport {
  std::vector<NodeRcd> nodes;  // indexed by node id
  std::size_t corpus_size = 0;
  std::size_t member_count = 0;
  double alpha = 0.01;

  double flagged_fraction() const;
};

/// Per-node RCD and binomial test with null proportion |S| / |X|; no
/// multiple-testing correction. Requires 0 < |S| < |X| and 0 < alpha < 1.
RcdReport rcd_report(const Tree& tree, const IdSet& members, double alpha = 0.01);

struct BlindSpot {
  std::size_t node = 0;
  std::size_t depth = 0;
  double rcd = 0.0;
  std::vector<std::uint32_t> points;  // every point below the node
};

/// Significant nodes with rcd < threshold, deepest first (ties by node id).
std::vector<BlindSpot> blind_spots(const Tree& tree, const RcdReport& report,
                                   double threshold = 0.6);

/// Fréchet distance between Gaussians fitted to two samples:
///   |mu1 - mu2|^2 + Tr(C1 + C2 - 2 (C1 C2)^{1/2}).
double frechet_distance(const Corpus& a, const Corpus& b);
double frechet_distance(std::span<const float> a, std::size_t na, std::span<const float> b,
                        std::size_t nb, std::size_t d);

enum class PairKind {
  kModeDrop,      // real: centre blob plus four corner blobs; generated lacks the centre
  kRingVsBlob,    // real: standard normal; generated: noisy ring
  kClusterSplit,  // real: standard normal; generated: two separated clusters
  kIdentical,     // both standard normal (null model)
};

PairKind parse_pair_kind(std::string_view text);

struct MatchedPair {
  Corpus real;
  Corpus generated;
  // For kModeDrop: ids (in `real`) of the points from the dropped mode.
  std::vector<std::uint32_t> dropped;
};

/// Two 2D samples of n points each, each standardized to zero mean and
/// identity covariance, labelled source=real / source=generated.
MatchedPair matched_moment_pair(PairKind kind, std::size_t n, std::uint64_t seed);

/// Fraction of nodes with at least one subset point below them.
double theorem1_fraction(const Tree& tree, const IdSet& subset);

struct CoveragePoint {
  double radius_fraction = 0.0;  // R / W
  std::size_t subset_size = 0;
  double mean_fraction = 0.0;
  double min_fraction = 0.0;
  double max_fraction = 0.0;
  // min(1, 2^(-log_{1/g}(W / R))) for the measured reduction rate g; a
  // shape reference only, the bound's constants are not identifiable.
  double reference = 0.0;
  double mean_max_reduction = 0.0;
  std::size_t seeds = 0;
};

struct CoverageCurve {
  double diameter = 0.0;  // W: twice the largest distance to the centroid
  std::uint32_t center = 0;
  std::vector<CoveragePoint> points;
};

/// Builds one RP-Max tree per seed and, for every radius fraction r, the
/// subset of points within r * W of a randomly chosen center point (the same
/// center for all radii, so subsets are nested). Radius fractions must lie
/// in (0, 1].
CoverageCurve theorem1_experiment(const Corpus& corpus, std::span<const double> radii,
                                  std::size_t leaf_size, std::span<const std::uint64_t> seeds);

}  // namespace condra
