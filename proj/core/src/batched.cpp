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

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "condra/error.hpp"
#include "condra/strategies.hpp"
#include "search.hpp"

namespace condra {

namespace {

using RowMatrix = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Rows of the corpus processed per matrix product; bounds the scratch
// matrix to m x kBlock floats.
constexpr std::size_t kBlock = 16384;

}  // namespace

std::vector<std::vector<ResultList>> batched_brute_force(const Corpus& corpus,
                                                         std::span<const float> queries,
                                                         std::size_t m,
                                                         std::span<const Condition> conditions,
                                                         std::size_t k) {
  std::vector<IdSet> members;
  members.reserve(conditions.size());
  for (const auto& c : conditions) members.push_back(condition_members(c, corpus));
  auto grid = batched_brute_force(corpus, queries, m, members, k);
  for (auto& row : grid) {
    for (std::size_t j = 0; j < conditions.size(); ++j) row[j].condition = conditions[j].to_string();
  }
  return grid;
}

std::vector<std::vector<ResultList>> batched_brute_force(const Corpus& corpus,
                                                         std::span<const float> queries,
                                                         std::size_t m,
                                                         std::span<const IdSet> members,
                                                         std::size_t k) {
  if (k == 0) throw Error(ErrorCode::kInvalidArgument, "k must be >= 1");
  const std::size_t n = corpus.size();
  const std::size_t d = corpus.dim();
  if (queries.size() != m * d) {
    throw Error(ErrorCode::kDimension, "query matrix is not m x d");
  }
  for (const auto& s : members) {
    if (s.size() != n) throw Error(ErrorCode::kMismatch, "member set does not belong to this corpus");
  }

  RowMatrix q(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < m; ++i) {
    auto prepared = prepare_query(corpus, queries.subspan(i * d, d));
    std::copy(prepared.begin(), prepared.end(), q.row(static_cast<Eigen::Index>(i)).data());
  }
  Eigen::Map<const RowMatrix> x(corpus.data().data(), static_cast<Eigen::Index>(n),
                                static_cast<Eigen::Index>(d));
  const Eigen::VectorXf x_norms = x.rowwise().squaredNorm();
  const Eigen::VectorXf q_norms = q.rowwise().squaredNorm();
  const float max_x_norm = n ? x_norms.maxCoeff() : 0.0f;

  // approx[i][p]: squared distance by norm expansion (angular rows are unit
  // length, so this is the single product 2 - 2 q.x up to rounding)
  std::vector<float> approx(m * n);
  for (std::size_t start = 0; start < n; start += kBlock) {
    const std::size_t len = std::min(kBlock, n - start);
    RowMatrix dots = q * x.middleRows(static_cast<Eigen::Index>(start),
                                      static_cast<Eigen::Index>(len)).transpose();
    for (std::size_t i = 0; i < m; ++i) {
      float* dst = approx.data() + i * n + start;
      const float* row = dots.row(static_cast<Eigen::Index>(i)).data();
      const float qn = q_norms[static_cast<Eigen::Index>(i)];
      for (std::size_t p = 0; p < len; ++p) {
        dst[p] = qn + x_norms[static_cast<Eigen::Index>(start + p)] - 2.0f * row[p];
      }
    }
  }

  std::vector<std::vector<ResultList>> grid(m, std::vector<ResultList>(members.size()));
  std::vector<std::pair<float, std::uint32_t>> cand;
  cand.reserve(n);
  for (std::size_t i = 0; i < m; ++i) {
    std::span<const float> qi(q.row(static_cast<Eigen::Index>(i)).data(), d);
    const float* ai = approx.data() + i * n;
    // Bound on |approx - exact| from float accumulation; candidates within
    // twice this of the k-th approximate value include every true top-k
    // point, and the exact rescoring restores the brute-force order.
    const double slack =
        2.0 * (1e-5 * static_cast<double>(d) + 1e-4) *
            (double(q_norms[static_cast<Eigen::Index>(i)]) + double(max_x_norm)) + 1e-12;
    for (std::size_t j = 0; j < members.size(); ++j) {
      ResultList& cell = grid[i][j];
      cell.k = k;
      cell.strategy = Strategy::kBatched;
      cand.clear();
      members[j].for_each([&](std::size_t p) {
        cand.emplace_back(ai[p], static_cast<std::uint32_t>(p));
      });
      cell.stats.points_scored = cand.size();
      if (cand.empty()) continue;
      const std::size_t kk = std::min(k, cand.size());
      std::nth_element(cand.begin(), cand.begin() + (kk - 1), cand.end());
      const double cutoff = double(cand[kk - 1].first) + slack;
      detail::KBest best(k);
      for (const auto& [a, p] : cand) {
        if (a <= cutoff) best.offer(squared_l2(qi, corpus.row(p)), p);
      }
      cell.neighbors = best.sorted();
    }
  }
  return grid;
}

}  // namespace condra
