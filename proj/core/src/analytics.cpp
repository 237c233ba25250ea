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

#include "condra/analytics.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "condra/error.hpp"

namespace condra {

namespace {

// Member counts per node via prefix sums over the tree's point order.
std::vector<std::size_t> member_prefix(const Tree& tree, const IdSet& members) {
  auto order = tree.point_order();
  std::vector<std::size_t> prefix(order.size() + 1, 0);
  for (std::size_t i = 0; i < order.size(); ++i) {
    prefix[i + 1] = prefix[i] + (members.test(order[i]) ? 1 : 0);
  }
  return prefix;
}

void check_members(const Tree& tree, const IdSet& members) {
  if (members.size() != tree.corpus_size()) {
    throw Error(ErrorCode::kMismatch, "member set does not belong to the tree's corpus");
  }
}

double rcd_value(std::size_t node_members, std::size_t node_count, std::size_t corpus_size,
                 std::size_t member_count) {
  // integer products are exact in double below 2^53, so the root is exactly 1
  return (double(node_members) * double(corpus_size)) /
         (double(node_count) * double(member_count));
}

}  // namespace

double rcd(const Tree& tree, const IdSet& members, std::size_t node) {
  check_members(tree, members);
  if (node >= tree.node_count()) throw Error(ErrorCode::kInvalidArgument, "node id out of range");
  std::size_t total = 0;
  for (auto p : tree.point_order()) total += members.test(p) ? 1 : 0;
  if (total == 0) throw Error(ErrorCode::kEmpty, "RCD is undefined for an empty member set");
  std::size_t inside = 0;
  for (auto p : tree.points(node)) inside += members.test(p) ? 1 : 0;
  return rcd_value(inside, tree.node(node).count(), tree.size(), total);
}

double binomial_two_sided_p(std::size_t successes, std::size_t trials, double p) {
  if (successes > trials) throw Error(ErrorCode::kInvalidArgument, "successes exceed trials");
  if (!(p > 0.0 && p < 1.0)) throw Error(ErrorCode::kInvalidArgument, "p must lie in (0, 1)");
  const double n = static_cast<double>(trials);
  const double lp = std::log(p), lq = std::log1p(-p);
  const double lg_n = std::lgamma(n + 1.0);
  auto log_pmf = [&](std::size_t i) {
    const double x = static_cast<double>(i);
    return lg_n - std::lgamma(x + 1.0) - std::lgamma(n - x + 1.0) + x * lp + (n - x) * lq;
  };
  // relative slack on the comparison, as in the usual exact-test convention
  const double cut = log_pmf(successes) + std::log1p(1e-7);
  double total = 0.0;
  for (std::size_t i = 0; i <= trials; ++i) {
    const double l = log_pmf(i);
    if (l <= cut) total += std::exp(l);
  }
  return std::min(1.0, total);
}

double RcdReport::flagged_fraction() const {
  if (nodes.empty()) return 0.0;
  const auto flagged = std::count_if(nodes.begin(), nodes.end(),
                                     [](const NodeRcd& n) { return n.significant; });
  return static_cast<double>(flagged) / static_cast<double>(nodes.size());
}

RcdReport rcd_report(const Tree& tree, const IdSet& members, double alpha) {
  check_members(tree, members);
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorCode::kInvalidArgument, "alpha must lie in (0, 1)");
  const auto prefix = member_prefix(tree, members);
  RcdReport report;
  report.corpus_size = tree.size();
  report.member_count = prefix.back();
  report.alpha = alpha;
  if (report.member_count == 0 || report.member_count == report.corpus_size) {
    throw Error(ErrorCode::kEmpty, "RCD report needs 0 < |S| < |X|");
  }
  const double null_p = double(report.member_count) / double(report.corpus_size);
  report.nodes.resize(tree.node_count());
  for (std::size_t i = 0; i < tree.node_count(); ++i) {
    const TreeNode& node = tree.node(i);
    NodeRcd& r = report.nodes[i];
    r.node = i;
    r.depth = node.depth;
    r.count = node.count();
    r.members = prefix[node.end] - prefix[node.begin];
    r.rcd = rcd_value(r.members, r.count, report.corpus_size, report.member_count);
    r.p_value = binomial_two_sided_p(r.members, r.count, null_p);
    r.significant = r.p_value < alpha;
  }
  return report;
}

std::vector<BlindSpot> blind_spots(const Tree& tree, const RcdReport& report, double threshold) {
  if (report.nodes.size() != tree.node_count()) {
    throw Error(ErrorCode::kMismatch, "report does not belong to this tree");
  }
  std::vector<BlindSpot> out;
  for (const auto& n : report.nodes) {
    if (!n.significant || !(n.rcd < threshold)) continue;
    BlindSpot b;
    b.node = n.node;
    b.depth = n.depth;
    b.rcd = n.rcd;
    auto pts = tree.points(n.node);
    b.points.assign(pts.begin(), pts.end());
    std::sort(b.points.begin(), b.points.end());
    out.push_back(std::move(b));
  }
  std::sort(out.begin(), out.end(), [](const BlindSpot& a, const BlindSpot& b) {
    return a.depth != b.depth ? a.depth > b.depth : a.node < b.node;
  });
  return out;
}

namespace {

struct Moments {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

Moments fit(std::span<const float> x, std::size_t n, std::size_t d) {
  if (n < 2) throw Error(ErrorCode::kInvalidArgument, "need at least two samples to fit a Gaussian");
  Moments m{Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d)),
            Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d))};
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) m.mean[static_cast<Eigen::Index>(j)] += x[i * d + j];
  }
  m.mean /= static_cast<double>(n);
  Eigen::VectorXd c(static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      c[static_cast<Eigen::Index>(j)] = x[i * d + j] - m.mean[static_cast<Eigen::Index>(j)];
    }
    m.cov.selfadjointView<Eigen::Lower>().rankUpdate(c);
  }
  m.cov = m.cov.selfadjointView<Eigen::Lower>();
  m.cov /= static_cast<double>(n - 1);
  return m;
}

Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& a) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
  Eigen::VectorXd s = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * s.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace

double frechet_distance(std::span<const float> a, std::size_t na, std::span<const float> b,
                        std::size_t nb, std::size_t d) {
  if (a.size() != na * d || b.size() != nb * d) {
    throw Error(ErrorCode::kDimension, "sample matrices do not match the stated shape");
  }
  Moments ma = fit(a, na, d);
  Moments mb = fit(b, nb, d);
  auto min_eig = [](const Eigen::MatrixXd& c) {
    return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(c, Eigen::EigenvaluesOnly)
        .eigenvalues()
        .minCoeff();
  };
  if (min_eig(ma.cov) < 1e-10 || min_eig(mb.cov) < 1e-10) {
    const auto eye = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
    ma.cov += 1e-6 * eye;
    mb.cov += 1e-6 * eye;
  }
  // Tr((C1 C2)^{1/2}) = Tr((S C2 S)^{1/2}) with S = C1^{1/2}; the inner
  // product is symmetric so a self-adjoint eigensolver applies.
  const Eigen::MatrixXd s = psd_sqrt(ma.cov);
  Eigen::MatrixXd inner = s * mb.cov * s;
  inner = 0.5 * (inner + inner.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(inner, Eigen::EigenvaluesOnly);
  const double tr_sqrt = es.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
  const double value = (ma.mean - mb.mean).squaredNorm() + ma.cov.trace() + mb.cov.trace() -
                       2.0 * tr_sqrt;
  return std::max(0.0, value);
}

double frechet_distance(const Corpus& a, const Corpus& b) {
  if (a.dim() != b.dim()) throw Error(ErrorCode::kDimension, "samples differ in dimension");
  if (a.size() < a.dim() + 1 || b.size() < b.dim() + 1) {
    throw Error(ErrorCode::kInvalidArgument, "each sample needs at least d + 1 points");
  }
  return frechet_distance(a.data(), a.size(), b.data(), b.size(), a.dim());
}

PairKind parse_pair_kind(std::string_view text) {
  if (text == "mode_drop") return PairKind::kModeDrop;
  if (text == "ring_vs_blob") return PairKind::kRingVsBlob;
  if (text == "cluster_split") return PairKind::kClusterSplit;
  if (text == "identical") return PairKind::kIdentical;
  throw Error(ErrorCode::kInvalidArgument, "unknown pair kind '" + std::string(text) + "'");
}

namespace {

// Affine map to zero mean and identity covariance: x -> C^{-1/2} (x - mu).
std::vector<float> standardize(const std::vector<double>& xy, std::size_t n) {
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, 2, Eigen::RowMajor>> x(
      xy.data(), static_cast<Eigen::Index>(n), 2);
  const Eigen::RowVector2d mean = x.colwise().mean();
  const Eigen::MatrixXd centered = x.rowwise() - mean;
  const Eigen::Matrix2d cov = (centered.transpose() * centered) / double(n - 1);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(cov);
  const Eigen::Matrix2d inv_sqrt = es.eigenvectors() *
                                   es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
                                   es.eigenvectors().transpose();
  const Eigen::MatrixXd white = centered * inv_sqrt;
  std::vector<float> out(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    out[2 * i] = static_cast<float>(white(static_cast<Eigen::Index>(i), 0));
    out[2 * i + 1] = static_cast<float>(white(static_cast<Eigen::Index>(i), 1));
  }
  return out;
}

Corpus labelled(std::vector<float> data, std::size_t n, const std::string& source) {
  std::vector<Attribute> attrs;
  attrs.emplace_back("source", std::vector<std::string>(n, source));
  return Corpus(std::move(data), n, 2, Metric::kEuclidean, std::move(attrs));
}

}  // namespace

MatchedPair matched_moment_pair(PairKind kind, std::size_t n, std::uint64_t seed) {
  if (n < 1000) throw Error(ErrorCode::kInvalidArgument, "matched pairs need n >= 1000");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  std::vector<double> real(2 * n), gen(2 * n);
  std::vector<std::uint32_t> dropped;

  auto standard_normal = [&](std::vector<double>& out) {
    for (auto& v : out) v = normal(rng);
  };
  constexpr double kCorner = 3.0, kSigma = 0.5;
  const double corners[4][2] = {{kCorner, kCorner}, {kCorner, -kCorner}, {-kCorner, kCorner},
                                {-kCorner, -kCorner}};

  switch (kind) {
    case PairKind::kModeDrop:
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t mode = i % 5;  // mode 4 is the centre blob
        const double cx = mode < 4 ? corners[mode][0] : 0.0;
        const double cy = mode < 4 ? corners[mode][1] : 0.0;
        real[2 * i] = cx + kSigma * normal(rng);
        real[2 * i + 1] = cy + kSigma * normal(rng);
        if (mode == 4) dropped.push_back(static_cast<std::uint32_t>(i));
      }
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t mode = i % 4;
        gen[2 * i] = corners[mode][0] + kSigma * normal(rng);
        gen[2 * i + 1] = corners[mode][1] + kSigma * normal(rng);
      }
      break;
    case PairKind::kRingVsBlob:
      standard_normal(real);
      for (std::size_t i = 0; i < n; ++i) {
        const double t = angle(rng);
        const double r = 1.0 + 0.1 * normal(rng);
        gen[2 * i] = r * std::cos(t);
        gen[2 * i + 1] = r * std::sin(t);
      }
      break;
    case PairKind::kClusterSplit:
      standard_normal(real);
      for (std::size_t i = 0; i < n; ++i) {
        const double cx = (i % 2 == 0) ? 2.0 : -2.0;
        gen[2 * i] = cx + kSigma * normal(rng);
        gen[2 * i + 1] = kSigma * normal(rng);
      }
      break;
    case PairKind::kIdentical:
      standard_normal(real);
      standard_normal(gen);
      break;
  }
  return MatchedPair{labelled(standardize(real, n), n, "real"),
                     labelled(standardize(gen, n), n, "generated"), std::move(dropped)};
}

double theorem1_fraction(const Tree& tree, const IdSet& subset) {
  check_members(tree, subset);
  const auto prefix = member_prefix(tree, subset);
  if (prefix.back() == 0) throw Error(ErrorCode::kEmpty, "subset has no points in the tree");
  std::size_t touched = 0;
  for (const auto& node : tree.nodes()) {
    if (prefix[node.end] > prefix[node.begin]) ++touched;
  }
  return static_cast<double>(touched) / static_cast<double>(tree.node_count());
}

CoverageCurve theorem1_experiment(const Corpus& corpus, std::span<const double> radii,
                                  std::size_t leaf_size, std::span<const std::uint64_t> seeds) {
  if (seeds.empty()) throw Error(ErrorCode::kInvalidArgument, "need at least one seed");
  for (double r : radii) {
    if (!(r > 0.0 && r <= 1.0)) throw Error(ErrorCode::kInvalidArgument, "radius fractions must lie in (0, 1]");
  }
  const std::size_t n = corpus.size(), d = corpus.dim();
  std::vector<double> centroid(d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    auto r = corpus.row(i);
    for (std::size_t j = 0; j < d; ++j) centroid[j] += r[j];
  }
  std::vector<float> c(d);
  for (std::size_t j = 0; j < d; ++j) c[j] = static_cast<float>(centroid[j] / double(n));
  double max_sq = 0.0;
  for (std::size_t i = 0; i < n; ++i) max_sq = std::max(max_sq, squared_l2(c, corpus.row(i)));

  CoverageCurve curve;
  curve.diameter = 2.0 * std::sqrt(max_sq);

  std::mt19937_64 rng(seeds.front() ^ 0x9e3779b97f4a7c15ull);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  std::vector<IdSet> subsets;
  for (int attempt = 0;; ++attempt) {
    if (attempt == 100) {
      throw Error(ErrorCode::kEmpty, "no center with a nonempty subset after 100 attempts");
    }
    curve.center = static_cast<std::uint32_t>(pick(rng));
    subsets.clear();
    bool empty = false;
    for (double r : radii) {
      const double radius = r * curve.diameter;
      IdSet s(n);
      for (std::size_t i = 0; i < n; ++i) {
        if (std::sqrt(squared_l2(corpus.row(curve.center), corpus.row(i))) <= radius) s.set(i);
      }
      empty = empty || s.none();
      subsets.push_back(std::move(s));
    }
    if (!empty) break;
  }

  curve.points.resize(radii.size());
  for (std::size_t r = 0; r < radii.size(); ++r) {
    curve.points[r].radius_fraction = radii[r];
    curve.points[r].subset_size = subsets[r].count();
    curve.points[r].min_fraction = 1.0;
    curve.points[r].seeds = seeds.size();
  }
  double reduction_sum = 0.0;
  for (auto seed : seeds) {
    const Tree tree = build_rp_tree(corpus, leaf_size, seed);
    reduction_sum += tree_stats(tree).max_reduction;
    for (std::size_t r = 0; r < radii.size(); ++r) {
      const double f = theorem1_fraction(tree, subsets[r]);
      auto& pt = curve.points[r];
      pt.mean_fraction += f / double(seeds.size());
      pt.min_fraction = std::min(pt.min_fraction, f);
      pt.max_fraction = std::max(pt.max_fraction, f);
    }
  }
  const double gamma = reduction_sum / double(seeds.size());
  for (auto& pt : curve.points) {
    pt.mean_max_reduction = gamma;
    if (gamma > 0.0 && gamma < 1.0) {
      const double levels = std::log(1.0 / pt.radius_fraction) / std::log(1.0 / gamma);
      pt.reference = std::min(1.0, std::exp2(-levels));
    } else {
      pt.reference = 1.0;
    }
  }
  return curve;
}

}  // namespace condra
