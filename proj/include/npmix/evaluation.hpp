#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <vector>

#include "npmix/em.hpp"
#include "npmix/kmeans.hpp"
#include "npmix/linkage.hpp"
#include "npmix/matching.hpp"
#include "npmix/partition.hpp"

namespace npmix {

/// Adjusted Rand index from the contingency table. Computed in exact integer
/// arithmetic up to the final division, so ari(a, b) == ari(b, a) bit for bit.
/// Returns 1 when both labelings are trivial in the same way (zero denominator).
inline double ari(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size()) throw InvalidArgument("ari: length mismatch");
  if (a.size() < 2) throw InvalidArgument("ari: need at least two points");
  std::map<std::pair<int, int>, long long> cells;
  std::map<int, long long> rows, cols;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ++cells[{a[i], b[i]}];
    ++rows[a[i]];
    ++cols[b[i]];
  }
  auto pairs = [](long long c) { return static_cast<__int128>(c) * (c - 1) / 2; };
  __int128 s = 0, sa = 0, sb = 0;
  for (const auto& [key, c] : cells) s += pairs(c);
  for (const auto& [key, c] : rows) sa += pairs(c);
  for (const auto& [key, c] : cols) sb += pairs(c);
  const __int128 total = pairs(static_cast<long long>(a.size()));
  // ARI = (s - sa sb / N) / ((sa + sb) / 2 - sa sb / N), scaled by 2N.
  const __int128 num = 2 * (s * total - sa * sb);
  const __int128 den = (sa + sb) * total - 2 * sa * sb;
  if (den == 0) return 1.0;
  return static_cast<double>(num) / static_cast<double>(den);
}

inline std::vector<int> baseline_kmeans(const Matrix& points, int K, std::uint64_t seed) {
  if (points.rows() < K) throw InvalidArgument("baseline_kmeans: need n >= K");
  return kmeans(points, K, seed, 10).labels;
}

/// Single-linkage on the points under Euclidean distance, cut at K.
inline std::vector<int> baseline_slink_points(const Matrix& points, int K) {
  const int n = static_cast<int>(points.rows());
  if (n < K) throw InvalidArgument("baseline_slink_points: need n >= K");
  const auto tree = single_linkage_with(n, [&](int i, int j) { return (points.row(i) - points.row(j)).norm(); });
  return cut(tree, K).map();
}

/// K-component GMM by EM; each component is its own cluster.
inline std::vector<int> baseline_gmm(const Matrix& points, int K, std::uint64_t seed) {
  if (points.rows() < K) throw InvalidArgument("baseline_gmm: need n >= K");
  const LabeledSample data{points, std::nullopt};
  const FitResult fitted = fit(data, default_em_config(points, K, seed));
  std::vector<GaussianMixture> singles;
  for (const auto& c : fitted.mixture.components()) singles.emplace_back(c);
  return PartitionModel(fitted.mixture.weights(), std::move(singles)).labels(points);
}

namespace detail {

/// Top-k eigenvectors of a symmetric matrix whose spectrum lies in [-1, 1],
/// by block power iteration on (M + I) / 2 with Rayleigh-Ritz steps.
inline Matrix top_eigenvectors(const Matrix& m, int k, std::mt19937_64& rng, int max_iters = 1000,
                               double tol = 1e-10) {
  const Eigen::Index n = m.rows();
  if (n <= 600) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(m);
    return solver.eigenvectors().rightCols(k);
  }
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix basis(n, k);
  for (Eigen::Index i = 0; i < n; ++i)
    for (int j = 0; j < k; ++j) basis(i, j) = normal(rng);
  Eigen::HouseholderQR<Matrix> qr(basis);
  basis = qr.householderQ() * Matrix::Identity(n, k);
  Vector previous = Vector::Zero(k);
  for (int it = 0; it < max_iters; ++it) {
    Matrix next = 0.5 * (m * basis + basis);
    Eigen::HouseholderQR<Matrix> step(next);
    basis = step.householderQ() * Matrix::Identity(n, k);
    const Matrix small = basis.transpose() * m * basis;
    Eigen::SelfAdjointEigenSolver<Matrix> ritz(small);
    basis = basis * ritz.eigenvectors();
    if ((ritz.eigenvalues() - previous).cwiseAbs().maxCoeff() < tol) break;
    previous = ritz.eigenvalues();
  }
  return basis;
}

}  // namespace detail

/// Normalized spectral clustering: RBF affinity with bandwidth equal to the
/// median pairwise distance, embedding by the bottom-K eigenvectors of the
/// symmetric normalized Laplacian (top-K of D^-1/2 W D^-1/2), rows
/// normalized, then k-means.
inline std::vector<int> baseline_spectral(const Matrix& points, int K, std::uint64_t seed) {
  const int n = static_cast<int>(points.rows());
  if (n < K) throw InvalidArgument("baseline_spectral: need n >= K");
  const double h2 = median_squared_distance(points);
  if (!(h2 > 0.0)) throw DegenerateInputError("baseline_spectral: all points coincide");
  Matrix w(n, n);
  for (int i = 0; i < n; ++i) {
    w(i, i) = 0.0;
    for (int j = i + 1; j < n; ++j) w(i, j) = w(j, i) = std::exp(-(points.row(i) - points.row(j)).squaredNorm() / (2.0 * h2));
  }
  Vector scale = w.rowwise().sum();
  if ((scale.array() <= 0.0).any()) throw DegenerateInputError("baseline_spectral: isolated point in affinity graph");
  scale = scale.array().rsqrt();
  const Matrix normalized = scale.asDiagonal() * w * scale.asDiagonal();
  std::mt19937_64 rng(seed);
  Matrix embed = detail::top_eigenvectors(normalized, K, rng);
  for (int i = 0; i < n; ++i) {
    const double norm = embed.row(i).norm();
    if (norm > 0.0) embed.row(i) /= norm;
  }
  return kmeans(embed, K, seed, 10).labels;
}

}  // namespace npmix
