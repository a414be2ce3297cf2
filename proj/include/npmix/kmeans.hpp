#pragma once

#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "npmix/gaussian.hpp"

namespace npmix {

/// k-means++ seeding over the rows of `points`: returns k row indices.
template <class Rng>
std::vector<int> kmeans_plus_plus(const Matrix& points, int k, Rng& rng) {
  const int n = static_cast<int>(points.rows());
  if (k < 1 || k > n) throw InvalidArgument("kmeans++: need 1 <= k <= n");
  std::vector<int> chosen;
  chosen.push_back(std::uniform_int_distribution<int>(0, n - 1)(rng));
  std::vector<double> d2(n);
  for (int i = 0; i < n; ++i) d2[i] = (points.row(i) - points.row(chosen[0])).squaredNorm();
  while (static_cast<int>(chosen.size()) < k) {
    double total = 0.0;
    for (double v : d2) total += v;
    int next;
    if (total > 0.0) {
      next = std::discrete_distribution<int>(d2.begin(), d2.end())(rng);
    } else {
      // Every point coincides with a chosen center; fall back to uniform picks.
      next = std::uniform_int_distribution<int>(0, n - 1)(rng);
    }
    chosen.push_back(next);
    for (int i = 0; i < n; ++i) d2[i] = std::min(d2[i], (points.row(i) - points.row(next)).squaredNorm());
  }
  return chosen;
}

struct KMeansResult {
  std::vector<int> labels;
  Matrix centers;  // k x d
  double inertia = 0.0;
  int iterations = 0;
};

/// Nearest-center labels (ties to the lowest index) and the resulting inertia.
inline double assign_nearest(const Matrix& points, const Matrix& centers, std::vector<int>& labels) {
  const int n = static_cast<int>(points.rows());
  labels.resize(n);
  double inertia = 0.0;
  for (int i = 0; i < n; ++i) {
    double best = std::numeric_limits<double>::infinity();
    int arg = 0;
    for (int c = 0; c < centers.rows(); ++c) {
      const double d = (points.row(i) - centers.row(c)).squaredNorm();
      if (d < best) {
        best = d;
        arg = c;
      }
    }
    labels[i] = arg;
    inertia += best;
  }
  return inertia;
}

/// Lloyd's algorithm from the given initial centers. Empty clusters keep
/// their previous center.
inline KMeansResult lloyd(const Matrix& points, Matrix centers, int max_iters = 300) {
  KMeansResult out;
  const int k = static_cast<int>(centers.rows());
  out.inertia = assign_nearest(points, centers, out.labels);
  for (out.iterations = 1; out.iterations <= max_iters; ++out.iterations) {
    Matrix sums = Matrix::Zero(k, points.cols());
    std::vector<int> counts(k, 0);
    for (int i = 0; i < points.rows(); ++i) {
      sums.row(out.labels[i]) += points.row(i);
      ++counts[out.labels[i]];
    }
    for (int c = 0; c < k; ++c)
      if (counts[c] > 0) centers.row(c) = sums.row(c) / counts[c];
    std::vector<int> previous = out.labels;
    out.inertia = assign_nearest(points, centers, out.labels);
    if (out.labels == previous) break;
  }
  out.centers = std::move(centers);
  return out;
}

/// Best of `restarts` k-means++ seeded Lloyd runs (lowest inertia).
inline KMeansResult kmeans(const Matrix& points, int k, std::uint64_t seed, int restarts = 10) {
  KMeansResult best;
  best.inertia = std::numeric_limits<double>::infinity();
  for (int r = 0; r < restarts; ++r) {
    std::mt19937_64 rng(seed + static_cast<std::uint64_t>(r));
    const auto idx = kmeans_plus_plus(points, k, rng);
    Matrix centers(k, points.cols());
    for (int c = 0; c < k; ++c) centers.row(c) = points.row(idx[c]);
    KMeansResult run = lloyd(points, std::move(centers));
    if (run.inertia < best.inertia) best = std::move(run);
  }
  return best;
}

}  // namespace npmix
