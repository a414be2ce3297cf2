#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <vector>

#include "npmix/kmeans.hpp"
#include "npmix/mixture.hpp"

namespace npmix {

/// EM settings for fitting an L-component Gaussian mixture.
struct EmConfig {
  int components = 1;      // L
  int max_iters = 500;
  double tol = 1e-7;       // relative log-likelihood change
  double cov_ridge = 0.0;  // added to every covariance diagonal
  double weight_floor = 0.0;
  int restarts = 5;
  std::uint64_t seed = 0;

  void validate() const {
    if (components < 1) throw InvalidArgument("EmConfig: need L >= 1");
    if (!(tol > 0.0)) throw InvalidArgument("EmConfig: tol must be positive");
    if (!(cov_ridge >= 0.0)) throw InvalidArgument("EmConfig: cov_ridge must be non-negative");
    if (!(weight_floor >= 0.0) || weight_floor * components >= 1.0)
      throw InvalidArgument("EmConfig: weight_floor must lie in [0, 1/L)");
    if (max_iters < 1 || restarts < 1) throw InvalidArgument("EmConfig: max_iters and restarts must be positive");
  }

  bool operator==(const EmConfig&) const = default;
};

/// Median pairwise squared distance over an evenly strided subsample of at
/// most 500 rows.
inline double median_squared_distance(const Matrix& points) {
  const int n = static_cast<int>(points.rows());
  const int m = std::min(n, 500);
  std::vector<double> d2;
  d2.reserve(static_cast<std::size_t>(m) * (m - 1) / 2);
  for (int a = 0; a < m; ++a)
    for (int b = a + 1; b < m; ++b) {
      const int i = static_cast<int>(static_cast<long long>(a) * n / m);
      const int j = static_cast<int>(static_cast<long long>(b) * n / m);
      d2.push_back((points.row(i) - points.row(j)).squaredNorm());
    }
  if (d2.empty()) return 0.0;
  auto mid = d2.begin() + static_cast<std::ptrdiff_t>(d2.size() / 2);
  std::nth_element(d2.begin(), mid, d2.end());
  return *mid;
}

/// Default covariance ridge as a multiple of the median pairwise squared distance.
inline constexpr double kDefaultRidgeScale = 3e-3;

/// Defaults: ridge kDefaultRidgeScale x (median pairwise squared distance),
/// floor 1/(10L).
inline EmConfig default_em_config(const Matrix& points, int L, std::uint64_t seed = 0) {
  EmConfig cfg;
  cfg.components = L;
  cfg.seed = seed;
  cfg.cov_ridge = kDefaultRidgeScale * median_squared_distance(points);
  if (!(cfg.cov_ridge > 0.0)) cfg.cov_ridge = 1e-8;
  cfg.weight_floor = 1.0 / (10.0 * L);
  return cfg;
}

/// Clips weights to `floor` and rescales the unclipped ones so the total is
/// exactly redistributed; repeats until no weight falls below the floor.
inline void project_weights(std::vector<double>& w, double floor) {
  double total = 0.0;
  for (double x : w) total += x;
  for (double& x : w) x /= total;
  if (floor <= 0.0) return;
  std::vector<char> clipped(w.size(), 0);
  for (;;) {
    double free_mass = 1.0, unclipped = 0.0;
    bool changed = false;
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (!clipped[i] && w[i] < floor) {
        clipped[i] = 1;
        changed = true;
      }
      if (clipped[i]) {
        free_mass -= floor;
      } else {
        unclipped += w[i];
      }
    }
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = clipped[i] ? floor : w[i] * free_mass / unclipped;
    if (!changed) break;
  }
}

struct FitResult {
  GaussianMixture mixture;
  double log_likelihood = 0.0;
  int iterations = 0;
  bool converged = false;
  int restart_index = 0;
  /// Log-likelihood after each E-step of the selected restart.
  std::vector<double> trace;
};

namespace detail {

/// L x n matrix of log(w_l) + log N(x_i; mu_l, Sigma_l); `points_t` is d x n.
inline Matrix weighted_log_densities(const GaussianMixture& q, const Matrix& points_t) {
  Matrix out(q.size(), points_t.cols());
  for (int l = 0; l < q.size(); ++l)
    out.row(l) = (q.component(l).log_density_columns(points_t).array() + std::log(q.weight(l))).matrix().transpose();
  return out;
}

/// Column-wise log-sum-exp of an L x n matrix.
inline Vector column_lse(const Matrix& terms) {
  Vector out(terms.cols());
  for (Eigen::Index j = 0; j < terms.cols(); ++j) {
    const double m = terms.col(j).maxCoeff();
    out[j] = std::isfinite(m) ? m + std::log((terms.col(j).array() - m).exp().sum()) : m;
  }
  return out;
}

inline GaussianComponent ridged_component(Vector mean, Matrix cov, double ridge) {
  cov = 0.5 * (cov + cov.transpose()).eval();
  cov.diagonal().array() += ridge;
  return GaussianComponent(std::move(mean), std::move(cov));
}

inline GaussianMixture kmeanspp_start(const Matrix& points, const EmConfig& cfg, std::mt19937_64& rng) {
  const int n = static_cast<int>(points.rows());
  const int d = static_cast<int>(points.cols());
  const int L = cfg.components;
  const auto idx = kmeans_plus_plus(points, L, rng);
  Matrix centers(L, d);
  for (int l = 0; l < L; ++l) centers.row(l) = points.row(idx[l]);
  std::vector<int> labels;
  assign_nearest(points, centers, labels);

  Matrix sums = Matrix::Zero(L, d);
  std::vector<double> counts(L, 0.0);
  for (int i = 0; i < n; ++i) {
    sums.row(labels[i]) += points.row(i);
    counts[labels[i]] += 1.0;
  }
  for (int l = 0; l < L; ++l)
    if (counts[l] > 0) centers.row(l) = sums.row(l) / counts[l];
  Matrix pooled = Matrix::Zero(d, d);
  for (int i = 0; i < n; ++i) {
    const Vector r = (points.row(i) - centers.row(labels[i])).transpose();
    pooled += r * r.transpose();
  }
  pooled /= n;

  std::vector<double> weights(L);
  for (int l = 0; l < L; ++l) weights[l] = std::max(counts[l], 1.0);
  project_weights(weights, cfg.weight_floor);
  std::vector<GaussianComponent> comps;
  for (int l = 0; l < L; ++l) comps.push_back(ridged_component(centers.row(l).transpose(), pooled, cfg.cov_ridge));
  return GaussianMixture(std::move(weights), std::move(comps));
}

struct RunOutcome {
  std::optional<GaussianMixture> mixture;
  double log_likelihood = -std::numeric_limits<double>::infinity();
  int iterations = 0;
  bool converged = false;
  std::vector<double> trace;
};

inline RunOutcome em_run(const Matrix& points, const Matrix& points_t, const EmConfig& cfg, std::uint64_t seed) {
  RunOutcome out;
  const int n = static_cast<int>(points.rows());
  const int L = cfg.components;
  std::mt19937_64 rng(seed);
  try {
    GaussianMixture q = kmeanspp_start(points, cfg, rng);
    double previous = -std::numeric_limits<double>::infinity();
    for (int it = 1; it <= cfg.max_iters; ++it) {
      // E-step
      Matrix resp = weighted_log_densities(q, points_t);
      const Vector lse = column_lse(resp);
      const double ll = lse.sum();
      if (!std::isfinite(ll)) return RunOutcome{};
      out.trace.push_back(ll);
      out.iterations = it;
      if (it > 1 && std::abs(ll - previous) <= cfg.tol * std::abs(previous)) {
        out.converged = true;
        out.log_likelihood = ll;
        out.mixture = std::move(q);
        return out;
      }
      previous = ll;
      resp = (resp.rowwise() - lse.transpose()).array().exp().matrix();

      // M-step
      std::vector<double> weights(L);
      std::vector<GaussianComponent> comps;
      comps.reserve(L);
      for (int l = 0; l < L; ++l) {
        const double nl = resp.row(l).sum();
        weights[l] = nl;
        if (!(nl > 1e-10)) {
          comps.push_back(q.component(l));
          continue;
        }
        const Vector mean = points_t * resp.row(l).transpose() / nl;
        const Matrix centered = points_t.colwise() - mean;
        const Matrix cov = (centered.array().rowwise() * resp.row(l).array()).matrix() * centered.transpose() / nl;
        comps.push_back(ridged_component(mean, cov, cfg.cov_ridge));
      }
      for (double& w : weights) w = std::max(w / n, 0.0);
      if (cfg.weight_floor <= 0.0)
        for (double& w : weights) w = std::max(w, 2.0 * kMinMixtureWeight);
      project_weights(weights, cfg.weight_floor);
      q = GaussianMixture(std::move(weights), std::move(comps));
    }
    const Vector lse = column_lse(weighted_log_densities(q, points_t));
    out.log_likelihood = lse.sum();
    if (!std::isfinite(out.log_likelihood)) return RunOutcome{};
    out.mixture = std::move(q);
  } catch (const SingularModelError&) {
    return RunOutcome{};
  }
  return out;
}

}  // namespace detail

/// Sum of log mixture densities over the sample, log-sum-exp stabilized.
inline double loglik(const GaussianMixture& q, const LabeledSample& data) {
  if (data.dim() != q.dim()) throw DimensionError("loglik: dimension mismatch");
  const Matrix points_t = data.points.transpose();
  return detail::column_lse(detail::weighted_log_densities(q, points_t)).sum();
}

/// Fits an L-component Gaussian mixture by EM with k-means++ starts, a
/// covariance ridge and a weight floor. Restart r uses seed + r; the restart
/// with the highest final log-likelihood wins (ties to the lowest index).
inline FitResult fit(const LabeledSample& data, const EmConfig& cfg) {
  cfg.validate();
  if (data.size() < cfg.components) throw InsufficientDataError("fit: need n >= L");
  if (data.dim() < 1) throw DimensionError("fit: empty dimension");
  const Matrix points_t = data.points.transpose();
  std::optional<FitResult> best;
  for (int r = 0; r < cfg.restarts; ++r) {
    auto run = detail::em_run(data.points, points_t, cfg, cfg.seed + static_cast<std::uint64_t>(r));
    if (!run.mixture) continue;
    if (!best || run.log_likelihood > best->log_likelihood)
      best = FitResult{std::move(*run.mixture), run.log_likelihood, run.iterations, run.converged, r,
                       std::move(run.trace)};
  }
  if (!best) throw FitFailureError("fit: every EM restart diverged");
  return std::move(*best);
}

}  // namespace npmix
