#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "npmix/em.hpp"
#include "npmix/hellinger.hpp"
#include "npmix/kmeans.hpp"
#include "npmix/linkage.hpp"
#include "npmix/partition.hpp"

namespace npmix {

/// How the fitted components are grouped into K clusters.
enum class ClusterFunction { single_linkage, complete_linkage, kmeans_means };

inline std::string to_string(ClusterFunction f) {
  switch (f) {
    case ClusterFunction::single_linkage: return "single_linkage";
    case ClusterFunction::complete_linkage: return "complete_linkage";
    case ClusterFunction::kmeans_means: return "kmeans_means";
  }
  return "single_linkage";
}

inline ClusterFunction cluster_function_from(const std::string& s) {
  if (s == "single_linkage") return ClusterFunction::single_linkage;
  if (s == "complete_linkage") return ClusterFunction::complete_linkage;
  if (s == "kmeans_means") return ClusterFunction::kmeans_means;
  throw InvalidArgument("unknown cluster function '" + s + "'");
}

/// Default overfit size: 5K + 10 components, capped at n / 20 (but never below K).
inline int default_components(int K, int n) { return std::max(K, std::min(5 * K + 10, n / 20)); }

struct NpmixOptions {
  int K = 2;
  /// Overfit size L; 0 picks default_components(K, n).
  int L = 0;
  std::uint64_t seed = 0;
  /// EM overrides; unset fields take default_em_config values.
  std::optional<int> max_iters, restarts;
  std::optional<double> tol, cov_ridge, weight_floor;
  /// Ridge as a multiple of the median pairwise squared distance; ignored
  /// when cov_ridge is set.
  std::optional<double> ridge_scale;
  ClusterFunction cluster = ClusterFunction::single_linkage;

  EmConfig em_config(const Matrix& points) const {
    const int l = L > 0 ? L : default_components(K, static_cast<int>(points.rows()));
    EmConfig cfg = default_em_config(points, l, seed);
    if (max_iters) cfg.max_iters = *max_iters;
    if (restarts) cfg.restarts = *restarts;
    if (tol) cfg.tol = *tol;
    if (ridge_scale) cfg.cov_ridge = *ridge_scale * median_squared_distance(points);
    if (cov_ridge) cfg.cov_ridge = *cov_ridge;
    if (weight_floor) cfg.weight_floor = *weight_floor;
    return cfg;
  }
};

/// Every intermediate of one NPMIX run.
struct NpmixResult {
  EmConfig em;
  FitResult fit;
  DistanceMatrix distances;
  Dendrogram tree;
  Assignment assignment;
  MixingMeasure measure;
  PartitionModel partition;
  std::vector<int> labels;
};

/// Overfit an L-component GMM, compute the component Hellinger distance
/// matrix, cluster it into K groups, aggregate and classify the sample.
inline NpmixResult run_npmix(const Matrix& points, const NpmixOptions& opt) {
  if (opt.K < 1) throw InvalidArgument("run_npmix: K must be positive");
  EmConfig cfg = opt.em_config(points);
  if (cfg.components < opt.K) throw InvalidArgument("run_npmix: need L >= K");
  FitResult fitted = fit(LabeledSample{points, std::nullopt}, cfg);
  DistanceMatrix dist = distance_matrix(fitted.mixture);
  Dendrogram tree{fitted.mixture.size(), {}};
  std::optional<Assignment> alpha;
  switch (opt.cluster) {
    case ClusterFunction::single_linkage:
      tree = single_linkage(dist);
      alpha = cut(tree, opt.K);
      break;
    case ClusterFunction::complete_linkage:
      tree = complete_linkage(dist);
      alpha = cut(tree, opt.K);
      break;
    case ClusterFunction::kmeans_means: {
      Matrix means(fitted.mixture.size(), fitted.mixture.dim());
      for (int l = 0; l < fitted.mixture.size(); ++l) means.row(l) = fitted.mixture.component(l).mean().transpose();
      const auto km = kmeans(means, opt.K, opt.seed, 10);
      alpha = Assignment(Assignment::canonical_labels(km.labels), opt.K);
      break;
    }
  }
  MixingMeasure measure = group(fitted.mixture, *alpha);
  PartitionModel partition(measure);
  std::vector<int> labels = partition.labels(points);
  return NpmixResult{cfg,  std::move(fitted), std::move(dist),      std::move(tree), std::move(*alpha),
                     std::move(measure), std::move(partition), std::move(labels)};
}

}  // namespace npmix
