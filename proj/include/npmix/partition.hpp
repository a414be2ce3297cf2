#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

#include "npmix/matching.hpp"
#include "npmix/mixture.hpp"

namespace npmix {

struct Classification {
  int label = 0;
  /// Largest weighted density minus the runner-up; 0 on ties.
  double margin = 0.0;
  /// All weighted densities underflowed; label is the nearest group mean.
  bool extrapolated = false;
};

/// K weighted group densities backing the plug-in Bayes classifier
/// x -> argmax_k w_k f_k(x).
class PartitionModel {
 public:
  PartitionModel(std::vector<double> weights, std::vector<GaussianMixture> densities)
      : weights_(std::move(weights)), densities_(std::move(densities)) {
    if (weights_.empty() || weights_.size() != densities_.size())
      throw InvalidArgument("PartitionModel: need K >= 1 weights and densities of equal length");
    double s = 0.0;
    for (double w : weights_) {
      if (!(w > 0.0)) throw InvalidArgument("PartitionModel: weights must be positive");
      s += w;
    }
    if (std::abs(s - 1.0) > 1e-9) throw InvalidArgument("PartitionModel: weights must sum to 1");
    for (const auto& f : densities_) {
      if (f.dim() != densities_.front().dim()) throw DimensionError("PartitionModel: dimension mismatch");
      group_means_.push_back(f.mean());
    }
  }

  explicit PartitionModel(const MixingMeasure& measure) : PartitionModel(measure.weights(), measure.atoms()) {}

  int groups() const { return static_cast<int>(weights_.size()); }
  int dim() const { return densities_.front().dim(); }
  const std::vector<double>& group_weights() const { return weights_; }
  const std::vector<GaussianMixture>& group_densities() const { return densities_; }

  /// K x n matrix of log(w_k f_k(x_i)) for the columns of a d x n matrix.
  Matrix log_weighted_columns(const Eigen::Ref<const Matrix>& points_t) const {
    if (points_t.rows() != dim()) throw DimensionError("PartitionModel: dimension mismatch");
    Matrix out(groups(), points_t.cols());
    for (int k = 0; k < groups(); ++k)
      out.row(k) = (densities_[k].log_density_columns(points_t).array() + std::log(weights_[k])).matrix().transpose();
    return out;
  }

  /// Weighted densities w_k f_k(x) on the linear scale.
  std::vector<double> weighted_densities(const Eigen::Ref<const Vector>& x) const {
    const Vector logs = log_weighted_columns(x).col(0);
    std::vector<double> out(groups());
    for (int k = 0; k < groups(); ++k) out[k] = std::exp(logs[k]);
    return out;
  }

  Classification classify(const Eigen::Ref<const Vector>& x) const {
    const Matrix logs = log_weighted_columns(x);
    return decide(logs.col(0), x);
  }

  /// Classifies the rows of an n x d matrix.
  std::vector<Classification> classify_rows(const Matrix& points) const {
    const Matrix points_t = points.transpose();
    const Matrix logs = log_weighted_columns(points_t);
    std::vector<Classification> out(points.rows());
    for (Eigen::Index i = 0; i < points.rows(); ++i) out[i] = decide(logs.col(i), points_t.col(i));
    return out;
  }

  std::vector<int> labels(const Matrix& points) const {
    std::vector<int> out;
    for (const auto& c : classify_rows(points)) out.push_back(c.label);
    return out;
  }

  /// min over pairs i != j of |w_i f_i(x) - w_j f_j(x)|; +inf when K = 1.
  double min_pair_gap(const Eigen::Ref<const Vector>& x) const {
    auto v = weighted_densities(x);
    return min_adjacent_gap(v);
  }

 private:
  static double min_adjacent_gap(std::vector<double>& v) {
    std::sort(v.begin(), v.end());
    double gap = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < v.size(); ++i) gap = std::min(gap, v[i] - v[i - 1]);
    return gap;
  }

  Classification decide(const Eigen::Ref<const Vector>& logs, const Eigen::Ref<const Vector>& x) const {
    Classification c;
    double top = -std::numeric_limits<double>::infinity();
    double second = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < groups(); ++k) {
      if (logs[k] > top) {
        second = top;
        top = logs[k];
        c.label = k;
      } else if (logs[k] > second) {
        second = logs[k];
      }
    }
    const double top_linear = std::exp(top);
    if (!(top_linear > 0.0)) {
      c.extrapolated = true;
      double best = std::numeric_limits<double>::infinity();
      for (int k = 0; k < groups(); ++k) {
        const double d = (x - group_means_[k]).squaredNorm();
        if (d < best) {
          best = d;
          c.label = k;
        }
      }
      return c;
    }
    c.margin = top == second ? 0.0 : top_linear * -std::expm1(second - top);
    return c;
  }

  std::vector<double> weights_;
  std::vector<GaussianMixture> densities_;
  std::vector<Vector> group_means_;
};

/// Monte Carlo estimate of the reference-measure mass of the fattened
/// exceptional set {x : min_{i != j} |w_i f_i(x) - w_j f_j(x)| <= t}.
inline double exceptional_mass(const PartitionModel& model, double t, const GaussianMixture& reference, int mc_n,
                               std::uint64_t seed) {
  if (mc_n < 1) throw InvalidArgument("exceptional_mass: mc_n must be positive");
  if (!(t >= 0.0)) throw InvalidArgument("exceptional_mass: t must be non-negative");
  if (model.groups() == 1) return 0.0;
  const LabeledSample draws = sample(reference, mc_n, seed);
  const Matrix logs = model.log_weighted_columns(draws.points.transpose());
  int inside = 0;
  std::vector<double> v(model.groups());
  for (Eigen::Index i = 0; i < logs.cols(); ++i) {
    for (int k = 0; k < model.groups(); ++k) v[k] = std::exp(logs(k, i));
    std::sort(v.begin(), v.end());
    for (std::size_t k = 1; k < v.size(); ++k)
      if (v[k] - v[k - 1] <= t) {
        ++inside;
        break;
      }
  }
  return static_cast<double>(inside) / mc_n;
}

/// Classifier evaluated on a regular grid over a 1-d or 2-d box. Cells are
/// ordered with x0 varying fastest.
struct PartitionGrid {
  std::vector<std::pair<double, double>> bounds;
  int resolution = 0;
  std::vector<int> labels;
  std::vector<double> margins;

  int dim() const { return static_cast<int>(bounds.size()); }
  int cells() const {
    int n = 1;
    for (int a = 0; a < dim(); ++a) n *= resolution;
    return n;
  }

  double coordinate(int axis, int index) const {
    const auto [lo, hi] = bounds[axis];
    return lo + (hi - lo) * index / (resolution - 1);
  }

  /// cells x d coordinates.
  Matrix points() const {
    Matrix out(cells(), dim());
    for (int c = 0; c < cells(); ++c) {
      int rest = c;
      for (int a = 0; a < dim(); ++a) {
        out(c, a) = coordinate(a, rest % resolution);
        rest /= resolution;
      }
    }
    return out;
  }
};

inline PartitionGrid partition_grid(const PartitionModel& model, std::vector<std::pair<double, double>> bounds,
                                    int resolution) {
  const int d = static_cast<int>(bounds.size());
  if (d != model.dim()) throw DimensionError("partition_grid: bounds dimension differs from model");
  if (d < 1 || d > 2) throw DimensionError("partition_grid: only d in {1, 2} is supported");
  if (resolution < 2) throw InvalidArgument("partition_grid: resolution must be >= 2");
  PartitionGrid grid{std::move(bounds), resolution, {}, {}};
  for (const auto& c : model.classify_rows(grid.points())) {
    grid.labels.push_back(c.label);
    grid.margins.push_back(c.margin);
  }
  return grid;
}

/// Fraction of points whose labels agree after optimally relabeling `b`,
/// skipping points whose margin under `a` is <= exclude_margin. Returns 1
/// when every point is excluded.
inline double partition_agreement(const std::vector<int>& labels_a, const std::vector<double>& margins_a,
                                  const std::vector<int>& labels_b, double exclude_margin) {
  if (labels_a.size() != labels_b.size() || margins_a.size() != labels_a.size())
    throw InvalidArgument("partition_agreement: length mismatch");
  std::vector<int> a, b;
  for (std::size_t i = 0; i < labels_a.size(); ++i)
    if (margins_a[i] > exclude_margin) {
      a.push_back(labels_a[i]);
      b.push_back(labels_b[i]);
    }
  if (a.empty()) return 1.0;
  const auto matched = relabel(b, match_clusters(a, b));
  std::size_t same = 0;
  for (std::size_t i = 0; i < a.size(); ++i) same += a[i] == matched[i];
  return static_cast<double>(same) / static_cast<double>(a.size());
}

inline double partition_agreement(const PartitionGrid& a, const PartitionGrid& b, double exclude_margin) {
  if (a.bounds != b.bounds || a.resolution != b.resolution) throw InvalidArgument("partition_agreement: grid mismatch");
  return partition_agreement(a.labels, a.margins, b.labels, exclude_margin);
}

/// Smallest t such that every point where the (optimally relabeled) estimated
/// labels disagree with the true ones lies in the true model's E0(t).
inline double smallest_enclosing_t(const PartitionModel& truth, const Matrix& points,
                                   const std::vector<int>& true_labels, const std::vector<int>& estimated) {
  const auto matched = relabel(estimated, match_clusters(true_labels, estimated));
  double t = 0.0;
  for (Eigen::Index i = 0; i < points.rows(); ++i)
    if (matched[i] != true_labels[i]) t = std::max(t, truth.min_pair_gap(points.row(i).transpose()));
  return t;
}

}  // namespace npmix
