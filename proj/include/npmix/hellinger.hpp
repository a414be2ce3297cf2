#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "npmix/mixture.hpp"
#include "npmix/quadrature.hpp"

namespace npmix {

/// Closed-form Hellinger distance between two Gaussians through the
/// Bhattacharyya coefficient, rho = sqrt(1 - BC).
inline double hellinger_gaussian(const GaussianComponent& a, const GaussianComponent& b) {
  if (a.dim() != b.dim()) throw DimensionError("hellinger_gaussian: dimension mismatch");
  if (a.same_parameters(b)) return 0.0;
  const Matrix blended = 0.5 * (a.covariance() + b.covariance());
  Eigen::LLT<Matrix> llt(blended);
  if (llt.info() != Eigen::Success) throw SingularModelError("hellinger_gaussian: singular blended covariance");
  const Matrix chol = llt.matrixL();
  const double log_det_blend = 2.0 * chol.diagonal().array().log().sum();
  const Vector z = chol.triangularView<Eigen::Lower>().solve(a.mean() - b.mean());
  const double log_bc = 0.25 * a.log_det() + 0.25 * b.log_det() - 0.5 * log_det_blend - 0.125 * z.squaredNorm();
  // 1 - BC = -expm1(log BC); stays accurate when the two are close.
  const double h2 = -std::expm1(std::min(log_bc, 0.0));
  return std::sqrt(std::clamp(h2, 0.0, 1.0));
}

struct HellingerEstimate {
  double distance = 0.0;
  /// Change in the squared distance over the last grid refinement.
  double error = 0.0;
  int points_per_axis = 0;
};

namespace detail {

/// Running sums for 1 - S_pq / sqrt(S_pp S_qq) over a quadrature grid.
/// Normalizing by the grid masses makes p == q give exactly zero.
struct OverlapSums {
  double pp = 0.0, qq = 0.0, pq = 0.0;

  void add(const Vector& fp, const Vector& fq, const Eigen::Ref<const Vector>& w) {
    pp += w.dot(fp);
    qq += w.dot(fq);
    pq += w.dot((fp.array() * fq.array()).sqrt().matrix());
  }

  double squared_distance() const {
    if (!(pp > 0.0) || !(qq > 0.0)) return 1.0;
    return std::clamp(1.0 - pq / std::sqrt(pp * qq), 0.0, 1.0);
  }
};

inline constexpr Eigen::Index kGridChunk = 1 << 16;

inline double squared_hellinger_on_grid(const GaussianMixture& p, const GaussianMixture& q, const Box& box,
                                        int per_axis) {
  const QuadratureGrid grid = tensor_grid(box, per_axis);
  OverlapSums sums;
  for (Eigen::Index start = 0; start < grid.points.cols(); start += kGridChunk) {
    const Eigen::Index len = std::min(kGridChunk, grid.points.cols() - start);
    const auto pts = grid.points.middleCols(start, len);
    const Vector fp = p.log_density_columns(pts).array().exp().matrix();
    const Vector fq = q.log_density_columns(pts).array().exp().matrix();
    sums.add(fp, fq, grid.weights.segment(start, len));
  }
  return sums.squared_distance();
}

}  // namespace detail

/// Hellinger distance between two mixtures by adaptive tensor-grid quadrature.
///
/// The grid is refined (n -> 2n-1 points per axis) until the squared distance
/// changes by at most quad.tol; throws PrecisionError otherwise.
inline HellingerEstimate hellinger_mixture(const GaussianMixture& p, const GaussianMixture& q,
                                           const QuadratureSpec& quad = {}) {
  if (p.dim() != q.dim()) throw DimensionError("hellinger_mixture: dimension mismatch");
  if (p.dim() > 3) throw DimensionError("hellinger_mixture: only d <= 3 is supported");
  if (p.same_parameters(q)) return {0.0, 0.0, 0};

  auto comps = component_pointers(p);
  for (const auto* c : component_pointers(q)) comps.push_back(c);
  const Box box = covering_box(comps, quad.box_sigmas);
  const int n0 = quad.initial_points(p.dim());

  double previous = detail::squared_hellinger_on_grid(p, q, box, n0);
  double error = std::numeric_limits<double>::infinity();
  int per_axis = n0;
  for (int level = 1; level <= quad.max_refinements; ++level) {
    per_axis = refined_points(n0, level);
    const double current = detail::squared_hellinger_on_grid(p, q, box, per_axis);
    error = std::abs(current - previous);
    previous = current;
    if (error <= quad.tol) return {std::sqrt(current), error, per_axis};
  }
  throw PrecisionError("hellinger_mixture: quadrature did not converge", std::sqrt(previous), error);
}

/// Symmetric L x L matrix of pairwise Hellinger distances; zero diagonal,
/// entries in [0, 1].
class DistanceMatrix {
 public:
  explicit DistanceMatrix(Matrix entries) : entries_(std::move(entries)) {
    if (entries_.rows() != entries_.cols()) throw InvalidArgument("DistanceMatrix: not square");
    for (Eigen::Index i = 0; i < entries_.rows(); ++i) {
      if (entries_(i, i) != 0.0) throw InvalidArgument("DistanceMatrix: non-zero diagonal");
      for (Eigen::Index j = 0; j < i; ++j) {
        if (entries_(i, j) != entries_(j, i)) throw InvalidArgument("DistanceMatrix: not symmetric");
        if (!(entries_(i, j) >= 0.0) || entries_(i, j) > 1.0 + 1e-9)
          throw InvalidArgument("DistanceMatrix: entry outside [0, 1]");
      }
    }
  }

  int size() const { return static_cast<int>(entries_.rows()); }
  double operator()(int i, int j) const { return entries_(i, j); }
  const Matrix& entries() const { return entries_; }

 private:
  Matrix entries_;
};

inline DistanceMatrix distance_matrix(const GaussianMixture& q) {
  const int L = q.size();
  Matrix d = Matrix::Zero(L, L);
  for (int i = 0; i < L; ++i)
    for (int j = 0; j < i; ++j) d(i, j) = d(j, i) = hellinger_gaussian(q.component(i), q.component(j));
  return DistanceMatrix(std::move(d));
}

namespace detail {

inline std::vector<double> dirichlet_ones(int m, std::mt19937_64& rng) {
  std::exponential_distribution<double> expo(1.0);
  std::vector<double> w(m);
  double s = 0.0;
  for (auto& x : w) s += (x = expo(rng));
  for (auto& x : w) x /= s;
  return w;
}

inline GaussianMixture reweighted(const GaussianMixture& base, std::vector<double> w) {
  double s = 0.0;
  for (auto& x : w) s += (x = std::max(x, 2.0 * kMinMixtureWeight));
  for (auto& x : w) x /= s;
  return GaussianMixture(std::move(w), base.components());
}

}  // namespace detail

/// Lower-bound estimate of the Hellinger diameter of the convex hull of the
/// mixture's components: the larger of the maximum pairwise component
/// distance and the maximum distance over `n_dirichlet` random pairs of hull
/// points with Dirichlet(1, ..., 1) coefficients.
inline double hellinger_diameter(const GaussianMixture& group, int n_dirichlet = 256, std::uint64_t seed = 0,
                                 const QuadratureSpec& quad = {}) {
  const int m = group.size();
  if (m == 1) return 0.0;
  double best = 0.0;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < i; ++j) best = std::max(best, hellinger_gaussian(group.component(i), group.component(j)));
  if (n_dirichlet <= 0) return best;

  // Hull points only reweight the same components, so component densities are
  // tabulated once per grid level and every pair is two matrix-vector products.
  const Box box = covering_box(component_pointers(group), quad.box_sigmas);
  const int n0 = quad.initial_points(group.dim());
  struct Level {
    Matrix phi;  // m x G
    Vector w;
  };
  auto tabulate = [&](int per_axis) {
    QuadratureGrid grid = tensor_grid(box, per_axis);
    Level lv{Matrix(m, grid.points.cols()), std::move(grid.weights)};
    for (int l = 0; l < m; ++l)
      lv.phi.row(l) = group.component(l).log_density_columns(grid.points).array().exp().matrix().transpose();
    return lv;
  };
  const Level coarse = tabulate(n0);
  const Level fine = tabulate(refined_points(n0, 1));
  auto squared = [](const Level& lv, const Vector& a, const Vector& b) {
    detail::OverlapSums sums;
    sums.add(lv.phi.transpose() * a, lv.phi.transpose() * b, lv.w);
    return sums.squared_distance();
  };

  std::mt19937_64 rng(seed);
  for (int t = 0; t < n_dirichlet; ++t) {
    const auto wa = detail::dirichlet_ones(m, rng);
    const auto wb = detail::dirichlet_ones(m, rng);
    const Vector a = Eigen::Map<const Vector>(wa.data(), m);
    const Vector b = Eigen::Map<const Vector>(wb.data(), m);
    const double h2_fine = squared(fine, a, b);
    double h = std::sqrt(h2_fine);
    if (std::abs(h2_fine - squared(coarse, a, b)) > quad.tol)
      h = hellinger_mixture(detail::reweighted(group, wa), detail::reweighted(group, wb), quad).distance;
    best = std::max(best, h);
  }
  return best;
}

}  // namespace npmix
