#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <random>

#include "npmix/error.hpp"

namespace npmix {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Multivariate normal N(mean, covariance) with a cached Cholesky factor.
///
/// Immutable after construction. The constructor rejects covariances that are
/// not symmetric (relative tolerance 1e-12) or not positive definite.
class GaussianComponent {
 public:
  GaussianComponent(Vector mean, Matrix covariance)
      : mean_(std::move(mean)), covariance_(std::move(covariance)) {
    const auto d = mean_.size();
    if (d < 1) throw DimensionError("GaussianComponent: empty mean");
    if (covariance_.rows() != d || covariance_.cols() != d)
      throw DimensionError("GaussianComponent: covariance shape does not match mean");
    if (!mean_.allFinite() || !covariance_.allFinite())
      throw SingularModelError("GaussianComponent: non-finite parameters");
    const double scale = covariance_.cwiseAbs().maxCoeff();
    if ((covariance_ - covariance_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
      throw InvalidArgument("GaussianComponent: covariance is not symmetric");
    // Exact symmetry keeps parameter-level comparisons meaningful.
    covariance_ = 0.5 * (covariance_ + covariance_.transpose()).eval();

    Eigen::LLT<Matrix> llt(covariance_);
    if (llt.info() != Eigen::Success || !(scale > 0.0))
      throw SingularModelError("GaussianComponent: covariance is not positive definite");
    chol_ = llt.matrixL();
    if ((chol_.diagonal().array() <= 0.0).any())
      throw SingularModelError("GaussianComponent: covariance is not positive definite");
    log_det_ = 2.0 * chol_.diagonal().array().log().sum();
    log_norm_ = -0.5 * (static_cast<double>(d) * std::log(2.0 * std::numbers::pi) + log_det_);
  }

  /// Scalar convenience: N(mean, variance) in one dimension.
  static GaussianComponent univariate(double mean, double variance) {
    return GaussianComponent(Vector::Constant(1, mean), Matrix::Constant(1, 1, variance));
  }

  int dim() const { return static_cast<int>(mean_.size()); }
  const Vector& mean() const { return mean_; }
  const Matrix& covariance() const { return covariance_; }
  /// Lower Cholesky factor of the covariance.
  const Matrix& cholesky() const { return chol_; }
  double log_det() const { return log_det_; }

  double log_density(const Eigen::Ref<const Vector>& x) const {
    if (x.size() != mean_.size()) throw DimensionError("log_density: dimension mismatch");
    const Vector z = chol_.triangularView<Eigen::Lower>().solve(x - mean_);
    return log_norm_ - 0.5 * z.squaredNorm();
  }

  double density(const Eigen::Ref<const Vector>& x) const { return std::exp(log_density(x)); }

  /// Log densities of the columns of a d x n matrix.
  Vector log_density_columns(const Eigen::Ref<const Matrix>& points) const {
    if (points.rows() != mean_.size()) throw DimensionError("log_density: dimension mismatch");
    Matrix z = points.colwise() - mean_;
    chol_.triangularView<Eigen::Lower>().solveInPlace(z);
    return (log_norm_ - 0.5 * z.colwise().squaredNorm().array()).matrix().transpose();
  }

  template <class Rng>
  Vector draw(Rng& rng) const {
    std::normal_distribution<double> normal(0.0, 1.0);
    Vector z(mean_.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = normal(rng);
    return mean_ + chol_.triangularView<Eigen::Lower>() * z;
  }

  /// Exact parameter equality.
  bool same_parameters(const GaussianComponent& other) const {
    return mean_.size() == other.mean_.size() && mean_ == other.mean_ &&
           covariance_ == other.covariance_;
  }

 private:
  Vector mean_;
  Matrix covariance_;
  Matrix chol_;
  double log_det_ = 0.0;
  double log_norm_ = 0.0;
};

}  // namespace npmix
