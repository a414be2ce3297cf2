#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <utility>
#include <vector>

#include "npmix/assignment.hpp"
#include "npmix/gaussian.hpp"

namespace npmix {

namespace detail {

inline void check_simplex(const std::vector<double>& w, double min_weight, const char* who) {
  if (w.empty()) throw InvalidArgument(std::string(who) + ": no weights");
  double sum = 0.0;
  for (double x : w) {
    if (!std::isfinite(x) || x < min_weight)
      throw InvalidArgument(std::string(who) + ": weight below minimum or not finite");
    sum += x;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw InvalidArgument(std::string(who) + ": weights must sum to 1");
}

inline double log_sum_exp(const double* v, std::size_t n) {
  double m = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) m = std::max(m, v[i]);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += std::exp(v[i] - m);
  return m + std::log(s);
}

}  // namespace detail

/// Smallest admissible mixture weight.
inline constexpr double kMinMixtureWeight = 1e-12;

/// Finite Gaussian mixture sum_l w_l N(mu_l, Sigma_l).
class GaussianMixture {
 public:
  GaussianMixture(std::vector<double> weights, std::vector<GaussianComponent> components)
      : weights_(std::move(weights)), components_(std::move(components)) {
    if (weights_.size() != components_.size())
      throw InvalidArgument("GaussianMixture: weights and components differ in length");
    detail::check_simplex(weights_, kMinMixtureWeight, "GaussianMixture");
    for (const auto& c : components_)
      if (c.dim() != components_.front().dim())
        throw DimensionError("GaussianMixture: components differ in dimension");
  }

  explicit GaussianMixture(GaussianComponent single)
      : GaussianMixture({1.0}, {std::move(single)}) {}

  int size() const { return static_cast<int>(components_.size()); }
  int dim() const { return components_.front().dim(); }
  const std::vector<double>& weights() const { return weights_; }
  double weight(int i) const { return weights_[i]; }
  const std::vector<GaussianComponent>& components() const { return components_; }
  const GaussianComponent& component(int i) const { return components_[i]; }

  double log_density(const Eigen::Ref<const Vector>& x) const {
    if (x.size() != dim()) throw DimensionError("GaussianMixture: dimension mismatch");
    std::vector<double> terms(components_.size());
    for (std::size_t l = 0; l < components_.size(); ++l)
      terms[l] = std::log(weights_[l]) + components_[l].log_density(x);
    return detail::log_sum_exp(terms.data(), terms.size());
  }

  double density(const Eigen::Ref<const Vector>& x) const {
    if (x.size() != dim()) throw DimensionError("GaussianMixture: dimension mismatch");
    double s = 0.0;
    for (std::size_t l = 0; l < components_.size(); ++l) s += weights_[l] * components_[l].density(x);
    return s;
  }

  /// Log densities of the columns of a d x n matrix, log-sum-exp stabilized.
  Vector log_density_columns(const Eigen::Ref<const Matrix>& points) const {
    if (points.rows() != dim()) throw DimensionError("GaussianMixture: dimension mismatch");
    const auto n = points.cols();
    Matrix terms(static_cast<Eigen::Index>(components_.size()), n);
    for (std::size_t l = 0; l < components_.size(); ++l)
      terms.row(static_cast<Eigen::Index>(l)) =
          (components_[l].log_density_columns(points).array() + std::log(weights_[l])).matrix().transpose();
    Vector out(n);
    for (Eigen::Index j = 0; j < n; ++j) {
      const double m = terms.col(j).maxCoeff();
      out[j] = std::isfinite(m) ? m + std::log((terms.col(j).array() - m).exp().sum()) : m;
    }
    return out;
  }

  /// Mean of the mixture, sum_l w_l mu_l.
  Vector mean() const {
    Vector m = Vector::Zero(dim());
    for (std::size_t l = 0; l < components_.size(); ++l) m += weights_[l] * components_[l].mean();
    return m;
  }

  bool same_parameters(const GaussianMixture& other) const {
    if (weights_ != other.weights_) return false;
    for (std::size_t l = 0; l < components_.size(); ++l)
      if (!components_[l].same_parameters(other.components_[l])) return false;
    return true;
  }

 private:
  std::vector<double> weights_;
  std::vector<GaussianComponent> components_;
};

/// Finite mixing measure whose atoms are themselves Gaussian mixtures.
class MixingMeasure {
 public:
  MixingMeasure(std::vector<double> weights, std::vector<GaussianMixture> atoms)
      : weights_(std::move(weights)), atoms_(std::move(atoms)) {
    if (weights_.size() != atoms_.size())
      throw InvalidArgument("MixingMeasure: weights and atoms differ in length");
    detail::check_simplex(weights_, std::numeric_limits<double>::min(), "MixingMeasure");
    for (std::size_t i = 0; i < atoms_.size(); ++i) {
      if (atoms_[i].dim() != atoms_.front().dim())
        throw DimensionError("MixingMeasure: atoms differ in dimension");
      for (std::size_t j = 0; j < i; ++j)
        if (atoms_[i].same_parameters(atoms_[j]))
          throw InvalidArgument("MixingMeasure: atoms must be pairwise distinct");
    }
  }

  int size() const { return static_cast<int>(atoms_.size()); }
  int dim() const { return atoms_.front().dim(); }
  const std::vector<double>& weights() const { return weights_; }
  double weight(int k) const { return weights_[k]; }
  const std::vector<GaussianMixture>& atoms() const { return atoms_; }
  const GaussianMixture& atom(int k) const { return atoms_[k]; }

  double density(const Eigen::Ref<const Vector>& x) const {
    double s = 0.0;
    for (std::size_t k = 0; k < atoms_.size(); ++k) s += weights_[k] * atoms_[k].density(x);
    return s;
  }

 private:
  std::vector<double> weights_;
  std::vector<GaussianMixture> atoms_;
};

/// n x d observations with optional 0-based ground-truth labels.
struct LabeledSample {
  Matrix points;
  std::optional<std::vector<int>> labels;

  int size() const { return static_cast<int>(points.rows()); }
  int dim() const { return static_cast<int>(points.cols()); }

  void validate(int groups = 0) const {
    if (!labels) return;
    if (static_cast<Eigen::Index>(labels->size()) != points.rows())
      throw InvalidArgument("LabeledSample: label count differs from point count");
    for (int l : *labels)
      if (l < 0 || (groups > 0 && l >= groups)) throw InvalidArgument("LabeledSample: label out of range");
  }
};

/// Mixture with its components laid out atom by atom, plus the assignment
/// mapping each component back to the atom it came from.
inline std::pair<GaussianMixture, Assignment> flatten(const MixingMeasure& measure) {
  std::vector<double> weights;
  std::vector<GaussianComponent> comps;
  std::vector<int> map;
  for (int k = 0; k < measure.size(); ++k) {
    const auto& atom = measure.atom(k);
    for (int l = 0; l < atom.size(); ++l) {
      weights.push_back(measure.weight(k) * atom.weight(l));
      comps.push_back(atom.component(l));
      map.push_back(k);
    }
  }
  return {GaussianMixture(std::move(weights), std::move(comps)), Assignment(std::move(map), measure.size())};
}

/// Draws n points. The label is the index of the top-level component (for a
/// mixture) or atom (for a mixing measure).
inline LabeledSample sample(const GaussianMixture& source, int n, std::uint64_t seed) {
  if (n < 1) throw InvalidArgument("sample: n must be positive");
  std::mt19937_64 rng(seed);
  std::discrete_distribution<int> pick(source.weights().begin(), source.weights().end());
  LabeledSample out{Matrix(n, source.dim()), std::vector<int>(n)};
  for (int i = 0; i < n; ++i) {
    const int l = pick(rng);
    (*out.labels)[i] = l;
    out.points.row(i) = source.component(l).draw(rng).transpose();
  }
  return out;
}

inline LabeledSample sample(const MixingMeasure& source, int n, std::uint64_t seed) {
  if (n < 1) throw InvalidArgument("sample: n must be positive");
  std::mt19937_64 rng(seed);
  std::discrete_distribution<int> pick_atom(source.weights().begin(), source.weights().end());
  std::vector<std::discrete_distribution<int>> pick_comp;
  for (const auto& atom : source.atoms()) pick_comp.emplace_back(atom.weights().begin(), atom.weights().end());
  LabeledSample out{Matrix(n, source.dim()), std::vector<int>(n)};
  for (int i = 0; i < n; ++i) {
    const int k = pick_atom(rng);
    const int l = pick_comp[k](rng);
    (*out.labels)[i] = k;
    out.points.row(i) = source.atom(k).component(l).draw(rng).transpose();
  }
  return out;
}

}  // namespace npmix
