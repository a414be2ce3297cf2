#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "npmix/mixture.hpp"

namespace npmix {

/// Named generator plus its parameters. Every numeric default below is a
/// reconstruction choice for these models, exposed through `params`.
struct DatasetSpec {
  std::string name;
  int K = 0;
  int d = 0;
  std::map<std::string, double> params;
  std::uint64_t seed = 0;

  double param(const std::string& key) const {
    auto it = params.find(key);
    if (it == params.end()) throw InvalidArgument("DatasetSpec: missing parameter '" + key + "'");
    return it->second;
  }

  bool operator==(const DatasetSpec&) const = default;
};

inline const std::vector<std::string>& dataset_names() {
  static const std::vector<std::string> names{"gauss_gamma",    "gumbel",           "poly",   "sobolev",
                                              "moons_balanced", "moons_unbalanced", "target", "mog_family"};
  return names;
}

/// Spec for a named model with its default parameters; `overrides` replace
/// defaults (for mog_family they may also set K and d).
inline DatasetSpec dataset_spec(const std::string& name, std::uint64_t seed = 0,
                                const std::map<std::string, double>& overrides = {}) {
  DatasetSpec s{name, 0, 0, {}, seed};
  if (name == "gauss_gamma") {
    s.K = 4, s.d = 1;
  } else if (name == "gumbel") {
    s.K = 3, s.d = 1;
    s.params = {{"gumbel_scale", 0.8}, {"spread", 8.0}};
  } else if (name == "poly") {
    s.K = 2, s.d = 1;
  } else if (name == "sobolev") {
    s.K = 3, s.d = 1;
    s.params = {{"terms", 10}, {"model_seed", 11}};
  } else if (name == "moons_balanced") {
    s.K = 2, s.d = 2;
    s.params = {{"noise", 0.12}, {"weight", 0.5}};
  } else if (name == "moons_unbalanced") {
    s.K = 2, s.d = 2;
    s.params = {{"noise", 0.12}, {"weight", 0.85}};
  } else if (name == "target") {
    s.K = 6, s.d = 2;
  } else if (name == "mog_family") {
    s.K = 3, s.d = 1;
    s.params = {{"atoms", 3}, {"gap", 20.0}, {"scale", 1.0}, {"model_seed", 1}};
  } else {
    throw InvalidArgument("unknown dataset '" + name + "'");
  }
  for (const auto& [key, value] : overrides) {
    if (name == "mog_family" && key == "K") {
      s.K = static_cast<int>(value);
    } else if (name == "mog_family" && key == "d") {
      s.d = static_cast<int>(value);
    } else {
      if (!s.params.count(key)) throw InvalidArgument("dataset '" + name + "' has no parameter '" + key + "'");
      s.params[key] = value;
    }
  }
  return s;
}

namespace detail {

inline std::vector<double> smoothed_dirichlet(int m, std::mt19937_64& rng) {
  std::exponential_distribution<double> expo(1.0);
  std::vector<double> w(m);
  double s = 0.0;
  for (auto& x : w) s += (x = expo(rng));
  for (auto& x : w) x = 0.5 * x / s + 0.5 / m;
  return w;
}

inline Matrix random_rotation(int d, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix g(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) g(i, j) = normal(rng);
  Eigen::HouseholderQR<Matrix> qr(g);
  return qr.householderQ() * Matrix::Identity(d, d);
}

}  // namespace detail

/// Random mixture of Gaussian mixtures with K groups. Group centers are at
/// least `mean_gap` apart and each has a neighbour within 1.1 * mean_gap; each group's component means lie within
/// 0.15 * within_scale of its center (per axis) and its covariances are
/// within_scale^2 times a rotated diagonal with entries in [0.85, 1.15], so
/// groups stay compact in Hellinger distance. Components are never shared
/// between groups.
inline MixingMeasure make_mog(int K, const std::vector<int>& atoms_per_group, double mean_gap, double within_scale,
                              int d, std::uint64_t seed) {
  if (K < 1) throw InvalidArgument("make_mog: K must be positive");
  if (static_cast<int>(atoms_per_group.size()) != K) throw InvalidArgument("make_mog: need one atom count per group");
  if (!(mean_gap > 0.0) || !(within_scale > 0.0)) throw InvalidArgument("make_mog: gap and scale must be positive");
  if (d < 1) throw InvalidArgument("make_mog: d must be positive");
  std::mt19937_64 rng(seed);

  // Each new center sits between mean_gap and 1.1 * mean_gap from a random
  // earlier one, so neighbouring groups are roughly mean_gap apart.
  std::uniform_real_distribution<double> radius(mean_gap, 1.1 * mean_gap);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<Vector> centers{Vector::Zero(d)};
  for (int attempt = 0; static_cast<int>(centers.size()) < K; ++attempt) {
    if (attempt > 100000) {
      // Fallback layout: centers on the first axis.
      centers.clear();
      for (int k = 0; k < K; ++k) {
        Vector c = Vector::Zero(d);
        c[0] = k * mean_gap;
        centers.push_back(c);
      }
      break;
    }
    const auto& anchor = centers[std::uniform_int_distribution<std::size_t>(0, centers.size() - 1)(rng)];
    Vector dir(d);
    for (int a = 0; a < d; ++a) dir[a] = normal(rng);
    if (!(dir.norm() > 0.0)) continue;
    const Vector c = anchor + radius(rng) * dir.normalized();
    bool ok = true;
    for (const auto& other : centers) ok = ok && (c - other).norm() >= mean_gap;
    if (ok) centers.push_back(c);
  }

  std::uniform_real_distribution<double> offset(-0.15 * within_scale, 0.15 * within_scale);
  std::uniform_real_distribution<double> spread(0.85, 1.15);
  std::vector<GaussianMixture> atoms;
  for (int k = 0; k < K; ++k) {
    const int m = atoms_per_group[k];
    if (m < 1) throw InvalidArgument("make_mog: every group needs at least one component");
    std::vector<GaussianComponent> comps;
    for (int l = 0; l < m; ++l) {
      Vector mean = centers[k];
      for (int a = 0; a < d; ++a) mean[a] += offset(rng);
      Vector diag(d);
      for (int a = 0; a < d; ++a) diag[a] = spread(rng) * within_scale * within_scale;
      const Matrix rot = detail::random_rotation(d, rng);
      comps.emplace_back(mean, rot * diag.asDiagonal() * rot.transpose());
    }
    atoms.emplace_back(detail::smoothed_dirichlet(m, rng), std::move(comps));
  }
  return MixingMeasure(detail::smoothed_dirichlet(K, rng), std::move(atoms));
}

/// Per-label sampler for a dataset: weights over labels plus a draw function.
struct GeneratorModel {
  int d = 1;
  std::vector<double> weights;
  std::function<Vector(int, std::mt19937_64&)> draw;
  /// Set when every label is itself a Gaussian mixture.
  std::optional<MixingMeasure> population;
};

namespace detail {

inline GeneratorModel from_measure(MixingMeasure m) {
  auto shared = std::make_shared<const MixingMeasure>(std::move(m));
  GeneratorModel g;
  g.d = shared->dim();
  g.weights = shared->weights();
  g.draw = [shared](int k, std::mt19937_64& rng) {
    const auto& atom = shared->atom(k);
    std::discrete_distribution<int> pick(atom.weights().begin(), atom.weights().end());
    return atom.component(pick(rng)).draw(rng);
  };
  g.population = *shared;
  return g;
}

inline Vector scalar(double x) { return Vector::Constant(1, x); }

/// Rejection sampler on [lo, hi] for an unnormalized density bounded by `bound`.
inline double reject_uniform(const std::function<double(double)>& f, double lo, double hi, double bound,
                             std::mt19937_64& rng) {
  std::uniform_real_distribution<double> x(lo, hi), u(0.0, bound);
  for (;;) {
    const double v = x(rng);
    if (u(rng) <= f(v)) return v;
  }
}

inline MixingMeasure target_measure() {
  // Dense center disk, a ring around it and four small corner clouds.
  std::vector<GaussianMixture> atoms;
  {
    std::vector<GaussianComponent> comps;
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < 5; ++j) {
        Vector mu(2);
        mu << -0.5 + 0.25 * i, -0.5 + 0.25 * j;
        comps.emplace_back(mu, Matrix::Identity(2, 2) * 0.0625);
      }
    atoms.emplace_back(std::vector<double>(25, 1.0 / 25), std::move(comps));
  }
  {
    std::vector<GaussianComponent> comps;
    for (int i = 0; i < 100; ++i) {
      const double a = 2.0 * std::numbers::pi * i / 100.0;
      Vector mu(2);
      mu << 3.0 * std::cos(a), 3.0 * std::sin(a);
      comps.emplace_back(mu, Matrix::Identity(2, 2) * 0.0225);
    }
    atoms.emplace_back(std::vector<double>(100, 1.0 / 100), std::move(comps));
  }
  const int corner_sizes[4] = {5, 5, 4, 4};
  const double corner_x[4] = {4.5, -4.5, -4.5, 4.5};
  const double corner_y[4] = {4.5, 4.5, -4.5, -4.5};
  std::mt19937_64 rng(143);
  std::uniform_real_distribution<double> jitter(-0.2, 0.2);
  for (int c = 0; c < 4; ++c) {
    std::vector<GaussianComponent> comps;
    for (int l = 0; l < corner_sizes[c]; ++l) {
      Vector mu(2);
      mu << corner_x[c] + jitter(rng), corner_y[c] + jitter(rng);
      comps.emplace_back(mu, Matrix::Identity(2, 2) * 0.0225);
    }
    atoms.emplace_back(std::vector<double>(corner_sizes[c], 1.0 / corner_sizes[c]), std::move(comps));
  }
  return MixingMeasure({0.35, 0.55, 0.025, 0.025, 0.025, 0.025}, std::move(atoms));
}

}  // namespace detail

/// Unnormalized Sobolev-type density profile (1 + sum_j c_j cos(j x))^2 with
/// c_j ~ N(0, j^-2); multiplied by a standard normal envelope when sampling.
struct SobolevProfile {
  std::vector<double> coef;

  double operator()(double x) const {
    double s = 1.0;
    for (std::size_t j = 0; j < coef.size(); ++j) s += coef[j] * std::cos((j + 1.0) * x);
    return s * s;
  }

  /// Upper bound over the real line; the profile is 2 pi periodic.
  double bound() const {
    double m = 0.0;
    for (int i = 0; i < 8192; ++i) m = std::max(m, (*this)(2.0 * std::numbers::pi * i / 8192));
    double slope = 0.0;
    for (std::size_t j = 0; j < coef.size(); ++j) slope += (j + 1.0) * std::abs(coef[j]);
    double amp = 1.0;
    for (double c : coef) amp += std::abs(c);
    return m + 2.0 * amp * slope * (2.0 * std::numbers::pi / 8192);
  }
};

inline std::vector<SobolevProfile> sobolev_profiles(const DatasetSpec& spec) {
  std::mt19937_64 rng(static_cast<std::uint64_t>(spec.param("model_seed")));
  const int terms = static_cast<int>(spec.param("terms"));
  std::vector<SobolevProfile> out(spec.K);
  for (auto& p : out)
    for (int j = 1; j <= terms; ++j) p.coef.push_back(std::normal_distribution<double>(0.0, 1.0 / j)(rng));
  return out;
}

inline GeneratorModel generator_model(const DatasetSpec& spec) {
  const DatasetSpec ref = dataset_spec(spec.name);
  if (spec.name != "mog_family" && (spec.K != ref.K || spec.d != ref.d))
    throw InvalidArgument("dataset '" + spec.name + "': K and d must match the model definition");
  GeneratorModel g;
  g.d = spec.d;
  const std::string& name = spec.name;
  if (name == "gauss_gamma") {
    g.weights = {0.25, 0.25, 0.25, 0.25};
    g.draw = [](int k, std::mt19937_64& rng) {
      switch (k) {
        case 0: return detail::scalar(std::normal_distribution<double>(-6.0, 1.0)(rng));
        case 1: return detail::scalar(std::normal_distribution<double>(0.0, std::sqrt(0.8))(rng));
        case 2: return detail::scalar(4.0 + std::gamma_distribution<double>(3.0, 1.0)(rng));
        default: {
          const double center = std::bernoulli_distribution(0.5)(rng) ? 10.0 : 12.0;
          return detail::scalar(std::normal_distribution<double>(center, std::sqrt(0.5))(rng));
        }
      }
    };
  } else if (name == "gumbel") {
    g.weights = {1.0 / 3, 1.0 / 3, 1.0 / 3};
    const double spread = spec.param("spread"), scale = spec.param("gumbel_scale");
    g.draw = [spread, scale](int k, std::mt19937_64& rng) {
      const double loc = (k - 1) * spread;
      return detail::scalar(std::normal_distribution<double>(loc, 1.0)(rng) +
                            std::extreme_value_distribution<double>(0.0, scale)(rng));
    };
  } else if (name == "poly") {
    g.weights = {0.5, 0.5};
    g.draw = [](int k, std::mt19937_64& rng) {
      if (k == 0) {
        const double x = detail::reject_uniform([](double v) { return (1 - v * v) * (1 - v * v); }, -1.0, 1.0, 1.0, rng);
        return detail::scalar(x - 1.2);
      }
      const double x = detail::reject_uniform([](double v) { return v * (1 - v); }, 0.0, 1.0, 0.25, rng);
      return detail::scalar(x + 0.2);
    };
  } else if (name == "sobolev") {
    g.weights = {1.0 / 3, 1.0 / 3, 1.0 / 3};
    auto profiles = std::make_shared<std::vector<SobolevProfile>>(sobolev_profiles(spec));
    auto bounds = std::make_shared<std::vector<double>>();
    for (const auto& p : *profiles) bounds->push_back(p.bound());
    g.draw = [profiles, bounds](int k, std::mt19937_64& rng) {
      std::normal_distribution<double> envelope(0.0, 1.0);
      std::uniform_real_distribution<double> u(0.0, 1.0);
      for (;;) {
        const double z = envelope(rng);
        if (u(rng) * (*bounds)[k] <= (*profiles)[k](z)) return detail::scalar(z + 7.0 * (k - 1));
      }
    };
  } else if (name == "moons_balanced" || name == "moons_unbalanced") {
    const double w = spec.param("weight");
    g.weights = {w, 1.0 - w};
    const double noise = spec.param("noise");
    g.draw = [noise](int k, std::mt19937_64& rng) {
      const double t = std::uniform_real_distribution<double>(0.0, std::numbers::pi)(rng);
      std::normal_distribution<double> eps(0.0, noise);
      Vector x(2);
      if (k == 0) {
        x << std::cos(t), std::sin(t);
      } else {
        x << 1.0 - std::cos(t), 0.5 - std::sin(t);
      }
      x[0] += eps(rng);
      x[1] += eps(rng);
      return x;
    };
  } else if (name == "target") {
    g = detail::from_measure(detail::target_measure());
  } else if (name == "mog_family") {
    const int atoms = static_cast<int>(spec.param("atoms"));
    g = detail::from_measure(make_mog(spec.K, std::vector<int>(spec.K, atoms), spec.param("gap"), spec.param("scale"),
                                      spec.d, static_cast<std::uint64_t>(spec.param("model_seed"))));
  } else {
    throw InvalidArgument("unknown dataset '" + name + "'");
  }
  return g;
}

/// n labeled draws: label from the model weights, then the label's sampler.
inline LabeledSample generate(const DatasetSpec& spec, int n) {
  if (n < spec.K) throw InvalidArgument("generate: need n >= K");
  const GeneratorModel model = generator_model(spec);
  std::mt19937_64 rng(spec.seed);
  std::discrete_distribution<int> pick(model.weights.begin(), model.weights.end());
  LabeledSample out{Matrix(n, model.d), std::vector<int>(n)};
  for (int i = 0; i < n; ++i) {
    const int k = pick(rng);
    (*out.labels)[i] = k;
    out.points.row(i) = model.draw(k, rng).transpose();
  }
  return out;
}

/// n draws from label k's sampler only.
inline Matrix sample_component(const DatasetSpec& spec, int k, int n, std::uint64_t seed) {
  const GeneratorModel model = generator_model(spec);
  if (k < 0 || k >= static_cast<int>(model.weights.size())) throw InvalidArgument("sample_component: bad label");
  std::mt19937_64 rng(seed);
  Matrix out(n, model.d);
  for (int i = 0; i < n; ++i) out.row(i) = model.draw(k, rng).transpose();
  return out;
}

}  // namespace npmix
