#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "npmix/mixture.hpp"

namespace npmix {

/// Settings for tensor-grid trapezoidal quadrature over R^d, d <= 3.
struct QuadratureSpec {
  /// Initial grid points per axis; 0 picks 2048 / 256 / 64 for d = 1 / 2 / 3.
  int points_per_axis = 0;
  double tol = 1e-7;
  int max_refinements = 4;
  /// Half-width of the integration box in component standard deviations.
  double box_sigmas = 12.0;

  int initial_points(int d) const {
    if (points_per_axis > 0) return points_per_axis;
    return d == 1 ? 2048 : d == 2 ? 256 : 64;
  }

  bool operator==(const QuadratureSpec&) const = default;
};

struct Box {
  std::vector<double> lo, hi;
  int dim() const { return static_cast<int>(lo.size()); }
};

/// Axis-aligned box covering every component mean +/- `sigmas` marginal
/// standard deviations.
inline Box covering_box(const std::vector<const GaussianComponent*>& comps, double sigmas) {
  const int d = comps.front()->dim();
  Box box{std::vector<double>(d, std::numeric_limits<double>::infinity()),
          std::vector<double>(d, -std::numeric_limits<double>::infinity())};
  for (const auto* c : comps) {
    for (int a = 0; a < d; ++a) {
      const double s = sigmas * std::sqrt(c->covariance()(a, a));
      box.lo[a] = std::min(box.lo[a], c->mean()[a] - s);
      box.hi[a] = std::max(box.hi[a], c->mean()[a] + s);
    }
  }
  return box;
}

inline std::vector<const GaussianComponent*> component_pointers(const GaussianMixture& p) {
  std::vector<const GaussianComponent*> out;
  for (const auto& c : p.components()) out.push_back(&c);
  return out;
}

/// Regular tensor grid with trapezoid weights.
struct QuadratureGrid {
  Matrix points;   // d x G
  Vector weights;  // G
};

inline QuadratureGrid tensor_grid(const Box& box, int per_axis) {
  const int d = box.dim();
  if (d < 1 || d > 3) throw DimensionError("quadrature: only 1 <= d <= 3 is supported");
  if (per_axis < 2) throw InvalidArgument("quadrature: need at least 2 points per axis");
  Eigen::Index total = 1;
  for (int a = 0; a < d; ++a) total *= per_axis;
  QuadratureGrid grid{Matrix(d, total), Vector(total)};
  std::vector<double> step(d);
  for (int a = 0; a < d; ++a)
    step[a] = (box.hi[a] - box.lo[a]) / (per_axis - 1);
  std::vector<int> idx(d, 0);
  for (Eigen::Index g = 0; g < total; ++g) {
    double w = 1.0;
    for (int a = 0; a < d; ++a) {
      grid.points(a, g) = box.lo[a] + idx[a] * step[a];
      w *= step[a] * ((idx[a] == 0 || idx[a] == per_axis - 1) ? 0.5 : 1.0);
    }
    grid.weights[g] = w;
    for (int a = d - 1; a >= 0; --a) {
      if (++idx[a] < per_axis) break;
      idx[a] = 0;
    }
  }
  return grid;
}

/// Number of points per axis after `level` nested refinements.
inline int refined_points(int initial, int level) {
  int n = initial;
  for (int i = 0; i < level; ++i) n = 2 * n - 1;
  return n;
}

}  // namespace npmix
