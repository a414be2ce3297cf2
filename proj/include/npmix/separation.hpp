#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>

#include "npmix/hellinger.hpp"
#include "npmix/linkage.hpp"

namespace npmix {

/// Separation scale eta = (largest group diameter) + (largest Hellinger
/// distance between a true atom and its grouped aggregate), compared with the
/// smallest distance between true atoms.
struct SeparationReport {
  double eta = 0.0;
  double diameter_term = 0.0;
  double approximation_term = 0.0;
  double min_between = std::numeric_limits<double>::infinity();
  /// Largest within-group entry of the fitted distance matrix.
  double max_within = 0.0;
  bool satisfied = true;
  /// min_between / eta - 4; +inf when K = 1 or eta = 0.
  double xi_margin = std::numeric_limits<double>::infinity();
  bool vacuous = false;
};

/// `alpha` maps the fitted components onto the atoms of `truth` (group k of
/// alpha corresponds to atom k).
inline SeparationReport eta(const MixingMeasure& truth, const GaussianMixture& fitted, const Assignment& alpha,
                            const QuadratureSpec& quad = {}, int n_dirichlet = 256, std::uint64_t seed = 0) {
  if (alpha.groups() != truth.size()) throw InvalidArgument("eta: assignment group count differs from K");
  if (alpha.size() != fitted.size()) throw InvalidArgument("eta: assignment length differs from L");
  const MixingMeasure grouped = group(fitted, alpha);

  SeparationReport report;
  for (int k = 0; k < truth.size(); ++k) {
    report.diameter_term =
        std::max(report.diameter_term, hellinger_diameter(grouped.atom(k), n_dirichlet, seed + static_cast<std::uint64_t>(k), quad));
    report.approximation_term =
        std::max(report.approximation_term, hellinger_mixture(truth.atom(k), grouped.atom(k), quad).distance);
  }
  report.eta = report.diameter_term + report.approximation_term;

  for (int i = 0; i < fitted.size(); ++i)
    for (int j = i + 1; j < fitted.size(); ++j)
      if (alpha[i] == alpha[j])
        report.max_within = std::max(report.max_within, hellinger_gaussian(fitted.component(i), fitted.component(j)));

  if (truth.size() == 1) {
    report.vacuous = true;
    return report;
  }
  for (int i = 0; i < truth.size(); ++i)
    for (int j = i + 1; j < truth.size(); ++j)
      report.min_between = std::min(report.min_between, hellinger_mixture(truth.atom(i), truth.atom(j), quad).distance);
  report.satisfied = report.min_between > 4.0 * report.eta;
  report.xi_margin = report.eta > 0.0 ? report.min_between / report.eta - 4.0
                                      : std::numeric_limits<double>::infinity();
  return report;
}

/// Population-level report: the fitted mixture is the exact flattened truth.
inline SeparationReport population_eta(const MixingMeasure& truth, const QuadratureSpec& quad = {},
                                       int n_dirichlet = 256, std::uint64_t seed = 0) {
  const auto [flat, alpha] = flatten(truth);
  return eta(truth, flat, alpha, quad, n_dirichlet, seed);
}

}  // namespace npmix
