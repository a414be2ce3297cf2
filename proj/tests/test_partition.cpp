#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <queue>

#include "npmix/datasets.hpp"
#include "npmix/partition.hpp"
#include "npmix/pipeline.hpp"

using namespace npmix;

namespace {

PartitionModel two_gaussians(double m0, double v0, double m1, double v1, double w0 = 0.5) {
  return PartitionModel({w0, 1 - w0}, {GaussianMixture(GaussianComponent::univariate(m0, v0)),
                                       GaussianMixture(GaussianComponent::univariate(m1, v1))});
}

double normal_pdf(double x, double m, double v) {
  return std::exp(-0.5 * (x - m) * (x - m) / v) / std::sqrt(2 * std::numbers::pi * v);
}

Vector at(double x) { return Vector::Constant(1, x); }

// Number of 4-connected regions per label on a 2-d grid.
std::vector<int> regions_per_label(const PartitionGrid& g, int K) {
  const int r = g.resolution;
  std::vector<int> seen(g.cells(), 0), count(K, 0);
  for (int start = 0; start < g.cells(); ++start) {
    if (seen[start]) continue;
    const int label = g.labels[start];
    ++count[label];
    std::queue<int> q;
    q.push(start);
    seen[start] = 1;
    while (!q.empty()) {
      const int c = q.front();
      q.pop();
      const int x = c % r, y = c / r;
      const int nbr[4][2] = {{x - 1, y}, {x + 1, y}, {x, y - 1}, {x, y + 1}};
      for (const auto& n : nbr) {
        if (n[0] < 0 || n[0] >= r || n[1] < 0 || n[1] >= r) continue;
        const int id = n[1] * r + n[0];
        if (!seen[id] && g.labels[id] == label) {
          seen[id] = 1;
          q.push(id);
        }
      }
    }
  }
  return count;
}

}  // namespace

TEST(Classify, TieAtMidpoint) {
  const auto model = two_gaussians(-3, 1, 3, 1);
  const auto c = model.classify(at(0));
  EXPECT_EQ(c.label, 0);
  EXPECT_EQ(c.margin, 0.0);
  EXPECT_FALSE(c.extrapolated);
}

TEST(Classify, AtLeftMean) {
  const auto model = two_gaussians(-3, 1, 3, 1);
  const auto c = model.classify(at(-3));
  EXPECT_EQ(c.label, 0);
  EXPECT_NEAR(c.margin, 0.5 * (normal_pdf(-3, -3, 1) - normal_pdf(-3, 3, 1)), 1e-15);
}

TEST(Classify, VarianceCrossing) {
  const auto model = two_gaussians(0, 1, 0, 9);
  // Bisection on the density difference for the crossing in (0, 10).
  auto diff = [](double x) { return normal_pdf(x, 0, 1) - normal_pdf(x, 0, 9); };
  double lo = 0, hi = 10;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (diff(mid) > 0 ? lo : hi) = mid;
  }
  const double crossing = lo;
  for (double s : {-1.0, 1.0}) {
    EXPECT_EQ(model.classify(at(s * (crossing - 1e-6))).label, 0);
    EXPECT_EQ(model.classify(at(s * (crossing + 1e-6))).label, 1);
  }
}

TEST(Classify, ExtrapolatesToNearestMean) {
  const auto model = two_gaussians(-1, 0.01, 1, 0.01);
  const auto c = model.classify(at(1e4));
  EXPECT_TRUE(c.extrapolated);
  EXPECT_EQ(c.label, 1);
}

TEST(Classify, RowsMatchPointwise) {
  const auto model = two_gaussians(-2, 1, 3, 4, 0.3);
  Matrix pts(50, 1);
  for (int i = 0; i < 50; ++i) pts(i, 0) = -6 + 0.25 * i;
  const auto rows = model.classify_rows(pts);
  for (int i = 0; i < 50; ++i) {
    const auto c = model.classify(at(pts(i, 0)));
    EXPECT_EQ(rows[i].label, c.label);
    EXPECT_NEAR(rows[i].margin, c.margin, 1e-15);
  }
}

TEST(Classify, LabelIsArgmaxOfWeightedDensity) {
  const auto m = make_mog(3, {2, 2, 2}, 4, 1, 2, 7);
  const PartitionModel model(m);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-8, 8);
  for (int t = 0; t < 200; ++t) {
    Vector x(2);
    x << u(rng), u(rng);
    const auto w = model.weighted_densities(x);
    const auto c = model.classify(x);
    if (c.extrapolated) continue;
    for (double v : w) EXPECT_LE(v, w[c.label]);
  }
}

TEST(ExceptionalMass, LargeThresholdCoversEverything) {
  const auto model = two_gaussians(-1, 1, 1, 1);
  EXPECT_EQ(exceptional_mass(model, 10.0, GaussianMixture(GaussianComponent::univariate(0, 4)), 2000, 1), 1.0);
}

TEST(ExceptionalMass, SingleGroupIsZero) {
  const PartitionModel model({1.0}, {GaussianMixture(GaussianComponent::univariate(0, 1))});
  EXPECT_EQ(exceptional_mass(model, 0.5, GaussianMixture(GaussianComponent::univariate(0, 1)), 100, 1), 0.0);
}

TEST(ExceptionalMass, MatchesQuadrature) {
  const auto model = two_gaussians(-1, 1, 1, 1);
  const double t = 0.01;
  const int n = 20000;
  const GaussianMixture reference({0.5, 0.5}, {GaussianComponent::univariate(-1, 1), GaussianComponent::univariate(1, 1)});
  // Trapezoid rule on the indicator times the reference density.
  double exact = 0;
  const double h = 1e-4;
  for (double x = -12; x <= 12; x += h) {
    const double gap = std::abs(0.5 * normal_pdf(x, -1, 1) - 0.5 * normal_pdf(x, 1, 1));
    if (gap <= t) exact += h * (0.5 * normal_pdf(x, -1, 1) + 0.5 * normal_pdf(x, 1, 1));
  }
  const double mc = exceptional_mass(model, t, reference, n, 5);
  const double se = std::sqrt(exact * (1 - exact) / n);
  EXPECT_NEAR(mc, exact, 3 * se);
}

TEST(ExceptionalMass, MonotoneInThreshold) {
  const auto model = two_gaussians(-1, 1, 2, 2, 0.4);
  const GaussianMixture reference(GaussianComponent::univariate(0, 4));
  double previous = 0;
  for (double t : {0.0, 0.001, 0.01, 0.05, 0.1, 0.5}) {
    const double m = exceptional_mass(model, t, reference, 5000, 9);
    EXPECT_GE(m, previous);
    previous = m;
  }
}

TEST(ExceptionalMass, RejectsBadArguments) {
  const auto model = two_gaussians(-1, 1, 1, 1);
  const GaussianMixture reference(GaussianComponent::univariate(0, 1));
  EXPECT_THROW(exceptional_mass(model, -0.1, reference, 10, 1), InvalidArgument);
  EXPECT_THROW(exceptional_mass(model, 0.1, reference, 0, 1), InvalidArgument);
}

TEST(Grid, SingleGroupIsConstant) {
  const PartitionModel model({1.0}, {GaussianMixture(GaussianComponent::univariate(0, 1))});
  const auto g = partition_grid(model, {{-3, 3}}, 50);
  for (int l : g.labels) EXPECT_EQ(l, 0);
}

TEST(Grid, SymmetricModelFlipsOnceAtMidpoint) {
  const auto model = two_gaussians(-2, 1, 2, 1);
  const auto g = partition_grid(model, {{-5, 5}}, 101);
  int flips = 0, where = -1;
  for (int c = 1; c < g.cells(); ++c)
    if (g.labels[c] != g.labels[c - 1]) ++flips, where = c;
  EXPECT_EQ(flips, 1);
  EXPECT_LE(std::abs(g.coordinate(0, where)), 0.1 + 1e-12);
}

TEST(Grid, RejectsUnsupportedShapes) {
  const auto model = two_gaussians(-2, 1, 2, 1);
  EXPECT_THROW(partition_grid(model, {{-1, 1}, {-1, 1}}, 10), DimensionError);
  EXPECT_THROW(partition_grid(model, {{-1, 1}}, 1), InvalidArgument);
}

TEST(Grid, MoonsRegionsAreConnected) {
  const auto data = generate(dataset_spec("moons_balanced", 42), 2000);
  NpmixOptions opt;
  opt.K = 2;
  opt.seed = 42;
  const auto result = run_npmix(data.points, opt);
  const auto g = partition_grid(result.partition, {{-1.5, 2.5}, {-1.0, 1.5}}, 120);
  const auto regions = regions_per_label(g, 2);
  EXPECT_EQ(regions[0], 1);
  EXPECT_EQ(regions[1], 1);
  // Every fitted component mean is classified into its own group.
  for (int l = 0; l < result.fit.mixture.size(); ++l)
    EXPECT_EQ(result.partition.classify(result.fit.mixture.component(l).mean()).label, result.assignment[l]);
}

TEST(Agreement, IdenticalAndRelabeled) {
  const auto model = two_gaussians(-2, 1, 2, 1);
  const auto swapped = two_gaussians(2, 1, -2, 1);
  const auto a = partition_grid(model, {{-5, 5}}, 101);
  const auto b = partition_grid(swapped, {{-5, 5}}, 101);
  EXPECT_EQ(partition_agreement(a, a, 0.0), 1.0);
  EXPECT_EQ(partition_agreement(a, b, 0.0), 1.0);
}

TEST(Agreement, ExcludesLowMarginCells) {
  const auto model = two_gaussians(-2, 1, 2, 1);
  const auto shifted = two_gaussians(-1.5, 1, 2.5, 1);
  const auto a = partition_grid(model, {{-5, 5}}, 101);
  const auto b = partition_grid(shifted, {{-5, 5}}, 101);
  EXPECT_LT(partition_agreement(a, b, 0.0), 1.0);
  EXPECT_EQ(partition_agreement(a, b, 0.1), 1.0);
  EXPECT_THROW(partition_agreement(a, partition_grid(model, {{-5, 5}}, 100), 0.0), InvalidArgument);
}

TEST(Agreement, EndToEndOnWellSeparatedFamily) {
  const auto truth = make_mog(2, {3, 3}, 20, 1, 1, 1);
  const PartitionModel true_model(truth);
  const auto data = sample(truth, 8000, 3);
  NpmixOptions opt;
  opt.K = 2;
  opt.L = 20;
  opt.seed = 3;
  const auto result = run_npmix(data.points, opt);
  double lo = 1e300, hi = -1e300;
  for (const auto& a : truth.atoms())
    for (const auto& c : a.components()) lo = std::min(lo, c.mean()[0] - 4), hi = std::max(hi, c.mean()[0] + 4);
  const auto g_true = partition_grid(true_model, {{lo, hi}}, 2000);
  const auto g_est = partition_grid(result.partition, {{lo, hi}}, 2000);
  EXPECT_GE(partition_agreement(g_true, g_est, 0.01), 0.95);
}

TEST(EnclosingT, ZeroWhenLabelsAgree) {
  const auto model = two_gaussians(-2, 1, 2, 1);
  Matrix pts(3, 1);
  pts << -3, 0.5, 3;
  const auto labels = model.labels(pts);
  EXPECT_EQ(smallest_enclosing_t(model, pts, labels, labels), 0.0);
  std::vector<int> wrong = labels;
  wrong[1] = 1 - wrong[1];
  EXPECT_NEAR(smallest_enclosing_t(model, pts, labels, wrong), model.min_pair_gap(at(0.5)), 1e-15);
}
