#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "npmix/benchmark.hpp"
#include "npmix/evaluation.hpp"

using namespace npmix;

namespace {

// Rand-index pair counting by enumerating every pair, then the adjusted
// form from the resulting 2x2 pair table.
double ari_by_pairs(const std::vector<int>& a, const std::vector<int>& b) {
  double both = 0, only_a = 0, only_b = 0, neither = 0;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = i + 1; j < a.size(); ++j) {
      const bool sa = a[i] == a[j], sb = b[i] == b[j];
      both += sa && sb;
      only_a += sa && !sb;
      only_b += !sa && sb;
      neither += !sa && !sb;
    }
  const double total = both + only_a + only_b + neither;
  const double pa = both + only_a, pb = both + only_b;
  const double expected = pa * pb / total;
  const double max_index = 0.5 * (pa + pb);
  if (max_index == expected) return 1.0;
  return (both - expected) / (max_index - expected);
}

std::vector<int> random_labels(std::mt19937_64& rng, int n, int K) {
  std::uniform_int_distribution<int> u(0, K - 1);
  std::vector<int> out(n);
  for (int& x : out) x = u(rng);
  return out;
}

DatasetSpec blobs(std::uint64_t seed = 0) {
  return dataset_spec("mog_family", seed, {{"K", 2}, {"d", 2}, {"atoms", 1}, {"gap", 30.0}});
}

}  // namespace

TEST(Ari, IdenticalAndRelabeled) {
  const std::vector<int> a{0, 0, 1, 1, 2, 2, 2};
  EXPECT_EQ(ari(a, a), 1.0);
  std::vector<int> b;
  for (int x : a) b.push_back((x + 1) % 3);
  EXPECT_EQ(ari(a, b), 1.0);
}

TEST(Ari, FourPointExample) {
  const std::vector<int> a{0, 0, 1, 1}, b{0, 1, 0, 1};
  EXPECT_NEAR(ari(a, b), ari_by_pairs(a, b), 1e-15);
  EXPECT_NEAR(ari(a, b), -0.5, 1e-15);
}

TEST(Ari, MatchesPairEnumeration) {
  std::mt19937_64 rng(1);
  for (int t = 0; t < 50; ++t) {
    const int n = 2 + t;
    const auto a = random_labels(rng, n, 3), b = random_labels(rng, n, 4);
    EXPECT_NEAR(ari(a, b), ari_by_pairs(a, b), 1e-12);
  }
}

TEST(Ari, SymmetricExactly) {
  std::mt19937_64 rng(2);
  for (int t = 0; t < 50; ++t) {
    const auto a = random_labels(rng, 100, 3), b = random_labels(rng, 100, 5);
    EXPECT_EQ(ari(a, b), ari(b, a));
  }
}

TEST(Ari, RandomLabelingsAverageZero) {
  std::mt19937_64 rng(3);
  double mean = 0;
  for (int t = 0; t < 1000; ++t) mean += ari(random_labels(rng, 200, 3), random_labels(rng, 200, 3));
  mean /= 1000;
  EXPECT_GE(mean, -0.05);
  EXPECT_LE(mean, 0.05);
}

TEST(Ari, RejectsBadInput) {
  EXPECT_THROW(ari({0, 1}, {0}), InvalidArgument);
  EXPECT_THROW(ari({0}, {0}), InvalidArgument);
}

TEST(Matching, IdentityAndTransposition) {
  const std::vector<int> a{0, 0, 1, 1, 1};
  EXPECT_EQ(match_clusters(a, a), (std::vector<int>{0, 1}));
  const std::vector<int> b{1, 1, 0, 0, 0};
  EXPECT_EQ(match_clusters(a, b), (std::vector<int>{1, 0}));
}

TEST(Matching, MatchesFactorialSearch) {
  std::mt19937_64 rng(4);
  for (int t = 0; t < 20; ++t) {
    const auto a = random_labels(rng, 50, 4), b = random_labels(rng, 50, 4);
    auto count = [&](const std::vector<int>& perm) {
      int same = 0;
      for (int i = 0; i < 50; ++i) same += a[i] == perm[b[i]];
      return same;
    };
    std::vector<int> perm{0, 1, 2, 3};
    int best = 0;
    do best = std::max(best, count(perm));
    while (std::next_permutation(perm.begin(), perm.end()));
    EXPECT_EQ(count(match_clusters(a, b)), best);
  }
}

TEST(Matching, PadsUnequalLabelCounts) {
  const std::vector<int> a{0, 0, 1, 1, 2}, b{0, 0, 1, 1, 1};
  const auto perm = match_clusters(a, b);
  ASSERT_EQ(perm.size(), 3u);
  const auto matched = relabel(b, perm);
  EXPECT_EQ(std::vector<int>(matched.begin(), matched.begin() + 4), (std::vector<int>{0, 0, 1, 1}));
}

TEST(Baselines, SeparatedBlobsAreTrivial) {
  const auto data = generate(blobs(5), 400);
  const auto& truth = *data.labels;
  EXPECT_EQ(ari(truth, baseline_kmeans(data.points, 2, 1)), 1.0);
  EXPECT_EQ(ari(truth, baseline_slink_points(data.points, 2)), 1.0);
  EXPECT_EQ(ari(truth, baseline_gmm(data.points, 2, 1)), 1.0);
  EXPECT_EQ(ari(truth, baseline_spectral(data.points, 2, 1)), 1.0);
}

TEST(Baselines, SingleLinkageChainsLowNoiseMoons) {
  const auto data = generate(dataset_spec("moons_balanced", 6, {{"noise", 0.05}}), 1000);
  EXPECT_EQ(ari(*data.labels, baseline_slink_points(data.points, 2)), 1.0);
}

TEST(Baselines, KMeansOnBalancedMoonsNearReportedValue) {
  double mean = 0;
  const int runs = 20;
  for (int r = 0; r < runs; ++r) {
    const auto data = generate(dataset_spec("moons_balanced", derive_seed(7, 0, r)), 2000);
    mean += ari(*data.labels, baseline_kmeans(data.points, 2, r));
  }
  mean /= runs;
  EXPECT_NEAR(mean, 0.502, 0.15);
}

TEST(Baselines, GmmCloseToBayesWhenWellSpecified) {
  const auto truth = make_mog(3, {1, 1, 1}, 3, 1, 2, 8);
  const PartitionModel bayes(truth);
  std::vector<double> gaps;
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto data = sample(truth, 5000, 100 + s);
    const double bayes_ari = ari(*data.labels, bayes.labels(data.points));
    gaps.push_back(ari(*data.labels, baseline_gmm(data.points, 3, s)) - bayes_ari);
  }
  std::sort(gaps.begin(), gaps.end());
  EXPECT_GE(0.5 * (gaps[4] + gaps[5]), -0.05);
}

TEST(Baselines, SpectralRejectsCoincidentPoints) {
  EXPECT_THROW(baseline_spectral(Matrix::Ones(10, 2), 2, 0), DegenerateInputError);
}

TEST(Baselines, SpectralEigenSolversAgree) {
  std::mt19937_64 rng(9);
  Matrix a = Matrix::Random(40, 40);
  Matrix sym = 0.5 * (a + a.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym);
  // Shift to make the spectrum non-negative, then compare top subspaces.
  sym -= es.eigenvalues().minCoeff() * Matrix::Identity(40, 40);
  sym /= sym.norm();
  const Matrix top = detail::top_eigenvectors(sym, 3, rng);
  Eigen::SelfAdjointEigenSolver<Matrix> es2(sym);
  const Matrix ref = es2.eigenvectors().rightCols(3);
  const Matrix overlap = ref.transpose() * top;
  EXPECT_NEAR(std::abs(overlap.determinant()), 1.0, 1e-6);
}

TEST(Benchmark, BlobsScoreOneForEveryMethod) {
  const auto out = run_benchmark(method_names(), {blobs()}, 1, 400, 11);
  ASSERT_EQ(out.results.size(), method_names().size());
  for (const auto& r : out.results) {
    EXPECT_EQ(r.mean_ari, 1.0) << r.method;
    EXPECT_EQ(r.failures, 0) << r.method;
  }
}

TEST(Benchmark, ReproducibleAcrossThreadCounts) {
  const std::vector<std::string> methods{"npmix", "kmeans", "single_linkage"};
  const std::vector<DatasetSpec> sets{dataset_spec("moons_balanced"), dataset_spec("gumbel")};
  const auto a = run_benchmark(methods, sets, 3, 300, 12, 1);
  const auto b = run_benchmark(methods, sets, 3, 300, 12, 3);
  ASSERT_EQ(a.runs.size(), b.runs.size());
  for (std::size_t i = 0; i < a.runs.size(); ++i) {
    EXPECT_EQ(a.runs[i].method, b.runs[i].method);
    EXPECT_EQ(a.runs[i].dataset, b.runs[i].dataset);
    EXPECT_EQ(a.runs[i].seed, b.runs[i].seed);
    EXPECT_EQ(a.runs[i].ari, b.runs[i].ari);
  }
  // Methods see the same sample within a (dataset, run) pair.
  EXPECT_EQ(a.runs[0].seed, a.runs[6].seed);
}

TEST(Benchmark, SummaryMatchesValues) {
  const auto r = summarize("m", "d", {0.2, 0.9, 0.5, 0.4}, 1);
  EXPECT_EQ(r.runs, 4);
  EXPECT_NEAR(r.mean_ari, 0.5, 1e-12);
  EXPECT_NEAR(r.median_ari, 0.45, 1e-12);
  const double var = (0.09 + 0.16 + 0 + 0.01) / 3;
  EXPECT_NEAR(r.std_ari, std::sqrt(var), 1e-12);
  EXPECT_EQ(r.failures, 1);
}

TEST(Benchmark, FailedRunsScoreZero) {
  auto spec = dataset_spec("poly");
  const auto out = run_benchmark({"no_such_method"}, {spec}, 2, 50, 13);
  EXPECT_EQ(out.results[0].failures, 2);
  EXPECT_EQ(out.results[0].mean_ari, 0.0);
  EXPECT_THROW(run_benchmark({"kmeans"}, {spec}, 0, 50, 13), InvalidArgument);
}
