// Cluster the balanced moons with NPMIX and compare against k-means.

#include <iostream>

#include "npmix/npmix.hpp"

int main() {
  const auto spec = npmix::dataset_spec("moons_balanced", /*seed=*/42);
  const auto data = npmix::generate(spec, 2000);

  npmix::NpmixOptions opt;
  opt.K = 2;
  opt.seed = 42;
  const auto result = npmix::run_npmix(data.points, opt);

  std::cout << "L = " << result.em.components << ", log-likelihood " << result.fit.log_likelihood << '\n';
  for (int k = 0; k < result.assignment.groups(); ++k)
    std::cout << "group " << k + 1 << ": " << result.assignment.members(k).size() << " components, weight "
              << result.measure.weight(k) << '\n';
  std::cout << "NPMIX ARI   " << npmix::ari(*data.labels, result.labels) << '\n';
  std::cout << "k-means ARI " << npmix::ari(*data.labels, npmix::baseline_kmeans(data.points, 2, 42)) << '\n';
}
