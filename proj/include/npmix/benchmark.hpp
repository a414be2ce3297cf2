#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <exception>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <thread>
#include <vector>

#include "npmix/datasets.hpp"
#include "npmix/evaluation.hpp"
#include "npmix/pipeline.hpp"

namespace npmix {

/// Runs fn(0..count-1) on up to `threads` workers. Each index writes its own
/// slot, so results do not depend on scheduling.
inline void parallel_for(int count, int threads, const std::function<void(int)>& fn) {
  threads = std::max(1, std::min(threads, count));
  if (threads == 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::exception_ptr> errors(threads);
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t)
    pool.emplace_back([&, t] {
      try {
        for (int i = next++; i < count; i = next++) fn(i);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

inline int default_threads() { return std::max(1u, std::thread::hardware_concurrency()); }

/// splitmix64 finalizer; used to derive independent per-run seeds.
inline std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b) {
  return mix_seed(mix_seed(mix_seed(base) ^ a) ^ b);
}

inline const std::vector<std::string>& method_names() {
  static const std::vector<std::string> names{"npmix", "kmeans", "spectral", "single_linkage", "gmm"};
  return names;
}

/// Labels from one named method on one sample.
inline std::vector<int> run_method(const std::string& method, const Matrix& points, int K, std::uint64_t seed,
                                   const NpmixOptions& npmix_options = {}) {
  if (method == "npmix") {
    NpmixOptions opt = npmix_options;
    opt.K = K;
    opt.seed = seed;
    return run_npmix(points, opt).labels;
  }
  if (method == "kmeans") return baseline_kmeans(points, K, seed);
  if (method == "spectral") return baseline_spectral(points, K, seed);
  if (method == "single_linkage") return baseline_slink_points(points, K);
  if (method == "gmm") return baseline_gmm(points, K, seed);
  throw InvalidArgument("unknown method '" + method + "'");
}

struct BenchmarkRun {
  std::string method;
  std::string dataset;
  int run = 0;
  std::uint64_t seed = 0;
  double ari = 0.0;
  bool failed = false;
  double wall_ms = 0.0;
};

struct BenchmarkResult {
  std::string method;
  std::string dataset;
  int runs = 0;
  std::vector<double> ari_values;
  double mean_ari = 0.0;
  double median_ari = 0.0;
  /// Sample standard deviation (n - 1); 0 for a single run.
  double std_ari = 0.0;
  int failures = 0;
};

inline BenchmarkResult summarize(std::string method, std::string dataset, std::vector<double> values, int failures) {
  if (values.empty()) throw InvalidArgument("summarize: no values");
  BenchmarkResult r{std::move(method), std::move(dataset), static_cast<int>(values.size()), std::move(values),
                    0.0, 0.0, 0.0, failures};
  double s = 0.0;
  for (double v : r.ari_values) s += v;
  r.mean_ari = s / r.runs;
  std::vector<double> sorted = r.ari_values;
  std::sort(sorted.begin(), sorted.end());
  r.median_ari = r.runs % 2 ? sorted[r.runs / 2] : 0.5 * (sorted[r.runs / 2 - 1] + sorted[r.runs / 2]);
  if (r.runs > 1) {
    double ss = 0.0;
    for (double v : r.ari_values) ss += (v - r.mean_ari) * (v - r.mean_ari);
    r.std_ari = std::sqrt(ss / (r.runs - 1));
  }
  return r;
}

struct BenchmarkOutput {
  std::vector<BenchmarkRun> runs;       // ordered by (method, dataset, run)
  std::vector<BenchmarkResult> results;  // ordered by (method, dataset)
};

/// For each dataset and run index, draws one sample (shared by all methods)
/// and scores every method by ARI against the true labels. A method that
/// throws scores ARI 0 and is flagged as failed.
inline BenchmarkOutput run_benchmark(const std::vector<std::string>& methods, const std::vector<DatasetSpec>& datasets,
                                     int runs, int n, std::uint64_t seed, int threads = 1,
                                     const NpmixOptions& npmix_options = {}) {
  if (runs < 1) throw InvalidArgument("run_benchmark: runs must be positive");
  const int jobs = static_cast<int>(methods.size() * datasets.size()) * runs;
  std::vector<BenchmarkRun> table(jobs);
  // Job index = (method, dataset, run) in row-major order.
  parallel_for(jobs, threads, [&](int job) {
    const int r = job % runs;
    const int di = (job / runs) % static_cast<int>(datasets.size());
    const int mi = job / (runs * static_cast<int>(datasets.size()));
    DatasetSpec spec = datasets[di];
    spec.seed = derive_seed(seed, di, r);
    BenchmarkRun row{methods[mi], spec.name, r, spec.seed, 0.0, false, 0.0};
    const auto start = std::chrono::steady_clock::now();
    try {
      const LabeledSample data = generate(spec, n);
      const auto labels = run_method(methods[mi], data.points, spec.K, spec.seed, npmix_options);
      row.ari = ari(*data.labels, labels);
    } catch (const std::exception&) {
      row.failed = true;
      row.ari = 0.0;
    }
    row.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    table[job] = row;
  });
  BenchmarkOutput out{std::move(table), {}};
  for (std::size_t mi = 0; mi < methods.size(); ++mi)
    for (std::size_t di = 0; di < datasets.size(); ++di) {
      std::vector<double> values;
      int failures = 0;
      for (int r = 0; r < runs; ++r) {
        const auto& row = out.runs[(mi * datasets.size() + di) * runs + r];
        values.push_back(row.ari);
        failures += row.failed;
      }
      out.results.push_back(summarize(methods[mi], datasets[di].name, std::move(values), failures));
    }
  return out;
}

}  // namespace npmix
