#pragma once

#include <algorithm>
#include <limits>
#include <numeric>
#include <tuple>
#include <vector>

#include "npmix/assignment.hpp"
#include "npmix/hellinger.hpp"
#include "npmix/mixture.hpp"

namespace npmix {

/// One agglomeration step. Leaves are 0..L-1; the cluster created by merge m
/// gets id L + m.
struct Merge {
  int a;
  int b;
  double height;
  bool operator==(const Merge&) const = default;
};

struct Dendrogram {
  int leaves = 0;
  std::vector<Merge> merges;  // L - 1 entries, heights non-decreasing
};

namespace detail {

/// Replays MST edges (already sorted by height) as a sequence of merges.
inline Dendrogram merges_from_edges(int n, const std::vector<std::tuple<double, int, int>>& edges) {
  std::vector<int> parent(n), cluster_id(n);
  std::iota(parent.begin(), parent.end(), 0);
  std::iota(cluster_id.begin(), cluster_id.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  Dendrogram out{n, {}};
  for (const auto& [h, u, v] : edges) {
    const int ru = find(u), rv = find(v);
    const int ia = cluster_id[ru], ib = cluster_id[rv];
    out.merges.push_back({std::min(ia, ib), std::max(ia, ib), h});
    parent[rv] = ru;
    cluster_id[ru] = n + static_cast<int>(out.merges.size()) - 1;
  }
  return out;
}

}  // namespace detail

/// Single-linkage clustering of n items under an arbitrary symmetric
/// distance callable dist(i, j), via Prim's minimum spanning tree in O(n^2).
/// Equal heights are ordered by the lexicographically smallest index pair.
template <class Dist>
Dendrogram single_linkage_with(int n, Dist&& dist) {
  if (n < 1) throw InvalidArgument("single_linkage: need at least one item");
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<char> in_tree(n, 0);
  std::vector<double> best(n, kInf);
  std::vector<int> link(n, -1);
  std::vector<std::tuple<double, int, int>> edges;
  edges.reserve(n > 0 ? n - 1 : 0);
  int current = 0;
  in_tree[0] = 1;
  for (int step = 1; step < n; ++step) {
    int next = -1;
    for (int j = 0; j < n; ++j) {
      if (in_tree[j]) continue;
      const double dj = dist(current, j);
      if (dj < best[j] || (dj == best[j] && current < link[j])) {
        best[j] = dj;
        link[j] = current;
      }
      if (next < 0 || best[j] < best[next]) next = j;
    }
    in_tree[next] = 1;
    edges.emplace_back(best[next], std::min(next, link[next]), std::max(next, link[next]));
    current = next;
  }
  std::sort(edges.begin(), edges.end());
  return detail::merges_from_edges(n, edges);
}

inline Dendrogram single_linkage(const DistanceMatrix& d) {
  return single_linkage_with(d.size(), [&](int i, int j) { return d(i, j); });
}

/// Complete-linkage agglomeration, O(L^3). Opt-in alternative cluster function.
inline Dendrogram complete_linkage(const DistanceMatrix& d) {
  const int n = d.size();
  std::vector<std::vector<int>> members(n);
  std::vector<int> ids(n);
  for (int i = 0; i < n; ++i) {
    members[i] = {i};
    ids[i] = i;
  }
  Dendrogram out{n, {}};
  while (members.size() > 1) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t bi = 0, bj = 1;
    for (std::size_t i = 0; i < members.size(); ++i)
      for (std::size_t j = i + 1; j < members.size(); ++j) {
        double link = 0.0;
        for (int u : members[i])
          for (int v : members[j]) link = std::max(link, d(u, v));
        if (link < best) {
          best = link;
          bi = i;
          bj = j;
        }
      }
    out.merges.push_back({std::min(ids[bi], ids[bj]), std::max(ids[bi], ids[bj]), best});
    members[bi].insert(members[bi].end(), members[bj].begin(), members[bj].end());
    ids[bi] = n + static_cast<int>(out.merges.size()) - 1;
    members.erase(members.begin() + static_cast<std::ptrdiff_t>(bj));
    ids.erase(ids.begin() + static_cast<std::ptrdiff_t>(bj));
  }
  return out;
}

/// Cuts the tree into K groups by undoing its K-1 highest merges. Groups are
/// numbered in order of first occurrence.
inline Assignment cut(const Dendrogram& tree, int K) {
  const int n = tree.leaves;
  if (K < 1 || K > n) throw InvalidArgument("cut: K must lie in [1, L]");
  std::vector<int> parent(2 * n - 1);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (int m = 0; m < n - K; ++m) {
    const Merge& mg = tree.merges[m];
    parent[find(mg.a)] = n + m;
    parent[find(mg.b)] = n + m;
  }
  std::vector<int> roots(n);
  for (int i = 0; i < n; ++i) roots[i] = find(i);
  return Assignment(Assignment::canonical_labels(roots), K);
}

/// Aggregates the components of Q by group: weight of group k is the sum of
/// its component weights, and its atom is the renormalized sub-mixture.
inline MixingMeasure group(const GaussianMixture& q, const Assignment& alpha) {
  if (alpha.size() != q.size()) throw InvalidArgument("group: assignment length differs from component count");
  std::vector<double> weights;
  std::vector<GaussianMixture> atoms;
  for (int k = 0; k < alpha.groups(); ++k) {
    const auto idx = alpha.members(k);
    if (idx.empty()) throw InvalidArgument("group: empty group");
    double total = 0.0;
    for (int l : idx) total += q.weight(l);
    std::vector<double> w;
    std::vector<GaussianComponent> comps;
    for (int l : idx) {
      w.push_back(q.weight(l) / total);
      comps.push_back(q.component(l));
    }
    weights.push_back(total);
    atoms.emplace_back(std::move(w), std::move(comps));
  }
  return MixingMeasure(std::move(weights), std::move(atoms));
}

struct ThresholdViolation {
  int i;
  int j;
  double distance;
  bool same_group;
};

struct ThresholdReport {
  bool ok = true;
  std::vector<ThresholdViolation> violations;
};

/// Checks the separation dichotomy: every within-group distance <= eta and
/// every between-group distance >= 2 eta.
inline ThresholdReport threshold_check(const DistanceMatrix& d, const Assignment& alpha, double eta) {
  if (d.size() != alpha.size()) throw InvalidArgument("threshold_check: size mismatch");
  ThresholdReport report;
  for (int i = 0; i < d.size(); ++i)
    for (int j = i + 1; j < d.size(); ++j) {
      const bool same = alpha[i] == alpha[j];
      if (same ? d(i, j) > eta : d(i, j) < 2.0 * eta) report.violations.push_back({i, j, d(i, j), same});
    }
  report.ok = report.violations.empty();
  return report;
}

}  // namespace npmix
