#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "npmix/hellinger.hpp"

namespace npmix {

struct TransportPlan {
  double cost = 0.0;
  Matrix flow;  // K x K', rows sum to the source weights, columns to the target weights
};

/// Exact solution of the transportation problem
///   min sum_ij C_ij s_ij  s.t.  sum_j s_ij = a_i, sum_i s_ij = b_j, s >= 0
/// by successive shortest augmenting paths on the bipartite flow network.
inline TransportPlan optimal_transport(const Matrix& cost, const std::vector<double>& a, const std::vector<double>& b) {
  const int K = static_cast<int>(a.size());
  const int M = static_cast<int>(b.size());
  if (cost.rows() != K || cost.cols() != M) throw DimensionError("optimal_transport: cost shape mismatch");
  if (!cost.allFinite() || (cost.array() < 0.0).any())
    throw InvalidArgument("optimal_transport: costs must be finite and non-negative");

  constexpr double kEps = 1e-15;
  constexpr double kInf = std::numeric_limits<double>::infinity();
  struct Edge {
    int to;
    double cap;
    double cost;
    int rev;
  };
  const int source = K + M;
  const int sink = K + M + 1;
  const int V = K + M + 2;
  std::vector<std::vector<Edge>> g(V);
  auto add_edge = [&](int u, int v, double cap, double c) {
    g[u].push_back({v, cap, c, static_cast<int>(g[v].size())});
    g[v].push_back({u, 0.0, -c, static_cast<int>(g[u].size()) - 1});
  };
  double total_a = 0.0, total_b = 0.0;
  for (int i = 0; i < K; ++i) {
    if (!(a[i] >= 0.0)) throw InvalidArgument("optimal_transport: negative weight");
    add_edge(source, i, a[i], 0.0);
    total_a += a[i];
  }
  for (int j = 0; j < M; ++j) {
    if (!(b[j] >= 0.0)) throw InvalidArgument("optimal_transport: negative weight");
    add_edge(K + j, sink, b[j], 0.0);
    total_b += b[j];
  }
  for (int i = 0; i < K; ++i)
    for (int j = 0; j < M; ++j) add_edge(i, K + j, kInf, cost(i, j));

  double remaining = std::min(total_a, total_b);
  std::vector<double> dist(V);
  std::vector<int> prev_node(V), prev_edge(V);
  // Each augmentation saturates at least one edge; the iteration bound only
  // guards against rounding-induced stalls.
  for (int iter = 0; remaining > kEps && iter < 4 * V * V + 16; ++iter) {
    // Bellman-Ford: residual reverse edges carry negative costs.
    std::fill(dist.begin(), dist.end(), kInf);
    dist[source] = 0.0;
    for (int round = 0; round < V; ++round) {
      bool changed = false;
      for (int u = 0; u < V; ++u) {
        if (dist[u] == kInf) continue;
        for (int e = 0; e < static_cast<int>(g[u].size()); ++e) {
          const Edge& ed = g[u][e];
          if (ed.cap <= kEps) continue;
          const double nd = dist[u] + ed.cost;
          if (nd < dist[ed.to] - 1e-15) {
            dist[ed.to] = nd;
            prev_node[ed.to] = u;
            prev_edge[ed.to] = e;
            changed = true;
          }
        }
      }
      if (!changed) break;
    }
    if (dist[sink] == kInf) break;
    double push = remaining;
    for (int v = sink; v != source; v = prev_node[v]) push = std::min(push, g[prev_node[v]][prev_edge[v]].cap);
    for (int v = sink; v != source; v = prev_node[v]) {
      Edge& ed = g[prev_node[v]][prev_edge[v]];
      ed.cap -= push;
      g[v][ed.rev].cap += push;
    }
    remaining -= push;
  }
  if (remaining > 1e-12) throw Error("optimal_transport: solver did not converge");

  TransportPlan plan{0.0, Matrix::Zero(K, M)};
  for (int i = 0; i < K; ++i)
    for (const Edge& ed : g[i])
      if (ed.to >= K && ed.to < K + M) {
        const double carried = g[ed.to][ed.rev].cap;  // reverse residual == flow
        plan.flow(i, ed.to - K) = carried;
        plan.cost += carried * cost(i, ed.to - K);
      }
  return plan;
}

/// Matrix of ground costs rho(atom_i, atom'_j)^r.
inline Matrix hellinger_cost_matrix(const MixingMeasure& lhs, const MixingMeasure& rhs, double r,
                                    const QuadratureSpec& quad = {}) {
  Matrix cost(lhs.size(), rhs.size());
  for (int i = 0; i < lhs.size(); ++i)
    for (int j = 0; j < rhs.size(); ++j)
      cost(i, j) = std::pow(hellinger_mixture(lhs.atom(i), rhs.atom(j), quad).distance, r);
  return cost;
}

/// L_r-Wasserstein distance between two finite mixing measures with the
/// Hellinger distance between atoms as ground metric.
inline double wasserstein(const MixingMeasure& lhs, const MixingMeasure& rhs, double r = 1.0,
                          const QuadratureSpec& quad = {}) {
  if (!(r >= 1.0)) throw InvalidArgument("wasserstein: r must be >= 1");
  if (lhs.dim() != rhs.dim()) throw DimensionError("wasserstein: dimension mismatch");
  const double c = optimal_transport(hellinger_cost_matrix(lhs, rhs, r, quad), lhs.weights(), rhs.weights()).cost;
  return std::pow(std::max(c, 0.0), 1.0 / r);
}

}  // namespace npmix
