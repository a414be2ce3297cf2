#pragma once

#include <algorithm>
#include <limits>
#include <vector>

#include "npmix/gaussian.hpp"

namespace npmix {

/// Minimum-cost perfect assignment on a square cost matrix (Hungarian method
/// with potentials, O(n^3)). Returns the column assigned to each row.
inline std::vector<int> hungarian(const Matrix& cost) {
  const int n = static_cast<int>(cost.rows());
  if (cost.cols() != n) throw InvalidArgument("hungarian: cost matrix must be square");
  constexpr double kInf = std::numeric_limits<double>::infinity();
  // 1-based arrays; column 0 is a virtual start.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, kInf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = kInf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> row_to_col(n, -1);
  for (int j = 1; j <= n; ++j)
    if (p[j] > 0) row_to_col[p[j] - 1] = j - 1;
  return row_to_col;
}

/// K x K confusion counts, C(x, y) = #{i : a_i = x, b_i = y}, K = max label + 1
/// over both labelings (padding with zero rows/columns).
inline Matrix confusion_matrix(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size()) throw InvalidArgument("confusion_matrix: length mismatch");
  int K = 0;
  for (int x : a) K = std::max(K, x + 1);
  for (int x : b) K = std::max(K, x + 1);
  Matrix c = Matrix::Zero(K, K);
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] < 0 || b[i] < 0) throw InvalidArgument("confusion_matrix: negative label");
    c(a[i], b[i]) += 1.0;
  }
  return c;
}

/// Permutation `perm` on the labels of `b` maximizing #{i : a_i = perm[b_i]}.
inline std::vector<int> match_clusters(const std::vector<int>& a, const std::vector<int>& b) {
  const Matrix c = confusion_matrix(a, b);
  if (c.rows() == 0) return {};
  // Row y of the cost is label y of b; column x is label x of a.
  const Matrix cost = (c.maxCoeff() - c.array()).matrix().transpose();
  return hungarian(cost);
}

inline std::vector<int> relabel(const std::vector<int>& labels, const std::vector<int>& perm) {
  std::vector<int> out(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) out[i] = perm[labels[i]];
  return out;
}

}  // namespace npmix
