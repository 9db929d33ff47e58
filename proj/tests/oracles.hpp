#pragma once

// Independent reference computations for tests. Nothing here calls the
// library routine it is used to check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <utility>
#include <vector>

namespace oracle {

using Edge = std::pair<std::uint32_t, std::uint32_t>;

// Spanning trees of a multigraph as edge-index bitmasks, by contraction and
// deletion of the lowest remaining edge.
inline std::vector<std::uint64_t> spanning_trees(std::size_t n, const std::vector<Edge>& edges) {
  std::vector<std::uint64_t> out;
  std::function<void(std::vector<std::uint32_t>, std::size_t, std::uint64_t, std::size_t)> rec =
      [&](std::vector<std::uint32_t> label, std::size_t next, std::uint64_t chosen, std::size_t classes) {
        if (classes == 1) {
          out.push_back(chosen);
          return;
        }
        while (next < edges.size() && label[edges[next].first] == label[edges[next].second]) ++next;
        if (next == edges.size()) return;
        // Without edge `next`.
        rec(label, next + 1, chosen, classes);
        // With it: contract.
        const auto a = label[edges[next].first];
        const auto b = label[edges[next].second];
        for (auto& l : label) {
          if (l == b) l = a;
        }
        rec(label, next + 1, chosen | (std::uint64_t{1} << next), classes - 1);
      };
  std::vector<std::uint32_t> label(n);
  std::iota(label.begin(), label.end(), 0);
  rec(label, 0, 0, n);
  std::sort(out.begin(), out.end());
  return out;
}

// Matrix-tree theorem: det of the reduced Laplacian, Bareiss elimination.
inline std::int64_t tree_count(std::size_t n, const std::vector<Edge>& edges) {
  if (n <= 1) return 1;
  const std::size_t m = n - 1;
  std::vector<std::vector<__int128>> a(m, std::vector<__int128>(m, 0));
  for (const auto& [u, v] : edges) {
    if (u == v) continue;
    if (u < m) a[u][u] += 1;
    if (v < m) a[v][v] += 1;
    if (u < m && v < m) {
      a[u][v] -= 1;
      a[v][u] -= 1;
    }
  }
  __int128 prev = 1;
  int sign = 1;
  for (std::size_t k = 0; k < m; ++k) {
    if (a[k][k] == 0) {
      std::size_t r = k + 1;
      while (r < m && a[r][k] == 0) ++r;
      if (r == m) return 0;
      std::swap(a[k], a[r]);
      sign = -sign;
    }
    for (std::size_t i = k + 1; i < m; ++i) {
      for (std::size_t j = k + 1; j < m; ++j) a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
    }
    prev = a[k][k];
  }
  return static_cast<std::int64_t>(sign * a[m - 1][m - 1]);
}

// Law of the n-th partial sum of i.i.d. jumps on Z with nonnegative support,
// as a dense vector indexed by position.
inline std::vector<double> renewal_law(const std::vector<std::pair<int, double>>& mu, std::size_t n) {
  std::vector<double> p{1.0};
  for (std::size_t s = 0; s < n; ++s) {
    int top = 0;
    for (const auto& [a, w] : mu) top = std::max(top, a);
    std::vector<double> q(p.size() + static_cast<std::size_t>(top), 0.0);
    for (std::size_t x = 0; x < p.size(); ++x) {
      for (const auto& [a, w] : mu) q[x + static_cast<std::size_t>(a)] += p[x] * w;
    }
    p.swap(q);
  }
  return p;
}

inline double total_variation(std::vector<double> a, std::vector<double> b) {
  const std::size_t n = std::max(a.size(), b.size());
  a.resize(n, 0.0);
  b.resize(n, 0.0);
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += std::abs(a[i] - b[i]);
  return 0.5 * s;
}

// g(y) = sum_k mu(k) g(y - k), g(0) = 1, for mu on positive integers.
inline std::vector<double> renewal_green(const std::vector<std::pair<int, double>>& mu, std::size_t up_to) {
  std::vector<double> g(up_to + 1, 0.0);
  g[0] = 1.0;
  for (std::size_t y = 1; y <= up_to; ++y) {
    for (const auto& [a, w] : mu) {
      if (static_cast<std::size_t>(a) <= y) g[y] += w * g[y - static_cast<std::size_t>(a)];
    }
  }
  return g;
}

// Maximum bipartite matching size (Kuhn's augmenting paths).
inline std::size_t max_matching(std::size_t left, std::size_t right,
                                const std::function<bool(std::size_t, std::size_t)>& adjacent) {
  std::vector<std::int64_t> owner(right, -1);
  std::size_t size = 0;
  for (std::size_t u = 0; u < left; ++u) {
    std::vector<bool> seen(right, false);
    std::function<bool(std::size_t)> augment = [&](std::size_t x) {
      for (std::size_t y = 0; y < right; ++y) {
        if (!adjacent(x, y) || seen[y]) continue;
        seen[y] = true;
        if (owner[y] < 0 || augment(static_cast<std::size_t>(owner[y]))) {
          owner[y] = static_cast<std::int64_t>(x);
          return true;
        }
      }
      return false;
    };
    size += augment(u);
  }
  return size;
}

inline std::int64_t gcd_all(const std::vector<std::int64_t>& xs) {
  std::int64_t g = 0;
  for (auto x : xs) g = std::gcd(g, x);
  return g;
}

}  // namespace oracle
