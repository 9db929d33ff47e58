#include "cmt/graph.hpp"

#include <algorithm>
#include <limits>
#include <queue>

#include "cmt/error.hpp"

namespace cmt {

FiniteGraph::FiniteGraph(std::size_t vertex_count) : adjacency_(vertex_count) {}

FiniteGraph FiniteGraph::from_edges(std::size_t vertex_count,
                                    const std::vector<std::pair<std::uint32_t, std::uint32_t>>& edges) {
  FiniteGraph g(vertex_count);
  for (auto [u, v] : edges) g.add_edge(u, v);
  return g;
}

std::uint32_t FiniteGraph::add_edge(std::uint32_t u, std::uint32_t v) {
  require(u < vertex_count() && v < vertex_count(), ErrorCode::BadGraph, "edge endpoint out of range");
  const auto id = static_cast<std::uint32_t>(edges_.size());
  edges_.push_back({u, v});
  adjacency_[u].push_back({v, id});
  if (u != v) adjacency_[v].push_back({u, id});
  return id;
}

FiniteGraph FiniteGraph::path(std::size_t n) {
  FiniteGraph g(n);
  for (std::size_t i = 0; i + 1 < n; ++i) g.add_edge(static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(i + 1));
  return g;
}

FiniteGraph FiniteGraph::cycle(std::size_t n) {
  require(n >= 3, ErrorCode::BadGraph, "cycle needs at least 3 vertices");
  FiniteGraph g = path(n);
  g.add_edge(static_cast<std::uint32_t>(n - 1), 0);
  return g;
}

FiniteGraph FiniteGraph::complete(std::size_t n) {
  FiniteGraph g(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    for (std::uint32_t j = i + 1; j < n; ++j) g.add_edge(i, j);
  }
  return g;
}

FiniteGraph FiniteGraph::regular_tree(std::size_t degree, std::size_t depth) {
  require(degree >= 2, ErrorCode::BadGraph, "tree degree must be >= 2");
  FiniteGraph g(1);
  std::vector<std::uint32_t> frontier{0};
  for (std::size_t level = 0; level < depth; ++level) {
    std::vector<std::uint32_t> next;
    for (std::uint32_t v : frontier) {
      const std::size_t children = level == 0 ? degree : degree - 1;
      for (std::size_t c = 0; c < children; ++c) {
        const auto child = static_cast<std::uint32_t>(g.adjacency_.size());
        g.adjacency_.emplace_back();
        g.add_edge(v, child);
        next.push_back(child);
      }
    }
    frontier = std::move(next);
  }
  return g;
}

bool FiniteGraph::connected() const {
  if (vertex_count() == 0) return true;
  const auto d = distances_from(0);
  return std::none_of(d.begin(), d.end(), [](std::size_t x) { return x == std::numeric_limits<std::size_t>::max(); });
}

bool FiniteGraph::has_self_loop() const {
  return std::any_of(edges_.begin(), edges_.end(), [](const Edge& e) { return e.u == e.v; });
}

bool FiniteGraph::has_parallel_edges() const {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> keys;
  for (const auto& e : edges_) keys.emplace_back(std::min(e.u, e.v), std::max(e.u, e.v));
  std::sort(keys.begin(), keys.end());
  return std::adjacent_find(keys.begin(), keys.end()) != keys.end();
}

std::vector<std::size_t> FiniteGraph::distances_from(std::uint32_t source) const {
  std::vector<std::size_t> dist(vertex_count(), std::numeric_limits<std::size_t>::max());
  std::queue<std::uint32_t> q;
  dist[source] = 0;
  q.push(source);
  while (!q.empty()) {
    const auto u = q.front();
    q.pop();
    for (const auto& inc : adjacency_[u]) {
      if (dist[inc.neighbor] == std::numeric_limits<std::size_t>::max()) {
        dist[inc.neighbor] = dist[u] + 1;
        q.push(inc.neighbor);
      }
    }
  }
  return dist;
}

}  // namespace cmt
