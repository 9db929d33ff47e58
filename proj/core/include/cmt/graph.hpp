#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace cmt {

// Undirected multigraph on vertices 0..n-1. Parallel edges are kept (wired
// boundaries create them); a self-loop adds one adjacency entry.
class FiniteGraph {
 public:
  struct Edge {
    std::uint32_t u;
    std::uint32_t v;
  };
  struct Incidence {
    std::uint32_t neighbor;
    std::uint32_t edge;
  };

  FiniteGraph() = default;
  explicit FiniteGraph(std::size_t vertex_count);
  static FiniteGraph from_edges(std::size_t vertex_count, const std::vector<std::pair<std::uint32_t, std::uint32_t>>& edges);

  static FiniteGraph path(std::size_t n);
  static FiniteGraph cycle(std::size_t n);
  static FiniteGraph complete(std::size_t n);
  // Ball of radius `depth` in the (degree)-regular tree; vertex 0 is the centre.
  static FiniteGraph regular_tree(std::size_t degree, std::size_t depth);

  std::uint32_t add_edge(std::uint32_t u, std::uint32_t v);

  std::size_t vertex_count() const noexcept { return adjacency_.size(); }
  std::size_t edge_count() const noexcept { return edges_.size(); }
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  std::span<const Incidence> incident(std::uint32_t v) const noexcept { return adjacency_[v]; }
  std::size_t degree(std::uint32_t v) const noexcept { return adjacency_[v].size(); }

  bool connected() const;
  bool has_self_loop() const;
  bool has_parallel_edges() const;
  // Graph distances from `source` (SIZE_MAX when unreachable).
  std::vector<std::size_t> distances_from(std::uint32_t source) const;

 private:
  std::vector<std::vector<Incidence>> adjacency_;
  std::vector<Edge> edges_;
};

}  // namespace cmt
