#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

#include "cmt/forest.hpp"
#include "cmt/graph.hpp"
#include "cmt/lattice.hpp"

namespace cmt {

inline constexpr std::int64_t kRoot = -1;

// Parent map; kRoot marks roots. Each non-root v owns the edge (v, parent[v]).
struct OrientedForest {
  std::vector<std::int64_t> parent;
  // Graph edge id of each parent link (kRoot for roots); may be empty.
  std::vector<std::int64_t> parent_edge;

  std::size_t size() const noexcept { return parent.size(); }
  std::vector<std::uint32_t> roots() const;
  std::size_t edge_count() const noexcept;
  // Undirected edges {min, max}, sorted. Canonical key of the underlying forest.
  std::vector<std::pair<std::uint32_t, std::uint32_t>> undirected_edges() const;
  // Every step of the path is a parent link.
  bool contains_path(std::span<const std::uint32_t> path) const;
  // No cycles: every vertex reaches a root.
  bool acyclic() const;
};

// Uniform spanning tree oriented towards `root`, by Wilson's algorithm with
// vertices processed in index order. NotConnected on a disconnected graph,
// BadGraph on self-loops.
OrientedForest wilson_ust(const FiniteGraph& graph, std::uint32_t root, std::uint64_t seed);

// Chronological loop erasure of a simple random walk from `start` run until it
// hits `stop`. BudgetExhausted after `budget` walk steps.
std::vector<std::uint32_t> lerw(const FiniteGraph& graph, std::uint32_t start, const std::vector<bool>& stop,
                                std::uint64_t seed, std::size_t budget);

// Wilson's algorithm with the simple path P (ending at `root`) already in the
// tree. BadPath when P repeats a vertex, uses a non-edge or misses the root.
OrientedForest conditional_wilson(const FiniteGraph& graph, std::uint32_t root, std::span<const std::uint32_t> path,
                                  std::uint64_t seed);

// l1 ball of radius R in Z^d with its complement contracted to one vertex z.
// Ball sites are sorted lexicographically and numbered 0..n-1; z is n. Each
// lattice edge from the ball to the outside becomes one (parallel) edge to z.
struct WiredBall {
  std::size_t dimension = 0;
  std::int64_t radius = 0;
  std::vector<IntVec> sites;
  FiniteGraph graph;
  std::uint32_t boundary = 0;
};
WiredBall wired_ball(std::size_t dimension, std::int64_t radius);

// Wilson rooted at z, then z deleted: parent kRoot means "jumps to z".
// d <= 2 windows are the connected (recurrent) regime.
struct WusfWindow {
  WiredBall ball;
  OrientedForest forest;
  bool connected_regime = false;
};
WusfWindow wusf_window(std::size_t dimension, std::int64_t radius, std::uint64_t seed);

// The window as a lattice ForestWindow; jumps to z become boundary exits.
ForestWindow to_forest_window(const WusfWindow& w, std::uint64_t seed);

// CSV `vertex,parent` with ROOT for roots.
void write_tree_csv(std::ostream& out, const OrientedForest& f);

// Exact check of the covering coupling on a tiny graph: conditioned on the
// edges of S being in (true) or out (false) of the tree per I1 and I2, is
// there a coupling of the two conditional USTs with |T1 delta T2| <= 2|S'|,
// S' = {e in S : I1(e) != I2(e)}? Decided by a transportation max-flow.
struct CoveringCouplingResult {
  bool feasible = false;
  std::size_t delta_bound = 0;
  std::size_t min_feasible_delta = 0;
  std::size_t tree_count = 0;
  std::size_t support1 = 0;
  std::size_t support2 = 0;
};
// TooLarge past 6 vertices or 64 edges; Unconditionable if a conditioning has
// no spanning tree.
CoveringCouplingResult covering_coupling_check(const FiniteGraph& graph, const std::vector<std::uint32_t>& edges,
                                               const std::vector<bool>& i1, const std::vector<bool>& i2);

// Spanning trees as edge-id bitmasks, by subset enumeration (<= 64 edges).
std::vector<std::uint64_t> spanning_tree_masks(const FiniteGraph& graph);
// Edge-id bitmask of an oriented tree on `graph`. Without parent_edge,
// parallel edges are resolved to the lowest id.
std::uint64_t tree_mask(const FiniteGraph& graph, const OrientedForest& tree);

}  // namespace cmt
