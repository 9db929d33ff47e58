#include "cmt/wusf.hpp"

#include <algorithm>
#include <bit>
#include <functional>
#include <limits>
#include <ostream>
#include <queue>

#include "cmt/error.hpp"
#include "cmt/random.hpp"

namespace cmt {

std::vector<std::uint32_t> OrientedForest::roots() const {
  std::vector<std::uint32_t> r;
  for (std::uint32_t v = 0; v < parent.size(); ++v) {
    if (parent[v] == kRoot) r.push_back(v);
  }
  return r;
}

std::size_t OrientedForest::edge_count() const noexcept {
  return static_cast<std::size_t>(std::count_if(parent.begin(), parent.end(), [](auto p) { return p != kRoot; }));
}

std::vector<std::pair<std::uint32_t, std::uint32_t>> OrientedForest::undirected_edges() const {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> e;
  for (std::uint32_t v = 0; v < parent.size(); ++v) {
    if (parent[v] == kRoot) continue;
    const auto p = static_cast<std::uint32_t>(parent[v]);
    e.emplace_back(std::min(v, p), std::max(v, p));
  }
  std::sort(e.begin(), e.end());
  return e;
}

bool OrientedForest::contains_path(std::span<const std::uint32_t> path) const {
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    if (path[i] >= parent.size() || parent[path[i]] != static_cast<std::int64_t>(path[i + 1])) return false;
  }
  return true;
}

bool OrientedForest::acyclic() const {
  // 0 unvisited, 1 on the current walk, 2 known to reach a root.
  std::vector<std::uint8_t> state(parent.size(), 0);
  for (std::size_t s = 0; s < parent.size(); ++s) {
    std::vector<std::size_t> walk;
    std::size_t v = s;
    while (state[v] == 0) {
      state[v] = 1;
      walk.push_back(v);
      if (parent[v] == kRoot) break;
      const auto p = parent[v];
      if (p < 0 || static_cast<std::size_t>(p) >= parent.size()) return false;
      v = static_cast<std::size_t>(p);
    }
    if (state[v] == 1 && parent[v] != kRoot) return false;
    for (auto w : walk) state[w] = 2;
  }
  return true;
}

namespace {

void require_sampling_graph(const FiniteGraph& graph, std::uint32_t root) {
  require(root < graph.vertex_count(), ErrorCode::UnknownVertex, "root out of range");
  require(!graph.has_self_loop(), ErrorCode::BadGraph, "sampling graphs must not have self-loops");
  require(graph.connected(), ErrorCode::NotConnected, "graph is not connected");
}

// Wilson's algorithm from the current `in_tree` state: each remaining vertex
// in index order starts a walk whose last exits form the new branch.
void wilson_fill(const FiniteGraph& graph, std::vector<bool>& in_tree, OrientedForest& out, SplitMix64& rng) {
  const std::size_t n = graph.vertex_count();
  std::vector<std::uint32_t> next(n);
  std::vector<std::uint32_t> next_edge(n);
  for (std::uint32_t start = 0; start < n; ++start) {
    std::uint32_t u = start;
    while (!in_tree[u]) {
      const auto inc = graph.incident(u);
      const auto& pick = inc[uniform_below(rng, inc.size())];
      next[u] = pick.neighbor;
      next_edge[u] = pick.edge;
      u = pick.neighbor;
    }
    for (u = start; !in_tree[u]; u = next[u]) {
      in_tree[u] = true;
      out.parent[u] = next[u];
      out.parent_edge[u] = next_edge[u];
    }
  }
}

}  // namespace

OrientedForest wilson_ust(const FiniteGraph& graph, std::uint32_t root, std::uint64_t seed) {
  require_sampling_graph(graph, root);
  const std::size_t n = graph.vertex_count();
  OrientedForest out{std::vector<std::int64_t>(n, kRoot), std::vector<std::int64_t>(n, kRoot)};
  std::vector<bool> in_tree(n, false);
  in_tree[root] = true;
  SplitMix64 rng(seed);
  wilson_fill(graph, in_tree, out, rng);
  return out;
}

std::vector<std::uint32_t> lerw(const FiniteGraph& graph, std::uint32_t start, const std::vector<bool>& stop,
                                std::uint64_t seed, std::size_t budget) {
  const std::size_t n = graph.vertex_count();
  require(start < n, ErrorCode::UnknownVertex, "start out of range");
  require(stop.size() == n, ErrorCode::InvalidArgument, "stop set size differs from graph");
  SplitMix64 rng(seed);
  std::vector<std::uint32_t> path{start};
  std::vector<std::size_t> position(n, std::numeric_limits<std::size_t>::max());
  position[start] = 0;
  std::uint32_t u = start;
  for (std::size_t steps = 0; !stop[u]; ++steps) {
    require(steps < budget, ErrorCode::BudgetExhausted, "loop-erased walk did not reach the stop set");
    const auto inc = graph.incident(u);
    require(!inc.empty(), ErrorCode::BadGraph, "walk reached an isolated vertex");
    u = inc[uniform_below(rng, inc.size())].neighbor;
    if (position[u] != std::numeric_limits<std::size_t>::max()) {
      for (std::size_t i = position[u] + 1; i < path.size(); ++i) position[path[i]] = std::numeric_limits<std::size_t>::max();
      path.resize(position[u] + 1);
    } else {
      position[u] = path.size();
      path.push_back(u);
    }
  }
  return path;
}

OrientedForest conditional_wilson(const FiniteGraph& graph, std::uint32_t root, std::span<const std::uint32_t> path,
                                  std::uint64_t seed) {
  require_sampling_graph(graph, root);
  const std::size_t n = graph.vertex_count();
  require(!path.empty() && path.back() == root, ErrorCode::BadPath, "initial path must end at the root");
  OrientedForest out{std::vector<std::int64_t>(n, kRoot), std::vector<std::int64_t>(n, kRoot)};
  std::vector<bool> in_tree(n, false);
  for (std::size_t i = 0; i < path.size(); ++i) {
    require(path[i] < n, ErrorCode::BadPath, "path vertex out of range");
    require(!in_tree[path[i]], ErrorCode::BadPath, "initial path is not simple");
    in_tree[path[i]] = true;
    if (i + 1 < path.size()) {
      std::optional<std::uint32_t> edge;
      for (const auto& inc : graph.incident(path[i])) {
        if (inc.neighbor == path[i + 1] && (!edge || inc.edge < *edge)) edge = inc.edge;
      }
      require(edge.has_value(), ErrorCode::BadPath, "initial path uses a non-edge");
      out.parent[path[i]] = path[i + 1];
      out.parent_edge[path[i]] = *edge;
    }
  }
  SplitMix64 rng(seed);
  wilson_fill(graph, in_tree, out, rng);
  return out;
}

WiredBall wired_ball(std::size_t dimension, std::int64_t radius) {
  require(dimension >= 1, ErrorCode::BadDimension, "dimension must be >= 1");
  require(radius >= 0, ErrorCode::InvalidArgument, "radius must be >= 0");
  WiredBall w;
  w.dimension = dimension;
  w.radius = radius;
  // Enumerate the cube [-R, R]^d in lexicographic order, keeping the l1 ball.
  IntVec p(dimension, -radius);
  while (true) {
    std::int64_t norm = 0;
    for (auto c : p) norm += c < 0 ? -c : c;
    if (norm <= radius) w.sites.push_back(p);
    std::size_t i = dimension;
    while (i > 0 && p[i - 1] == radius) p[--i] = -radius;
    if (i == 0) break;
    ++p[i - 1];
  }
  require(w.sites.size() < (1u << 26), ErrorCode::TooLarge, "ball too large");
  const auto n = static_cast<std::uint32_t>(w.sites.size());
  w.boundary = n;
  w.graph = FiniteGraph(n + 1);
  for (std::uint32_t v = 0; v < n; ++v) {
    for (std::size_t axis = 0; axis < dimension; ++axis) {
      for (std::int64_t s : {-1, 1}) {
        IntVec q = w.sites[v];
        q[axis] += s;
        auto it = std::lower_bound(w.sites.begin(), w.sites.end(), q);
        if (it != w.sites.end() && *it == q) {
          const auto u = static_cast<std::uint32_t>(it - w.sites.begin());
          if (v < u) w.graph.add_edge(v, u);
        } else {
          w.graph.add_edge(v, w.boundary);
        }
      }
    }
  }
  return w;
}

WusfWindow wusf_window(std::size_t dimension, std::int64_t radius, std::uint64_t seed) {
  WusfWindow out;
  out.ball = wired_ball(dimension, radius);
  out.connected_regime = dimension <= 2;
  const auto full = wilson_ust(out.ball.graph, out.ball.boundary, seed);
  const std::size_t n = out.ball.sites.size();
  out.forest.parent.assign(n, kRoot);
  out.forest.parent_edge.assign(n, kRoot);
  for (std::size_t v = 0; v < n; ++v) {
    if (full.parent[v] != static_cast<std::int64_t>(out.ball.boundary)) out.forest.parent[v] = full.parent[v];
    out.forest.parent_edge[v] = full.parent_edge[v];
  }
  return out;
}

ForestWindow to_forest_window(const WusfWindow& w, std::uint64_t seed) {
  const std::size_t d = w.ball.dimension;
  std::vector<std::int64_t> keys;
  for (const auto& s : w.ball.sites) keys.insert(keys.end(), s.begin(), s.end());
  std::vector<std::int32_t> jumps(w.ball.sites.size(), ForestWindow::kExit);
  std::vector<std::uint8_t> interior(w.ball.sites.size(), 1);
  for (std::size_t v = 0; v < jumps.size(); ++v) {
    if (w.forest.parent[v] != kRoot) {
      jumps[v] = static_cast<std::int32_t>(w.forest.parent[v]);
    } else {
      interior[v] = 0;
    }
  }
  WindowGeometry g;
  g.lower.assign(d, -w.ball.radius);
  g.upper.assign(d, w.ball.radius);
  g.periodic.assign(d, false);
  return ForestWindow::from_sorted(VertexKind::Lattice, static_cast<int>(d), std::move(keys), std::move(jumps),
                                   std::move(interior), ForestMetadata{"wusf", seed, std::move(g)});
}

void write_tree_csv(std::ostream& out, const OrientedForest& f) {
  out << "vertex,parent\n";
  for (std::size_t v = 0; v < f.parent.size(); ++v) {
    out << v << ',';
    if (f.parent[v] == kRoot) {
      out << "ROOT";
    } else {
      out << f.parent[v];
    }
    out << '\n';
  }
}

std::vector<std::uint64_t> spanning_tree_masks(const FiniteGraph& graph) {
  const std::size_t n = graph.vertex_count();
  const std::size_t m = graph.edge_count();
  require(m <= 64, ErrorCode::TooLarge, "spanning tree enumeration supports at most 64 edges");
  require(n <= 12, ErrorCode::TooLarge, "spanning tree enumeration supports at most 12 vertices");
  std::vector<std::uint64_t> out;
  if (n == 0) return out;
  const auto& edges = graph.edges();
  // Depth-first choice of n-1 edges in increasing id order, rejecting cycles.
  std::vector<std::uint32_t> comp(n);
  std::function<void(std::size_t, std::size_t, std::uint64_t)> rec = [&](std::size_t from, std::size_t chosen,
                                                                        std::uint64_t mask) {
    if (chosen + 1 == n) {
      out.push_back(mask);
      return;
    }
    for (std::size_t e = from; e + (n - 1 - chosen) <= m; ++e) {
      const auto a = comp[edges[e].u];
      const auto b = comp[edges[e].v];
      if (a == b) continue;
      const auto backup = comp;
      for (auto& c : comp) {
        if (c == b) c = a;
      }
      rec(e + 1, chosen + 1, mask | (std::uint64_t{1} << e));
      comp = backup;
    }
  };
  for (std::uint32_t v = 0; v < n; ++v) comp[v] = v;
  rec(0, 0, 0);
  return out;
}

std::uint64_t tree_mask(const FiniteGraph& graph, const OrientedForest& tree) {
  require(graph.edge_count() <= 64, ErrorCode::TooLarge, "tree masks support at most 64 edges");
  std::uint64_t mask = 0;
  for (std::uint32_t v = 0; v < tree.parent.size(); ++v) {
    if (tree.parent[v] == kRoot) continue;
    if (!tree.parent_edge.empty() && tree.parent_edge[v] != kRoot) {
      mask |= std::uint64_t{1} << tree.parent_edge[v];
      continue;
    }
    const auto p = static_cast<std::uint32_t>(tree.parent[v]);
    std::optional<std::uint32_t> edge;
    for (const auto& inc : graph.incident(v)) {
      if (inc.neighbor == p && (!edge || inc.edge < *edge)) edge = inc.edge;
    }
    require(edge.has_value(), ErrorCode::BadPath, "parent link is not a graph edge");
    mask |= std::uint64_t{1} << *edge;
  }
  return mask;
}

namespace {

// Dinic max-flow on a small dense network.
class MaxFlow {
 public:
  explicit MaxFlow(std::size_t n) : head_(n, -1), level_(n), it_(n) {}

  void add(std::size_t u, std::size_t v, std::int64_t cap) {
    arcs_.push_back({v, cap, head_[u]});
    head_[u] = static_cast<std::int64_t>(arcs_.size()) - 1;
    arcs_.push_back({u, 0, head_[v]});
    head_[v] = static_cast<std::int64_t>(arcs_.size()) - 1;
  }

  std::int64_t run(std::size_t s, std::size_t t) {
    std::int64_t flow = 0;
    while (bfs(s, t)) {
      it_ = head_;
      while (std::int64_t f = dfs(s, t, std::numeric_limits<std::int64_t>::max())) flow += f;
    }
    return flow;
  }

 private:
  struct Arc {
    std::size_t to;
    std::int64_t cap;
    std::int64_t next;
  };

  bool bfs(std::size_t s, std::size_t t) {
    std::fill(level_.begin(), level_.end(), -1);
    std::queue<std::size_t> q;
    level_[s] = 0;
    q.push(s);
    while (!q.empty()) {
      const auto u = q.front();
      q.pop();
      for (auto a = head_[u]; a != -1; a = arcs_[a].next) {
        if (arcs_[a].cap > 0 && level_[arcs_[a].to] < 0) {
          level_[arcs_[a].to] = level_[u] + 1;
          q.push(arcs_[a].to);
        }
      }
    }
    return level_[t] >= 0;
  }

  std::int64_t dfs(std::size_t u, std::size_t t, std::int64_t f) {
    if (u == t) return f;
    for (auto& a = it_[u]; a != -1; a = arcs_[a].next) {
      auto& arc = arcs_[a];
      if (arc.cap <= 0 || level_[arc.to] != level_[u] + 1) continue;
      if (std::int64_t d = dfs(arc.to, t, std::min(f, arc.cap)); d > 0) {
        arc.cap -= d;
        arcs_[a ^ 1].cap += d;
        return d;
      }
    }
    return 0;
  }

  std::vector<std::int64_t> head_;
  std::vector<std::int64_t> level_;
  std::vector<std::int64_t> it_;
  std::vector<Arc> arcs_;
};

bool transport_feasible(const std::vector<std::uint64_t>& a, const std::vector<std::uint64_t>& b, std::size_t bound) {
  // Supplies 1/|a| and demands 1/|b|, scaled by |a| |b| to integers.
  const std::size_t na = a.size();
  const std::size_t nb = b.size();
  const std::size_t s = na + nb;
  const std::size_t t = s + 1;
  MaxFlow flow(t + 1);
  const auto big = static_cast<std::int64_t>(na * nb);
  for (std::size_t i = 0; i < na; ++i) flow.add(s, i, static_cast<std::int64_t>(nb));
  for (std::size_t j = 0; j < nb; ++j) flow.add(na + j, t, static_cast<std::int64_t>(na));
  for (std::size_t i = 0; i < na; ++i) {
    for (std::size_t j = 0; j < nb; ++j) {
      if (static_cast<std::size_t>(std::popcount(a[i] ^ b[j])) <= bound) flow.add(i, na + j, big);
    }
  }
  return flow.run(s, t) == big;
}

}  // namespace

CoveringCouplingResult covering_coupling_check(const FiniteGraph& graph, const std::vector<std::uint32_t>& edges,
                                               const std::vector<bool>& i1, const std::vector<bool>& i2) {
  require(graph.vertex_count() <= 6, ErrorCode::TooLarge, "covering coupling check supports at most 6 vertices");
  require(edges.size() == i1.size() && edges.size() == i2.size(), ErrorCode::InvalidArgument,
          "condition sets must match the edge list");
  for (auto e : edges) require(e < graph.edge_count(), ErrorCode::InvalidArgument, "conditioned edge out of range");
  const auto trees = spanning_tree_masks(graph);
  auto condition = [&](const std::vector<bool>& ind) {
    std::vector<std::uint64_t> keep;
    for (auto t : trees) {
      bool ok = true;
      for (std::size_t k = 0; k < edges.size() && ok; ++k) ok = (((t >> edges[k]) & 1u) != 0) == ind[k];
      if (ok) keep.push_back(t);
    }
    require(!keep.empty(), ErrorCode::Unconditionable, "conditioning has probability zero");
    return keep;
  };
  const auto t1 = condition(i1);
  const auto t2 = condition(i2);
  CoveringCouplingResult r;
  r.tree_count = trees.size();
  r.support1 = t1.size();
  r.support2 = t2.size();
  std::size_t differing = 0;
  for (std::size_t k = 0; k < edges.size(); ++k) differing += i1[k] != i2[k];
  r.delta_bound = 2 * differing;
  r.feasible = transport_feasible(t1, t2, r.delta_bound);
  const std::size_t max_delta = 2 * (graph.vertex_count() > 0 ? graph.vertex_count() - 1 : 0);
  r.min_feasible_delta = max_delta;
  for (std::size_t b = 0; b <= max_delta; ++b) {
    if (transport_feasible(t1, t2, b)) {
      r.min_feasible_delta = b;
      break;
    }
  }
  return r;
}

}  // namespace cmt
