#include "cmt/forest.hpp"

#include <algorithm>
#include <numeric>
#include <queue>
#include <unordered_map>

#include "cmt/error.hpp"
#include "cmt/union_find.hpp"

namespace cmt {

namespace {

bool lex_less(std::span<const std::int64_t> a, std::span<const std::int64_t> b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

}  // namespace

bool WindowGeometry::is_torus() const noexcept {
  return !periodic.empty() && std::all_of(periodic.begin(), periodic.end(), [](bool p) { return p; });
}

bool WindowGeometry::any_periodic() const noexcept {
  return std::any_of(periodic.begin(), periodic.end(), [](bool p) { return p; });
}

ForestWindow ForestWindow::build(VertexKind kind, int dimension, std::vector<Key> vertices,
                                 const std::vector<JumpSpec>& jumps, const InteriorPredicate& interior,
                                 ForestMetadata metadata) {
  require(dimension >= 0, ErrorCode::BadDimension, "negative dimension");
  const int key_length = kind == VertexKind::Lattice ? dimension : 1;
  require(kind != VertexKind::Lattice || dimension >= 1, ErrorCode::BadDimension,
          "lattice forests need dimension >= 1");
  for (const Key& k : vertices) {
    require(static_cast<int>(k.size()) == key_length, ErrorCode::InvalidArgument,
            "vertex key length does not match the forest dimension");
  }
  std::sort(vertices.begin(), vertices.end());
  vertices.erase(std::unique(vertices.begin(), vertices.end()), vertices.end());
  require(vertices.size() < static_cast<std::size_t>(INT32_MAX), ErrorCode::TooLarge, "too many vertices");

  ForestWindow f;
  f.kind_ = kind;
  f.dimension_ = kind == VertexKind::Lattice ? dimension : 0;
  f.key_length_ = key_length;
  f.metadata_ = std::move(metadata);
  f.keys_.reserve(vertices.size() * key_length);
  for (const Key& k : vertices) f.keys_.insert(f.keys_.end(), k.begin(), k.end());
  f.jumps_.assign(vertices.size(), kNoJump);

  for (const JumpSpec& j : jumps) {
    require(static_cast<int>(j.source.size()) == key_length, ErrorCode::InvalidArgument,
            "jump source key length mismatch");
    const auto src = f.find(j.source);
    require(src.has_value(), ErrorCode::UnknownVertex, "jump source is not a vertex of the window");
    require(f.jumps_[*src] == kNoJump, ErrorCode::MalformedJump, "duplicate source in jump pairs");
    if (!j.target) {
      f.jumps_[*src] = kExit;
      continue;
    }
    require(static_cast<int>(j.target->size()) == key_length, ErrorCode::InvalidArgument,
            "jump target key length mismatch");
    const auto dst = f.find(*j.target);
    f.jumps_[*src] = dst ? static_cast<std::int32_t>(*dst) : kExit;
  }

  f.interior_.assign(vertices.size(), 0);
  for (VertexId v = 0; v < f.size(); ++v) {
    const JumpState s = f.jump_state(v);
    if (s == JumpState::None) continue;
    const bool ok = interior ? interior(f.key(v), s) : s == JumpState::Internal;
    f.interior_[v] = ok ? 1 : 0;
  }
  f.finalize();
  return f;
}

ForestWindow ForestWindow::from_sorted(VertexKind kind, int dimension, std::vector<std::int64_t> flat_keys,
                                       std::vector<std::int32_t> jumps, std::vector<std::uint8_t> interior,
                                       ForestMetadata metadata) {
  ForestWindow f;
  f.kind_ = kind;
  f.dimension_ = kind == VertexKind::Lattice ? dimension : 0;
  f.key_length_ = kind == VertexKind::Lattice ? dimension : 1;
  require(f.key_length_ >= 1, ErrorCode::BadDimension, "lattice forests need dimension >= 1");
  const std::size_t n = jumps.size();
  require(flat_keys.size() == n * static_cast<std::size_t>(f.key_length_), ErrorCode::InvalidArgument,
          "key table size mismatch");
  require(interior.size() == n, ErrorCode::InvalidArgument, "interior table size mismatch");
  require(n < static_cast<std::size_t>(INT32_MAX), ErrorCode::TooLarge, "too many vertices");
  f.keys_ = std::move(flat_keys);
  f.jumps_ = std::move(jumps);
  f.interior_ = std::move(interior);
  f.metadata_ = std::move(metadata);
  for (VertexId v = 1; v < n; ++v) {
    require(lex_less(f.key(v - 1), f.key(v)), ErrorCode::InvalidArgument, "vertex keys not strictly sorted");
  }
  for (VertexId v = 0; v < n; ++v) {
    const std::int32_t j = f.jumps_[v];
    require(j == kNoJump || j == kExit || (j >= 0 && static_cast<std::size_t>(j) < n), ErrorCode::MalformedJump,
            "jump target index out of range");
    if (j == kNoJump) f.interior_[v] = 0;
  }
  f.finalize();
  return f;
}

void ForestWindow::finalize() {
  const std::size_t n = jumps_.size();
  child_offsets_.assign(n + 1, 0);
  for (VertexId v = 0; v < n; ++v) {
    if (jumps_[v] >= 0) ++child_offsets_[static_cast<std::size_t>(jumps_[v]) + 1];
  }
  std::partial_sum(child_offsets_.begin(), child_offsets_.end(), child_offsets_.begin());
  children_.assign(child_offsets_[n], 0);
  std::vector<std::size_t> cursor(child_offsets_.begin(), child_offsets_.end() - 1);
  for (VertexId v = 0; v < n; ++v) {
    if (jumps_[v] >= 0) children_[cursor[static_cast<std::size_t>(jumps_[v])]++] = v;
  }
}

std::optional<VertexId> ForestWindow::find(std::span<const std::int64_t> k) const {
  if (static_cast<int>(k.size()) != key_length_) return std::nullopt;
  std::size_t lo = 0;
  std::size_t hi = size();
  while (lo < hi) {
    const std::size_t mid = (lo + hi) / 2;
    if (lex_less(key(static_cast<VertexId>(mid)), k)) {
      lo = mid + 1;
    } else {
      hi = mid;
    }
  }
  if (lo < size() && std::equal(k.begin(), k.end(), key(static_cast<VertexId>(lo)).begin())) {
    return static_cast<VertexId>(lo);
  }
  return std::nullopt;
}

VertexId ForestWindow::require_vertex(std::span<const std::int64_t> k) const {
  const auto v = find(k);
  require(v.has_value(), ErrorCode::UnknownVertex, "vertex not in window");
  return *v;
}

std::size_t ForestWindow::internal_jump_count() const noexcept {
  return static_cast<std::size_t>(std::count_if(jumps_.begin(), jumps_.end(), [](std::int32_t j) { return j >= 0; }));
}

std::size_t ForestWindow::exit_count() const noexcept {
  return static_cast<std::size_t>(std::count(jumps_.begin(), jumps_.end(), kExit));
}

std::size_t ForestWindow::interior_count() const noexcept {
  return static_cast<std::size_t>(std::count(interior_.begin(), interior_.end(), std::uint8_t{1}));
}

bool ForestWindow::same_structure(const ForestWindow& other) const noexcept {
  return kind_ == other.kind_ && dimension_ == other.dimension_ && keys_ == other.keys_ &&
         jumps_ == other.jumps_ && interior_ == other.interior_;
}

std::string_view to_string(Termination t) noexcept {
  switch (t) {
    case Termination::BudgetExhausted: return "BudgetExhausted";
    case Termination::BoundaryExit: return "BoundaryExit";
    case Termination::CycleDetected: return "CycleDetected";
    case Termination::FixedPoint: return "FixedPoint";
  }
  return "?";
}

std::string_view to_string(ComponentLabel label) noexcept {
  return label == ComponentLabel::FiniteCycle ? "FiniteCycle" : "Truncated";
}

Trajectory ancestral_line(const ForestWindow& forest, VertexId v, std::size_t max_steps) {
  require(v < forest.size(), ErrorCode::UnknownVertex, "vertex id out of range");
  Trajectory t;
  t.path.push_back(v);
  std::unordered_map<VertexId, std::size_t> seen{{v, 0}};
  VertexId cur = v;
  for (;;) {
    if (!forest.has_target(cur)) {
      t.termination = Termination::BoundaryExit;
      return t;
    }
    const VertexId next = forest.target(cur);
    if (next == cur) {
      t.termination = Termination::FixedPoint;
      return t;
    }
    if (auto it = seen.find(next); it != seen.end()) {
      t.termination = Termination::CycleDetected;
      t.cycle_entry = it->second;
      return t;
    }
    if (t.path.size() - 1 >= max_steps) {
      t.termination = Termination::BudgetExhausted;
      return t;
    }
    seen.emplace(next, t.path.size());
    t.path.push_back(next);
    cur = next;
  }
}

ComponentPartition components(const ForestWindow& forest) {
  const std::size_t n = forest.size();
  UnionFind uf(n);
  for (VertexId v = 0; v < n; ++v) {
    if (forest.has_target(v)) uf.unite(v, forest.target(v));
  }

  ComponentPartition p;
  p.component_of.assign(n, 0);
  std::vector<std::uint32_t> id_of_root(n, UINT32_MAX);
  for (VertexId v = 0; v < n; ++v) {
    const std::uint32_t r = uf.find(v);
    if (id_of_root[r] == UINT32_MAX) {
      id_of_root[r] = static_cast<std::uint32_t>(p.summaries.size());
      ComponentSummary s;
      s.id = id_of_root[r];
      s.representative = v;
      p.summaries.push_back(s);
    }
    const std::uint32_t c = id_of_root[r];
    p.component_of[v] = c;
    ++p.summaries[c].size;
    if (!forest.interior(v)) ++p.summaries[c].boundary_arc_count;
  }

  // Cycles of the functional graph: 0 = unseen, 1 = on current walk, 2 = done.
  std::vector<std::uint8_t> state(n, 0);
  std::vector<VertexId> walk;
  for (VertexId start = 0; start < n; ++start) {
    if (state[start] != 0) continue;
    walk.clear();
    VertexId cur = start;
    while (state[cur] == 0) {
      state[cur] = 1;
      walk.push_back(cur);
      if (!forest.has_target(cur)) break;
      cur = forest.target(cur);
    }
    if (state[cur] == 1 && forest.has_target(walk.back()) && forest.target(walk.back()) == cur) {
      ++p.summaries[p.component_of[cur]].cycle_count;
    }
    for (VertexId w : walk) state[w] = 2;
  }

  for (auto& s : p.summaries) {
    s.label = (s.cycle_count == 1 && s.boundary_arc_count == 0) ? ComponentLabel::FiniteCycle
                                                                 : ComponentLabel::Truncated;
  }

  p.member_offsets.assign(p.summaries.size() + 1, 0);
  for (const auto& s : p.summaries) p.member_offsets[s.id + 1] = s.size;
  std::partial_sum(p.member_offsets.begin(), p.member_offsets.end(), p.member_offsets.begin());
  p.member_list.assign(n, 0);
  std::vector<std::size_t> cursor(p.member_offsets.begin(), p.member_offsets.end() - 1);
  for (VertexId v = 0; v < n; ++v) p.member_list[cursor[p.component_of[v]]++] = v;
  return p;
}

ComponentSummary classify_component(const ForestWindow& forest, std::uint32_t component_id) {
  ComponentPartition p = components(forest);
  require(component_id < p.count(), ErrorCode::InvalidArgument, "no such component");
  return p.summaries[component_id];
}

std::vector<VertexId> descendants(const ForestWindow& forest, VertexId v, std::size_t n) {
  require(v < forest.size(), ErrorCode::UnknownVertex, "vertex id out of range");
  std::vector<VertexId> frontier{v};
  std::vector<VertexId> next;
  for (std::size_t level = 0; level < n && !frontier.empty(); ++level) {
    next.clear();
    for (VertexId u : frontier) {
      auto pre = forest.preimage(u);
      next.insert(next.end(), pre.begin(), pre.end());
    }
    std::sort(next.begin(), next.end());
    next.erase(std::unique(next.begin(), next.end()), next.end());
    frontier.swap(next);
  }
  std::sort(frontier.begin(), frontier.end());
  return frontier;
}

LevelSet level_set(const ForestWindow& forest, VertexId v, std::size_t horizon) {
  require(v < forest.size(), ErrorCode::UnknownVertex, "vertex id out of range");
  LevelSet out;
  VertexId top = v;
  std::size_t steps = 0;
  while (steps < horizon) {
    if (!forest.has_target(top)) {
      out.truncated = true;
      break;
    }
    top = forest.target(top);
    ++steps;
  }
  // D_{k-1}(F^{k-1}(v)) is contained in D_k(F^k(v)), so the union is the last term.
  std::vector<VertexId> frontier{top};
  std::vector<VertexId> next;
  for (std::size_t level = 0; level < steps; ++level) {
    next.clear();
    for (VertexId u : frontier) {
      auto pre = forest.preimage(u);
      for (VertexId w : pre) {
        if (!forest.interior(w)) out.truncated = true;
        next.push_back(w);
      }
    }
    std::sort(next.begin(), next.end());
    next.erase(std::unique(next.begin(), next.end()), next.end());
    frontier.swap(next);
  }
  out.members = std::move(frontier);
  return out;
}

std::optional<std::int64_t> HeightAssignment::height_of(VertexId v) const {
  auto it = std::lower_bound(vertices.begin(), vertices.end(), v);
  if (it == vertices.end() || *it != v) return std::nullopt;
  return heights[static_cast<std::size_t>(it - vertices.begin())];
}

HeightAssignment height(const ForestWindow& forest, const ComponentPartition& partition,
                        std::uint32_t component_id) {
  require(component_id < partition.count(), ErrorCode::InvalidArgument, "no such component");
  const ComponentSummary& s = partition.summaries[component_id];
  require(s.cycle_count == 0, ErrorCode::CyclicComponent, "height needs a cycle-free component");

  HeightAssignment h;
  h.component = component_id;
  h.anchor = s.representative;
  auto members = partition.members(component_id);
  h.vertices.assign(members.begin(), members.end());
  h.heights.assign(h.vertices.size(), 0);
  auto index_of = [&](VertexId v) {
    return static_cast<std::size_t>(std::lower_bound(h.vertices.begin(), h.vertices.end(), v) - h.vertices.begin());
  };
  std::vector<std::uint8_t> done(h.vertices.size(), 0);
  std::queue<VertexId> q;
  q.push(h.anchor);
  done[index_of(h.anchor)] = 1;
  while (!q.empty()) {
    const VertexId u = q.front();
    q.pop();
    const std::int64_t hu = h.heights[index_of(u)];
    if (forest.has_target(u)) {
      const std::size_t j = index_of(forest.target(u));
      if (!done[j]) {
        done[j] = 1;
        h.heights[j] = hu - 1;
        q.push(forest.target(u));
      }
    }
    for (VertexId c : forest.preimage(u)) {
      const std::size_t j = index_of(c);
      if (!done[j]) {
        done[j] = 1;
        h.heights[j] = hu + 1;
        q.push(c);
      }
    }
  }
  return h;
}

HeightAssignment height(const ForestWindow& forest, std::uint32_t component_id) {
  return height(forest, components(forest), component_id);
}

}  // namespace cmt
