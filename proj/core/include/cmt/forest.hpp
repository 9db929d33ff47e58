#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cmt {

using VertexId = std::uint32_t;
using Key = std::vector<std::int64_t>;

// How a forest names its vertices. Lattice vertices carry `dimension`
// coordinates; abstract graph vertices and point-cloud vertices carry a single
// integer id and report dimension 0.
enum class VertexKind { Lattice, Abstract, Point };

// Rectangular lattice window. Empty bounds mean "no geometry" (abstract forests).
struct WindowGeometry {
  std::vector<std::int64_t> lower;
  std::vector<std::int64_t> upper;  // inclusive
  std::vector<bool> periodic;
  std::vector<Key> lattice_basis;  // generator columns; empty means Z^d

  bool empty() const noexcept { return lower.empty(); }
  bool is_torus() const noexcept;
  bool any_periodic() const noexcept;
  std::int64_t extent(std::size_t axis) const { return upper[axis] - lower[axis] + 1; }
};

struct ForestMetadata {
  std::string model;
  std::uint64_t seed = 0;
  WindowGeometry geometry;
};

// One jump of the point-map. A missing target means the jump leaves the window.
struct JumpSpec {
  Key source;
  std::optional<Key> target;
};

enum class JumpState : std::uint8_t { None, Internal, Exit };

// Finite window of a point-map F: sorted vertex keys, at most one jump per
// vertex, an interior flag per vertex, and precomputed preimage lists.
// Immutable after construction, so concurrent readers need no locking.
class ForestWindow {
 public:
  static constexpr std::int32_t kNoJump = -1;
  static constexpr std::int32_t kExit = -2;

  // Decides whether the jump of a vertex is guaranteed unaffected by the window.
  using InteriorPredicate = std::function<bool(std::span<const std::int64_t> key, JumpState state)>;

  ForestWindow() = default;

  // General constructor. Vertex keys may arrive in any order; jump targets not
  // among `vertices` become boundary exits. With no predicate, a vertex is
  // interior iff its jump stays inside the window. Throws MalformedJump on a
  // repeated source, UnknownVertex on a source outside `vertices`.
  static ForestWindow build(VertexKind kind, int dimension, std::vector<Key> vertices,
                            const std::vector<JumpSpec>& jumps,
                            const InteriorPredicate& interior, ForestMetadata metadata);

  // Fast path for samplers that already hold lexicographically sorted flat
  // keys and resolved jump indices (kNoJump / kExit / target id).
  static ForestWindow from_sorted(VertexKind kind, int dimension, std::vector<std::int64_t> flat_keys,
                                  std::vector<std::int32_t> jumps, std::vector<std::uint8_t> interior,
                                  ForestMetadata metadata);

  std::size_t size() const noexcept { return jumps_.size(); }
  bool empty() const noexcept { return jumps_.empty(); }
  VertexKind kind() const noexcept { return kind_; }
  int dimension() const noexcept { return dimension_; }
  int key_length() const noexcept { return key_length_; }
  const ForestMetadata& metadata() const noexcept { return metadata_; }

  std::span<const std::int64_t> key(VertexId v) const {
    return {keys_.data() + static_cast<std::size_t>(v) * key_length_, static_cast<std::size_t>(key_length_)};
  }
  Key key_vector(VertexId v) const {
    auto k = key(v);
    return {k.begin(), k.end()};
  }

  std::optional<VertexId> find(std::span<const std::int64_t> key) const;
  VertexId require_vertex(std::span<const std::int64_t> key) const;

  JumpState jump_state(VertexId v) const noexcept {
    const std::int32_t j = jumps_[v];
    return j >= 0 ? JumpState::Internal : (j == kExit ? JumpState::Exit : JumpState::None);
  }
  bool has_target(VertexId v) const noexcept { return jumps_[v] >= 0; }
  VertexId target(VertexId v) const noexcept { return static_cast<VertexId>(jumps_[v]); }
  std::int32_t raw_jump(VertexId v) const noexcept { return jumps_[v]; }
  bool interior(VertexId v) const noexcept { return interior_[v] != 0; }

  std::span<const VertexId> preimage(VertexId v) const noexcept {
    return {children_.data() + child_offsets_[v], child_offsets_[v + 1] - child_offsets_[v]};
  }
  std::size_t in_degree(VertexId v) const noexcept { return child_offsets_[v + 1] - child_offsets_[v]; }

  std::size_t internal_jump_count() const noexcept;
  std::size_t exit_count() const noexcept;
  std::size_t interior_count() const noexcept;

  // Same vertices, jumps and interior flags (metadata ignored).
  bool same_structure(const ForestWindow& other) const noexcept;

 private:
  void finalize();

  VertexKind kind_ = VertexKind::Lattice;
  int dimension_ = 0;
  int key_length_ = 1;
  std::vector<std::int64_t> keys_;
  std::vector<std::int32_t> jumps_;
  std::vector<std::uint8_t> interior_;
  std::vector<std::size_t> child_offsets_{0};
  std::vector<VertexId> children_;
  ForestMetadata metadata_;
};

enum class Termination { BudgetExhausted, BoundaryExit, CycleDetected, FixedPoint };
std::string_view to_string(Termination t) noexcept;

// Forward orbit v, F(v), F(F(v)), ... up to the first stop condition.
struct Trajectory {
  std::vector<VertexId> path;
  Termination termination = Termination::BudgetExhausted;
  std::size_t cycle_entry = 0;  // meaningful for CycleDetected: path[cycle_entry] is the repeated vertex
};

Trajectory ancestral_line(const ForestWindow& forest, VertexId v, std::size_t max_steps);

enum class ComponentLabel { FiniteCycle, Truncated };
std::string_view to_string(ComponentLabel label) noexcept;

// Window diagnostics of one component. `boundary_arc_count` counts component
// vertices whose jump is not interior (exits, missing jumps and model-flagged
// edge sites), i.e. places where arcs may cross the window edge.
struct ComponentSummary {
  std::uint32_t id = 0;
  VertexId representative = 0;  // lexicographically minimal vertex
  std::size_t size = 0;
  std::size_t cycle_count = 0;
  std::size_t boundary_arc_count = 0;
  ComponentLabel label = ComponentLabel::Truncated;
  std::map<std::string, double> statistics;
};

// Components of the undirected graph {v, F(v)}, numbered by their minimal vertex.
struct ComponentPartition {
  std::vector<std::uint32_t> component_of;
  std::vector<ComponentSummary> summaries;
  std::vector<std::size_t> member_offsets{0};
  std::vector<VertexId> member_list;

  std::size_t count() const noexcept { return summaries.size(); }
  std::span<const VertexId> members(std::uint32_t id) const {
    return {member_list.data() + member_offsets[id], member_offsets[id + 1] - member_offsets[id]};
  }
};

ComponentPartition components(const ForestWindow& forest);
ComponentSummary classify_component(const ForestWindow& forest, std::uint32_t component_id);

// L(v) within the window: every w with F^k(w) = F^k(v) for some k <= horizon.
// `truncated` is set when v's line stops before `horizon` or the search met a
// non-interior vertex.
struct LevelSet {
  std::vector<VertexId> members;  // sorted
  bool truncated = false;
};

LevelSet level_set(const ForestWindow& forest, VertexId v, std::size_t horizon);

// D_n(v) = { u : F^n(u) = v }, sorted.
std::vector<VertexId> descendants(const ForestWindow& forest, VertexId v, std::size_t n);

// h(F(v)) = h(v) - 1 on a cycle-free component, anchored at its minimal vertex.
struct HeightAssignment {
  std::uint32_t component = 0;
  VertexId anchor = 0;
  std::vector<VertexId> vertices;  // sorted
  std::vector<std::int64_t> heights;

  std::optional<std::int64_t> height_of(VertexId v) const;
};

HeightAssignment height(const ForestWindow& forest, const ComponentPartition& partition,
                        std::uint32_t component_id);
HeightAssignment height(const ForestWindow& forest, std::uint32_t component_id);

}  // namespace cmt
