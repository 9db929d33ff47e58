#include "cmt/models.hpp"

#include <algorithm>
#include <cmath>

#include "box_index.hpp"
#include "cmt/error.hpp"
#include "cmt/random.hpp"

namespace cmt {

Box Box::cube(std::size_t dimension, std::int64_t lo, std::int64_t hi) {
  return Box{std::vector<std::int64_t>(dimension, lo), std::vector<std::int64_t>(dimension, hi), {}};
}

bool Box::empty() const noexcept {
  if (lower.empty() || lower.size() != upper.size()) return true;
  for (std::size_t i = 0; i < lower.size(); ++i) {
    if (upper[i] < lower[i]) return true;
  }
  return false;
}

bool Box::normalize(std::span<std::int64_t> point) const noexcept {
  for (std::size_t i = 0; i < point.size(); ++i) {
    if (is_periodic(i)) {
      const std::int64_t e = extent(i);
      std::int64_t r = (point[i] - lower[i]) % e;
      if (r < 0) r += e;
      point[i] = lower[i] + r;
    } else if (point[i] < lower[i] || point[i] > upper[i]) {
      return false;
    }
  }
  return true;
}

namespace {

WindowGeometry geometry_of(const Box& box, const LatticeSpec& lattice) {
  WindowGeometry g;
  g.lower = box.lower;
  g.upper = box.upper;
  g.periodic.assign(box.dimension(), false);
  for (std::size_t i = 0; i < box.dimension(); ++i) g.periodic[i] = box.is_periodic(i);
  g.lattice_basis = lattice.basis();
  return g;
}

}  // namespace

ForestWindow sample_lattice_cmt(const LatticeSpec& lattice, const JumpDistribution& mu, const Box& box,
                                std::uint64_t seed, std::string model) {
  require(!box.empty(), ErrorCode::EmptyWindow, "box is empty");
  const std::size_t d = lattice.dimension();
  require(box.dimension() == d, ErrorCode::BadDimension, "box and lattice differ in dimension");
  mu.require_in(lattice);
  for (std::size_t i = 0; i < d; ++i) {
    if (!box.is_periodic(i)) continue;
    IntVec period(d, 0);
    period[i] = box.extent(i);
    require(lattice.contains(period), ErrorCode::InvalidArgument, "periodic extent must be a lattice vector");
  }

  const detail::BoxIndexer indexer(box);
  std::vector<std::int32_t> id_of(indexer.volume(), -1);
  std::vector<std::int64_t> keys;
  IntVec p(d);
  std::int32_t next_id = 0;
  for (std::uint64_t idx = 0; idx < indexer.volume(); ++idx) {
    indexer.point(idx, p);
    if (!lattice.contains(p)) continue;
    require(next_id < INT32_MAX, ErrorCode::TooLarge, "too many vertices");
    id_of[idx] = next_id++;
    keys.insert(keys.end(), p.begin(), p.end());
  }

  const std::size_t n = static_cast<std::size_t>(next_id);
  std::vector<std::int32_t> jumps(n, ForestWindow::kExit);
  std::vector<std::uint8_t> interior(n, 0);
  const auto& atoms = mu.atoms();
  IntVec q(d);
  for (std::size_t v = 0; v < n; ++v) {
    std::span<const std::int64_t> x(keys.data() + v * d, d);
    bool all_in = true;
    for (const auto& a : atoms) {
      for (std::size_t i = 0; i < d; ++i) q[i] = x[i] + a[i];
      if (!box.normalize(q)) {
        all_in = false;
        break;
      }
    }
    interior[v] = all_in ? 1 : 0;

    SplitMix64 rng(key_seed(seed, x));
    const auto& a = atoms[sample_cumulative(rng, mu.cumulative())];
    for (std::size_t i = 0; i < d; ++i) q[i] = x[i] + a[i];
    if (box.normalize(q)) jumps[v] = id_of[indexer.index(q)];
  }

  ForestMetadata meta{std::move(model), seed, geometry_of(box, lattice)};
  return ForestWindow::from_sorted(VertexKind::Lattice, static_cast<int>(d), std::move(keys), std::move(jumps),
                                   std::move(interior), std::move(meta));
}

JumpDistribution nguyen_jumps(std::size_t dimension) {
  require(dimension >= 2, ErrorCode::BadDimension, "Nguyen's model needs d >= 2");
  std::vector<IntVec> atoms;
  for (std::size_t i = 0; i + 1 < dimension; ++i) {
    for (std::int64_t s : {-1, 1}) {
      IntVec a(dimension, 0);
      a[i] = s;
      a[dimension - 1] = -1;
      atoms.push_back(a);
    }
  }
  return JumpDistribution::uniform(std::move(atoms));
}

JumpDistribution nguyen_variant_jumps() { return JumpDistribution::uniform({{-1, -1}, {1, -1}, {0, -2}}); }

ForestWindow nguyen_model(std::size_t dimension, const Box& box, std::uint64_t seed) {
  require(dimension >= 2, ErrorCode::BadDimension, "Nguyen's model needs d >= 2");
  return sample_lattice_cmt(LatticeSpec::even(dimension), nguyen_jumps(dimension), box, seed, "nguyen");
}

ForestWindow nguyen_variant(const Box& box, std::uint64_t seed) {
  return sample_lattice_cmt(LatticeSpec::even(2), nguyen_variant_jumps(), box, seed, "nguyen-variant");
}

ForestWindow renewal_model(const JumpDistribution& mu, std::int64_t lo, std::int64_t hi, std::uint64_t seed) {
  require(mu.dimension() == 1, ErrorCode::BadDimension, "renewal jumps are one-dimensional");
  for (const auto& a : mu.atoms()) require(a[0] > 0, ErrorCode::InvalidArgument, "renewal jumps must be positive");
  return sample_lattice_cmt(LatticeSpec::integer(1), mu, Box::interval(lo, hi), seed, "renewal");
}

namespace {

using RowSampler = std::function<std::uint32_t(std::uint32_t x, SplitMix64& rng)>;

ForestWindow sample_space_time(const SpaceTimeGraph& graph, std::uint64_t seed, const RowSampler& step,
                               std::string model) {
  require(graph.t_end >= graph.t_begin, ErrorCode::EmptyWindow, "time range is empty");
  const std::size_t n = graph.base.vertex_count();
  require(n > 0, ErrorCode::BadGraph, "base graph has no vertices");
  const auto slices = static_cast<std::size_t>(graph.t_end - graph.t_begin + 1);
  require(n * slices < static_cast<std::size_t>(INT32_MAX), ErrorCode::TooLarge, "space-time window too large");

  // Keys (x, t) sorted lexicographically: id = x * slices + (t - t_begin).
  std::vector<std::int64_t> keys;
  keys.reserve(2 * n * slices);
  std::vector<std::int32_t> jumps(n * slices, ForestWindow::kNoJump);
  std::vector<std::uint8_t> interior(n * slices, 0);
  for (std::uint32_t x = 0; x < n; ++x) {
    for (std::size_t s = 0; s < slices; ++s) {
      const std::int64_t t = graph.t_begin + static_cast<std::int64_t>(s);
      keys.push_back(x);
      keys.push_back(t);
      if (s + 1 == slices) continue;
      const std::int64_t site[2] = {x, t};
      SplitMix64 rng(key_seed(seed, site));
      const std::uint32_t y = step(x, rng);
      jumps[x * slices + s] = static_cast<std::int32_t>(y * slices + s + 1);
      interior[x * slices + s] = 1;
    }
  }
  WindowGeometry g;
  g.lower = {0, graph.t_begin};
  g.upper = {static_cast<std::int64_t>(n) - 1, graph.t_end};
  g.periodic = {false, false};
  return ForestWindow::from_sorted(VertexKind::Lattice, 2, std::move(keys), std::move(jumps), std::move(interior),
                                   ForestMetadata{std::move(model), seed, std::move(g)});
}

}  // namespace

ForestWindow coalescing_srw(const SpaceTimeGraph& graph, std::uint64_t seed) {
  for (std::uint32_t x = 0; x < graph.base.vertex_count(); ++x) {
    require(graph.base.degree(x) > 0, ErrorCode::BadGraph, "isolated base vertex");
  }
  return sample_space_time(
      graph, seed,
      [&](std::uint32_t x, SplitMix64& rng) {
        const auto inc = graph.base.incident(x);
        return inc[uniform_below(rng, inc.size())].neighbor;
      },
      "coalescing-srw");
}

ForestWindow coalescing_mc(const SpaceTimeGraph& graph, const std::vector<std::vector<double>>& p,
                           const std::vector<double>& b0, std::uint64_t seed) {
  const std::size_t n = graph.base.vertex_count();
  require(p.size() == n && b0.size() == n, ErrorCode::InvalidArgument, "kernel size differs from base graph");
  std::vector<std::vector<double>> cumulative(n);
  for (std::size_t x = 0; x < n; ++x) {
    require(p[x].size() == n, ErrorCode::InvalidArgument, "kernel must be square");
    require(b0[x] >= 0.0, ErrorCode::InvalidArgument, "balance weights must be nonnegative");
    double total = 0.0;
    for (std::size_t y = 0; y < n; ++y) {
      require(p[x][y] >= 0.0, ErrorCode::InvalidArgument, "kernel entries must be nonnegative");
      total += p[x][y];
      cumulative[x].push_back(total);
    }
    require(std::abs(total - 1.0) <= 1e-9, ErrorCode::InvalidArgument, "kernel rows must sum to 1");
  }
  for (std::size_t x = 0; x < n; ++x) {
    for (std::size_t y = 0; y < n; ++y) {
      require(std::abs(b0[x] * p[x][y] - b0[y] * p[y][x]) <= 1e-9, ErrorCode::DetailedBalanceViolated,
              "b0(x) p(x,y) != b0(y) p(y,x) at (" + std::to_string(x) + "," + std::to_string(y) + ")");
    }
  }
  return sample_space_time(
      graph, seed,
      [&](std::uint32_t x, SplitMix64& rng) {
        return static_cast<std::uint32_t>(sample_cumulative(rng, cumulative[x]));
      },
      "coalescing-mc");
}

VoterPartition voter_stationary(const FiniteGraph& base, std::size_t lookback, std::uint64_t seed) {
  const std::size_t n = base.vertex_count();
  for (std::uint32_t x = 0; x < n; ++x) {
    require(base.degree(x) > 0, ErrorCode::BadGraph, "isolated base vertex");
  }
  std::vector<std::uint32_t> endpoint(n);
  for (std::uint32_t x = 0; x < n; ++x) {
    std::uint32_t pos = x;
    for (std::size_t s = 0; s < lookback; ++s) {
      // Site (pos, -s): the backward step taken by whoever stands there at time -s.
      const std::int64_t site[2] = {pos, -static_cast<std::int64_t>(s)};
      SplitMix64 rng(key_seed(seed, site));
      if (uniform01(rng) < 0.5) continue;
      const auto inc = base.incident(pos);
      pos = inc[uniform_below(rng, inc.size())].neighbor;
    }
    endpoint[x] = pos;
  }
  VoterPartition out;
  out.label.assign(n, 0);
  std::vector<std::uint32_t> class_of_endpoint(n, UINT32_MAX);
  for (std::uint32_t x = 0; x < n; ++x) {
    auto& c = class_of_endpoint[endpoint[x]];
    if (c == UINT32_MAX) c = static_cast<std::uint32_t>(out.class_count++);
    out.label[x] = c;
  }
  return out;
}

std::size_t canopy_layer_size(std::size_t depth, std::size_t layer) {
  require(layer <= depth, ErrorCode::InvalidArgument, "layer beyond depth");
  return std::size_t{1} << (depth - layer);
}

CanopySample canopy_cmt(std::size_t depth, std::uint64_t seed) {
  require(depth >= 1, ErrorCode::InvalidArgument, "canopy depth must be >= 1");
  require(depth <= 26, ErrorCode::TooLarge, "canopy depth too large");
  std::vector<std::size_t> offset(depth + 2, 0);
  for (std::size_t i = 0; i <= depth; ++i) offset[i + 1] = offset[i] + canopy_layer_size(depth, i);
  const std::size_t n = offset[depth + 1];

  std::vector<std::int64_t> keys;
  keys.reserve(2 * n);
  std::vector<std::int32_t> jumps(n, ForestWindow::kNoJump);
  std::vector<std::uint8_t> interior(n, 0);
  std::vector<std::uint8_t> doubled(n, 0);
  for (std::size_t layer = 0; layer <= depth; ++layer) {
    for (std::size_t j = 0; j < canopy_layer_size(depth, layer); ++j) {
      const std::size_t v = offset[layer] + j;
      keys.push_back(static_cast<std::int64_t>(layer));
      keys.push_back(static_cast<std::int64_t>(j));
      if (layer == depth) continue;
      if (layer + 1 == depth) {
        jumps[v] = static_cast<std::int32_t>(offset[layer + 1] + j / 2);
        continue;
      }
      const std::int64_t site[2] = {static_cast<std::int64_t>(layer), static_cast<std::int64_t>(j)};
      SplitMix64 rng(key_seed(seed, site));
      const double p_double = std::ldexp(1.0, -static_cast<int>(layer) - 1);
      if (uniform01(rng) < p_double) {
        jumps[v] = static_cast<std::int32_t>(offset[layer + 2] + j / 4);
        doubled[v] = 1;
      } else {
        jumps[v] = static_cast<std::int32_t>(offset[layer + 1] + j / 2);
      }
      interior[v] = 1;
    }
  }

  // Targets sit in higher layers, so a top-down sweep sees F(x) before x.
  std::vector<std::int64_t> doubles_on_line(n, 0);
  for (std::size_t v = n; v-- > 0;) {
    if (jumps[v] >= 0) doubles_on_line[v] = doubles_on_line[static_cast<std::size_t>(jumps[v])] + doubled[v];
  }
  CanopySample out;
  out.depth = depth;
  out.invariant.resize(n);
  for (std::size_t layer = 0; layer <= depth; ++layer) {
    for (std::size_t v = offset[layer]; v < offset[layer + 1]; ++v) {
      out.invariant[v] = static_cast<std::int64_t>(layer) + doubles_on_line[v];
    }
  }
  WindowGeometry g;
  g.lower = {0, 0};
  g.upper = {static_cast<std::int64_t>(depth), static_cast<std::int64_t>(canopy_layer_size(depth, 0)) - 1};
  g.periodic = {false, false};
  out.forest = ForestWindow::from_sorted(VertexKind::Lattice, 2, std::move(keys), std::move(jumps),
                                         std::move(interior), ForestMetadata{"canopy", seed, std::move(g)});
  return out;
}

}  // namespace cmt
