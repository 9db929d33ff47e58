#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "cmt/forest.hpp"
#include "cmt/graph.hpp"
#include "cmt/lattice.hpp"

namespace cmt {

// Product of integer intervals, optionally periodic per axis (a torus axis
// identifies lower and upper + 1).
struct Box {
  std::vector<std::int64_t> lower;
  std::vector<std::int64_t> upper;  // inclusive
  std::vector<bool> periodic;       // empty means no periodic axis

  static Box interval(std::int64_t lo, std::int64_t hi) { return Box{{lo}, {hi}, {}}; }
  static Box cube(std::size_t dimension, std::int64_t lo, std::int64_t hi);

  std::size_t dimension() const noexcept { return lower.size(); }
  bool is_periodic(std::size_t axis) const noexcept { return axis < periodic.size() && periodic[axis]; }
  std::int64_t extent(std::size_t axis) const noexcept { return upper[axis] - lower[axis] + 1; }
  bool empty() const noexcept;
  // Wraps periodic axes into range; false when a non-periodic axis is outside.
  bool normalize(std::span<std::int64_t> point) const noexcept;
};

// Lattice CMT: F(x) = x + U(x) with U(x) i.i.d. ~ mu, one randomness stream per
// site keyed by (seed, x). Windows sampled with the same seed agree on every
// shared site. A vertex is interior iff every atom of mu lands in the box.
ForestWindow sample_lattice_cmt(const LatticeSpec& lattice, const JumpDistribution& mu, const Box& box,
                                std::uint64_t seed, std::string model = "lattice-cmt");

// Jumps (+-e_i, -1) for i < d-1 on the even sublattice of Z^d.
JumpDistribution nguyen_jumps(std::size_t dimension);
// Jumps (-1,-1), (1,-1), (0,-2).
JumpDistribution nguyen_variant_jumps();

ForestWindow nguyen_model(std::size_t dimension, const Box& box, std::uint64_t seed);
ForestWindow nguyen_variant(const Box& box, std::uint64_t seed);
// mu must live on the positive integers.
ForestWindow renewal_model(const JumpDistribution& mu, std::int64_t lo, std::int64_t hi, std::uint64_t seed);

// Base graph times the integer interval [t_begin, t_end]. Vertex keys are
// (base vertex, time); time increases along jumps.
struct SpaceTimeGraph {
  FiniteGraph base;
  std::int64_t t_begin = 0;
  std::int64_t t_end = 0;
};

// F(x,t) = (Y, t+1) with Y a uniform neighbour of x. The top slice has no jump.
ForestWindow coalescing_srw(const SpaceTimeGraph& graph, std::uint64_t seed);

// F(x,t) = (Y, t+1) with Y ~ p(x, .). Requires rows of p to sum to 1 and
// b0(x) p(x,y) = b0(y) p(y,x) within 1e-9.
ForestWindow coalescing_mc(const SpaceTimeGraph& graph, const std::vector<std::vector<double>>& p,
                           const std::vector<double>& b0, std::uint64_t seed);

// Stationary voter model via duality: base vertices sharing the endpoint of
// their backward lazy random walks after `lookback` steps hold one opinion.
// Step randomness is keyed by (space, time), so walks that meet stay together
// and the partition for T refines the one for T + 1.
struct VoterPartition {
  std::vector<std::uint32_t> label;  // canonical: classes numbered by first vertex
  std::size_t class_count = 0;
};
VoterPartition voter_stationary(const FiniteGraph& base, std::size_t lookback, std::uint64_t seed);

// Canopy tree of depth D: layers H_0..H_D with |H_i| = 2^(D-i), keys (layer, index).
// F jumps to the parent with probability 1 - 2^(-l-1) and to the grandparent
// otherwise; layer D-1 always jumps to the parent (non-interior), layer D has no jump.
struct CanopySample {
  ForestWindow forest;
  std::vector<std::int64_t> invariant;  // l(x) + number of double jumps on x's line
  std::size_t depth = 0;
};
std::size_t canopy_layer_size(std::size_t depth, std::size_t layer);
CanopySample canopy_cmt(std::size_t depth, std::uint64_t seed);

}  // namespace cmt
