#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cmt/graph.hpp"
#include "cmt/lattice.hpp"
#include "cmt/random.hpp"
#include "cmt/stats.hpp"

namespace cmt {

// Law of X_n - X_0, stored over its exact support in lexicographic order.
struct KernelPower {
  std::size_t n = 0;
  std::size_t dimension = 0;
  std::vector<IntVec> support;
  std::vector<double> probability;

  double mass() const;
  double at(std::span<const std::int64_t> z) const;
};

inline constexpr std::size_t kMaxKernelAtoms = 100'000'000;

// Exact n-fold convolution of mu; TooLarge past kMaxKernelAtoms atoms.
KernelPower kernel_power(const JumpDistribution& mu, std::size_t n);
KernelPower convolve(const KernelPower& a, const KernelPower& b);
// CSV `c0,...,c_{d-1},probability`, rows in lexicographic order.
void write_kernel_power_csv(std::ostream& out, const KernelPower& k);

struct GreenValue {
  double value = 0.0;
  // False when mu is not cycle-free: the sum is then a raw expected visit
  // count, not a hitting probability.
  bool probability = true;
};

// sum_{n=0}^{N} K^n(0, y).
GreenValue green_function(const JumpDistribution& mu, std::span<const std::int64_t> y, std::size_t max_steps);

// g(0, z) for every z with w.z <= level_bound, w the separating vector of a
// cycle-free mu. Since w.u >= 1 on atoms, the table is exact: no path to such
// a z takes more than level_bound steps.
class GreenTable {
 public:
  GreenTable(const JumpDistribution& mu, std::int64_t level_bound);

  const IntVec& separating_vector() const noexcept { return w_; }
  std::int64_t level_bound() const noexcept { return bound_; }
  // 0 outside the support; InvalidArgument when w.z exceeds the bound.
  double at(std::span<const std::int64_t> z) const;
  std::size_t size() const noexcept { return support_.size(); }

 private:
  IntVec w_;
  std::int64_t bound_;
  std::vector<IntVec> support_;
  std::vector<double> value_;
};

// Exact total variation between K^n(0, .) and K^(n+k)(0, .).
double tv_consecutive(const JumpDistribution& mu, std::size_t n, std::size_t k);

// A Markov chain on integer vectors, stepped with caller-owned randomness.
class ChainModel {
 public:
  virtual ~ChainModel() = default;
  virtual std::string name() const = 0;
  virtual std::size_t dimension() const = 0;
  virtual void step(IntVec& state, SplitMix64& rng) const = 0;
  // A state at distance r from origin, used by connectivity decay probes.
  virtual IntVec displace(const IntVec& origin, std::int64_t r) const = 0;
};

// X_{n+1} = X_n + U with U ~ mu. displace adds r * shift.
class LatticeChain final : public ChainModel {
 public:
  LatticeChain(JumpDistribution mu, IntVec shift, std::string name = "lattice");
  std::string name() const override { return name_; }
  std::size_t dimension() const override { return mu_.dimension(); }
  void step(IntVec& state, SplitMix64& rng) const override;
  IntVec displace(const IntVec& origin, std::int64_t r) const override;
  const JumpDistribution& jumps() const noexcept { return mu_; }

 private:
  JumpDistribution mu_;
  IntVec shift_;
  std::string name_;
};

// Ancestral lines of the coalescing random walk on base x Z: state (x, t)
// moves to (uniform neighbour of x, t + 1). displace moves r steps away from
// base vertex 0 along smallest-index neighbours, keeping t.
class SpaceTimeChain final : public ChainModel {
 public:
  explicit SpaceTimeChain(FiniteGraph base, std::string name = "space-time-srw");
  std::string name() const override { return name_; }
  std::size_t dimension() const override { return 2; }
  void step(IntVec& state, SplitMix64& rng) const override;
  IntVec displace(const IntVec& origin, std::int64_t r) const override;
  const FiniteGraph& base() const noexcept { return base_; }

 private:
  FiniteGraph base_;
  std::vector<std::size_t> depth_;
  std::string name_;
};

// Fraction of trials in which two independent chains from x and y satisfy
// X_m = Y_n for some 1 <= m, n <= budget (0 <= m, n with include_start).
// Trial i uses derive_seed(seed, i).
FrequencyEstimate path_collision_estimate(const ChainModel& model, const IntVec& x, const IntVec& y,
                                          std::size_t budget, std::size_t trials, std::uint64_t seed,
                                          bool include_start = false);

struct ChainTrace {
  std::vector<IntVec> x;
  std::vector<IntVec> y;
};

struct CouplingResult {
  bool success = false;
  std::optional<std::size_t> coupling_time;
  std::optional<std::int64_t> shift;
  std::optional<ChainTrace> trace;
};

// Independent steps until X_n = Y_n, then Y copies X. The trace (if asked)
// covers times 0..budget.
CouplingResult meet_and_stick_coupling(const JumpDistribution& mu, const IntVec& x, const IntVec& y,
                                       std::size_t budget, std::uint64_t seed, bool record_trace = false);

// First cross-collision X_m = Y_n with 0 <= m, n <= budget (found in order of
// max(m, n)); on success shift = m - n, coupling_time = m, and afterwards
// Y_j = X_{j + shift}.
CouplingResult shift_coupling(const JumpDistribution& mu, const LatticeSpec& lattice, const IntVec& x,
                              const IntVec& y, std::size_t budget, std::uint64_t seed, bool record_trace = false);

FrequencyEstimate meet_and_stick_frequency(const JumpDistribution& mu, const IntVec& x, const IntVec& y,
                                           std::size_t budget, std::size_t trials, std::uint64_t seed);
FrequencyEstimate shift_coupling_frequency(const JumpDistribution& mu, const LatticeSpec& lattice,
                                           const IntVec& x, const IntVec& y, std::size_t budget,
                                           std::size_t trials, std::uint64_t seed);

}  // namespace cmt
