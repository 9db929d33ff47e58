#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cmt/forest.hpp"

namespace cmt {

using IntVec = std::vector<std::int64_t>;

// Hermite normal form of the lattice generated by `generators` (vectors of a
// common length d). Returns a basis in column echelon form: pivot rows
// strictly increase, pivots are positive, and entries of earlier columns in a
// pivot row are reduced into [0, pivot). Zero generators are dropped. The form
// is unique, so two generator sets span the same lattice iff their forms match.
// Integer overflow throws TooLarge.
std::vector<IntVec> hermite_normal_form(std::vector<IntVec> generators, std::size_t dimension);

bool same_lattice(const std::vector<IntVec>& a, const std::vector<IntVec>& b, std::size_t dimension);

// Membership of v in the lattice with Hermite basis `hnf`.
bool hnf_contains(const std::vector<IntVec>& hnf, std::span<const std::int64_t> v);

// |det| of a full-rank Hermite basis, 0 when rank < dimension.
std::int64_t hnf_covolume(const std::vector<IntVec>& hnf, std::size_t dimension);

// A full-rank sublattice of Z^d given by basis columns.
class LatticeSpec {
 public:
  LatticeSpec(std::size_t dimension, std::vector<IntVec> basis);

  static LatticeSpec integer(std::size_t dimension);
  // { x in Z^d : sum of coordinates even }, d >= 1.
  static LatticeSpec even(std::size_t dimension);

  std::size_t dimension() const noexcept { return dimension_; }
  const std::vector<IntVec>& basis() const noexcept { return basis_; }
  const std::vector<IntVec>& hermite_basis() const noexcept { return hnf_; }
  std::int64_t covolume() const { return hnf_covolume(hnf_, dimension_); }
  bool contains(std::span<const std::int64_t> v) const { return hnf_contains(hnf_, v); }

 private:
  std::size_t dimension_;
  std::vector<IntVec> basis_;
  std::vector<IntVec> hnf_;
};

// Finite-support jump law on Z^d: atoms in lexicographic order, positive
// weights summing to 1 within 1e-12.
class JumpDistribution {
 public:
  JumpDistribution(std::vector<IntVec> atoms, std::vector<double> weights);
  static JumpDistribution uniform(std::vector<IntVec> atoms);
  static JumpDistribution delta(IntVec atom) { return uniform({std::move(atom)}); }

  std::size_t dimension() const noexcept { return atoms_.front().size(); }
  std::size_t support_size() const noexcept { return atoms_.size(); }
  const std::vector<IntVec>& atoms() const noexcept { return atoms_; }
  const std::vector<double>& weights() const noexcept { return weights_; }
  const std::vector<double>& cumulative() const noexcept { return cumulative_; }
  double weight_of(std::span<const std::int64_t> atom) const;

  // Throws InvalidArgument when an atom is outside the lattice.
  void require_in(const LatticeSpec& lattice) const;

 private:
  std::vector<IntVec> atoms_;
  std::vector<double> weights_;
  std::vector<double> cumulative_;
};

struct CycleFreeResult {
  bool cycle_free = false;
  std::optional<IntVec> separating_vector;  // primitive integer v with v.u > 0 on every atom
};

// Exact decision (rational Fourier-Motzkin elimination) of whether the support
// lies in an open half-space through the origin.
CycleFreeResult check_cycle_free(const JumpDistribution& mu);

// Integer span of the support equals the lattice.
bool check_weak_irreducibility(const JumpDistribution& mu, const LatticeSpec& lattice);

// Integer span of pairwise differences of atoms equals the lattice.
bool check_weak_aperiodicity(const JumpDistribution& mu, const LatticeSpec& lattice);

struct KernelConditionReport {
  bool cycle_free = false;
  bool weakly_irreducible = false;
  bool weakly_aperiodic = false;
  // Aperiodicity was evaluated although irreducibility failed.
  bool aperiodicity_flagged = false;
  std::optional<IntVec> separating_vector;
  std::vector<IntVec> lattice_hnf;
  std::vector<IntVec> support_hnf;
  std::vector<IntVec> difference_hnf;
  // [lattice : span of differences]; 0 when the difference lattice is not full rank.
  // For one-dimensional kernels this is the gcd of the pairwise differences.
  std::int64_t difference_index = 0;

  // Re-checks every witness by direct substitution.
  bool verify(const JumpDistribution& mu) const;
  std::string to_text() const;
};

KernelConditionReport check_kernel(const JumpDistribution& mu, const LatticeSpec& lattice);

}  // namespace cmt
