#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cmt/chains.hpp"
#include "cmt/forest.hpp"
#include "cmt/lattice.hpp"
#include "cmt/stats.hpp"

namespace cmt {

// Output of every probe. Each estimate is one unit (component, distance, n)
// with a 4-sigma band built from its own trial count.
struct ProbeEstimate {
  std::string unit;
  double value = 0.0;
  double half_width = 0.0;
  std::uint64_t trials = 0;
};

struct ProbeReport {
  std::string probe;
  std::string config_hash;
  std::vector<ProbeEstimate> estimates;
  std::map<std::string, double> summary;
  double truncation_fraction = 0.0;

  // Header `unit,value,half_width,trials`, full double precision.
  void write_csv(std::ostream& out) const;
  // {probe, config-hash, estimates, bands, truncation-fraction, summary}
  std::string to_json() const;
};

enum class ComponentStatistic { LeafFraction, MeanInDegree, JumpFrequencyVector, HeightRangePerSize };
ComponentStatistic parse_component_statistic(const std::string& name);
std::string to_string(ComponentStatistic s);

// Per-component statistic over components of size >= min_size. The summary
// holds `cv` (coefficient of variation across components; for the jump
// vector, the mean over coordinates), `mean` and `components`. The
// truncation fraction is the share of qualifying components labelled
// Truncated. Empty when no component qualifies.
ProbeReport component_statistic_survey(const ForestWindow& forest, ComponentStatistic statistic,
                                       std::size_t min_size);

// a_n = mean of f over Pi_n(v) = D_n(F^n(v)) for n = 0..n_max. The sequence
// stops early if v's line leaves the window.
struct NestedAverage {
  std::vector<double> average;
  std::vector<std::size_t> set_size;
  std::vector<bool> truncated;
};
NestedAverage nested_level_average(const ForestWindow& forest, const std::vector<double>& f, VertexId v,
                                   std::size_t n_max);

// Occupation frequency of components along one lazy random walk on the torus
// (hold 1/2, else a uniform +-basis step), independent of the forest. A
// sample is taken every `stride` steps; the start is uniform.
// NeedsTorus unless every axis of the window is periodic.
FrequencyEstimate cluster_frequency(const ForestWindow& forest, std::uint32_t component_id, std::size_t samples,
                                    std::uint64_t seed, std::size_t stride = 1);
std::vector<FrequencyEstimate> cluster_frequencies(const ForestWindow& forest, std::size_t samples,
                                                   std::uint64_t seed, std::size_t stride = 1);

// |F^-1(v)| over a region. total_in / count is exact.
struct InDegreeProfile {
  std::size_t count = 0;
  std::size_t total_in = 0;
  std::vector<std::uint64_t> histogram;

  double mean() const noexcept { return count ? static_cast<double>(total_in) / static_cast<double>(count) : 0.0; }
  bool mean_is_exactly_one() const noexcept { return count > 0 && total_in == count; }
};
InDegreeProfile in_degree_profile(const ForestWindow& forest, const std::vector<VertexId>& region);
InDegreeProfile in_degree_profile(const ForestWindow& forest);

// P[x in C(o)] per distance, by two-line meeting (start points included)
// within the budget. Distance 0 is exactly 1. The truncation fraction is the
// share of trials cut by the budget.
ProbeReport connectivity_decay_probe(const ChainModel& model, const IntVec& origin,
                                     const std::vector<std::int64_t>& distances, std::size_t trials,
                                     std::size_t budget, std::uint64_t seed);

// k chains from o; a trial succeeds when no two of them collide at times
// >= burn_in within the budget (the k lines stay in k components).
FrequencyEstimate count_components_probe(const ChainModel& model, const IntVec& origin, std::size_t k,
                                         std::size_t budget, std::size_t trials, std::uint64_t seed,
                                         std::size_t burn_in = 1);

// Mean of g(0, X_n) over chain endpoints, g from one exact GreenTable.
ProbeReport one_endedness_probe(const JumpDistribution& mu, const std::vector<std::size_t>& n_list,
                                std::size_t trials, std::uint64_t seed);

// F' from each level-set to the next, built per component tree: children of
// every vertex are shuffled (stream keyed by the parent's key), depth classes
// inherit the order, and F'(x) = h_tau(F(x)) with tau the smallest i > 0 such
// that F(h_i(x)) >= h_i(F(x)). Consecutive classes of equal size are treated
// cyclically (tau <= size is guaranteed); otherwise the order is linear and
// sources with no admissible tau are reported unmatched.
struct LevelBijection {
  std::vector<std::int64_t> image;  // -1 outside the domain or unmatched
  std::vector<VertexId> unmatched;
  std::vector<std::uint32_t> depth;  // depth class index inside the component tree
  std::size_t domain_size = 0;
  std::size_t cyclic_pairs = 0;
  std::size_t linear_pairs = 0;

  bool injective() const;
};
LevelBijection level_set_bijection(const ForestWindow& forest, std::uint64_t seed);

// Canopy negative control: l + n must be constant on every level-set and take
// at least `depth` distinct values. Summary keys: constant, distinct_values,
// level_sets, passed.
ProbeReport canopy_distinguishability_demo(std::size_t depth, std::uint64_t seed);

}  // namespace cmt
