#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "cmt/forest.hpp"
#include "cmt/models.hpp"

namespace cmt {

// Continuous configuration in a rectangle [lower, upper]. Points are sorted
// lexicographically; coordinate 0 is the time axis.
struct PointCloud {
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<std::vector<double>> points;
  double intensity = 0.0;
  std::uint64_t seed = 0;

  std::size_t dimension() const noexcept { return lower.size(); }
  std::size_t size() const noexcept { return points.size(); }
  double volume() const;
};

// Bernoulli configuration on the lattice points of a box (axis 0 is time).
// Site x is retained iff the first uniform of its keyed stream is below p, so
// nested boxes with one seed see the same points.
class LatticeCloud {
 public:
  LatticeCloud() = default;
  // Explicit configuration (for hand-built instances). Points outside the box are rejected.
  static LatticeCloud from_points(Box box, const std::vector<IntVec>& points);

  const Box& box() const noexcept { return box_; }
  double retention() const noexcept { return p_; }
  std::uint64_t seed() const noexcept { return seed_; }
  std::size_t size() const noexcept { return count_; }
  // Retained points in lexicographic order.
  std::vector<IntVec> points() const;
  // p must already be normalized into the box.
  bool retained(std::span<const std::int64_t> p) const;

 private:
  friend LatticeCloud sample_bernoulli(double p, const Box& box, std::uint64_t seed);
  void init_box(Box box);
  std::uint64_t index(std::span<const std::int64_t> p) const;

  Box box_;
  double p_ = 0.0;
  std::uint64_t seed_ = 0;
  std::vector<std::uint64_t> stride_;
  std::vector<std::uint8_t> mask_;
  std::size_t count_ = 0;
};

LatticeCloud sample_bernoulli(double p, const Box& box, std::uint64_t seed);

// Homogeneous Poisson process of intensity lambda on the rectangle.
PointCloud sample_poisson(double lambda, std::vector<double> lower, std::vector<double> upper, std::uint64_t seed);

struct StripConfig {
  double half_width = 1.0;
};

// F(p) = the point in (t, inf) x [x - w, x + w] with minimal first coordinate
// (ties in time go to the lexicographically smaller point). Spatial distance is
// the sup norm when there are several spatial axes. Vertices are point ids; a
// source is interior iff a target was found and its strip lies inside the window.
ForestWindow strip_point_map(const PointCloud& cloud, const StripConfig& config);

// Howard's model on Z x Z^(d-1): F(t, x) is a retained point (t+1, y) with
// minimal l1 distance |y - x| (periodic axes use the torus distance). Ties are
// broken uniformly by a stream keyed by the source. Non-interior when the
// search reached the spatial boundary or the next slice is outside the box.
ForestWindow howard_model(double p, const Box& box, std::uint64_t seed);
ForestWindow howard_from_cloud(const LatticeCloud& cloud, std::uint64_t tie_seed);

// Discrete strip: F(t, x) is a retained point of [t+1, inf) x B_1(x) with
// minimal first coordinate, ties uniform. B_1 is the closed l1 ball of radius 1.
ForestWindow discrete_strip(double p, const Box& box, std::uint64_t seed);
ForestWindow discrete_strip_from_cloud(const LatticeCloud& cloud, std::uint64_t tie_seed);

// Point-cloud dump: a '#' header with window, intensity and seed, then one
// point per line `t x1 ... x_{d-1}`.
void write_point_cloud(std::ostream& out, const PointCloud& cloud);
void write_point_cloud(std::ostream& out, const LatticeCloud& cloud);

// CSV `point-id,t,x,level-index,component-id`, one row per vertex. The level
// index is minus the height, so it increases by exactly 1 along every jump;
// it is empty on cyclic components. For point forests t and x come from the
// cloud, for lattice forests from the first two key coordinates.
// With max_levels > 0 only the largest component is written, restricted to
// max_levels consecutive level indices around its median level.
void write_level_csv(std::ostream& out, const ForestWindow& forest, const PointCloud* cloud = nullptr,
                     std::size_t max_levels = 0);

}  // namespace cmt
