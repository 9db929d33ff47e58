#include "cmt/point_models.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <ostream>
#include <random>

#include "cmt/error.hpp"
#include "cmt/random.hpp"

namespace cmt {

namespace {

std::string fmt(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

WindowGeometry geometry_of(const Box& box) {
  WindowGeometry g;
  g.lower = box.lower;
  g.upper = box.upper;
  g.periodic.assign(box.dimension(), false);
  for (std::size_t i = 0; i < box.dimension(); ++i) g.periodic[i] = box.is_periodic(i);
  return g;
}

}  // namespace

double PointCloud::volume() const {
  double v = 1.0;
  for (std::size_t i = 0; i < lower.size(); ++i) v *= upper[i] - lower[i];
  return v;
}

void LatticeCloud::init_box(Box box) {
  require(!box.empty(), ErrorCode::EmptyWindow, "box is empty");
  require(box.dimension() >= 1, ErrorCode::BadDimension, "box needs at least one axis");
  box_ = std::move(box);
  stride_.assign(box_.dimension(), 0);
  std::uint64_t stride = 1;
  for (std::size_t i = box_.dimension(); i-- > 0;) {
    stride_[i] = stride;
    require(!__builtin_mul_overflow(stride, static_cast<std::uint64_t>(box_.extent(i)), &stride) &&
                stride < (1ULL << 36),
            ErrorCode::TooLarge, "box volume too large");
  }
  mask_.assign(stride, 0);
  count_ = 0;
}

std::uint64_t LatticeCloud::index(std::span<const std::int64_t> p) const {
  std::uint64_t idx = 0;
  for (std::size_t i = 0; i < p.size(); ++i) idx += static_cast<std::uint64_t>(p[i] - box_.lower[i]) * stride_[i];
  return idx;
}

bool LatticeCloud::retained(std::span<const std::int64_t> p) const { return mask_[index(p)] != 0; }

std::vector<IntVec> LatticeCloud::points() const {
  std::vector<IntVec> out;
  out.reserve(count_);
  const std::size_t d = box_.dimension();
  for (std::uint64_t idx = 0; idx < mask_.size(); ++idx) {
    if (!mask_[idx]) continue;
    IntVec p(d);
    std::uint64_t rest = idx;
    for (std::size_t i = 0; i < d; ++i) {
      p[i] = box_.lower[i] + static_cast<std::int64_t>(rest / stride_[i]);
      rest %= stride_[i];
    }
    out.push_back(std::move(p));
  }
  return out;
}

LatticeCloud LatticeCloud::from_points(Box box, const std::vector<IntVec>& points) {
  LatticeCloud c;
  c.init_box(std::move(box));
  c.p_ = 0.0;
  for (const auto& p : points) {
    require(p.size() == c.box_.dimension(), ErrorCode::BadDimension, "point dimension differs from box");
    IntVec q = p;
    require(c.box_.normalize(q), ErrorCode::InvalidArgument, "point outside the box");
    auto& m = c.mask_[c.index(q)];
    if (!m) ++c.count_;
    m = 1;
  }
  return c;
}

LatticeCloud sample_bernoulli(double p, const Box& box, std::uint64_t seed) {
  require(p >= 0.0 && p <= 1.0, ErrorCode::InvalidArgument, "retention probability must be in [0,1]");
  LatticeCloud c;
  c.init_box(box);
  c.p_ = p;
  c.seed_ = seed;
  const std::size_t d = box.dimension();
  IntVec x(d);
  for (std::uint64_t idx = 0; idx < c.mask_.size(); ++idx) {
    std::uint64_t rest = idx;
    for (std::size_t i = 0; i < d; ++i) {
      x[i] = box.lower[i] + static_cast<std::int64_t>(rest / c.stride_[i]);
      rest %= c.stride_[i];
    }
    SplitMix64 rng(key_seed(seed, x));
    if (uniform01(rng) < p) {
      c.mask_[idx] = 1;
      ++c.count_;
    }
  }
  return c;
}

PointCloud sample_poisson(double lambda, std::vector<double> lower, std::vector<double> upper, std::uint64_t seed) {
  require(lambda >= 0.0, ErrorCode::InvalidArgument, "intensity must be nonnegative");
  require(!lower.empty() && lower.size() == upper.size(), ErrorCode::BadDimension, "bad rectangle");
  for (std::size_t i = 0; i < lower.size(); ++i) {
    require(upper[i] > lower[i], ErrorCode::EmptyWindow, "rectangle is empty");
  }
  PointCloud cloud{std::move(lower), std::move(upper), {}, lambda, seed};
  const double mean = lambda * cloud.volume();
  SplitMix64 rng(seed);
  std::uint64_t n = 0;
  if (mean > 0.0) n = std::poisson_distribution<std::uint64_t>(mean)(rng);
  require(n < (1ULL << 28), ErrorCode::TooLarge, "too many Poisson points");
  cloud.points.resize(n);
  for (auto& p : cloud.points) {
    p.resize(cloud.dimension());
    for (std::size_t i = 0; i < p.size(); ++i) {
      p[i] = cloud.lower[i] + (cloud.upper[i] - cloud.lower[i]) * uniform01(rng);
    }
  }
  std::sort(cloud.points.begin(), cloud.points.end());
  return cloud;
}

ForestWindow strip_point_map(const PointCloud& cloud, const StripConfig& config) {
  require(config.half_width > 0.0, ErrorCode::InvalidArgument, "strip half-width must be positive");
  const std::size_t d = cloud.dimension();
  require(d >= 2, ErrorCode::BadDimension, "strip map needs a time axis and a space axis");
  const auto& pts = cloud.points;
  const std::size_t n = pts.size();
  const double w = config.half_width;

  std::vector<std::int64_t> keys(n);
  std::vector<std::int32_t> jumps(n, ForestWindow::kExit);
  std::vector<std::uint8_t> interior(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    keys[i] = static_cast<std::int64_t>(i);
    bool inside = true;
    for (std::size_t a = 1; a < d; ++a) {
      if (pts[i][a] - w < cloud.lower[a] || pts[i][a] + w > cloud.upper[a]) inside = false;
    }
    for (std::size_t j = i + 1; j < n; ++j) {
      if (!(pts[j][0] > pts[i][0])) continue;
      bool hit = true;
      for (std::size_t a = 1; a < d && hit; ++a) hit = std::abs(pts[j][a] - pts[i][a]) <= w;
      if (hit) {
        jumps[i] = static_cast<std::int32_t>(j);
        interior[i] = inside ? 1 : 0;
        break;
      }
    }
  }
  return ForestWindow::from_sorted(VertexKind::Point, 0, std::move(keys), std::move(jumps), std::move(interior),
                                   ForestMetadata{"strip", cloud.seed, {}});
}

namespace {

// Shared skeleton of the two lattice point-maps: vertices are the retained
// points, `search` fills the candidate list for one source and reports
// whether the search stayed inside the window.
template <class Search>
ForestWindow lattice_point_map(const LatticeCloud& cloud, std::uint64_t tie_seed, std::string model,
                               Search search) {
  const Box& box = cloud.box();
  const std::size_t d = box.dimension();
  require(d >= 2, ErrorCode::BadDimension, "needs a time axis and at least one space axis");
  const auto pts = cloud.points();
  require(pts.size() < static_cast<std::size_t>(INT32_MAX), ErrorCode::TooLarge, "too many points");

  std::vector<std::int64_t> keys;
  keys.reserve(pts.size() * d);
  for (const auto& p : pts) keys.insert(keys.end(), p.begin(), p.end());
  auto id_of = [&](const IntVec& p) {
    auto it = std::lower_bound(pts.begin(), pts.end(), p);
    return static_cast<std::int32_t>(it - pts.begin());
  };

  std::vector<std::int32_t> jumps(pts.size(), ForestWindow::kExit);
  std::vector<std::uint8_t> interior(pts.size(), 0);
  std::vector<IntVec> candidates;
  for (std::size_t v = 0; v < pts.size(); ++v) {
    candidates.clear();
    const bool clean = search(pts[v], candidates);
    if (candidates.empty()) continue;
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
    std::size_t pick = 0;
    if (candidates.size() > 1) {
      SplitMix64 rng(key_seed(tie_seed, pts[v]));
      pick = uniform_below(rng, candidates.size());
    }
    jumps[v] = id_of(candidates[pick]);
    interior[v] = clean ? 1 : 0;
  }
  return ForestWindow::from_sorted(VertexKind::Lattice, static_cast<int>(d), std::move(keys), std::move(jumps),
                                   std::move(interior), ForestMetadata{std::move(model), cloud.seed(), geometry_of(box)});
}

// Calls f(offset) for every offset of l1 norm r in Z^k.
template <class F>
void for_each_sphere_offset(IntVec& off, std::size_t axis, std::int64_t r, F& f) {
  if (axis + 1 == off.size()) {
    off[axis] = r;
    f(off);
    if (r != 0) {
      off[axis] = -r;
      f(off);
    }
    return;
  }
  for (std::int64_t a = -r; a <= r; ++a) {
    off[axis] = a;
    for_each_sphere_offset(off, axis + 1, r - (a < 0 ? -a : a), f);
  }
}

}  // namespace

ForestWindow howard_from_cloud(const LatticeCloud& cloud, std::uint64_t tie_seed) {
  const Box& box = cloud.box();
  const std::size_t d = box.dimension();
  std::int64_t max_radius = 0;
  for (std::size_t i = 1; i < d; ++i) max_radius += box.extent(i);
  return lattice_point_map(cloud, tie_seed, "howard", [&](const IntVec& x, std::vector<IntVec>& out) {
    if (x[0] + 1 > box.upper[0] && !box.is_periodic(0)) return false;
    bool clean = true;
    IntVec off(d - 1);
    IntVec y(d);
    auto visit = [&](const IntVec& o) {
      y[0] = x[0] + 1;
      for (std::size_t i = 1; i < d; ++i) y[i] = x[i] + o[i - 1];
      if (!box.normalize(y)) {
        clean = false;
        return;
      }
      if (cloud.retained(y)) out.push_back(y);
    };
    for (std::int64_t r = 0; r <= max_radius && out.empty(); ++r) for_each_sphere_offset(off, 0, r, visit);
    return clean;
  });
}

ForestWindow howard_model(double p, const Box& box, std::uint64_t seed) {
  require(p > 0.0 && p <= 1.0, ErrorCode::InvalidArgument, "Howard's model needs 0 < p <= 1");
  return howard_from_cloud(sample_bernoulli(p, box, seed), derive_seed(seed, 1));
}

ForestWindow discrete_strip_from_cloud(const LatticeCloud& cloud, std::uint64_t tie_seed) {
  const Box& box = cloud.box();
  const std::size_t d = box.dimension();
  for (std::size_t i = 1; i < d; ++i) {
    require(!box.is_periodic(i) || box.extent(i) >= 3, ErrorCode::InvalidArgument,
            "periodic space axes need length >= 3");
  }
  std::vector<IntVec> ball(1, IntVec(d - 1, 0));
  for (std::size_t i = 0; i + 1 < d; ++i) {
    for (std::int64_t s : {-1, 1}) {
      IntVec o(d - 1, 0);
      o[i] = s;
      ball.push_back(o);
    }
  }
  return lattice_point_map(cloud, tie_seed, "discrete-strip", [&](const IntVec& x, std::vector<IntVec>& out) {
    bool clean = true;
    std::vector<IntVec> sites;
    IntVec y(d);
    for (const auto& o : ball) {
      y[0] = box.lower[0];
      for (std::size_t i = 1; i < d; ++i) y[i] = x[i] + o[i - 1];
      if (box.normalize(y)) {
        sites.push_back(y);
      } else {
        clean = false;
      }
    }
    for (std::int64_t t = x[0] + 1; t <= box.upper[0] && out.empty(); ++t) {
      for (auto s : sites) {
        s[0] = t;
        if (cloud.retained(s)) out.push_back(s);
      }
    }
    return clean;
  });
}

ForestWindow discrete_strip(double p, const Box& box, std::uint64_t seed) {
  require(p > 0.0 && p <= 1.0, ErrorCode::InvalidArgument, "discrete strip needs 0 < p <= 1");
  return discrete_strip_from_cloud(sample_bernoulli(p, box, seed), derive_seed(seed, 1));
}

void write_point_cloud(std::ostream& out, const PointCloud& cloud) {
  out << "# window";
  for (std::size_t i = 0; i < cloud.dimension(); ++i) out << ' ' << fmt(cloud.lower[i]) << ':' << fmt(cloud.upper[i]);
  out << " lambda=" << fmt(cloud.intensity) << " seed=" << cloud.seed << '\n';
  for (const auto& p : cloud.points) {
    for (std::size_t i = 0; i < p.size(); ++i) out << (i ? " " : "") << fmt(p[i]);
    out << '\n';
  }
}

void write_point_cloud(std::ostream& out, const LatticeCloud& cloud) {
  const Box& box = cloud.box();
  out << "# window";
  for (std::size_t i = 0; i < box.dimension(); ++i) {
    out << ' ' << box.lower[i] << ':' << box.upper[i] << (box.is_periodic(i) ? "p" : "");
  }
  out << " p=" << fmt(cloud.retention()) << " seed=" << cloud.seed() << '\n';
  for (const auto& p : cloud.points()) {
    for (std::size_t i = 0; i < p.size(); ++i) out << (i ? " " : "") << p[i];
    out << '\n';
  }
}

void write_level_csv(std::ostream& out, const ForestWindow& forest, const PointCloud* cloud,
                     std::size_t max_levels) {
  if (forest.kind() == VertexKind::Point) {
    require(cloud != nullptr && cloud->size() == forest.size(), ErrorCode::InvalidArgument,
            "point forest export needs its cloud");
  }
  const auto partition = components(forest);
  std::vector<std::optional<std::int64_t>> level(forest.size());
  for (std::uint32_t c = 0; c < partition.count(); ++c) {
    if (partition.summaries[c].cycle_count != 0) continue;
    const auto h = height(forest, partition, c);
    for (std::size_t i = 0; i < h.vertices.size(); ++i) level[h.vertices[i]] = -h.heights[i];
  }

  std::uint32_t keep_component = 0;
  std::int64_t lo = INT64_MIN;
  std::int64_t hi = INT64_MAX;
  if (max_levels > 0 && partition.count() > 0) {
    for (std::uint32_t c = 1; c < partition.count(); ++c) {
      if (partition.summaries[c].size > partition.summaries[keep_component].size) keep_component = c;
    }
    std::vector<std::int64_t> ls;
    for (VertexId v : partition.members(keep_component)) {
      if (level[v]) ls.push_back(*level[v]);
    }
    if (!ls.empty()) {
      std::nth_element(ls.begin(), ls.begin() + ls.size() / 2, ls.end());
      lo = ls[ls.size() / 2] - static_cast<std::int64_t>(max_levels / 2);
      hi = lo + static_cast<std::int64_t>(max_levels) - 1;
    }
  }

  out << "point-id,t,x,level-index,component-id\n";
  for (VertexId v = 0; v < forest.size(); ++v) {
    if (max_levels > 0) {
      if (partition.component_of[v] != keep_component || !level[v] || *level[v] < lo || *level[v] > hi) continue;
    }
    out << v << ',';
    if (forest.kind() == VertexKind::Point) {
      const auto& p = cloud->points[forest.key(v)[0]];
      out << fmt(p[0]) << ',' << (p.size() > 1 ? fmt(p[1]) : "");
    } else if (forest.kind() == VertexKind::Lattice) {
      const auto k = forest.key(v);
      out << k[0] << ',';
      if (k.size() > 1) out << k[1];
    } else {
      out << ',';
    }
    out << ',';
    if (level[v]) out << *level[v];
    out << ',' << partition.component_of[v] << '\n';
  }
}

}  // namespace cmt
