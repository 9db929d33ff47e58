#include "cmt/chains.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>
#include <unordered_map>
#include <unordered_set>

#include "cmt/error.hpp"
#include "cmt/parallel.hpp"
#include "vec_hash.hpp"

namespace cmt {

using detail::dot;
using detail::IntVecHash;

namespace {

using Distribution = std::map<IntVec, double>;

// One convolution step with mu, dropping atoms rejected by `keep`.
template <class Keep>
Distribution step_distribution(const Distribution& cur, const JumpDistribution& mu, Keep keep) {
  Distribution next;
  const auto& atoms = mu.atoms();
  const auto& weights = mu.weights();
  IntVec z;
  for (const auto& [x, p] : cur) {
    for (std::size_t a = 0; a < atoms.size(); ++a) {
      z = x;
      for (std::size_t i = 0; i < z.size(); ++i) z[i] += atoms[a][i];
      if (!keep(z)) continue;
      next[z] += p * weights[a];
    }
  }
  require(next.size() <= kMaxKernelAtoms, ErrorCode::TooLarge, "kernel power support exceeds 1e8 atoms");
  return next;
}

KernelPower to_power(const Distribution& dist, std::size_t n, std::size_t d) {
  KernelPower k;
  k.n = n;
  k.dimension = d;
  k.support.reserve(dist.size());
  k.probability.reserve(dist.size());
  for (const auto& [z, p] : dist) {
    k.support.push_back(z);
    k.probability.push_back(p);
  }
  return k;
}

}  // namespace

double KernelPower::mass() const { return compensated_sum(probability); }

double KernelPower::at(std::span<const std::int64_t> z) const {
  const IntVec key(z.begin(), z.end());
  auto it = std::lower_bound(support.begin(), support.end(), key);
  return it != support.end() && *it == key ? probability[static_cast<std::size_t>(it - support.begin())] : 0.0;
}

KernelPower kernel_power(const JumpDistribution& mu, std::size_t n) {
  const std::size_t d = mu.dimension();
  Distribution cur{{IntVec(d, 0), 1.0}};
  for (std::size_t step = 0; step < n; ++step) {
    cur = step_distribution(cur, mu, [](const IntVec&) { return true; });
  }
  return to_power(cur, n, d);
}

KernelPower convolve(const KernelPower& a, const KernelPower& b) {
  require(a.dimension == b.dimension, ErrorCode::BadDimension, "kernel powers differ in dimension");
  Distribution out;
  IntVec z;
  for (std::size_t i = 0; i < a.support.size(); ++i) {
    for (std::size_t j = 0; j < b.support.size(); ++j) {
      z = a.support[i];
      for (std::size_t c = 0; c < z.size(); ++c) z[c] += b.support[j][c];
      out[z] += a.probability[i] * b.probability[j];
    }
  }
  require(out.size() <= kMaxKernelAtoms, ErrorCode::TooLarge, "convolution support exceeds 1e8 atoms");
  return to_power(out, a.n + b.n, a.dimension);
}

void write_kernel_power_csv(std::ostream& out, const KernelPower& k) {
  for (std::size_t i = 0; i < k.dimension; ++i) out << 'c' << i << ',';
  out << "probability\n";
  char buf[32];
  for (std::size_t r = 0; r < k.support.size(); ++r) {
    for (auto c : k.support[r]) out << c << ',';
    std::snprintf(buf, sizeof buf, "%.17g", k.probability[r]);
    out << buf << '\n';
  }
}

GreenValue green_function(const JumpDistribution& mu, std::span<const std::int64_t> y, std::size_t max_steps) {
  require(y.size() == mu.dimension(), ErrorCode::BadDimension, "target dimension differs from kernel");
  const IntVec target(y.begin(), y.end());
  const auto cf = check_cycle_free(mu);
  GreenValue g;
  g.probability = cf.cycle_free;
  Distribution cur{{IntVec(mu.dimension(), 0), 1.0}};
  CompensatedSum total;
  if (auto it = cur.find(target); it != cur.end()) total.add(it->second);
  if (cf.cycle_free) {
    const IntVec& w = *cf.separating_vector;
    const std::int64_t bound = dot(w, target);
    for (std::size_t n = 1; n <= max_steps && !cur.empty(); ++n) {
      cur = step_distribution(cur, mu, [&](const IntVec& z) { return dot(w, z) <= bound; });
      if (auto it = cur.find(target); it != cur.end()) total.add(it->second);
    }
  } else {
    for (std::size_t n = 1; n <= max_steps; ++n) {
      cur = step_distribution(cur, mu, [](const IntVec&) { return true; });
      if (auto it = cur.find(target); it != cur.end()) total.add(it->second);
    }
  }
  g.value = total.value();
  return g;
}

GreenTable::GreenTable(const JumpDistribution& mu, std::int64_t level_bound) : bound_(level_bound) {
  const auto cf = check_cycle_free(mu);
  require(cf.cycle_free, ErrorCode::InvalidArgument, "Green table needs a cycle-free kernel");
  w_ = *cf.separating_vector;
  std::map<IntVec, CompensatedSum> acc;
  Distribution cur{{IntVec(mu.dimension(), 0), 1.0}};
  if (level_bound < 0) cur.clear();
  while (!cur.empty()) {
    for (const auto& [z, p] : cur) acc[z].add(p);
    cur = step_distribution(cur, mu, [&](const IntVec& z) { return dot(w_, z) <= bound_; });
  }
  support_.reserve(acc.size());
  value_.reserve(acc.size());
  for (const auto& [z, s] : acc) {
    support_.push_back(z);
    value_.push_back(s.value());
  }
}

double GreenTable::at(std::span<const std::int64_t> z) const {
  const IntVec key(z.begin(), z.end());
  require(key.size() == w_.size(), ErrorCode::BadDimension, "point dimension differs from kernel");
  require(dot(w_, key) <= bound_, ErrorCode::InvalidArgument, "point beyond the Green table level bound");
  auto it = std::lower_bound(support_.begin(), support_.end(), key);
  return it != support_.end() && *it == key ? value_[static_cast<std::size_t>(it - support_.begin())] : 0.0;
}

double tv_consecutive(const JumpDistribution& mu, std::size_t n, std::size_t k) {
  require(k >= 1, ErrorCode::InvalidArgument, "k must be >= 1");
  const KernelPower a = kernel_power(mu, n);
  const KernelPower b = convolve(a, kernel_power(mu, k));
  CompensatedSum s;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < a.support.size() || j < b.support.size()) {
    if (j == b.support.size() || (i < a.support.size() && a.support[i] < b.support[j])) {
      s.add(a.probability[i++]);
    } else if (i == a.support.size() || b.support[j] < a.support[i]) {
      s.add(b.probability[j++]);
    } else {
      s.add(std::abs(a.probability[i++] - b.probability[j++]));
    }
  }
  return std::clamp(0.5 * s.value(), 0.0, 1.0);
}

LatticeChain::LatticeChain(JumpDistribution mu, IntVec shift, std::string name)
    : mu_(std::move(mu)), shift_(std::move(shift)), name_(std::move(name)) {
  require(shift_.size() == mu_.dimension(), ErrorCode::BadDimension, "shift dimension differs from kernel");
}

void LatticeChain::step(IntVec& state, SplitMix64& rng) const {
  const auto& a = mu_.atoms()[sample_cumulative(rng, mu_.cumulative())];
  for (std::size_t i = 0; i < state.size(); ++i) state[i] += a[i];
}

IntVec LatticeChain::displace(const IntVec& origin, std::int64_t r) const {
  IntVec out = origin;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += r * shift_[i];
  return out;
}

SpaceTimeChain::SpaceTimeChain(FiniteGraph base, std::string name) : base_(std::move(base)), name_(std::move(name)) {
  require(base_.vertex_count() > 0, ErrorCode::BadGraph, "empty base graph");
  for (std::uint32_t v = 0; v < base_.vertex_count(); ++v) {
    require(base_.degree(v) > 0, ErrorCode::BadGraph, "isolated base vertex");
  }
  depth_ = base_.distances_from(0);
}

void SpaceTimeChain::step(IntVec& state, SplitMix64& rng) const {
  const auto inc = base_.incident(static_cast<std::uint32_t>(state[0]));
  state[0] = inc[uniform_below(rng, inc.size())].neighbor;
  state[1] += 1;
}

IntVec SpaceTimeChain::displace(const IntVec& origin, std::int64_t r) const {
  IntVec out = origin;
  for (std::int64_t s = 0; s < r; ++s) {
    const auto v = static_cast<std::uint32_t>(out[0]);
    std::optional<std::uint32_t> next;
    for (const auto& inc : base_.incident(v)) {
      if (depth_[inc.neighbor] == depth_[v] + 1 && (!next || inc.neighbor < *next)) next = inc.neighbor;
    }
    require(next.has_value(), ErrorCode::InvalidArgument, "displacement leaves the base graph");
    out[0] = *next;
  }
  return out;
}

namespace {

bool paths_collide(const ChainModel& model, const IntVec& x, const IntVec& y, std::size_t budget,
                   std::uint64_t trial_seed, bool include_start) {
  SplitMix64 rx(derive_seed(trial_seed, 0));
  SplitMix64 ry(derive_seed(trial_seed, 1));
  std::unordered_set<IntVec, IntVecHash> seen_x;
  std::unordered_set<IntVec, IntVecHash> seen_y;
  IntVec a = x;
  IntVec b = y;
  if (include_start) {
    if (a == b) return true;
    seen_x.insert(a);
    seen_y.insert(b);
  }
  for (std::size_t s = 1; s <= budget; ++s) {
    model.step(a, rx);
    if (seen_y.count(a)) return true;
    seen_x.insert(a);
    model.step(b, ry);
    if (seen_x.count(b)) return true;
    seen_y.insert(b);
  }
  return false;
}

}  // namespace

FrequencyEstimate path_collision_estimate(const ChainModel& model, const IntVec& x, const IntVec& y,
                                          std::size_t budget, std::size_t trials, std::uint64_t seed,
                                          bool include_start) {
  require(budget >= 1 && trials >= 1, ErrorCode::InvalidArgument, "budget and trials must be >= 1");
  const auto hits = parallel_map<std::uint8_t>(
      trials, [&](std::size_t i) { return paths_collide(model, x, y, budget, derive_seed(seed, i), include_start) ? 1 : 0; });
  FrequencyEstimate f;
  f.trials = trials;
  for (auto h : hits) f.successes += h;
  return f;
}

namespace {

void step_lattice(const JumpDistribution& mu, IntVec& state, SplitMix64& rng) {
  const auto& a = mu.atoms()[sample_cumulative(rng, mu.cumulative())];
  for (std::size_t i = 0; i < state.size(); ++i) state[i] += a[i];
}

}  // namespace

CouplingResult meet_and_stick_coupling(const JumpDistribution& mu, const IntVec& x, const IntVec& y,
                                       std::size_t budget, std::uint64_t seed, bool record_trace) {
  require(x.size() == mu.dimension() && y.size() == mu.dimension(), ErrorCode::BadDimension,
          "start points differ in dimension from kernel");
  SplitMix64 rx(derive_seed(seed, 0));
  SplitMix64 ry(derive_seed(seed, 1));
  CouplingResult r;
  ChainTrace trace;
  IntVec a = x;
  IntVec b = y;
  if (record_trace) {
    trace.x.push_back(a);
    trace.y.push_back(b);
  }
  if (a == b) {
    r.success = true;
    r.coupling_time = 0;
  }
  for (std::size_t n = 1; n <= budget && (record_trace || !r.success); ++n) {
    step_lattice(mu, a, rx);
    if (r.success) {
      b = a;
    } else {
      step_lattice(mu, b, ry);
      if (a == b) {
        r.success = true;
        r.coupling_time = n;
      }
    }
    if (record_trace) {
      trace.x.push_back(a);
      trace.y.push_back(b);
    }
  }
  if (record_trace) r.trace = std::move(trace);
  return r;
}

CouplingResult shift_coupling(const JumpDistribution& mu, const LatticeSpec& lattice, const IntVec& x,
                              const IntVec& y, std::size_t budget, std::uint64_t seed, bool record_trace) {
  mu.require_in(lattice);
  require(lattice.contains(x) && lattice.contains(y), ErrorCode::InvalidArgument, "start points must lie in the lattice");
  SplitMix64 rx(derive_seed(seed, 0));
  SplitMix64 ry(derive_seed(seed, 1));
  std::unordered_map<IntVec, std::size_t, IntVecHash> time_x;
  std::unordered_map<IntVec, std::size_t, IntVecHash> time_y;
  std::vector<IntVec> path_x{x};
  std::vector<IntVec> path_y{y};
  CouplingResult r;
  std::size_t m = 0;
  std::size_t n = 0;
  IntVec a = x;
  IntVec b = y;
  for (std::size_t s = 0; s <= budget; ++s) {
    if (s > 0) {
      step_lattice(mu, a, rx);
      path_x.push_back(a);
    }
    time_x.emplace(a, s);
    if (auto it = time_y.find(a); it != time_y.end()) {
      r.success = true;
      m = s;
      n = it->second;
      break;
    }
    if (s > 0) {
      step_lattice(mu, b, ry);
      path_y.push_back(b);
    }
    time_y.emplace(b, s);
    if (auto it = time_x.find(b); it != time_x.end()) {
      r.success = true;
      m = it->second;
      n = s;
      break;
    }
  }
  if (r.success) {
    r.coupling_time = m;
    r.shift = static_cast<std::int64_t>(m) - static_cast<std::int64_t>(n);
  }
  if (record_trace) {
    ChainTrace trace;
    if (r.success) {
      // Extend X far enough to define Y_j = X_{j + shift} for every j <= budget.
      const std::size_t need = budget + static_cast<std::size_t>(std::max<std::int64_t>(*r.shift, 0));
      while (path_x.size() <= need) {
        step_lattice(mu, a, rx);
        path_x.push_back(a);
      }
      path_y.resize(n + 1);
      for (std::size_t j = n + 1; j <= budget; ++j) {
        path_y.push_back(path_x[static_cast<std::size_t>(static_cast<std::int64_t>(j) + *r.shift)]);
      }
      path_x.resize(budget + 1);
    }
    trace.x = std::move(path_x);
    trace.y = std::move(path_y);
    r.trace = std::move(trace);
  }
  return r;
}

FrequencyEstimate meet_and_stick_frequency(const JumpDistribution& mu, const IntVec& x, const IntVec& y,
                                           std::size_t budget, std::size_t trials, std::uint64_t seed) {
  const auto ok = parallel_map<std::uint8_t>(trials, [&](std::size_t i) {
    return meet_and_stick_coupling(mu, x, y, budget, derive_seed(seed, i)).success ? 1 : 0;
  });
  FrequencyEstimate f;
  f.trials = trials;
  for (auto o : ok) f.successes += o;
  return f;
}

FrequencyEstimate shift_coupling_frequency(const JumpDistribution& mu, const LatticeSpec& lattice,
                                           const IntVec& x, const IntVec& y, std::size_t budget,
                                           std::size_t trials, std::uint64_t seed) {
  const auto ok = parallel_map<std::uint8_t>(trials, [&](std::size_t i) {
    return shift_coupling(mu, lattice, x, y, budget, derive_seed(seed, i)).success ? 1 : 0;
  });
  FrequencyEstimate f;
  f.trials = trials;
  for (auto o : ok) f.successes += o;
  return f;
}

}  // namespace cmt
