#include "cmt/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include "json.hpp"
#include <ostream>
#include <set>
#include <unordered_map>

#include "cmt/error.hpp"
#include "cmt/models.hpp"
#include "cmt/parallel.hpp"
#include "vec_hash.hpp"

namespace cmt {

namespace {

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

ProbeEstimate from_frequency(std::string unit, const FrequencyEstimate& f) {
  return {std::move(unit), f.frequency(), f.half_width(), f.trials};
}

}  // namespace

void ProbeReport::write_csv(std::ostream& out) const {
  out << "unit,value,half_width,trials\n";
  for (const auto& e : estimates) {
    out << e.unit << ',' << num(e.value) << ',' << num(e.half_width) << ',' << e.trials << '\n';
  }
}

std::string ProbeReport::to_json() const {
  nlohmann::ordered_json j;
  j["probe"] = probe;
  j["config-hash"] = config_hash;
  auto& est = j["estimates"] = nlohmann::ordered_json::array();
  auto& bands = j["bands"] = nlohmann::ordered_json::array();
  for (const auto& e : estimates) {
    est.push_back({{"unit", e.unit}, {"value", e.value}, {"trials", e.trials}});
    bands.push_back({{"unit", e.unit}, {"lo", e.value - e.half_width}, {"hi", e.value + e.half_width}});
  }
  j["truncation-fraction"] = truncation_fraction;
  j["summary"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : summary) j["summary"][k] = v;
  return j.dump(2);
}

ComponentStatistic parse_component_statistic(const std::string& name) {
  if (name == "leaf-fraction") return ComponentStatistic::LeafFraction;
  if (name == "mean-in-degree") return ComponentStatistic::MeanInDegree;
  if (name == "jump-frequency-vector") return ComponentStatistic::JumpFrequencyVector;
  if (name == "height-range-per-size") return ComponentStatistic::HeightRangePerSize;
  fail(ErrorCode::InvalidArgument, "unknown component statistic '" + name + "'");
}

std::string to_string(ComponentStatistic s) {
  switch (s) {
    case ComponentStatistic::LeafFraction: return "leaf-fraction";
    case ComponentStatistic::MeanInDegree: return "mean-in-degree";
    case ComponentStatistic::JumpFrequencyVector: return "jump-frequency-vector";
    case ComponentStatistic::HeightRangePerSize: return "height-range-per-size";
  }
  return "unknown";
}

namespace {

// Jump of v as a lattice vector, unwrapped on periodic axes (minimal image).
IntVec jump_vector(const ForestWindow& forest, VertexId v) {
  const auto& g = forest.metadata().geometry;
  const auto a = forest.key(v);
  const auto b = forest.key(forest.target(v));
  IntVec d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    d[i] = b[i] - a[i];
    if (i < g.periodic.size() && g.periodic[i]) {
      const std::int64_t e = g.extent(i);
      d[i] %= e;
      if (d[i] < 0) d[i] += e;
      if (2 * d[i] > e) d[i] -= e;
    }
  }
  return d;
}

}  // namespace

ProbeReport component_statistic_survey(const ForestWindow& forest, ComponentStatistic statistic,
                                       std::size_t min_size) {
  require(min_size >= 1, ErrorCode::InvalidArgument, "min-size must be >= 1");
  const auto partition = components(forest);
  std::vector<std::uint32_t> qualifying;
  for (std::uint32_t c = 0; c < partition.count(); ++c) {
    const auto& s = partition.summaries[c];
    if (s.size < min_size) continue;
    if (statistic == ComponentStatistic::HeightRangePerSize && s.cycle_count != 0) continue;
    qualifying.push_back(c);
  }
  require(!qualifying.empty(), ErrorCode::Empty, "no component of size >= " + std::to_string(min_size));

  ProbeReport r;
  r.probe = "component_statistic_survey:" + to_string(statistic);
  std::size_t truncated = 0;
  for (auto c : qualifying) truncated += partition.summaries[c].label == ComponentLabel::Truncated;
  r.truncation_fraction = static_cast<double>(truncated) / static_cast<double>(qualifying.size());

  if (statistic == ComponentStatistic::JumpFrequencyVector) {
    require(forest.kind() == VertexKind::Lattice, ErrorCode::InvalidArgument, "jump vectors need a lattice forest");
    std::vector<IntVec> jumps(forest.size());
    std::set<IntVec> alphabet;
    for (VertexId v = 0; v < forest.size(); ++v) {
      if (forest.has_target(v)) alphabet.insert(jumps[v] = jump_vector(forest, v));
    }
    const std::vector<IntVec> letters(alphabet.begin(), alphabet.end());
    std::vector<std::vector<double>> columns(letters.size());
    for (auto c : qualifying) {
      std::vector<std::uint64_t> counts(letters.size(), 0);
      std::uint64_t total = 0;
      for (VertexId v : partition.members(c)) {
        if (!forest.has_target(v)) continue;
        const auto it = std::lower_bound(letters.begin(), letters.end(), jumps[v]);
        ++counts[static_cast<std::size_t>(it - letters.begin())];
        ++total;
      }
      for (std::size_t k = 0; k < letters.size(); ++k) {
        FrequencyEstimate f{counts[k], total};
        std::string unit = "component:" + std::to_string(c) + ":jump:";
        for (std::size_t i = 0; i < letters[k].size(); ++i) unit += (i ? " " : "") + std::to_string(letters[k][i]);
        r.estimates.push_back(from_frequency(std::move(unit), f));
        columns[k].push_back(f.frequency());
      }
    }
    double cv = 0.0;
    double mean = 0.0;
    for (const auto& col : columns) {
      cv += coefficient_of_variation(col);
      mean += compensated_sum(col) / static_cast<double>(col.size());
    }
    r.summary["cv"] = letters.empty() ? 0.0 : cv / static_cast<double>(letters.size());
    r.summary["mean"] = letters.empty() ? 0.0 : mean / static_cast<double>(letters.size());
    r.summary["components"] = static_cast<double>(qualifying.size());
    return r;
  }

  std::vector<double> values;
  for (auto c : qualifying) {
    const auto members = partition.members(c);
    const double size = static_cast<double>(members.size());
    ProbeEstimate e{"component:" + std::to_string(c), 0.0, 0.0, members.size()};
    switch (statistic) {
      case ComponentStatistic::LeafFraction: {
        std::uint64_t leaves = 0;
        for (VertexId v : members) leaves += forest.in_degree(v) == 0;
        e = from_frequency(e.unit, FrequencyEstimate{leaves, members.size()});
        break;
      }
      case ComponentStatistic::MeanInDegree: {
        std::size_t in = 0;
        for (VertexId v : members) in += forest.in_degree(v);
        e.value = static_cast<double>(in) / size;
        break;
      }
      case ComponentStatistic::HeightRangePerSize: {
        const auto h = height(forest, partition, c);
        const auto [lo, hi] = std::minmax_element(h.heights.begin(), h.heights.end());
        e.value = static_cast<double>(*hi - *lo + 1) / size;
        break;
      }
      case ComponentStatistic::JumpFrequencyVector: break;
    }
    values.push_back(e.value);
    r.estimates.push_back(std::move(e));
  }
  r.summary["cv"] = coefficient_of_variation(values);
  r.summary["mean"] = compensated_sum(values) / static_cast<double>(values.size());
  r.summary["components"] = static_cast<double>(qualifying.size());
  return r;
}

NestedAverage nested_level_average(const ForestWindow& forest, const std::vector<double>& f, VertexId v,
                                   std::size_t n_max) {
  require(f.size() == forest.size(), ErrorCode::InvalidArgument, "f must have one value per vertex");
  require(v < forest.size(), ErrorCode::UnknownVertex, "vertex out of range");
  const auto line = ancestral_line(forest, v, n_max);
  require(line.termination != Termination::CycleDetected && line.termination != Termination::FixedPoint,
          ErrorCode::CyclicComponent, "the component of v has a cycle");
  NestedAverage out;
  std::vector<VertexId> frontier;
  std::vector<VertexId> next;
  for (std::size_t n = 0; n < line.path.size() && n <= n_max; ++n) {
    frontier.assign(1, line.path[n]);
    bool truncated = false;
    for (std::size_t k = 0; k < n; ++k) {
      next.clear();
      for (VertexId u : frontier) {
        for (VertexId c : forest.preimage(u)) {
          truncated = truncated || !forest.interior(c);
          next.push_back(c);
        }
      }
      frontier.swap(next);
    }
    CompensatedSum s;
    for (VertexId u : frontier) s.add(f[u]);
    out.average.push_back(frontier.empty() ? 0.0 : s.value() / static_cast<double>(frontier.size()));
    out.set_size.push_back(frontier.size());
    out.truncated.push_back(truncated);
  }
  return out;
}

std::vector<FrequencyEstimate> cluster_frequencies(const ForestWindow& forest, std::size_t samples,
                                                   std::uint64_t seed, std::size_t stride) {
  const auto& g = forest.metadata().geometry;
  require(g.is_torus(), ErrorCode::NeedsTorus, "cluster frequency needs a toroidal window");
  require(!forest.empty() && forest.kind() == VertexKind::Lattice, ErrorCode::InvalidArgument,
          "cluster frequency needs a nonempty lattice forest");
  require(stride >= 1 && samples >= 1, ErrorCode::InvalidArgument, "samples and stride must be >= 1");
  const std::size_t d = static_cast<std::size_t>(forest.dimension());
  std::vector<IntVec> moves;
  if (g.lattice_basis.empty()) {
    for (std::size_t i = 0; i < d; ++i) {
      IntVec e(d, 0);
      e[i] = 1;
      moves.push_back(e);
    }
  } else {
    moves = g.lattice_basis;
  }
  const auto partition = components(forest);
  std::vector<std::uint64_t> counts(partition.count(), 0);
  SplitMix64 rng(seed);
  IntVec pos = forest.key_vector(static_cast<VertexId>(uniform_below(rng, forest.size())));
  for (std::size_t s = 0; s < samples; ++s) {
    for (std::size_t k = 0; k < stride; ++k) {
      if (uniform01(rng) < 0.5) continue;
      const std::uint64_t m = uniform_below(rng, 2 * moves.size());
      const auto& mv = moves[m / 2];
      const std::int64_t sign = (m % 2) ? -1 : 1;
      for (std::size_t i = 0; i < d; ++i) {
        const std::int64_t e = g.extent(i);
        std::int64_t r = (pos[i] + sign * mv[i] - g.lower[i]) % e;
        if (r < 0) r += e;
        pos[i] = g.lower[i] + r;
      }
    }
    const auto v = forest.find(pos);
    require(v.has_value(), ErrorCode::InvalidArgument, "walk left the vertex set");
    ++counts[partition.component_of[*v]];
  }
  std::vector<FrequencyEstimate> out;
  for (auto c : counts) out.push_back({c, samples});
  return out;
}

FrequencyEstimate cluster_frequency(const ForestWindow& forest, std::uint32_t component_id, std::size_t samples,
                                    std::uint64_t seed, std::size_t stride) {
  const auto all = cluster_frequencies(forest, samples, seed, stride);
  require(component_id < all.size(), ErrorCode::InvalidArgument, "component id out of range");
  return all[component_id];
}

InDegreeProfile in_degree_profile(const ForestWindow& forest, const std::vector<VertexId>& region) {
  InDegreeProfile p;
  for (VertexId v : region) {
    require(v < forest.size(), ErrorCode::UnknownVertex, "region vertex out of range");
    const std::size_t k = forest.in_degree(v);
    if (p.histogram.size() <= k) p.histogram.resize(k + 1, 0);
    ++p.histogram[k];
    p.total_in += k;
    ++p.count;
  }
  return p;
}

InDegreeProfile in_degree_profile(const ForestWindow& forest) {
  std::vector<VertexId> all(forest.size());
  for (VertexId v = 0; v < forest.size(); ++v) all[v] = v;
  return in_degree_profile(forest, all);
}

ProbeReport connectivity_decay_probe(const ChainModel& model, const IntVec& origin,
                                     const std::vector<std::int64_t>& distances, std::size_t trials,
                                     std::size_t budget, std::uint64_t seed) {
  ProbeReport r;
  r.probe = "connectivity_decay_probe";
  double censored = 0.0;
  std::uint64_t total = 0;
  for (std::size_t i = 0; i < distances.size(); ++i) {
    require(distances[i] >= 0, ErrorCode::InvalidArgument, "distances must be nonnegative");
    FrequencyEstimate f{trials, trials};
    if (distances[i] > 0) {
      f = path_collision_estimate(model, origin, model.displace(origin, distances[i]), budget, trials,
                                  derive_seed(seed, i), true);
    }
    censored += static_cast<double>(f.trials - f.successes);
    total += f.trials;
    r.estimates.push_back(from_frequency("distance:" + std::to_string(distances[i]), f));
  }
  r.truncation_fraction = total ? censored / static_cast<double>(total) : 0.0;
  r.summary["trials"] = static_cast<double>(trials);
  r.summary["budget"] = static_cast<double>(budget);
  return r;
}

FrequencyEstimate count_components_probe(const ChainModel& model, const IntVec& origin, std::size_t k,
                                         std::size_t budget, std::size_t trials, std::uint64_t seed,
                                         std::size_t burn_in) {
  require(k >= 1 && k <= 32, ErrorCode::InvalidArgument, "k must be in [1, 32]");
  require(trials >= 1, ErrorCode::InvalidArgument, "trials must be >= 1");
  FrequencyEstimate f{0, trials};
  if (k == 1) {
    f.successes = trials;
    return f;
  }
  const auto ok = parallel_map<std::uint8_t>(trials, [&](std::size_t t) -> std::uint8_t {
    const std::uint64_t ts = derive_seed(seed, t);
    std::vector<SplitMix64> rng;
    for (std::size_t j = 0; j < k; ++j) rng.emplace_back(derive_seed(ts, j));
    std::vector<IntVec> pos(k, origin);
    std::unordered_map<IntVec, std::uint32_t, detail::IntVecHash> seen;
    for (std::size_t s = 1; s <= budget; ++s) {
      for (std::size_t j = 0; j < k; ++j) {
        model.step(pos[j], rng[j]);
        if (s < burn_in) continue;
        auto& mask = seen[pos[j]];
        if (mask & ~(std::uint32_t{1} << j)) return 0;
        mask |= std::uint32_t{1} << j;
      }
    }
    return 1;
  });
  for (auto o : ok) f.successes += o;
  return f;
}

ProbeReport one_endedness_probe(const JumpDistribution& mu, const std::vector<std::size_t>& n_list,
                                std::size_t trials, std::uint64_t seed) {
  require(!n_list.empty() && trials >= 1, ErrorCode::InvalidArgument, "need at least one n and one trial");
  const auto cf = check_cycle_free(mu);
  require(cf.cycle_free, ErrorCode::InvalidArgument, "one-endedness probe needs a cycle-free kernel");
  const IntVec& w = *cf.separating_vector;
  const std::size_t n_max = *std::max_element(n_list.begin(), n_list.end());
  const LatticeChain chain(mu, IntVec(mu.dimension(), 0));

  const auto endpoints = parallel_map<std::vector<IntVec>>(trials, [&](std::size_t t) {
    SplitMix64 rng(derive_seed(seed, t));
    IntVec x(mu.dimension(), 0);
    std::vector<IntVec> at(n_list.size());
    for (std::size_t s = 0; s <= n_max; ++s) {
      if (s > 0) chain.step(x, rng);
      for (std::size_t i = 0; i < n_list.size(); ++i) {
        if (n_list[i] == s) at[i] = x;
      }
    }
    return at;
  });
  std::int64_t bound = 0;
  for (const auto& row : endpoints) {
    for (const auto& x : row) bound = std::max(bound, detail::dot(w, x));
  }
  const GreenTable table(mu, bound);

  ProbeReport r;
  r.probe = "one_endedness_probe";
  for (std::size_t i = 0; i < n_list.size(); ++i) {
    std::vector<double> g(trials);
    for (std::size_t t = 0; t < trials; ++t) g[t] = table.at(endpoints[t][i]);
    const auto m = mean_estimate(g);
    r.estimates.push_back({"n:" + std::to_string(n_list[i]), m.mean, m.half_width, m.count});
  }
  r.summary["green_table_size"] = static_cast<double>(table.size());
  r.summary["level_bound"] = static_cast<double>(bound);
  return r;
}

bool LevelBijection::injective() const {
  std::vector<std::int64_t> targets;
  for (auto t : image) {
    if (t >= 0) targets.push_back(t);
  }
  std::sort(targets.begin(), targets.end());
  return std::adjacent_find(targets.begin(), targets.end()) == targets.end();
}

LevelBijection level_set_bijection(const ForestWindow& forest, std::uint64_t seed) {
  const auto partition = components(forest);
  const std::size_t n = forest.size();
  LevelBijection out;
  out.image.assign(n, -1);
  out.depth.assign(n, 0);
  std::vector<std::size_t> position(n, 0);
  for (std::uint32_t c = 0; c < partition.count(); ++c) {
    require(partition.summaries[c].cycle_count == 0, ErrorCode::CyclicComponent,
            "component " + std::to_string(c) + " has a cycle");
    std::optional<VertexId> root;
    for (VertexId v : partition.members(c)) {
      if (!forest.has_target(v)) root = v;
    }
    if (!root) continue;

    // Depth classes in the induced order: parents in order, shuffled siblings.
    std::vector<std::vector<VertexId>> levels{{*root}};
    while (true) {
      std::vector<VertexId> next;
      for (VertexId y : levels.back()) {
        const auto pre = forest.preimage(y);
        std::vector<VertexId> kids(pre.begin(), pre.end());
        SplitMix64 rng(key_seed(seed, forest.key(y)));
        for (std::size_t i = kids.size(); i > 1; --i) std::swap(kids[i - 1], kids[uniform_below(rng, i)]);
        next.insert(next.end(), kids.begin(), kids.end());
      }
      if (next.empty()) break;
      levels.push_back(std::move(next));
    }
    for (std::size_t k = 0; k < levels.size(); ++k) {
      for (std::size_t i = 0; i < levels[k].size(); ++i) {
        position[levels[k][i]] = i;
        out.depth[levels[k][i]] = static_cast<std::uint32_t>(k);
      }
    }

    for (std::size_t k = 1; k < levels.size(); ++k) {
      const auto& L = levels[k];
      const auto& P = levels[k - 1];
      const std::size_t m = L.size();
      const std::size_t mp = P.size();
      out.domain_size += m;
      const bool cyclic = m == mp;
      (cyclic ? out.cyclic_pairs : out.linear_pairs) += 1;
      std::vector<std::size_t> g(m);
      for (std::size_t j = 0; j < m; ++j) g[j] = position[forest.target(L[j])];
      std::vector<bool> used(mp, false);
      for (std::size_t p = 0; p < m; ++p) {
        const std::size_t q = g[p];
        std::optional<std::size_t> target;
        if (cyclic) {
          // Lift to the periodic order on Z: copy r of L sits over copy r of P.
          for (std::size_t i = 1; i <= m; ++i) {
            const std::size_t lifted = g[(p + i) % m] + m * ((p + i) / m);
            if (lifted >= q + i) {
              target = (q + i) % m;
              break;
            }
          }
        } else {
          for (std::size_t i = 1; p + i < m && q + i < mp; ++i) {
            if (g[p + i] >= q + i) {
              target = q + i;
              break;
            }
          }
        }
        if (target && !used[*target]) {
          used[*target] = true;
          out.image[L[p]] = P[*target];
        } else {
          out.unmatched.push_back(L[p]);
        }
      }
    }
  }
  std::sort(out.unmatched.begin(), out.unmatched.end());
  return out;
}

ProbeReport canopy_distinguishability_demo(std::size_t depth, std::uint64_t seed) {
  const auto sample = canopy_cmt(depth, seed);
  const auto& f = sample.forest;
  ProbeReport r;
  r.probe = "canopy_distinguishability_demo";
  std::vector<bool> seen(f.size(), false);
  std::set<std::int64_t> values;
  bool constant = true;
  std::size_t sets = 0;
  std::size_t truncated = 0;
  for (VertexId v = 0; v < f.size(); ++v) {
    if (seen[v]) continue;
    const auto ls = level_set(f, v, depth + 1);
    ++sets;
    truncated += ls.truncated;
    const std::int64_t value = sample.invariant[v];
    for (VertexId w : ls.members) {
      seen[w] = true;
      constant = constant && sample.invariant[w] == value;
    }
    values.insert(value);
    r.estimates.push_back({"level-set:" + std::to_string(v), static_cast<double>(value), 0.0, ls.members.size()});
  }
  r.truncation_fraction = sets ? static_cast<double>(truncated) / static_cast<double>(sets) : 0.0;
  r.summary["constant"] = constant ? 1.0 : 0.0;
  r.summary["distinct_values"] = static_cast<double>(values.size());
  r.summary["level_sets"] = static_cast<double>(sets);
  r.summary["passed"] = constant && values.size() >= depth ? 1.0 : 0.0;
  return r;
}

}  // namespace cmt
