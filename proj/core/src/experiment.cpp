#include "cmt/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <memory>
#include <ostream>
#include <set>
#include <sstream>

#include "cmt/analysis.hpp"
#include "cmt/chains.hpp"
#include "cmt/error.hpp"
#include "cmt/forest_io.hpp"
#include "cmt/models.hpp"
#include "cmt/parallel.hpp"
#include "cmt/point_models.hpp"
#include "cmt/wusf.hpp"
#include "json.hpp"

namespace cmt {

using json = nlohmann::json;

std::uint64_t fnv1a64(std::string_view bytes) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t x) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, x >>= 4) s[static_cast<std::size_t>(i)] = digits[x & 15];
  return s;
}

namespace {

namespace fs = std::filesystem;

struct ConfigError {
  std::string field;
  std::string message;
};

struct ProbeFailure {
  std::string probe;
  std::string message;
};

[[noreturn]] void bad(const std::string& field, const std::string& message) { throw ConfigError{field, message}; }

// ---- field readers ----

const json& need(const json& obj, const std::string& name, const std::string& path) {
  if (!obj.contains(name)) bad(path + name, "missing required field");
  return obj.at(name);
}

std::int64_t as_int(const json& v, const std::string& field) {
  if (!v.is_number_integer()) bad(field, "expected an integer");
  return v.get<std::int64_t>();
}

std::size_t as_count(const json& v, const std::string& field, std::size_t min = 0) {
  const auto x = as_int(v, field);
  if (x < static_cast<std::int64_t>(min)) bad(field, "expected an integer >= " + std::to_string(min));
  return static_cast<std::size_t>(x);
}

double as_double(const json& v, const std::string& field) {
  if (!v.is_number()) bad(field, "expected a number");
  return v.get<double>();
}

std::uint64_t as_seed(const json& v, const std::string& field) {
  if (!v.is_number_integer()) bad(field, "expected an unsigned integer");
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  const auto s = v.get<std::int64_t>();
  if (s < 0) bad(field, "expected an unsigned integer");
  return static_cast<std::uint64_t>(s);
}

IntVec as_intvec(const json& v, const std::string& field) {
  if (v.is_number_integer()) return {v.get<std::int64_t>()};
  if (!v.is_array() || v.empty()) bad(field, "expected a nonempty integer array");
  IntVec out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(as_int(v[i], field + "[" + std::to_string(i) + "]"));
  return out;
}

std::vector<IntVec> as_vectors(const json& v, const std::string& field) {
  if (!v.is_array() || v.empty()) bad(field, "expected a nonempty array");
  std::vector<IntVec> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(as_intvec(v[i], field + "[" + std::to_string(i) + "]"));
  for (const auto& a : out) {
    if (a.size() != out.front().size()) bad(field, "vectors differ in length");
  }
  return out;
}

template <class T>
T opt(const json& obj, const std::string& name, T fallback, const std::string& path) {
  if (!obj.contains(name)) return fallback;
  const auto& v = obj.at(name);
  const std::string field = path + name;
  if constexpr (std::is_same_v<T, bool>) {
    if (!v.is_boolean()) bad(field, "expected a boolean");
    return v.get<bool>();
  } else if constexpr (std::is_same_v<T, double>) {
    return as_double(v, field);
  } else if constexpr (std::is_same_v<T, std::string>) {
    if (!v.is_string()) bad(field, "expected a string");
    return v.get<std::string>();
  } else {
    return static_cast<T>(as_count(v, field));
  }
}

// ---- model block ----

const std::set<std::string> kModels = {"lattice-cmt", "nguyen", "nguyen-variant", "renewal",  "howard",
                                       "discrete-strip", "strip", "coalescing-srw", "canopy", "wusf"};

struct ModelSpec {
  std::string name;
  std::size_t dimension = 0;
  std::optional<JumpDistribution> mu;
  std::optional<LatticeSpec> lattice;
  Box box;
  std::vector<double> real_lower, real_upper;
  double p = 0.5;
  double intensity = 1.0;
  double half_width = 1.0;
  SpaceTimeGraph space_time;
  std::size_t depth = 0;
  std::int64_t radius = 0;
  std::optional<IntVec> shift;
};

Box read_box(const json& cfg, std::size_t d) {
  const auto& b = need(cfg, "box", "");
  if (!b.is_array() || b.size() != d) bad("box", "expected " + std::to_string(d) + " [lo, hi] pairs");
  Box box;
  for (std::size_t i = 0; i < d; ++i) {
    const std::string f = "box[" + std::to_string(i) + "]";
    if (!b[i].is_array() || b[i].size() != 2) bad(f, "expected a [lo, hi] pair");
    box.lower.push_back(as_int(b[i][0], f));
    box.upper.push_back(as_int(b[i][1], f));
    if (box.upper.back() < box.lower.back()) bad(f, "hi < lo");
  }
  if (cfg.contains("periodic")) {
    const auto& p = cfg.at("periodic");
    if (!p.is_array() || p.size() != d) bad("periodic", "expected " + std::to_string(d) + " booleans");
    for (std::size_t i = 0; i < d; ++i) {
      if (!p[i].is_boolean()) bad("periodic[" + std::to_string(i) + "]", "expected a boolean");
      box.periodic.push_back(p[i].get<bool>());
    }
  }
  return box;
}

LatticeSpec read_lattice(const json& cfg, std::size_t d, const std::string& fallback) {
  std::string kind = fallback;
  if (cfg.contains("lattice")) {
    const auto& l = cfg.at("lattice");
    if (l.is_array()) {
      const auto cols = as_vectors(l, "lattice");
      if (cols.size() != d || cols.front().size() != d) bad("lattice", "expected a square basis");
      try {
        return LatticeSpec(d, cols);
      } catch (const Error& e) {
        bad("lattice", e.what());
      }
    }
    if (!l.is_string()) bad("lattice", "expected \"integer\", \"even\" or basis columns");
    kind = l.get<std::string>();
  }
  if (kind == "integer") return LatticeSpec::integer(d);
  if (kind == "even") return LatticeSpec::even(d);
  bad("lattice", "unknown lattice '" + kind + "'");
}

JumpDistribution read_mu(const json& cfg, std::size_t d) {
  const auto atoms = as_vectors(need(cfg, "support", ""), "support");
  if (atoms.front().size() != d) bad("support", "atoms must have dimension " + std::to_string(d));
  std::vector<double> w(atoms.size(), 1.0 / static_cast<double>(atoms.size()));
  if (cfg.contains("weights")) {
    const auto& wj = cfg.at("weights");
    if (!wj.is_array() || wj.size() != atoms.size()) bad("weights", "expected one weight per atom");
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = as_double(wj[i], "weights[" + std::to_string(i) + "]");
  }
  try {
    return JumpDistribution(atoms, w);
  } catch (const Error& e) {
    bad("weights", e.what());
  }
}

FiniteGraph read_graph(const json& cfg) {
  const auto& g = need(cfg, "graph", "");
  if (!g.is_object()) bad("graph", "expected an object");
  const auto type = opt<std::string>(g, "type", "", "graph.");
  if (type == "path") return FiniteGraph::path(as_count(need(g, "n", "graph."), "graph.n", 1));
  if (type == "cycle") return FiniteGraph::cycle(as_count(need(g, "n", "graph."), "graph.n", 3));
  if (type == "complete") return FiniteGraph::complete(as_count(need(g, "n", "graph."), "graph.n", 2));
  if (type == "regular-tree") {
    return FiniteGraph::regular_tree(as_count(need(g, "degree", "graph."), "graph.degree", 2),
                                     as_count(need(g, "depth", "graph."), "graph.depth", 0));
  }
  if (type == "edges") {
    const auto n = as_count(need(g, "n", "graph."), "graph.n", 1);
    const auto es = as_vectors(need(g, "edges", "graph."), "graph.edges");
    std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
    for (const auto& e : es) {
      if (e.size() != 2 || e[0] < 0 || e[1] < 0 || static_cast<std::size_t>(std::max(e[0], e[1])) >= n) {
        bad("graph.edges", "expected [u, v] pairs of vertices below n");
      }
      edges.emplace_back(static_cast<std::uint32_t>(e[0]), static_cast<std::uint32_t>(e[1]));
    }
    return FiniteGraph::from_edges(n, edges);
  }
  bad("graph.type", "expected path, cycle, complete, regular-tree or edges");
}

ModelSpec read_model(const json& cfg) {
  ModelSpec m;
  const auto& name = need(cfg, "model", "");
  if (!name.is_string() || !kModels.count(name.get<std::string>())) {
    std::string all;
    for (const auto& k : kModels) all += (all.empty() ? "" : ", ") + k;
    bad("model", "expected one of: " + all);
  }
  m.name = name.get<std::string>();
  const auto dim = [&](std::size_t fixed) {
    if (fixed) {
      if (cfg.contains("dimension") && as_count(cfg.at("dimension"), "dimension") != fixed) {
        bad("dimension", "model " + m.name + " has dimension " + std::to_string(fixed));
      }
      return fixed;
    }
    return as_count(need(cfg, "dimension", ""), "dimension", 1);
  };
  if (m.name == "lattice-cmt") {
    m.dimension = dim(0);
    m.lattice = read_lattice(cfg, m.dimension, "integer");
    m.mu = read_mu(cfg, m.dimension);
    m.box = read_box(cfg, m.dimension);
  } else if (m.name == "nguyen") {
    m.dimension = dim(0);
    if (m.dimension < 2) bad("dimension", "nguyen needs dimension >= 2");
    m.lattice = LatticeSpec::even(m.dimension);
    m.mu = nguyen_jumps(m.dimension);
    m.box = read_box(cfg, m.dimension);
  } else if (m.name == "nguyen-variant") {
    m.dimension = dim(2);
    m.lattice = LatticeSpec::even(2);
    m.mu = nguyen_variant_jumps();
    m.box = read_box(cfg, 2);
  } else if (m.name == "renewal") {
    m.dimension = dim(1);
    m.lattice = LatticeSpec::integer(1);
    m.mu = read_mu(cfg, 1);
    for (const auto& a : m.mu->atoms()) {
      if (a[0] <= 0) bad("support", "renewal atoms must be positive");
    }
    m.box = read_box(cfg, 1);
    if (m.box.is_periodic(0)) bad("periodic", "renewal windows are not periodic");
  } else if (m.name == "howard" || m.name == "discrete-strip") {
    m.dimension = dim(0);
    if (m.dimension < 2) bad("dimension", m.name + " needs dimension >= 2");
    m.p = opt<double>(cfg, "p", 0.5, "");
    if (!(m.p > 0.0 && m.p <= 1.0)) bad("p", "expected 0 < p <= 1");
    m.box = read_box(cfg, m.dimension);
  } else if (m.name == "strip") {
    m.dimension = dim(0);
    if (m.dimension < 2) bad("dimension", "strip needs dimension >= 2");
    m.intensity = opt<double>(cfg, "intensity", 1.0, "");
    if (!(m.intensity >= 0.0)) bad("intensity", "expected a nonnegative number");
    m.half_width = opt<double>(cfg, "half_width", 1.0, "");
    if (!(m.half_width > 0.0)) bad("half_width", "expected a positive number");
    const auto& b = need(cfg, "box", "");
    if (!b.is_array() || b.size() != m.dimension) bad("box", "expected one [lo, hi] pair per axis");
    for (std::size_t i = 0; i < m.dimension; ++i) {
      const std::string f = "box[" + std::to_string(i) + "]";
      if (!b[i].is_array() || b[i].size() != 2) bad(f, "expected a [lo, hi] pair");
      m.real_lower.push_back(as_double(b[i][0], f));
      m.real_upper.push_back(as_double(b[i][1], f));
      if (!(m.real_upper.back() > m.real_lower.back())) bad(f, "hi must exceed lo");
    }
  } else if (m.name == "coalescing-srw") {
    m.dimension = 2;
    m.space_time.base = read_graph(cfg);
    const auto t = as_intvec(need(cfg, "time", ""), "time");
    if (t.size() != 2 || t[1] < t[0]) bad("time", "expected [t_begin, t_end] with t_begin <= t_end");
    m.space_time.t_begin = t[0];
    m.space_time.t_end = t[1];
  } else if (m.name == "canopy") {
    m.depth = as_count(need(cfg, "depth", ""), "depth", 1);
    if (m.depth > 26) bad("depth", "canopy depth must be <= 26");
  } else if (m.name == "wusf") {
    m.dimension = dim(0);
    m.radius = static_cast<std::int64_t>(as_count(need(cfg, "radius", ""), "radius", 1));
  }
  if (cfg.contains("shift")) {
    m.shift = as_intvec(cfg.at("shift"), "shift");
    if (m.dimension && m.shift->size() != m.dimension) bad("shift", "wrong dimension");
  }
  return m;
}

// ---- probes ----

const std::set<std::string> kProbes = {"in_degree_profile",
                                       "component_statistic_survey",
                                       "nested_level_average",
                                       "cluster_frequency",
                                       "level_set_bijection",
                                       "connectivity_decay_probe",
                                       "count_components_probe",
                                       "one_endedness_probe",
                                       "canopy_distinguishability_demo",
                                       "kernel_power",
                                       "export_levels",
                                       "forest_dump"};

struct ProbeSpec {
  std::string name;
  std::string label;
  json params;
  std::string path;  // "probes[i]." for diagnostics
};

std::vector<ProbeSpec> read_probes(const json& cfg) {
  const auto& arr = need(cfg, "probes", "");
  if (!arr.is_array()) bad("probes", "expected an array");
  std::vector<ProbeSpec> out;
  std::set<std::string> labels;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string path = "probes[" + std::to_string(i) + "].";
    ProbeSpec p;
    p.path = path;
    if (arr[i].is_string()) {
      p.name = arr[i].get<std::string>();
      p.params = json::object();
    } else if (arr[i].is_object()) {
      const auto& n = need(arr[i], "name", path);
      if (!n.is_string()) bad(path + "name", "expected a string");
      p.name = n.get<std::string>();
      p.params = arr[i];
    } else {
      bad(path.substr(0, path.size() - 1), "expected a probe name or object");
    }
    if (!kProbes.count(p.name)) bad(path + "name", "unknown probe '" + p.name + "'");
    p.label = opt<std::string>(p.params, "id", p.name, path);
    if (!labels.insert(p.label).second) bad(path + "id", "duplicate probe id '" + p.label + "'");
    out.push_back(std::move(p));
  }
  return out;
}

struct Sample {
  ForestWindow forest;
  std::optional<PointCloud> cloud;
};

Sample sample_model(const ModelSpec& m, std::uint64_t seed) {
  Sample s;
  if (m.name == "lattice-cmt") {
    s.forest = sample_lattice_cmt(*m.lattice, *m.mu, m.box, seed);
  } else if (m.name == "nguyen") {
    s.forest = nguyen_model(m.dimension, m.box, seed);
  } else if (m.name == "nguyen-variant") {
    s.forest = nguyen_variant(m.box, seed);
  } else if (m.name == "renewal") {
    s.forest = renewal_model(*m.mu, m.box.lower[0], m.box.upper[0], seed);
  } else if (m.name == "howard") {
    s.forest = howard_model(m.p, m.box, seed);
  } else if (m.name == "discrete-strip") {
    s.forest = discrete_strip(m.p, m.box, seed);
  } else if (m.name == "strip") {
    s.cloud = sample_poisson(m.intensity, m.real_lower, m.real_upper, seed);
    s.forest = strip_point_map(*s.cloud, StripConfig{m.half_width});
  } else if (m.name == "coalescing-srw") {
    s.forest = coalescing_srw(m.space_time, seed);
  } else if (m.name == "canopy") {
    s.forest = canopy_cmt(m.depth, seed).forest;
  } else if (m.name == "wusf") {
    s.forest = to_forest_window(wusf_window(m.dimension, m.radius, seed), seed);
  }
  return s;
}

std::unique_ptr<ChainModel> chain_of(const ModelSpec& m) {
  if (m.mu) {
    IntVec shift = m.shift ? *m.shift : m.lattice->basis().front();
    return std::make_unique<LatticeChain>(*m.mu, shift, m.name);
  }
  if (m.name == "coalescing-srw") return std::make_unique<SpaceTimeChain>(m.space_time.base);
  fail(ErrorCode::InvalidArgument, "model " + m.name + " has no chain form");
}

template <class T>
std::vector<T> list_param(const json& params, const std::string& name, const std::string& path,
                          std::vector<T> fallback) {
  if (!params.contains(name)) return fallback;
  const auto& v = params.at(name);
  if (!v.is_array() || v.empty()) bad(path + name, "expected a nonempty integer array");
  std::vector<T> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out.push_back(static_cast<T>(as_count(v[i], path + name + "[" + std::to_string(i) + "]")));
  }
  return out;
}

// Parameters are validated before any sampling so that schema errors exit 2.
void validate_probe(const ModelSpec& m, const ProbeSpec& p) {
  const auto& q = p.params;
  const auto& path = p.path;
  const bool chain = m.mu.has_value() || m.name == "coalescing-srw";
  if (p.name == "component_statistic_survey") {
    try {
      parse_component_statistic(opt<std::string>(q, "statistic", "leaf-fraction", path));
    } catch (const Error& e) {
      bad(path + "statistic", e.what());
    }
    opt<std::size_t>(q, "min_size", 1, path);
  } else if (p.name == "nested_level_average") {
    const auto f = opt<std::string>(q, "function", "parity", path);
    if (f != "parity" && f != "one") bad(path + "function", "expected \"parity\" or \"one\"");
    if (q.contains("vertex")) as_intvec(q.at("vertex"), path + "vertex");
  } else if (p.name == "connectivity_decay_probe" || p.name == "count_components_probe") {
    if (!chain) bad("model", p.name + " needs a lattice or space-time chain model");
    list_param<std::size_t>(q, "distances", path, {1});
    if (q.contains("origin")) as_intvec(q.at("origin"), path + "origin");
    if (opt<std::size_t>(q, "k", 2, path) > 32) bad(path + "k", "k must be <= 32");
  } else if (p.name == "one_endedness_probe" || p.name == "kernel_power") {
    if (!m.mu) bad("model", p.name + " needs a lattice model with a jump law");
    list_param<std::size_t>(q, "n", path, {1});
  }
  for (const auto& key : {"trials", "budget", "samples", "stride", "max_levels", "n_max", "depth"}) {
    if (q.contains(key)) as_count(q.at(key), path + key);
  }
}

std::vector<double> vertex_function(const ForestWindow& f, const std::string& name) {
  std::vector<double> out(f.size(), 1.0);
  if (name == "parity") {
    for (VertexId v = 0; v < f.size(); ++v) {
      const std::int64_t x = f.key(v)[0];
      out[v] = static_cast<double>(((x % 2) + 2) % 2);
    }
  }
  return out;
}

VertexId central_vertex(const ForestWindow& f) {
  const auto& g = f.metadata().geometry;
  if (g.empty() || f.kind() != VertexKind::Lattice) return 0;
  VertexId best = 0;
  std::int64_t best_d = -1;
  for (VertexId v = 0; v < f.size(); ++v) {
    std::int64_t d = 0;
    const auto k = f.key(v);
    for (std::size_t i = 0; i < k.size(); ++i) d += std::abs(2 * k[i] - g.lower[i] - g.upper[i]);
    if (best_d < 0 || d < best_d) {
      best_d = d;
      best = v;
    }
  }
  return best;
}

struct Artifact {
  std::string name;
  std::string content;
};

ProbeReport run_probe(const ModelSpec& m, const ProbeSpec& p, const std::function<const Sample&()>& sample,
                      std::uint64_t seed, std::vector<Artifact>& extra, const std::string& suffix) {
  const auto& q = p.params;
  const auto& path = p.path;
  ProbeReport r;
  r.probe = p.name;
  if (p.name == "in_degree_profile") {
    const auto& f = sample().forest;
    std::vector<VertexId> region;
    const bool interior_only = opt<bool>(q, "interior_only", false, path);
    for (VertexId v = 0; v < f.size(); ++v) {
      if (!interior_only || f.interior(v)) region.push_back(v);
    }
    const auto prof = in_degree_profile(f, region);
    for (std::size_t k = 0; k < prof.histogram.size(); ++k) {
      const FrequencyEstimate e{prof.histogram[k], prof.count};
      r.estimates.push_back({"in-degree:" + std::to_string(k), e.frequency(), e.half_width(), e.trials});
    }
    r.summary["count"] = static_cast<double>(prof.count);
    r.summary["total_in"] = static_cast<double>(prof.total_in);
    r.summary["mean"] = prof.mean();
    r.summary["mean_is_exactly_one"] = prof.mean_is_exactly_one() ? 1.0 : 0.0;
  } else if (p.name == "component_statistic_survey") {
    r = component_statistic_survey(sample().forest,
                                   parse_component_statistic(opt<std::string>(q, "statistic", "leaf-fraction", path)),
                                   opt<std::size_t>(q, "min_size", 1, path));
  } else if (p.name == "nested_level_average") {
    const auto& f = sample().forest;
    const auto fn = vertex_function(f, opt<std::string>(q, "function", "parity", path));
    VertexId v = central_vertex(f);
    if (q.contains("vertex")) v = f.require_vertex(as_intvec(q.at("vertex"), path + "vertex"));
    const auto a = nested_level_average(f, fn, v, opt<std::size_t>(q, "n_max", 20, path));
    std::size_t truncated = 0;
    for (std::size_t n = 0; n < a.average.size(); ++n) {
      const double mean = a.average[n];
      const double size = static_cast<double>(a.set_size[n]);
      const double hw = size > 0 ? kBandSigmas * std::sqrt(std::max(0.0, mean * (1.0 - mean)) / size) : 1.0;
      r.estimates.push_back({"n:" + std::to_string(n), mean, hw, a.set_size[n]});
      truncated += a.truncated[n];
    }
    r.truncation_fraction = a.average.empty() ? 0.0 : static_cast<double>(truncated) / static_cast<double>(a.average.size());
    r.summary["levels"] = static_cast<double>(a.average.size());
  } else if (p.name == "cluster_frequency") {
    const auto fr = cluster_frequencies(sample().forest, opt<std::size_t>(q, "samples", 10000, path), seed,
                                        opt<std::size_t>(q, "stride", 1, path));
    for (std::size_t c = 0; c < fr.size(); ++c) {
      r.estimates.push_back({"component:" + std::to_string(c), fr[c].frequency(), fr[c].half_width(), fr[c].trials});
    }
    r.summary["components"] = static_cast<double>(fr.size());
  } else if (p.name == "level_set_bijection") {
    const auto b = level_set_bijection(sample().forest, seed);
    const FrequencyEstimate e{b.domain_size - b.unmatched.size(), b.domain_size};
    r.estimates.push_back({"matched", e.frequency(), e.half_width(), e.trials});
    r.summary["domain_size"] = static_cast<double>(b.domain_size);
    r.summary["unmatched"] = static_cast<double>(b.unmatched.size());
    r.summary["injective"] = b.injective() ? 1.0 : 0.0;
    r.summary["cyclic_pairs"] = static_cast<double>(b.cyclic_pairs);
    r.summary["linear_pairs"] = static_cast<double>(b.linear_pairs);
  } else if (p.name == "connectivity_decay_probe" || p.name == "count_components_probe") {
    const auto chain = chain_of(m);
    IntVec origin(chain->dimension(), 0);
    if (q.contains("origin")) origin = as_intvec(q.at("origin"), path + "origin");
    const auto trials = opt<std::size_t>(q, "trials", 1000, path);
    const auto budget = opt<std::size_t>(q, "budget", 1000, path);
    if (p.name == "connectivity_decay_probe") {
      std::vector<std::int64_t> d;
      for (auto x : list_param<std::size_t>(q, "distances", path, {1})) d.push_back(static_cast<std::int64_t>(x));
      r = connectivity_decay_probe(*chain, origin, d, trials, budget, seed);
    } else {
      const auto k = opt<std::size_t>(q, "k", 2, path);
      const auto e = count_components_probe(*chain, origin, k, budget, trials, seed,
                                            opt<std::size_t>(q, "burn_in", 1, path));
      r.estimates.push_back({"k:" + std::to_string(k), e.frequency(), e.half_width(), e.trials});
      r.summary["budget"] = static_cast<double>(budget);
    }
  } else if (p.name == "one_endedness_probe") {
    r = one_endedness_probe(*m.mu, list_param<std::size_t>(q, "n", path, {10, 100}),
                            opt<std::size_t>(q, "trials", 1000, path), seed);
  } else if (p.name == "canopy_distinguishability_demo") {
    r = canopy_distinguishability_demo(opt<std::size_t>(q, "depth", m.depth ? m.depth : 3, path), seed);
  } else if (p.name == "kernel_power") {
    for (auto n : list_param<std::size_t>(q, "n", path, {1})) {
      const auto k = cmt::kernel_power(*m.mu, n);
      std::ostringstream os;
      write_kernel_power_csv(os, k);
      extra.push_back({p.label + "-n" + std::to_string(n) + suffix + ".csv", os.str()});
      r.estimates.push_back({"n:" + std::to_string(n), k.mass(), 0.0, k.support.size()});
    }
  } else if (p.name == "export_levels") {
    const auto& s = sample();
    std::ostringstream os;
    write_level_csv(os, s.forest, s.cloud ? &*s.cloud : nullptr, opt<std::size_t>(q, "max_levels", 0, path));
    extra.push_back({p.label + "-levels" + suffix + ".csv", os.str()});
    r.summary["vertices"] = static_cast<double>(s.forest.size());
  } else if (p.name == "forest_dump") {
    const auto& s = sample();
    extra.push_back({p.label + suffix + ".txt", dump_forest(s.forest)});
    r.summary["vertices"] = static_cast<double>(s.forest.size());
  }
  r.probe = p.label;
  return r;
}

// ---- config loading ----

std::size_t line_of(const std::string& text, std::size_t byte) {
  return static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(std::min(byte, text.size())), '\n')) + 1;
}

// Best effort: first line mentioning the innermost field name.
std::optional<std::size_t> field_line(const std::string& text, const std::string& field) {
  std::string leaf = field;
  if (const auto dot = leaf.rfind('.'); dot != std::string::npos) leaf = leaf.substr(dot + 1);
  if (const auto br = leaf.find('['); br != std::string::npos) leaf = leaf.substr(0, br);
  const auto at = text.find('"' + leaf + '"');
  if (at == std::string::npos) return std::nullopt;
  return line_of(text, at);
}

struct Loaded {
  std::string text;
  json cfg;
  ModelSpec model;
  std::vector<ProbeSpec> probes;
  std::uint64_t seed = 0;
  std::size_t replicates = 1;
  fs::path out_dir;
  std::string config_hash;
};

std::optional<Loaded> load(const std::string& config_path, const CommandOptions& options, bool need_probes,
                           std::ostream& log) {
  Loaded L;
  std::ifstream in(config_path, std::ios::binary);
  if (!in) {
    log << "config error: cannot read '" << config_path << "'\n";
    return std::nullopt;
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  L.text = buf.str();
  try {
    if (L.text.find_first_not_of(" \t\r\n") == std::string::npos) {
      L.cfg = json::object();
    } else {
      L.cfg = json::parse(L.text);
    }
  } catch (const json::parse_error& e) {
    log << "config error: line " << line_of(L.text, e.byte == 0 ? 0 : e.byte - 1) << ": invalid JSON: " << e.what()
        << '\n';
    return std::nullopt;
  }
  try {
    if (!L.cfg.is_object()) bad("(top level)", "expected a JSON object");
    if (options.seed) L.cfg["seed"] = *options.seed;
    if (options.out_dir) L.cfg["output_dir"] = *options.out_dir;
    L.model = read_model(L.cfg);
    L.seed = as_seed(need(L.cfg, "seed", ""), "seed");
    L.replicates = opt<std::size_t>(L.cfg, "replicates", 1, "");
    if (L.replicates < 1) bad("replicates", "expected an integer >= 1");
    L.out_dir = opt<std::string>(L.cfg, "output_dir", ".", "");
    if (need_probes) {
      L.probes = read_probes(L.cfg);
      for (const auto& p : L.probes) validate_probe(L.model, p);
    } else {
      opt<std::size_t>(L.cfg, "max_levels", 0, "");
    }
  } catch (const ConfigError& e) {
    log << "config error: field '" << e.field << "'";
    if (const auto line = field_line(L.text, e.field)) log << " (line " << *line << ")";
    log << ": " << e.message << '\n';
    return std::nullopt;
  } catch (const Error& e) {
    log << "config error: " << e.what() << '\n';
    return std::nullopt;
  }
  // Where the files go is not part of the experiment.
  json hashed = L.cfg;
  hashed.erase("output_dir");
  L.config_hash = hex64(fnv1a64(hashed.dump()));
  return L;
}

bool write_outputs(const fs::path& dir, const std::vector<Artifact>& files, const std::string& config_hash,
                   std::ostream& log) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    log << "error: cannot create output directory '" << dir.string() << "': " << ec.message() << '\n';
    return false;
  }
  std::ostringstream manifest;
  manifest << "# config-hash " << config_hash << '\n';
  manifest << "# fnv1a64 bytes file\n";
  for (const auto& f : files) {
    std::ofstream out(dir / f.name, std::ios::binary | std::ios::trunc);
    out << f.content;
    if (!out) {
      log << "error: cannot write '" << (dir / f.name).string() << "'\n";
      return false;
    }
    manifest << hex64(fnv1a64(f.content)) << ' ' << f.content.size() << ' ' << f.name << '\n';
  }
  std::ofstream out(dir / "manifest.txt", std::ios::binary | std::ios::trunc);
  out << manifest.str();
  return static_cast<bool>(out);
}

}  // namespace

int run_command(const std::string& config_path, const CommandOptions& options, std::ostream& log) {
  const auto L = load(config_path, options, true, log);
  if (!L) return kExitConfig;

  using Outcome = std::vector<Artifact>;
  std::optional<ProbeFailure> failure;
  std::vector<Outcome> per_replicate;
  try {
    per_replicate = parallel_map<Outcome>(L->replicates, [&](std::size_t rep) {
      const std::uint64_t rseed = derive_seed(L->seed, rep);
      const std::string suffix = L->replicates > 1 ? "-r" + std::to_string(rep) : "";
      std::optional<Sample> sample;
      const std::function<const Sample&()> get = [&]() -> const Sample& {
        if (!sample) sample = sample_model(L->model, rseed);
        return *sample;
      };
      Outcome out;
      for (std::size_t i = 0; i < L->probes.size(); ++i) {
        const auto& p = L->probes[i];
        std::vector<Artifact> extra;
        ProbeReport r;
        try {
          r = run_probe(L->model, p, get, derive_seed(rseed, i + 1), extra, suffix);
        } catch (const Error& e) {
          throw ProbeFailure{p.label, e.what()};
        } catch (const std::exception& e) {
          throw ProbeFailure{p.label, e.what()};
        } catch (const ConfigError& e) {
          throw ProbeFailure{p.label, e.field + ": " + e.message};
        }
        r.config_hash = L->config_hash;
        std::ostringstream csv;
        r.write_csv(csv);
        out.push_back({p.label + suffix + ".csv", csv.str()});
        out.push_back({p.label + suffix + ".json", r.to_json() + "\n"});
        for (auto& a : extra) out.push_back(std::move(a));
      }
      return out;
    });
  } catch (const ProbeFailure& f) {
    failure = f;
  }
  if (failure) {
    log << "probe '" << failure->probe << "' failed: " << failure->message << '\n';
    return kExitRuntime;
  }
  std::vector<Artifact> files;
  for (auto& o : per_replicate) {
    for (auto& a : o) files.push_back(std::move(a));
  }
  return write_outputs(L->out_dir, files, L->config_hash, log) ? kExitOk : kExitRuntime;
}

int export_levels_command(const std::string& config_path, const CommandOptions& options, std::ostream& log) {
  const auto L = load(config_path, options, false, log);
  if (!L) return kExitConfig;
  std::vector<Artifact> files;
  try {
    const auto s = sample_model(L->model, L->seed);
    std::ostringstream os;
    write_level_csv(os, s.forest, s.cloud ? &*s.cloud : nullptr, opt<std::size_t>(L->cfg, "max_levels", 0, ""));
    files.push_back({"levels.csv", os.str()});
  } catch (const std::exception& e) {
    log << "export-levels failed: " << e.what() << '\n';
    return kExitRuntime;
  }
  return write_outputs(L->out_dir, files, L->config_hash, log) ? kExitOk : kExitRuntime;
}

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) out.push_back(cur);
  return out;
}

std::vector<IntVec> parse_vectors(const std::string& text, const std::string& field) {
  const auto first = text.find_first_not_of(" \t");
  if (first != std::string::npos && text[first] == '[') {
    try {
      return as_vectors(json::parse(text), field);
    } catch (const json::parse_error& e) {
      bad(field, std::string("invalid JSON: ") + e.what());
    }
  }
  std::vector<IntVec> out;
  for (const auto& part : split(text, ';')) {
    IntVec v;
    for (const auto& c : split(part, ',')) {
      try {
        std::size_t used = 0;
        v.push_back(std::stoll(c, &used));
        if (c.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(c);
      } catch (const std::exception&) {
        bad(field, "cannot parse integer '" + c + "'");
      }
    }
    if (v.empty()) bad(field, "empty vector");
    out.push_back(std::move(v));
  }
  if (out.empty()) bad(field, "expected at least one vector");
  for (const auto& v : out) {
    if (v.size() != out.front().size()) bad(field, "vectors differ in length");
  }
  return out;
}

}  // namespace

int check_kernel_command(const std::string& support, const std::string& weights, const std::string& lattice,
                         std::ostream& out, std::ostream& log) {
  try {
    const auto atoms = parse_vectors(support, "support");
    const std::size_t d = atoms.front().size();
    std::vector<double> w(atoms.size(), 1.0 / static_cast<double>(atoms.size()));
    if (!weights.empty()) {
      const auto parts = split(weights, ',');
      if (parts.size() != atoms.size()) bad("weights", "expected one weight per atom");
      for (std::size_t i = 0; i < parts.size(); ++i) {
        try {
          w[i] = std::stod(parts[i]);
        } catch (const std::exception&) {
          bad("weights", "cannot parse number '" + parts[i] + "'");
        }
      }
    }
    std::optional<LatticeSpec> spec;
    if (lattice.empty() || lattice == "integer") {
      spec = LatticeSpec::integer(d);
    } else if (lattice == "even") {
      spec = LatticeSpec::even(d);
    } else {
      const auto cols = parse_vectors(lattice, "lattice");
      if (cols.size() != d || cols.front().size() != d) bad("lattice", "expected a square basis");
      spec = LatticeSpec(d, cols);
    }
    const JumpDistribution mu(atoms, w);
    out << check_kernel(mu, *spec).to_text();
    return kExitOk;
  } catch (const ConfigError& e) {
    log << "argument error: --" << e.field << ": " << e.message << '\n';
  } catch (const Error& e) {
    log << "argument error: " << e.what() << '\n';
  }
  return kExitConfig;
}

}  // namespace cmt
