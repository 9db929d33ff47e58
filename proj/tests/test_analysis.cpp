#include <cmath>
#include <set>
#include <sstream>

#include "cmt/analysis.hpp"
#include "cmt/error.hpp"
#include "cmt/models.hpp"
#include "cmt/random.hpp"
#include "doctest.h"
#include "json.hpp"

using namespace cmt;

namespace {

ForestWindow binary_tree(std::size_t n) {
  std::vector<Key> keys;
  std::vector<JumpSpec> jumps;
  for (std::size_t i = 0; i < n; ++i) {
    keys.push_back({static_cast<std::int64_t>(i)});
    JumpSpec j{{static_cast<std::int64_t>(i)}, std::nullopt};
    if (i > 0) j.target = Key{static_cast<std::int64_t>((i - 1) / 2)};
    jumps.push_back(j);
  }
  return ForestWindow::build(VertexKind::Abstract, 0, keys, jumps, nullptr, {"tree", 0, {}});
}

VertexId iterate(const ForestWindow& f, VertexId v, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) v = f.target(v);
  return v;
}

}  // namespace

TEST_CASE("nested level averages match direct enumeration") {
  const Box box{{0, 0}, {31, 63}, {true, false}};
  const auto f = nguyen_model(2, box, 12);
  std::vector<double> parity(f.size()), one(f.size(), 1.0);
  for (VertexId v = 0; v < f.size(); ++v) parity[v] = static_cast<double>(((f.key(v)[0] % 2) + 2) % 2);
  const auto v = f.require_vertex(IntVec{16, 62});
  const auto a = nested_level_average(f, parity, v, 6);
  const auto b = nested_level_average(f, one, v, 6);
  REQUIRE(a.average.size() == 7);
  for (std::size_t n = 0; n < a.average.size(); ++n) {
    CHECK(b.average[n] == 1.0);
    const auto top = iterate(f, v, n);
    std::size_t size = 0;
    double sum = 0;
    for (VertexId w = 0; w < f.size(); ++w) {
      VertexId u = w;
      bool ok = true;
      for (std::size_t i = 0; i < n && ok; ++i) {
        if (!f.has_target(u)) ok = false;
        else u = f.target(u);
      }
      if (ok && u == top) {
        ++size;
        sum += parity[w];
      }
    }
    CHECK(a.set_size[n] == size);
    CHECK(a.average[n] == doctest::Approx(sum / size));
  }
  const Box torus{{0, 0}, {7, 7}, {true, true}};
  const auto cyc = sample_lattice_cmt(LatticeSpec::integer(2), JumpDistribution::delta({0, 1}), torus, 1);
  CHECK_THROWS_AS(nested_level_average(cyc, std::vector<double>(cyc.size(), 1.0), 0, 20), Error);
}

TEST_CASE("in-degree has mean exactly one on a torus") {
  const Box torus{{0, 0}, {15, 15}, {true, true}};
  const auto f = nguyen_model(2, torus, 3);
  const auto p = in_degree_profile(f);
  CHECK(p.mean_is_exactly_one());
  std::uint64_t hist_total = 0, weighted = 0;
  for (std::size_t k = 0; k < p.histogram.size(); ++k) {
    hist_total += p.histogram[k];
    weighted += k * p.histogram[k];
  }
  CHECK(hist_total == p.count);
  CHECK(weighted == p.total_in);
  const auto q = in_degree_profile(binary_tree(7), {0, 1, 2});
  CHECK(q.total_in == 6);
}

TEST_CASE("cluster frequencies track component sizes") {
  // Delta jumps along axis 1: every row of the torus is one component.
  const Box torus{{0, 0}, {3, 7}, {true, true}};
  const auto f = sample_lattice_cmt(LatticeSpec::integer(2), JumpDistribution::delta({0, 1}), torus, 1);
  REQUIRE(components(f).count() == 4);
  const auto fr = cluster_frequencies(f, 4000, 9, 20);
  REQUIRE(fr.size() == 4);
  std::uint64_t total = 0;
  for (const auto& e : fr) {
    total += e.successes;
    CHECK(e.band_contains(0.25));
  }
  CHECK(total == 4000);
  const Box open{{0, 0}, {3, 7}, {true, false}};
  const auto g = nguyen_variant(open, 2);
  try {
    cluster_frequencies(g, 10, 1);
    FAIL("expected NeedsTorus");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NeedsTorus);
  }
}

TEST_CASE("component survey") {
  const auto t = binary_tree(31);
  const auto r = component_statistic_survey(t, ComponentStatistic::LeafFraction, 1);
  REQUIRE(r.estimates.size() == 1);
  CHECK(r.estimates[0].value == doctest::Approx(16.0 / 31.0));
  const auto d = component_statistic_survey(t, ComponentStatistic::MeanInDegree, 1);
  CHECK(d.estimates[0].value == doctest::Approx(30.0 / 31.0));
  try {
    component_statistic_survey(t, ComponentStatistic::LeafFraction, 100);
    FAIL("expected Empty");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Empty);
  }
  CHECK(parse_component_statistic("leaf-fraction") == ComponentStatistic::LeafFraction);
  CHECK(to_string(ComponentStatistic::HeightRangePerSize) == "height-range-per-size");
  CHECK_THROWS_AS(parse_component_statistic("nope"), Error);
}

TEST_CASE("connectivity decays on the space-time tree") {
  const SpaceTimeChain chain(FiniteGraph::regular_tree(3, 12));
  // The walk on a tree is bipartite: only even displacements can meet.
  const auto r = connectivity_decay_probe(chain, {0, 0}, {0, 2, 4, 6, 8}, 3000, 200, 4);
  REQUIRE(r.estimates.size() == 5);
  CHECK(r.estimates[0].value == 1.0);
  for (std::size_t i = 1; i < r.estimates.size(); ++i) CHECK(r.estimates[i].value < r.estimates[i - 1].value);
  CHECK(r.truncation_fraction >= 0.0);
  CHECK(r.truncation_fraction <= 1.0);
}

TEST_CASE("component count probe") {
  const LatticeChain chain(nguyen_jumps(2), {2, 0});
  CHECK(count_components_probe(chain, {0, 0}, 1, 100, 50, 1).frequency() == 1.0);
  // Two walkers from one point collide at time 1 with probability 1/2 unless burn-in skips it.
  const LatticeChain delta(JumpDistribution::delta({1}), {1});
  CHECK(count_components_probe(delta, {0}, 2, 10, 20, 1).frequency() == 0.0);
}

TEST_CASE("one-endedness probe") {
  const auto r = one_endedness_probe(JumpDistribution::delta({1}), {1, 5}, 10, 3);
  REQUIRE(r.estimates.size() == 2);
  for (const auto& e : r.estimates) CHECK(e.value == 1.0);
  CHECK_THROWS_AS(one_endedness_probe(JumpDistribution::uniform({{1}, {-1}}), {1}, 10, 3), Error);
}

TEST_CASE("level-set bijection") {
  // Delta jumps: every level set is a single vertex, so F' = F.
  const Box strip{{0, 0}, {5, 19}, {true, false}};
  const auto d = sample_lattice_cmt(LatticeSpec::integer(2), JumpDistribution::delta({0, 1}), strip, 1);
  const auto b = level_set_bijection(d, 5);
  CHECK(b.injective());
  CHECK(b.unmatched.empty());
  for (VertexId v = 0; v < d.size(); ++v) {
    if (b.image[v] >= 0) CHECK(static_cast<VertexId>(b.image[v]) == d.target(v));
  }
  const Box cyl{{0, 0}, {15, 31}, {true, false}};
  const auto f = nguyen_variant(cyl, 11);
  const auto g = level_set_bijection(f, 11);
  CHECK(g.injective());
  CHECK(g.domain_size > 0);
  std::size_t mapped = 0;
  for (auto x : g.image) mapped += x >= 0;
  CHECK(mapped + g.unmatched.size() == g.domain_size);
  for (VertexId v = 0; v < f.size(); ++v) {
    if (g.image[v] >= 0) CHECK(g.depth[static_cast<std::size_t>(g.image[v])] + 1 == g.depth[v]);
  }
  const Box torus{{0, 0}, {7, 7}, {true, true}};
  CHECK_THROWS_AS(level_set_bijection(nguyen_variant(torus, 1), 1), Error);
}

TEST_CASE("canopy demo") {
  for (std::size_t depth : {1u, 3u}) {
    const auto r = canopy_distinguishability_demo(depth, 2);
    CHECK(r.summary.at("passed") == 1.0);
    CHECK(r.summary.at("constant") == 1.0);
    CHECK(r.summary.at("distinct_values") >= static_cast<double>(depth));
  }
}

TEST_CASE("probe reports serialize") {
  ProbeReport r;
  r.probe = "p";
  r.config_hash = "abc";
  r.estimates.push_back({"u", 0.1, 0.01, 10});
  r.summary["k"] = 2;
  std::ostringstream out;
  r.write_csv(out);
  CHECK(out.str() == "unit,value,half_width,trials\nu,0.10000000000000001,0.01,10\n");
  const auto j = nlohmann::json::parse(r.to_json());
  CHECK(j["probe"] == "p");
  CHECK(j["config-hash"] == "abc");
  CHECK(j["bands"][0]["lo"].get<double>() == doctest::Approx(0.09));
  CHECK(j["summary"]["k"] == 2);
}
