#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"

namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code = -1;
  std::string output;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("cmtsim-test-" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

Outcome cmtsim(const std::string& args, const fs::path& dir) {
  const auto log = dir / "log.txt";
  const std::string cmd = std::string(CMTSIM_PATH) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(log)};
}

fs::path write_config(const fs::path& dir, const std::string& name, const std::string& body) {
  const auto p = dir / name;
  std::ofstream(p) << body;
  return p;
}

std::uint64_t fnv(const std::string& s) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

// Checks every `hash bytes name` line of a manifest against the file on disk.
void check_manifest(const fs::path& out) {
  std::istringstream in(slurp(out / "manifest.txt"));
  std::string line;
  std::size_t files = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream row(line);
    std::string hash, name;
    std::size_t bytes = 0;
    row >> hash >> bytes >> name;
    const auto body = slurp(out / name);
    CHECK(body.size() == bytes);
    CHECK(std::stoull(hash, nullptr, 16) == fnv(body));
    ++files;
  }
  CHECK(files > 0);
}

const char* kDelta =
    R"({"model": "lattice-cmt", "dimension": 1, "support": [[1]], "weights": [1], "lattice": "integer",
        "box": [[0, 20]], "seed": 3, "probes": ["in_degree_profile"]})";

}  // namespace

TEST_CASE("empty config is a config error naming the missing field") {
  const auto dir = scratch("empty");
  const auto cfg = write_config(dir, "empty.json", "");
  const auto r = cmtsim("run " + cfg.string(), dir);
  CHECK(r.code == 2);
  CHECK(r.output.find("model") != std::string::npos);
}

TEST_CASE("bad field values are config errors") {
  const auto dir = scratch("bad");
  const auto cfg = write_config(dir, "bad.json", R"({"model": "no-such-model", "seed": 1})");
  const auto r = cmtsim("run " + cfg.string(), dir);
  CHECK(r.code == 2);
  CHECK(r.output.find("model") != std::string::npos);
  CHECK(cmtsim("frobnicate", dir).code == 2);
}

TEST_CASE("a minimal run writes one CSV plus a manifest") {
  const auto dir = scratch("minimal");
  const auto cfg = write_config(dir, "delta.json", kDelta);
  const auto out = dir / "out";
  const auto r = cmtsim("--out-dir " + out.string() + " run " + cfg.string(), dir);
  REQUIRE(r.code == 0);
  CHECK(fs::exists(out / "manifest.txt"));
  CHECK(fs::exists(out / "in_degree_profile.csv"));
  std::size_t csv = 0;
  for (const auto& e : fs::directory_iterator(out)) csv += e.path().extension() == ".csv";
  CHECK(csv == 1);
  check_manifest(out);
  CHECK(slurp(out / "in_degree_profile.csv").rfind("unit,value,half_width,trials\n", 0) == 0);
}

TEST_CASE("reruns are byte-identical") {
  const auto dir = scratch("determinism");
  const auto cfg = write_config(dir, "nguyen.json", R"({"model": "nguyen", "dimension": 2,
      "box": [[0, 31], [0, 31]], "periodic": [true, false], "seed": 8, "replicates": 2,
      "probes": [{"name": "component_statistic_survey", "statistic": "leaf-fraction", "min_size": 10},
                 "in_degree_profile"]})");
  REQUIRE(cmtsim("--out-dir " + (dir / "a").string() + " run " + cfg.string(), dir).code == 0);
  REQUIRE(cmtsim("--threads 2 --out-dir " + (dir / "b").string() + " run " + cfg.string(), dir).code == 0);
  std::set<std::string> names;
  for (const auto& e : fs::directory_iterator(dir / "a")) names.insert(e.path().filename().string());
  CHECK(names.size() > 2);
  for (const auto& n : names) CHECK(slurp(dir / "a" / n) == slurp(dir / "b" / n));
  // A different seed changes the output.
  REQUIRE(cmtsim("--seed 9 --out-dir " + (dir / "c").string() + " run " + cfg.string(), dir).code == 0);
  CHECK(slurp(dir / "a" / "manifest.txt") != slurp(dir / "c" / "manifest.txt"));
}

TEST_CASE("a failing probe exits 1 and names the probe") {
  const auto dir = scratch("runtime");
  const auto cfg = write_config(dir, "torus.json", R"({"model": "nguyen-variant", "box": [[0, 7], [0, 7]],
      "periodic": [true, true], "seed": 3, "probes": ["level_set_bijection"]})");
  const auto r = cmtsim("--out-dir " + (dir / "out").string() + " run " + cfg.string(), dir);
  CHECK(r.code == 1);
  CHECK(r.output.find("level_set_bijection") != std::string::npos);
}

TEST_CASE("check-kernel reports the kernel conditions") {
  const auto dir = scratch("kernel");
  auto r = cmtsim("check-kernel --support \"1,-1;-1,-1\" --weights 0.5,0.5 --lattice even", dir);
  REQUIRE(r.code == 0);
  CHECK(r.output.find("cycle_free: true") != std::string::npos);
  CHECK(r.output.find("weakly_irreducible: true") != std::string::npos);
  CHECK(r.output.find("weakly_aperiodic: false") != std::string::npos);
  r = cmtsim("check-kernel --support \"-1,-1;1,-1;0,-2\" --weights 0.25,0.25,0.5 --lattice even", dir);
  REQUIRE(r.code == 0);
  CHECK(r.output.find("weakly_aperiodic: true") != std::string::npos);
  r = cmtsim("check-kernel --support \"-1;1\" --weights 0.5,0.5 --lattice integer", dir);
  REQUIRE(r.code == 0);
  CHECK(r.output.find("cycle_free: false") != std::string::npos);
  CHECK(cmtsim("check-kernel --support \"1\" --weights 0.5,0.5 --lattice integer", dir).code == 2);
}

TEST_CASE("export-levels writes a bounded window of one component") {
  const auto dir = scratch("levels");
  const auto cfg = write_config(dir, "strip.json", R"({"model": "discrete-strip", "dimension": 2, "p": 0.4,
      "box": [[0, 63], [0, 31]], "periodic": [false, true], "seed": 5,
      "max_levels": 20})");
  const auto out = dir / "out";
  REQUIRE(cmtsim("--out-dir " + out.string() + " export-levels " + cfg.string(), dir).code == 0);
  std::istringstream in(slurp(out / "levels.csv"));
  std::string line;
  std::getline(in, line);
  CHECK(line == "point-id,t,x,level-index,component-id");
  std::set<long long> levels, comps, ids;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string c;
    while (std::getline(ss, c, ',')) cells.push_back(c);
    REQUIRE(cells.size() == 5);
    CHECK(ids.insert(std::stoll(cells[0])).second);
    levels.insert(std::stoll(cells[3]));
    comps.insert(std::stoll(cells[4]));
  }
  CHECK(comps.size() == 1);
  CHECK(levels.size() <= 20);
  CHECK(levels.size() >= 2);
  CHECK(*levels.rbegin() - *levels.begin() + 1 == static_cast<long long>(levels.size()));
  check_manifest(out);
}
