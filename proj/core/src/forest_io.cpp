#include "cmt/forest_io.hpp"

#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>

#include "cmt/error.hpp"

namespace cmt {

namespace {

void write_key(std::ostream& out, std::span<const std::int64_t> key) {
  for (std::size_t i = 0; i < key.size(); ++i) {
    if (i) out << ' ';
    out << key[i];
  }
}

[[noreturn]] void parse_fail(std::size_t line, const std::string& what) {
  fail(ErrorCode::ParseError, "line " + std::to_string(line) + ": " + what);
}

std::int64_t parse_int(const std::string& tok, std::size_t line) {
  std::int64_t value = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) parse_fail(line, "bad integer '" + tok + "'");
  return value;
}

}  // namespace

void write_forest(std::ostream& out, const ForestWindow& forest) {
  const std::string model = forest.metadata().model.empty() ? "unnamed" : forest.metadata().model;
  out << "dim=" << forest.dimension() << " model=" << model << " seed=" << forest.metadata().seed << '\n';
  for (VertexId v = 0; v < forest.size(); ++v) {
    write_key(out, forest.key(v));
    out << " -> ";
    switch (forest.jump_state(v)) {
      case JumpState::Internal: write_key(out, forest.key(forest.target(v))); break;
      case JumpState::Exit: out << "EXIT"; break;
      case JumpState::None: out << "NONE"; break;
    }
    out << '\n';
  }
}

std::string dump_forest(const ForestWindow& forest) {
  std::ostringstream os;
  write_forest(os, forest);
  return os.str();
}

ForestWindow read_forest(std::istream& in) {
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line)) parse_fail(line_no, "missing header");

  ForestMetadata meta;
  int dim = -1;
  bool have_seed = false;
  {
    std::istringstream hs(line);
    std::string tok;
    while (hs >> tok) {
      const auto eq = tok.find('=');
      if (eq == std::string::npos) parse_fail(line_no, "header token without '=': " + tok);
      const std::string name = tok.substr(0, eq);
      const std::string value = tok.substr(eq + 1);
      if (name == "dim") {
        dim = static_cast<int>(parse_int(value, line_no));
      } else if (name == "model") {
        meta.model = value;
      } else if (name == "seed") {
        std::uint64_t s = 0;
        auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), s);
        if (ec != std::errc() || ptr != value.data() + value.size()) parse_fail(line_no, "bad seed");
        meta.seed = s;
        have_seed = true;
      } else {
        parse_fail(line_no, "unknown header key '" + name + "'");
      }
    }
  }
  if (dim < 0 || meta.model.empty() || !have_seed) parse_fail(line_no, "header needs dim=, model= and seed=");

  const VertexKind kind = dim == 0 ? VertexKind::Abstract : VertexKind::Lattice;
  const std::size_t key_len = dim == 0 ? 1 : static_cast<std::size_t>(dim);
  std::vector<Key> vertices;
  std::vector<JumpSpec> jumps;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto arrow = line.find("->");
    if (arrow == std::string::npos) parse_fail(line_no, "record without '->'");
    std::istringstream ls(line.substr(0, arrow));
    std::istringstream rs(line.substr(arrow + 2));
    Key src;
    std::string tok;
    while (ls >> tok) src.push_back(parse_int(tok, line_no));
    if (src.size() != key_len) parse_fail(line_no, "source has wrong number of coordinates");
    std::vector<std::string> rhs;
    while (rs >> tok) rhs.push_back(tok);
    vertices.push_back(src);
    if (rhs.size() == 1 && rhs[0] == "EXIT") {
      jumps.push_back({src, std::nullopt});
    } else if (rhs.size() == 1 && rhs[0] == "NONE") {
      continue;
    } else {
      Key dst;
      for (const auto& t : rhs) dst.push_back(parse_int(t, line_no));
      if (dst.size() != key_len) parse_fail(line_no, "target has wrong number of coordinates");
      jumps.push_back({src, dst});
    }
  }
  return ForestWindow::build(kind, dim, std::move(vertices), jumps, {}, std::move(meta));
}

ForestWindow parse_forest(const std::string& text) {
  std::istringstream is(text);
  return read_forest(is);
}

}  // namespace cmt
