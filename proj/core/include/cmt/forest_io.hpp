#pragma once

#include <iosfwd>
#include <string>

#include "cmt/forest.hpp"

namespace cmt {

// Text dump, one record per vertex in key order:
//
//   dim=<d> model=<name> seed=<u64>
//   <coords...> -> <coords...>
//   <coords...> -> EXIT
//   <coords...> -> NONE
//
// Abstract and point forests use dim=0 and a single integer id per vertex.
// Interior flags are not stored; reading rebuilds them with the default rule.
void write_forest(std::ostream& out, const ForestWindow& forest);
std::string dump_forest(const ForestWindow& forest);

// Throws Error(ParseError) with the offending line number.
ForestWindow read_forest(std::istream& in);
ForestWindow parse_forest(const std::string& text);

}  // namespace cmt
