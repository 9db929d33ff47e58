#pragma once

#include <cstdint>
#include <vector>

#include "cmt/random.hpp"

namespace cmt::detail {

struct IntVecHash {
  std::size_t operator()(const std::vector<std::int64_t>& v) const noexcept {
    std::uint64_t h = 0x243f6a8885a308d3ULL;
    for (auto k : v) h = mix64(h ^ static_cast<std::uint64_t>(k));
    return static_cast<std::size_t>(h);
  }
};

inline std::int64_t dot(const std::vector<std::int64_t>& a, const std::vector<std::int64_t>& b) noexcept {
  std::int64_t s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace cmt::detail
