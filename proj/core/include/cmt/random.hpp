#pragma once

#include <cstdint>
#include <limits>
#include <span>

namespace cmt {

// SplitMix64 finalizer. Bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Seed of trial `index` under `master`:
//   derive_seed(m, i) = mix64(m ^ mix64(i ^ 0x6a09e667f3bcc909))
// Fixed forever; changing it changes every published output.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept {
  return mix64(master ^ mix64(index ^ 0x6a09e667f3bcc909ULL));
}

// Seed of the randomness stream owned by the site with integer key `key`.
std::uint64_t key_seed(std::uint64_t seed, std::span<const std::int64_t> key) noexcept;

// Small-state generator satisfying UniformRandomBitGenerator. One instance per
// site keeps samples independent of enumeration order.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit constexpr SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  constexpr result_type operator()() noexcept {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

// Uniform on [0, 1) with 53 random bits.
template <class G>
double uniform01(G& gen) {
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

// Unbiased uniform integer on [0, n), n > 0 (Lemire's multiply-shift rejection).
template <class G>
std::uint64_t uniform_below(G& gen, std::uint64_t n) {
  __extension__ using u128 = unsigned __int128;
  u128 m = static_cast<u128>(gen()) * n;
  auto low = static_cast<std::uint64_t>(m);
  if (low < n) {
    const std::uint64_t threshold = (0 - n) % n;
    while (low < threshold) {
      m = static_cast<u128>(gen()) * n;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

// Index drawn from cumulative weights (last entry is the total mass).
template <class G>
std::size_t sample_cumulative(G& gen, std::span<const double> cumulative) {
  const double u = uniform01(gen) * cumulative.back();
  std::size_t lo = 0;
  std::size_t hi = cumulative.size() - 1;
  while (lo < hi) {
    const std::size_t mid = (lo + hi) / 2;
    if (u < cumulative[mid]) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  return lo;
}

}  // namespace cmt
