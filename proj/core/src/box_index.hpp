#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "cmt/error.hpp"
#include "cmt/models.hpp"

namespace cmt::detail {

// Mixed-radix position of a box point; the first axis is most significant, so
// increasing index is lexicographic order.
class BoxIndexer {
 public:
  explicit BoxIndexer(const Box& box) : lower_(box.lower), extent_(box.dimension()), stride_(box.dimension()) {
    std::uint64_t stride = 1;
    for (std::size_t i = box.dimension(); i-- > 0;) {
      extent_[i] = static_cast<std::uint64_t>(box.extent(i));
      stride_[i] = stride;
      require(!__builtin_mul_overflow(stride, extent_[i], &stride) && stride < (1ULL << 40), ErrorCode::TooLarge,
              "window volume too large");
    }
    volume_ = stride;
  }

  std::uint64_t volume() const noexcept { return volume_; }

  std::uint64_t index(std::span<const std::int64_t> p) const noexcept {
    std::uint64_t idx = 0;
    for (std::size_t i = 0; i < p.size(); ++i) idx += static_cast<std::uint64_t>(p[i] - lower_[i]) * stride_[i];
    return idx;
  }

  void point(std::uint64_t idx, std::span<std::int64_t> out) const noexcept {
    for (std::size_t i = 0; i < out.size(); ++i) {
      out[i] = lower_[i] + static_cast<std::int64_t>(idx / stride_[i]);
      idx %= stride_[i];
    }
  }

 private:
  std::vector<std::int64_t> lower_;
  std::vector<std::uint64_t> extent_;
  std::vector<std::uint64_t> stride_;
  std::uint64_t volume_ = 0;
};

}  // namespace cmt::detail
