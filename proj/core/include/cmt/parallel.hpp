#pragma once

#include <cstddef>
#include <exception>
#include <functional>
#include <vector>

namespace cmt {

// Worker count used by trial loops. Results never depend on it: every trial
// owns its seed and reducers run in trial order.
std::size_t thread_count() noexcept;
void set_thread_count(std::size_t n) noexcept;

// Runs fn(i) for i in [0, n) on thread_count() workers; rethrows the first
// exception (lowest index) after all workers joined.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

// Maps trials to results in index order.
template <class T, class F>
std::vector<T> parallel_map(std::size_t n, F&& fn) {
  std::vector<T> out(n);
  parallel_for(n, [&](std::size_t i) { out[i] = fn(i); });
  return out;
}

}  // namespace cmt
