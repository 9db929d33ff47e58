#include <benchmark/benchmark.h>

#include "cmt/analysis.hpp"
#include "cmt/chains.hpp"
#include "cmt/models.hpp"
#include "cmt/wusf.hpp"

namespace {

void BM_KernelPowerNguyen(benchmark::State& state) {
  const auto mu = cmt::nguyen_jumps(3);
  for (auto _ : state) benchmark::DoNotOptimize(cmt::kernel_power(mu, static_cast<std::size_t>(state.range(0))));
}
BENCHMARK(BM_KernelPowerNguyen)->Arg(16)->Arg(64);

void BM_NguyenSampler(benchmark::State& state) {
  const auto n = state.range(0);
  const cmt::Box box{{0, 0}, {n - 1, n - 1}, {true, false}};
  std::uint64_t seed = 1;
  for (auto _ : state) benchmark::DoNotOptimize(cmt::nguyen_model(2, box, seed++));
  state.SetItemsProcessed(state.iterations() * n * n / 2);
}
BENCHMARK(BM_NguyenSampler)->Arg(64)->Arg(256);

void BM_Components(benchmark::State& state) {
  const cmt::Box box{{0, 0}, {255, 255}, {true, false}};
  const auto f = cmt::nguyen_model(2, box, 3);
  for (auto _ : state) benchmark::DoNotOptimize(cmt::components(f));
}
BENCHMARK(BM_Components);

void BM_WilsonGrid(benchmark::State& state) {
  const auto ball = cmt::wired_ball(2, state.range(0));
  std::uint64_t seed = 1;
  for (auto _ : state) benchmark::DoNotOptimize(cmt::wilson_ust(ball.graph, ball.boundary, seed++));
}
BENCHMARK(BM_WilsonGrid)->Arg(8)->Arg(32);

void BM_PathCollision(benchmark::State& state) {
  const cmt::LatticeChain chain(cmt::nguyen_jumps(2), {2, 0});
  for (auto _ : state) {
    benchmark::DoNotOptimize(cmt::path_collision_estimate(chain, {0, 0}, {4, 0}, 1000, 100, 9));
  }
}
BENCHMARK(BM_PathCollision);

}  // namespace

BENCHMARK_MAIN();
