// Serial references against the OpenMP kernels.

#include <benchmark/benchmark.h>

#include <algorithm>
#include <cstdint>

#include "malsched/ctmc_engine.hpp"
#include "malsched/event_engine.hpp"
#include "malsched/exact.hpp"

using namespace malsched;

namespace {

SystemConfig two_class(int k) {
  return resolve_config(k,
                        {{SizeDist::exponential(1.0), 0.5, ParallelismRule::constant(1)},
                         {SizeDist::exponential(2.0), 0.5, ParallelismRule::full()}},
                        FixedRho{0.7});
}

SimPlan plan() { return SimPlan::with_measure(2000, 8, 1); }

// Two independent M/M/1 queues truncated at n-1 each, as a 2-D grid chain.
exact::Generator grid(int n) {
  exact::Generator g;
  g.num_states = static_cast<std::int64_t>(n) * n;
  g.row_start.push_back(0);
  const auto id = [n](int a, int b) { return static_cast<std::int64_t>(a) * n + b; };
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      const auto add = [&](std::int64_t t, double r) {
        g.target.push_back(t);
        g.rate.push_back(r);
      };
      if (a + 1 < n) add(id(a + 1, b), 0.4);
      if (a > 0) add(id(a - 1, b), 1.0);
      if (b + 1 < n) add(id(a, b + 1), 0.3);
      if (b > 0) add(id(a, b - 1), 1.0);
      g.row_start.push_back(static_cast<std::int64_t>(g.target.size()));
    }
  }
  return g;
}

void BM_ctmc_serial(benchmark::State& state) {
  const auto cfg = two_class(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(ctmc::estimate_serial(cfg, Lpf{}, plan()));
}

void BM_ctmc_parallel(benchmark::State& state) {
  const auto cfg = two_class(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(ctmc::estimate(cfg, Lpf{}, plan()));
}

void BM_event_serial(benchmark::State& state) {
  const auto cfg = two_class(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(event::estimate_serial(cfg, Lpf{}, plan()));
}

void BM_event_parallel(benchmark::State& state) {
  const auto cfg = two_class(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(event::estimate(cfg, Lpf{}, plan()));
}

void BM_jacobi_serial(benchmark::State& state) {
  const auto g = grid(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(exact::solve_stationary_jacobi_serial(g));
}

void BM_jacobi_parallel(benchmark::State& state) {
  const auto g = grid(static_cast<int>(state.range(0)));
  const int threads = std::max(1, replication_threads());
  for (auto _ : state) benchmark::DoNotOptimize(exact::solve_stationary_jacobi(g, threads));
}

}  // namespace

BENCHMARK(BM_ctmc_serial)->Arg(16)->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ctmc_parallel)->Arg(16)->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_event_serial)->Arg(16)->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_event_parallel)->Arg(16)->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_jacobi_serial)->Arg(100)->Arg(300)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_jacobi_parallel)->Arg(100)->Arg(300)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
