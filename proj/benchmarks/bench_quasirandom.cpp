#include <benchmark/benchmark.h>

#include "voltsev/quasirandom.hpp"

using namespace voltsev;

static void bm_halton_element(benchmark::State& state) {
  std::uint64_t index = 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(halton_element(3, index++));
  }
}
BENCHMARK(bm_halton_element);

static void bm_inverse_normal_cdf(benchmark::State& state) {
  double u = 0.0;
  for (auto _ : state) {
    u += 1e-7;
    if (u >= 1.0) u = 1e-7;
    benchmark::DoNotOptimize(inverse_normal_cdf(u));
  }
}
BENCHMARK(bm_inverse_normal_cdf);

static void bm_build_draws(benchmark::State& state) {
  DrawConfig config;
  config.n_obs = static_cast<std::size_t>(state.range(0));
  config.n_draws = 200;
  config.primes = {2, 3};
  config.discard = 50;
  for (auto _ : state) {
    DrawTensor t = build_draws(config);
    benchmark::DoNotOptimize(t(0, 0, 0));
  }
  state.SetItemsProcessed(state.iterations() *
                          static_cast<std::int64_t>(config.n_obs * config.n_draws * 2));
}
BENCHMARK(bm_build_draws)->Arg(100)->Arg(1000);

static void bm_build_draws_scrambled(benchmark::State& state) {
  DrawConfig config;
  config.n_obs = 500;
  config.n_draws = 200;
  config.primes = {2, 3, 5};
  config.discard = 50;
  config.scramble = true;
  config.seed = 7;
  for (auto _ : state) {
    DrawTensor t = build_draws(config);
    benchmark::DoNotOptimize(t(0, 0, 0));
  }
}
BENCHMARK(bm_build_draws_scrambled);

BENCHMARK_MAIN();
