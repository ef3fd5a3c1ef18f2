#include <benchmark/benchmark.h>

#include <sstream>

#include "voltsev/kinematics.hpp"
#include "voltsev/rng.hpp"
#include "voltsev/volatility.hpp"

using namespace voltsev;

namespace {

KinematicsTrace noisy_trace(std::size_t n_samples) {
  SplitMix64 gen(11);
  KinematicsTrace t;
  t.event_id = "bench";
  for (std::size_t i = 0; i < n_samples; ++i) {
    TraceSample s;
    s.t = static_cast<double>(i) / 10.0;
    s.speed_kmh = gen.next_uniform() < 0.05 ? 0.0 : 20.0 + gen.next_uniform() * 60.0;
    s.accel_long = (gen.next_uniform() - 0.5) * 4.0;
    s.accel_lat = (gen.next_uniform() - 0.5) * 2.0;
    t.samples.push_back(s);
  }
  return t;
}

}  // namespace

static void bm_extract_features(benchmark::State& state) {
  KinematicsTrace trace = noisy_trace(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    VolatilityFeatures f = extract_features(trace);
    benchmark::DoNotOptimize(f.cv_long_acc);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(bm_extract_features)->Arg(300)->Arg(3000);

static void bm_parse_traces(benchmark::State& state) {
  KinematicsTrace trace = noisy_trace(300);
  std::ostringstream buf;
  write_traces_csv(buf, {trace, trace, trace, trace});
  const std::string text = buf.str();
  for (auto _ : state) {
    std::istringstream in(text);
    ParseResult parsed = parse_traces(in);
    benchmark::DoNotOptimize(parsed.traces.size());
  }
  state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(text.size()));
}
BENCHMARK(bm_parse_traces);

static void bm_segment_trace(benchmark::State& state) {
  KinematicsTrace cleaned = clean_trace(noisy_trace(3000));
  for (auto _ : state) {
    auto bins = segment_trace(cleaned);
    benchmark::DoNotOptimize(bins[0].has_value());
  }
}
BENCHMARK(bm_segment_trace);
