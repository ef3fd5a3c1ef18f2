#include <benchmark/benchmark.h>

#include <vector>

#include "voltsev/estimation.hpp"
#include "voltsev/likelihood.hpp"
#include "voltsev/synth.hpp"

using namespace voltsev;

namespace {

ModelSpec bench_spec(bool random) {
  ModelSpec spec;
  spec.name = "bench";
  Term a;
  a.variable = "x1";
  a.outcome = Severity::most_severe;
  a.random = random;
  if (random) a.het_mean = {"d"};
  Term b;
  b.variable = "x2";
  b.outcome = Severity::minor_crash;
  spec.terms = {a, b};
  spec.options.draws = 200;
  spec.options.seed = 3;
  return spec;
}

EventDataset bench_events(const ModelSpec& spec, std::size_t n) {
  GroundTruth truth;
  truth.spec = spec;
  truth.theta.assign(make_packing(spec).n_params, 0.2);
  truth.covariates = {
      {"x1", {CovariateGenerator::Kind::normal, 0.0, 1.0}},
      {"x2", {CovariateGenerator::Kind::normal, 0.0, 1.0}},
      {"d", {CovariateGenerator::Kind::bernoulli, 0.5, 0.0}},
  };
  truth.n_events = n;
  truth.seed = 17;
  return simulate_events(truth);
}

}  // namespace

static void bm_loglik_fixed(benchmark::State& state) {
  ModelSpec spec = bench_spec(false);
  PreparedSample sample = prepare_sample(bench_events(spec, 2000), spec);
  ParameterPacking pk = make_packing(spec);
  Eigen::VectorXd theta = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(pk.n_params), 0.1);
  Eigen::VectorXd grad(theta.size());
  for (auto _ : state) {
    benchmark::DoNotOptimize(loglik_fixed(sample, spec, pk, theta, &grad));
  }
  state.SetItemsProcessed(state.iterations() * 2000);
}
BENCHMARK(bm_loglik_fixed);

static void bm_simulated_loglik(benchmark::State& state) {
  ModelSpec spec = bench_spec(true);
  PreparedSample sample = prepare_sample(bench_events(spec, 1000), spec);
  ParameterPacking pk = make_packing(spec);
  RealizedDraws draws = realize_draws(draws_for(spec, sample.n_events()), spec);
  Eigen::VectorXd theta = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(pk.n_params), 0.1);
  Eigen::VectorXd grad(theta.size());
  const bool with_grad = state.range(0) != 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        simulated_loglik(sample, spec, pk, theta, draws, with_grad ? &grad : nullptr));
  }
  state.SetItemsProcessed(state.iterations() * 1000 * 200);
}
BENCHMARK(bm_simulated_loglik)->Arg(0)->Arg(1);

static void bm_mixed_fit(benchmark::State& state) {
  ModelSpec spec = bench_spec(true);
  spec.options.draws = 50;
  EventDataset data = bench_events(spec, 500);
  FitOptions opts = FitOptions::from_spec(spec);
  for (auto _ : state) {
    EstimationResult res = fit(data, spec, opts);
    benchmark::DoNotOptimize(res.loglik);
  }
}
BENCHMARK(bm_mixed_fit)->Unit(benchmark::kMillisecond);
