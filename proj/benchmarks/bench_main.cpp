#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "rlct/bounds.hpp"
#include "rlct/gen_error.hpp"
#include "rlct/mcmc.hpp"
#include "rlct/model.hpp"
#include "rlct/tensor.hpp"

namespace {

using namespace rlct;

CpParams random_params(Dims dims, std::size_t rank, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  CpParams w(dims, rank);
  for (double& v : w.flat()) v = normal(rng);
  return w;
}

void BM_Compose(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto h = static_cast<std::size_t>(state.range(1));
  const CpParams w = random_params({n, n, n}, h, 1);
  std::vector<double> out(n * n * n);
  for (auto _ : state) {
    compose_into(w.dims(), h, w.flat(), out);
    benchmark::DoNotOptimize(out.data());
  }
}
BENCHMARK(BM_Compose)->Args({2, 2})->Args({3, 4})->Args({4, 10});

void BM_StatsLogLikelihood(benchmark::State& state) {
  const ModelSpec spec{{4, 4, 4}, 2, 1, 100};
  const CpParams w0 = draw_true_params(spec, 2);
  const DatasetStats stats = DatasetStats::from(sample_dataset(w0, spec.n, 3));
  const Tensor3 mean = compose(w0);
  for (auto _ : state) benchmark::DoNotOptimize(stats.log_likelihood(mean.values()));
}
BENCHMARK(BM_StatsLogLikelihood);

void BM_PredictiveDensity(benchmark::State& state) {
  const auto count = static_cast<std::size_t>(state.range(0));
  const Dims dims{3, 3, 3};
  PosteriorSamples post;
  for (std::size_t s = 0; s < count; ++s) post.samples.push_back(random_params(dims, 4, 10 + s));
  const PredictiveDensity pred(post);
  const Tensor3 x = compose(random_params(dims, 1, 5));
  for (auto _ : state) benchmark::DoNotOptimize(pred.log_density(x));
}
BENCHMARK(BM_PredictiveDensity)->Arg(300)->Arg(1000);

void BM_MetropolisChain(benchmark::State& state) {
  const ModelSpec spec{{3, 3, 3}, 4, 2, 100};
  const CpParams w0 = draw_true_params(spec, 7);
  const Dataset data = sample_dataset(w0, spec.n, 8);
  McmcConfig config;
  config.total_iters = 2000;
  config.burn_in = 500;
  config.thin = 5;
  config.target_samples = 100;
  config.chains = 1;
  for (auto _ : state) benchmark::DoNotOptimize(run_chain(data, GaussianPrior{1.0}, config, w0, spec.rank));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(config.total_iters));
}
BENCHMARK(BM_MetropolisChain)->Unit(benchmark::kMillisecond);

void BM_RrrRlct(benchmark::State& state) {
  for (auto _ : state) {
    for (std::int64_t h = 0; h <= 60; ++h) benchmark::DoNotOptimize(rrr_rlct(17, 23, h));
  }
}
BENCHMARK(BM_RrrRlct);

}  // namespace

BENCHMARK_MAIN();
