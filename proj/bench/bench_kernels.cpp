#include <benchmark/benchmark.h>
#include <omp.h>

#include "tokmerge/analysis.hpp"
#include "tokmerge/baselines.hpp"
#include "tokmerge/kernels.hpp"
#include "tokmerge/matching.hpp"

namespace {

using namespace tokmerge;

constexpr std::size_t kDim = 64;

TokenMatrix keys_for(const benchmark::State& state) {
  return synthetic_tokens({static_cast<std::size_t>(state.range(0)), kDim, 1});
}

void BM_SimilaritySerial(benchmark::State& state) {
  const auto keys = keys_for(state);
  for (auto _ : state) benchmark::DoNotOptimize(reference::cosine_similarity_matrix(keys));
  state.SetComplexityN(state.range(0));
}

void BM_SimilarityParallel(benchmark::State& state) {
  const auto keys = keys_for(state);
  for (auto _ : state) benchmark::DoNotOptimize(cosine_similarity_matrix(keys));
  state.SetComplexityN(state.range(0));
  state.counters["threads"] = omp_get_max_threads();
}

void BM_MaximaSerial(benchmark::State& state) {
  const auto d = cosine_similarity_matrix(keys_for(state));
  for (auto _ : state) benchmark::DoNotOptimize(reference::similarity_maxima(d));
}

void BM_MaximaParallel(benchmark::State& state) {
  const auto d = cosine_similarity_matrix(keys_for(state));
  for (auto _ : state) benchmark::DoNotOptimize(similarity_maxima(d));
}

void BM_CompleteGraphMatch(benchmark::State& state) {
  const auto keys = keys_for(state);
  const std::size_t r = keys.n_tokens() / 4;
  for (auto _ : state) benchmark::DoNotOptimize(complete_graph_match(cosine_similarity_matrix(keys), r));
  state.SetComplexityN(state.range(0));
}

void BM_BipartiteMatch(benchmark::State& state) {
  const auto keys = keys_for(state);
  const std::size_t r = keys.n_tokens() / 4;
  for (auto _ : state) benchmark::DoNotOptimize(bipartite_soft_match(cosine_similarity_matrix(keys), r));
  state.SetComplexityN(state.range(0));
}

void BM_MonteCarloSerial(benchmark::State& state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(reference::simulate_optimal_match_rate(197, 12, 16, state.range(0), 1,
                                                                     SimulationMethod::CompleteGraph));
  }
}

void BM_MonteCarloParallel(benchmark::State& state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        simulate_optimal_match_rate(197, 12, 16, state.range(0), 1, SimulationMethod::CompleteGraph));
  }
}

BENCHMARK(BM_SimilaritySerial)->RangeMultiplier(2)->Range(64, 1024)->Complexity();
BENCHMARK(BM_SimilarityParallel)->RangeMultiplier(2)->Range(64, 1024)->Complexity();
BENCHMARK(BM_MaximaSerial)->Arg(197)->Arg(1024);
BENCHMARK(BM_MaximaParallel)->Arg(197)->Arg(1024);
BENCHMARK(BM_CompleteGraphMatch)->RangeMultiplier(2)->Range(64, 1024)->Complexity();
BENCHMARK(BM_BipartiteMatch)->RangeMultiplier(2)->Range(64, 1024)->Complexity();
BENCHMARK(BM_MonteCarloSerial)->Arg(10000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MonteCarloParallel)->Arg(10000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
