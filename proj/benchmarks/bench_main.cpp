#include <benchmark/benchmark.h>

#include <numeric>
#include <vector>

#include "svytree/design.hpp"
#include "svytree/simlab.hpp"
#include "svytree/tree.hpp"

using namespace svytree;

namespace {

ObservedDataset sample_of(std::size_t n) {
  GeneratorSpec spec;
  spec.N = 4 * n;
  const auto pop = synth_population(spec, 17);
  return take_sample(pop, draw_pps_sample(PpsDesign{pop.z, n}, 18));
}

void BM_FitTree(benchmark::State& state) {
  const auto data = sample_of(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(fit_tree(data, FitConfig{}));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_FitTree)->RangeMultiplier(4)->Range(100, 6400)->Complexity();

void BM_BestMseSplit(benchmark::State& state) {
  const auto data = sample_of(static_cast<std::size_t>(state.range(0)));
  std::vector<std::size_t> members(data.size());
  std::iota(members.begin(), members.end(), std::size_t{0});
  for (auto _ : state) benchmark::DoNotOptimize(best_mse_split(members, data, 10));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_BestMseSplit)->RangeMultiplier(4)->Range(100, 25600)->Complexity();

void BM_PpsDraw(benchmark::State& state) {
  GeneratorSpec spec;
  spec.N = static_cast<std::size_t>(state.range(0));
  const auto pop = synth_population(spec, 19);
  const auto pi = pps_inclusion_probs(pop.z, spec.N / 10);
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(draw_pps_sample(pi, ++seed));
}
BENCHMARK(BM_PpsDraw)->RangeMultiplier(10)->Range(1000, 100000);

void BM_InclusionProbs(benchmark::State& state) {
  GeneratorSpec spec;
  spec.N = static_cast<std::size_t>(state.range(0));
  const auto pop = synth_population(spec, 20);
  for (auto _ : state) benchmark::DoNotOptimize(pps_inclusion_probs(pop.z, spec.N / 2));
}
BENCHMARK(BM_InclusionProbs)->RangeMultiplier(10)->Range(1000, 100000);

}  // namespace
BENCHMARK_MAIN();
