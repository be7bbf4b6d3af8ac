#include <benchmark/benchmark.h>

#include <map>

#include "ccws/cohorts.hpp"
#include "ccws/synthetic.hpp"

namespace {

const ccws::Dataset& dataset_of(std::size_t n) {
  static std::map<std::size_t, ccws::Dataset> cache;
  auto it = cache.find(n);
  if (it == cache.end()) {
    ccws::SyntheticConfig cfg;
    cfg.n = n;
    it = cache.emplace(n, ccws::generate_synthetic(cfg).dataset).first;
  }
  return it->second;
}

void BM_BuildCcws(benchmark::State& state) {
  const auto& ds = dataset_of(static_cast<std::size_t>(state.range(0)));
  ccws::CcwsParams params;
  params.max_iterations = 200;
  std::size_t cohorts = 0;
  for (auto _ : state) cohorts = ccws::build_ccws(ds, params).cohorts.size();
  state.counters["cohorts"] = static_cast<double>(cohorts);
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_BuildCcws)->RangeMultiplier(2)->Range(10000, 80000)->Unit(benchmark::kMillisecond);

void BM_BuildHashAndSort(benchmark::State& state) {
  const auto& ds = dataset_of(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(ccws::build_hash_and_sort(ds, {ccws::HashFamily::kCws, 1.0}, 75, 20, 42));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_BuildHashAndSort)->RangeMultiplier(2)->Range(10000, 40000)->Unit(benchmark::kMillisecond);

void BM_BuildRandom(benchmark::State& state) {
  const auto& ds = dataset_of(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(ccws::build_random(ds, 20, 42));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_BuildRandom)->RangeMultiplier(2)->Range(10000, 40000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
