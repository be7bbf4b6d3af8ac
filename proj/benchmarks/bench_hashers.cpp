#include <benchmark/benchmark.h>

#include <random>

#include "ccws/hashers.hpp"
#include "ccws/synthetic.hpp"

namespace {

ccws::SparseVector random_vector(std::size_t nnz, std::uint64_t d) {
  std::mt19937_64 gen(nnz);
  std::uniform_real_distribution<double> w(0.1, 10.0);
  std::vector<std::pair<ccws::Dim, double>> entries;
  const std::uint64_t stride = d / nnz;
  for (std::size_t i = 0; i < nnz; ++i) entries.emplace_back(static_cast<ccws::Dim>(i * stride), w(gen));
  return ccws::SparseVector::from_pairs(d, entries);
}

void BM_CwsSample(benchmark::State& state) {
  const auto u = random_vector(static_cast<std::size_t>(state.range(0)), 1'000'000);
  std::uint64_t s = 0;
  for (auto _ : state) benchmark::DoNotOptimize(ccws::cws_sample(u, 1.0, s++, 42));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_CwsSample)->RangeMultiplier(4)->Range(4, 1024);

void BM_MinHash(benchmark::State& state) {
  const auto u = random_vector(static_cast<std::size_t>(state.range(0)), 1'000'000);
  std::uint64_t s = 0;
  for (auto _ : state) benchmark::DoNotOptimize(ccws::minhash(u, s++, 42));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_MinHash)->RangeMultiplier(4)->Range(4, 1024);

void BM_SignRp(benchmark::State& state) {
  const auto u = random_vector(static_cast<std::size_t>(state.range(0)), 1'000'000);
  std::uint64_t s = 0;
  for (auto _ : state) benchmark::DoNotOptimize(ccws::signrp(u, s++, 42));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SignRp)->RangeMultiplier(4)->Range(4, 1024);

// Whole-dataset hashing, m = 75, on the default synthetic shape.
void BM_HashDataset(benchmark::State& state) {
  ccws::SyntheticConfig cfg;
  cfg.n = static_cast<std::size_t>(state.range(0));
  const auto ds = ccws::generate_synthetic(cfg).dataset;
  const auto family = static_cast<ccws::HashFamily>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(ccws::hash_dataset(ds, {family, 1.0}, 75, 42));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_HashDataset)
    ->ArgsProduct({{2000, 10000},
                   {static_cast<long>(ccws::HashFamily::kCws), static_cast<long>(ccws::HashFamily::kMinHash),
                    static_cast<long>(ccws::HashFamily::kSignRp)}})
    ->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
