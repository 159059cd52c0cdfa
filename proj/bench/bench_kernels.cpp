#include <benchmark/benchmark.h>

#include "subt/search.hpp"

using namespace subt;

namespace {

PartialFn sample_f() {
  std::map<Nat, Nat> m;
  for (unsigned n = 0; n < 16; n += 2) m[n] = n % 5;
  return PartialFn::table(std::move(m));
}

const Budget kBudget(2000, 16, 10'000);

void BM_search_serial(benchmark::State& st) {
  auto f = sample_f();
  auto D = range_domain(0, 16);
  for (auto _ : st) benchmark::DoNotOptimize(search_reduction_serial(f, f, st.range(0), D, kBudget));
}

void BM_search_openmp(benchmark::State& st) {
  auto f = sample_f();
  auto D = range_domain(0, 16);
  for (auto _ : st) benchmark::DoNotOptimize(search_reduction(f, f, st.range(0), D, kBudget));
}

// echo over f: halts exactly on dom(f)
void BM_ce_serial(benchmark::State& st) {
  auto f = sample_f();
  auto e = encode(echo_program());
  for (auto _ : st) benchmark::DoNotOptimize(ce_enumerate_serial(e, f, st.range(0), kBudget));
}

void BM_ce_openmp(benchmark::State& st) {
  auto f = sample_f();
  auto e = encode(echo_program());
  for (auto _ : st) benchmark::DoNotOptimize(ce_enumerate(e, f, st.range(0), kBudget));
}

}  // namespace

BENCHMARK(BM_search_serial)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_search_openmp)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ce_serial)->Arg(256)->Arg(2048)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ce_openmp)->Arg(256)->Arg(2048)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
