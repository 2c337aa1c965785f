#include <benchmark/benchmark.h>

#include "latvol/bond_volume.hpp"
#include "latvol/exact_sums.hpp"

namespace {

using namespace latvol;

LatticeTet scaled_tet(std::int64_t s) {
  LatticeTet t;
  t.v[0] = {0, 0, 0};
  t.v[1] = {3 * s, -1 * s, 2 * s};
  t.v[2] = {-2 * s, 4 * s, 1 * s};
  t.v[3] = {1 * s, 2 * s, -5 * s};
  return t;
}

// Cost should grow with log(s), not with the number of enclosed sites.
void BM_LenTetra(benchmark::State& state) {
  const LatticeTet t = scaled_tet(state.range(0));
  const IntVec3 r{3, -2, 1};
  for (auto _ : state) benchmark::DoNotOptimize(len_tetra(t, r));
}
BENCHMARK(BM_LenTetra)->RangeMultiplier(10)->Range(1, 100000);

void BM_LenBruteforce(benchmark::State& state) {
  const LatticeTet t = scaled_tet(state.range(0));
  const IntVec3 r{3, -2, 1};
  for (auto _ : state) benchmark::DoNotOptimize(len_bruteforce(t, r, 100'000'000));
}
BENCHMARK(BM_LenBruteforce)->RangeMultiplier(2)->Range(1, 8);

void BM_Sab(benchmark::State& state) {
  // Consecutive Fibonacci numbers give the deepest Euclidean recursion.
  BigInt a = 1, b = 1;
  for (int i = 0; i < state.range(0); ++i) {
    BigInt c = a + b;
    a = b;
    b = c;
  }
  for (auto _ : state) benchmark::DoNotOptimize(s_ab(a, b));
}
BENCHMARK(BM_Sab)->DenseRange(10, 90, 20);

}  // namespace
