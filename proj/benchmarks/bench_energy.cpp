#include <benchmark/benchmark.h>

#include "latvol/energy.hpp"

namespace {

using namespace latvol;

void BM_CoupledAssembly(benchmark::State& state) {
  ProblemConfig c;
  c.N = static_cast<int>(state.range(0));
  c.K = 2;
  const CoupledModel m = build_model(c, CrystalBasis::fcc(), false);
  const LennardJones lj;
  const EnergyEvaluator eval(m, lj, EnergyKind::Coupled);
  Eigen::Matrix3d F = Eigen::Matrix3d::Identity();
  F(0, 1) = 0.01;
  const DeformationState s = uniform_state(m, F);
  eval(s);
  for (auto _ : state) benchmark::DoNotOptimize(eval(s).value);
  state.counters["dofs"] = m.num_dofs();
}
BENCHMARK(BM_CoupledAssembly)->Arg(4)->Arg(6)->Unit(benchmark::kMillisecond);

}  // namespace
