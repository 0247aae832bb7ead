#include <benchmark/benchmark.h>

#include <plbif/bifurcation.hpp>
#include <plbif/cycles.hpp>
#include <plbif/lyapunov.hpp>
#include <plbif/preimage.hpp>
#include <plbif/stability.hpp>

#include <vector>

using namespace plbif;

namespace {

const MapFamily& quadratic() {
  static const MapFamily q = MapFamily::unicritical(2, ParamBox{-2, 2, -2, 2});
  return q;
}

void BM_PullbackTree(benchmark::State& state) {
  const MapInstance f = quadratic().at(Param{Complex(-0.12, 0.75)});
  const int depth = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(pullback_tree(f, Point{2.0}, depth));
  state.SetItemsProcessed(state.iterations() * (int64_t{1} << depth));
}
BENCHMARK(BM_PullbackTree)->DenseRange(8, 14, 2)->Unit(benchmark::kMillisecond);

void BM_Scan(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const GridSpec g = GridSpec::plane(-2, 1, -1.5, 1.5, n, n);
  ScanConfig cfg;
  cfg.depth = 10;
  for (auto _ : state) benchmark::DoNotOptimize(scan(quadratic(), g, cfg));
  state.SetItemsProcessed(state.iterations() * n * n);
}
BENCHMARK(BM_Scan)->Arg(21)->Arg(41)->Unit(benchmark::kMillisecond);

void BM_CycleRoots(benchmark::State& state) {
  const std::vector<Complex> coeffs{Complex(-0.12, 0.75), 0.0, 1.0};
  const int period = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(cycle_roots(coeffs, period));
}
BENCHMARK(BM_CycleRoots)->DenseRange(4, 10, 2)->Unit(benchmark::kMillisecond);

void BM_PsiPn(benchmark::State& state) {
  const MapInstance f = quadratic().at(Param{Complex(-1.0)});
  const AtomCloud cloud = pullback_tree(f, Point{2.0}, 10);
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) {
    double acc = 0.0;
    for (const auto& z : cloud.points()) acc += psi_pn(f, z, n, 1);
    benchmark::DoNotOptimize(acc);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(cloud.size()));
}
BENCHMARK(BM_PsiPn)->Arg(4)->Arg(8)->Unit(benchmark::kMicrosecond);

void BM_Hausdorff(benchmark::State& state) {
  const int depth = static_cast<int>(state.range(0));
  const AtomCloud a = pullback_tree(quadratic().at(Param{Complex(-1.0)}), Point{2.0}, depth);
  const AtomCloud b = pullback_tree(quadratic().at(Param{Complex(-0.98)}), Point{2.0}, depth);
  for (auto _ : state) benchmark::DoNotOptimize(hausdorff(a, b));
}
BENCHMARK(BM_Hausdorff)->Arg(8)->Arg(10)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
