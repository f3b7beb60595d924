#include <benchmark/benchmark.h>

#include "mlcd/methods.hpp"
#include "mlcd/mlsbm.hpp"
#include "mlcd/spectral.hpp"

using namespace mlcd;

namespace {

MultiLayerGraph strong_graph(int n, int layers) {
  const auto model = scenario_blocks(Scenario::strong, {n, 3, layers, 10.0}, 10.0, 1);
  return sample(model, 2);
}

void BM_TopK(benchmark::State& state) {
  const auto g = strong_graph(static_cast<int>(state.range(0)), 1);
  for (auto _ : state) benchmark::DoNotOptimize(top_k_eigvectors(g.layer(0), 3));
}
BENCHMARK(BM_TopK)->Arg(100)->Arg(300)->Arg(600)->Unit(benchmark::kMillisecond);

void BM_KMeans(benchmark::State& state) {
  const auto g = strong_graph(static_cast<int>(state.range(0)), 1);
  const Matrix u = top_k_eigvectors(g.layer(0), 3).matrix();
  for (auto _ : state) benchmark::DoNotOptimize(kmeans_rows(u, 3, 1));
}
BENCHMARK(BM_KMeans)->Arg(300)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_Method(benchmark::State& state) {
  const auto method = kAllMethods[state.range(0)];
  const auto g = strong_graph(300, 5);
  MethodOptions opts;
  opts.seed = 3;
  state.SetLabel(std::string(method_name(method)));
  for (auto _ : state) benchmark::DoNotOptimize(run_method(method, g.layers(), 3, opts));
}
BENCHMARK(BM_Method)->DenseRange(0, 4)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
