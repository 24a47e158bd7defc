#include <benchmark/benchmark.h>

#include "tubetrace/agent.hpp"
#include "tubetrace/elastica.hpp"
#include "tubetrace/imaging.hpp"
#include "tubetrace/pipeline.hpp"
#include "tubetrace/synthetic.hpp"

using namespace tubetrace;

static void BM_DistanceMap(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const LiftedGrid grid(side, side, 32);
  for (auto _ : state) {
    auto map = distance_map(grid, {side / 2.0, side / 2.0, 0.0}, 1.0);
    benchmark::DoNotOptimize(map.settle_order().size());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(grid.node_count()));
}
BENCHMARK(BM_DistanceMap)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

static void BM_Tubularity(benchmark::State& state) {
  const RasterImage img = synthetic::sine_tube(0).image;
  const ImagingParams params;
  for (auto _ : state) benchmark::DoNotOptimize(tubularity(img, params.scales, params.bright_on_dark));
}
BENCHMARK(BM_Tubularity)->Unit(benchmark::kMillisecond);

static void BM_TrainDense(benchmark::State& state) {
  const auto layout = synthetic::dense_layout(0);
  TraceConfig cfg;
  for (auto _ : state) {
    auto r = trace_segments(layout.segments, layout.extent, layout.start, layout.end, cfg);
    benchmark::DoNotOptimize(r.path.size());
  }
}
BENCHMARK(BM_TrainDense)->Unit(benchmark::kMillisecond);

static void BM_StaticDense(benchmark::State& state) {
  const auto layout = synthetic::dense_layout(0);
  TraceConfig cfg;
  for (auto _ : state) {
    auto r = static_dijkstra_trace(layout.segments, layout.extent, layout.start, layout.end, cfg);
    benchmark::DoNotOptimize(r.path.size());
  }
}
BENCHMARK(BM_StaticDense)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
