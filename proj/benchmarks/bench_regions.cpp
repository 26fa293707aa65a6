#include <benchmark/benchmark.h>

#include "sarstv/io.hpp"
#include "sarstv/reconstruct.hpp"
#include "sarstv/reduce.hpp"
#include "sarstv/regions.hpp"

using namespace sarstv;

namespace {

SynthScene scene(int side, int bands) { return synth_cube(stripe_layout(side, side, 4), bands, 0.05, 1); }

void BM_ComputeRegions(benchmark::State& state) {
    const int side = static_cast<int>(state.range(0));
    const auto s = scene(side, 20);
    const auto guide = first_principal_component(s.cube);
    for (auto _ : state) benchmark::DoNotOptimize(compute_regions(guide, IciConfig{}));
    state.SetItemsProcessed(state.iterations() * side * side);
}
BENCHMARK(BM_ComputeRegions)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_ReconstructCube(benchmark::State& state) {
    const int side = static_cast<int>(state.range(0));
    const auto s = scene(side, 50);
    const auto regions = compute_regions(first_principal_component(s.cube), IciConfig{});
    for (auto _ : state) benchmark::DoNotOptimize(reconstruct_cube(s.cube, regions));
    state.SetItemsProcessed(state.iterations() * side * side);
}
BENCHMARK(BM_ReconstructCube)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_FitPca(benchmark::State& state) {
    const auto s = scene(64, static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(fit_pca(s.cube, 0.999));
}
BENCHMARK(BM_FitPca)->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);

}  // namespace
