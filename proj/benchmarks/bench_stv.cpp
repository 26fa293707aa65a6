#include <random>

#include <benchmark/benchmark.h>

#include "sarstv/stv.hpp"

using namespace sarstv;

namespace {

void BM_StvChannel(benchmark::State& state) {
    const int side = static_cast<int>(state.range(0));
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Plane v(side, side);
    for (double& x : v.values) x = u(rng);
    StvParams p;
    p.beta1 = 0.2;
    p.beta2 = static_cast<double>(state.range(1));
    for (auto _ : state) benchmark::DoNotOptimize(stv_denoise_channel(v, p, FixedMask::none(side, side)));
    state.SetItemsProcessed(state.iterations() * side * side);
}
BENCHMARK(BM_StvChannel)->Args({64, 1})->Args({145, 4})->Unit(benchmark::kMillisecond);

}  // namespace
