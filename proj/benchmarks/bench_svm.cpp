#include <random>

#include <benchmark/benchmark.h>

#include "sarstv/svm.hpp"

using namespace sarstv;

namespace {

void BM_TrainBinary(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g(0.0, 1.0);
    SampleMatrix x(n, 10);
    std::vector<int> y(n);
    for (int i = 0; i < n; ++i) {
        y[i] = i % 2 ? 1 : -1;
        for (int j = 0; j < 10; ++j) x(i, j) = g(rng) + (j == 0 ? 0.7 * y[i] : 0.0);
    }
    SvmParams p;
    p.nu = 0.3;
    p.gamma = 0.1;
    p.probability = state.range(1) != 0;
    for (auto _ : state) benchmark::DoNotOptimize(train_binary(x, y, p));
}
BENCHMARK(BM_TrainBinary)->Args({100, 0})->Args({400, 0})->Args({100, 1})->Unit(benchmark::kMillisecond);

void BM_CoupleProbabilities(benchmark::State& state) {
    const int k = static_cast<int>(state.range(0));
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(0.05, 0.95);
    Eigen::MatrixXd r = Eigen::MatrixXd::Zero(k, k);
    for (int i = 0; i < k; ++i)
        for (int j = i + 1; j < k; ++j) {
            r(i, j) = u(rng);
            r(j, i) = 1.0 - r(i, j);
        }
    for (auto _ : state) benchmark::DoNotOptimize(couple_probabilities(r));
}
BENCHMARK(BM_CoupleProbabilities)->Arg(9)->Arg(16);

}  // namespace
