#include <benchmark/benchmark.h>

#include "casq/cascade.hpp"
#include "casq/loss.hpp"
#include "casq/simulate.hpp"

namespace {

void BM_NormalCdf(benchmark::State& state) {
    double x = -8.0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(casq::std_normal_cdf(x));
        x = x < 8.0 ? x + 1e-3 : -8.0;
    }
}
BENCHMARK(BM_NormalCdf);

void BM_NormalQuantile(benchmark::State& state) {
    double p = 1e-9;
    for (auto _ : state) {
        benchmark::DoNotOptimize(casq::std_normal_quantile(p));
        p = p < 0.999999 ? p + 1e-4 : 1e-9;
    }
}
BENCHMARK(BM_NormalQuantile);

void BM_RunOrbit(benchmark::State& state) {
    for (auto _ : state)
        benchmark::DoNotOptimize(casq::run_orbit(-1.8, 1.0, 1e-12, 100000));
}
BENCHMARK(BM_RunOrbit);

void BM_FixedPointsMulti(benchmark::State& state) {
    for (auto _ : state)
        benchmark::DoNotOptimize(casq::fixed_points(-2.0, 4.0, 1e-12));
}
BENCHMARK(BM_FixedPointsMulti);

void BM_TotalLossPdf(benchmark::State& state) {
    const casq::DistributionSpec spec{0.05, 0.2, 4.0, casq::Wave::infinity()};
    double x = 0.01;
    for (auto _ : state) {
        benchmark::DoNotOptimize(casq::loss_pdf(x, spec));
        x = x < 0.99 ? x + 1e-3 : 0.01;
    }
}
BENCHMARK(BM_TotalLossPdf);

void BM_InverseWaveMap(benchmark::State& state) {
    const int k = static_cast<int>(state.range(0));
    for (auto _ : state)
        benchmark::DoNotOptimize(casq::h_k(-1.0, 4.0, k, 1e-12));
}
BENCHMARK(BM_InverseWaveMap)->Arg(2)->Arg(5)->Arg(20);

void BM_Trial(benchmark::State& state) {
    casq::NetworkConfig config;
    config.n = static_cast<std::size_t>(state.range(0));
    config.trials = 1;
    config.sigma = 0.25;
    config.rho = 0.2;
    config.a = 0.22;
    config.balance = casq::balance_for_q(0.05, 0.0, 0.25);
    std::uint64_t trial = 0;
    for (auto _ : state)
        benchmark::DoNotOptimize(casq::run_trial(config, trial++));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Trial)->Arg(1000)->Arg(10000)->Arg(100000);

}  // namespace

BENCHMARK_MAIN();
