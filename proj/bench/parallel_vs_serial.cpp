// Serial reference kernels against their OpenMP counterparts. Each pair
// computes identical output; the benchmark reports wall time per call.

#include <benchmark/benchmark.h>

#include <vector>

#include "pbil/experiments.hpp"
#include "pbil/properties.hpp"

using namespace pbil;

namespace {

experiments::SweepSpec sweep_spec()
{
    experiments::SweepSpec s;
    s.problem = Problem::LeadingOnes;
    s.n_values = {64, 128};
    s.lambda_rule = experiments::LambdaRule::parse("6*ln(n)");
    s.gamma0 = 0.25;
    s.eta = 1.0;
    s.trials = 16;
    s.base_seed = 1;
    return s;
}

void BM_SweepSerial(benchmark::State& state)
{
    const auto spec = sweep_spec();
    for (auto _ : state) {
        benchmark::DoNotOptimize(experiments::run_sweep_serial(spec));
    }
}

void BM_SweepParallel(benchmark::State& state)
{
    const auto spec = sweep_spec();
    for (auto _ : state) {
        benchmark::DoNotOptimize(experiments::run_sweep(spec, static_cast<int>(state.range(0))));
    }
}

const std::vector<double> kEps{0.05, 0.1};

void BM_DkwSerial(benchmark::State& state)
{
    for (auto _ : state) {
        benchmark::DoNotOptimize(properties::dkw_exceedances_serial(0.5, 1000, kEps, 20000, 3));
    }
}

void BM_DkwParallel(benchmark::State& state)
{
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            properties::dkw_exceedances(0.5, 1000, kEps, 20000, 3, static_cast<int>(state.range(0))));
    }
}

void BM_BolandGridSerial(benchmark::State& state)
{
    for (auto _ : state) {
        benchmark::DoNotOptimize(properties::boland_grid_check_serial(7, 20));
    }
}

void BM_BolandGridParallel(benchmark::State& state)
{
    for (auto _ : state) {
        benchmark::DoNotOptimize(properties::boland_grid_check(7, 20, 64, static_cast<int>(state.range(0))));
    }
}

} // namespace

BENCHMARK(BM_SweepSerial)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_SweepParallel)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_DkwSerial)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_DkwParallel)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_BolandGridSerial)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_BolandGridParallel)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
