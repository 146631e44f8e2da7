#include <benchmark/benchmark.h>

#include "vcir/estimate.hpp"
#include "vcir/simulate.hpp"
#include "vcir/special.hpp"
#include "vcir/volterra.hpp"

using namespace vcir;

namespace {
const ModelParams kParams{1.0, 1.2, -1.0, 0.6};
}

static void BM_ResolventBuild(benchmark::State& state) {
    const auto k = KernelSpec::fractional(0.8);
    const auto n = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) {
        auto table = resolvent_second_kind(k, -1.0, 1e-3, n);
        benchmark::DoNotOptimize(table.cum_int.back());
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_ResolventBuild)->Range(1000, 16000)->Complexity(benchmark::oNSquared)->Unit(benchmark::kMillisecond);

static void BM_RiccatiSolve(benchmark::State& state) {
    const auto k = KernelSpec::fractional(0.8);
    AtomicMeasure mu;
    mu.atoms.push_back({0.0, 1.0});
    const auto n = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) {
        auto v = riccati_solve(k, kParams, mu, 1e-3, n);
        benchmark::DoNotOptimize(v.back());
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_RiccatiSolve)->Range(1000, 16000)->Complexity(benchmark::oNSquared)->Unit(benchmark::kMillisecond);

static void BM_EulerPath(benchmark::State& state) {
    const auto k = KernelSpec::fractional(0.95);
    const auto n = static_cast<std::size_t>(state.range(0));
    const Grid g{10.0 / static_cast<double>(n), n};
    std::uint64_t seed = 0;
    for (auto _ : state) {
        auto path = simulate_path(kParams, k, g, seed++, 0);
        benchmark::DoNotOptimize(path.values.back());
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_EulerPath)->Range(1000, 10000)->Complexity(benchmark::oNSquared)->Unit(benchmark::kMillisecond);

static void BM_ZProcess(benchmark::State& state) {
    const auto k = KernelSpec::fractional(0.95);
    const auto n = static_cast<std::size_t>(state.range(0));
    const Grid g{10.0 / static_cast<double>(n), n};
    const auto path = simulate_path(kParams, k, g, 1, 0);
    const auto masses = first_kind_cell_masses(k, g.step, n);
    for (auto _ : state) {
        auto z = z_process(path, k, n, masses);
        benchmark::DoNotOptimize(z.back());
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_ZProcess)->Range(1000, 10000)->Complexity(benchmark::oNSquared)->Unit(benchmark::kMillisecond);

static void BM_MittagLefflerTaylor(benchmark::State& state) {
    double z = -0.1;
    for (auto _ : state) {
        benchmark::DoNotOptimize(mittag_leffler(0.8, 0.8, z));
        z = z <= -4.9 ? -0.1 : z - 0.1;
    }
}
BENCHMARK(BM_MittagLefflerTaylor);

static void BM_MittagLefflerIntegral(benchmark::State& state) {
    double z = -6.0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(mittag_leffler(0.8, 0.8, z));
        z = z < -100.0 ? -6.0 : z * 1.1;
    }
}
BENCHMARK(BM_MittagLefflerIntegral);

static void BM_JointMLE(benchmark::State& state) {
    const auto k = KernelSpec::fractional(0.95);
    const Grid g{0.05, 2000};
    const auto path = simulate_path(kParams, k, g, 3, 0);
    const auto obs = ObservationSet::from_path(path, 0.05, 1.0, kParams.sigma);
    for (auto _ : state) {
        auto rep = mle_joint(obs);
        benchmark::DoNotOptimize(rep.b_hat);
    }
}
BENCHMARK(BM_JointMLE);

BENCHMARK_MAIN();
