#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "ksol/pipeline.hpp"

namespace {

std::vector<double> random_list(int n) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> d(-2.0, 2.0);
    std::vector<double> v(static_cast<std::size_t>(n));
    for (auto& x : v) x = d(rng);
    return v;
}

void SigmaRecurrence(benchmark::State& state) {
    const auto v = random_list(static_cast<int>(state.range(0)));
    const int k = static_cast<int>(state.range(0)) / 2;
    for (auto _ : state) benchmark::DoNotOptimize(ksol::sigma_k(v, k));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(SigmaRecurrence)->RangeMultiplier(2)->Range(4, 64)->Complexity();

void SigmaSubsets(benchmark::State& state) {
    const auto v = random_list(static_cast<int>(state.range(0)));
    const int k = static_cast<int>(state.range(0)) / 2;
    for (auto _ : state) benchmark::DoNotOptimize(ksol::sigma_k_by_subsets(v, k));
}
BENCHMARK(SigmaSubsets)->DenseRange(4, 16, 4);

void Picard(benchmark::State& state) {
    const auto p = ksol::make_params(5, 2, 1.0, 1.0);
    ksol::PicardOptions opts;
    opts.grid_points = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(ksol::picard_solve(1.0, p, opts));
}
BENCHMARK(Picard)->Arg(257)->Arg(513)->Arg(1025)->Arg(2049)->Arg(4097)->Unit(benchmark::kMillisecond);

void Integrate(benchmark::State& state) {
    const auto p = ksol::make_params(4, 1, static_cast<double>(state.range(0)), 1.0);
    const auto local = ksol::picard_solve(1.0, p);
    for (auto _ : state) benchmark::DoNotOptimize(ksol::integrate(local, p));
}
BENCHMARK(Integrate)->Arg(-1)->Arg(0)->Arg(1)->Arg(5)->Unit(benchmark::kMillisecond);

void Pipeline(benchmark::State& state) {
    const auto p = ksol::make_params(4, 2, 1.0, 1.0);
    for (auto _ : state) {
        auto run = ksol::solve_soliton(p, 1.0);
        benchmark::DoNotOptimize(ksol::elliptic_residual(run.table, p));
    }
}
BENCHMARK(Pipeline)->Unit(benchmark::kMillisecond);

}  // namespace

int main(int argc, char** argv) {
    benchmark::Initialize(&argc, argv);
    if (benchmark::ReportUnrecognizedArguments(argc, argv)) return 1;
    benchmark::RunSpecifiedBenchmarks();
    benchmark::Shutdown();
    return 0;
}
