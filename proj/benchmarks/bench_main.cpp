#include <benchmark/benchmark.h>

#include "dztp/convolution.hpp"
#include "dztp/distributions.hpp"
#include "dztp/kernel.hpp"
#include "dztp/verify.hpp"

namespace {

using namespace dztp;

void BM_PmfTable(benchmark::State& state) {
    const DztpDist d(DegeneracyParams(static_cast<double>(state.range(0)), 0.0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(d.table());
    }
}
BENCHMARK(BM_PmfTable)->Arg(1)->Arg(5)->Arg(20);

void BM_Moment(benchmark::State& state) {
    const DztpDist d(DegeneracyParams(2.0, -0.25));
    const int n = static_cast<int>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(d.moment(n));
    }
}
BENCHMARK(BM_Moment)->Arg(2)->Arg(10);

void BM_StirlingTriangle(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(stirling_degenerate(n, -0.1));
    }
}
BENCHMARK(BM_StirlingTriangle)->Arg(20)->Arg(100);

void BM_StirlingAltsum(benchmark::State& state) {
    for (auto _ : state) {
        benchmark::DoNotOptimize(stirling_degenerate_altsum(20, 10, -0.1));
    }
}
BENCHMARK(BM_StirlingAltsum);

void BM_IidSumTable(benchmark::State& state) {
    const IidSumSpec spec(static_cast<int>(state.range(0)), DegeneracyParams(2.0, -0.1));
    for (auto _ : state) {
        benchmark::DoNotOptimize(iid_sum_table(spec));
    }
}
BENCHMARK(BM_IidSumTable)->Arg(2)->Arg(5);

void BM_IidSumConvolution(benchmark::State& state) {
    const IidSumSpec spec(static_cast<int>(state.range(0)), DegeneracyParams(2.0, -0.1));
    for (auto _ : state) {
        benchmark::DoNotOptimize(iid_sum_convolution_table(spec));
    }
}
BENCHMARK(BM_IidSumConvolution)->Arg(2)->Arg(5);

void BM_HeteroEnumeration(benchmark::State& state) {
    const HeteroSumSpec spec(0.0, {0.5, 1.0, 2.0, 5.0});
    for (auto _ : state) {
        benchmark::DoNotOptimize(hetero_sum_pmf(spec, 15, HeteroMethod::enumeration));
    }
}
BENCHMARK(BM_HeteroEnumeration);

void BM_BellDegenerate(benchmark::State& state) {
    for (auto _ : state) {
        benchmark::DoNotOptimize(bell_degenerate(10, 2.0, -0.1));
    }
}
BENCHMARK(BM_BellDegenerate);

void BM_Sample(benchmark::State& state) {
    SampleStream stream(42, DegeneracyParams(static_cast<double>(state.range(0)), 0.0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(stream.next());
    }
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_Sample)->Arg(1)->Arg(20);

void BM_VerifySmallGrid(benchmark::State& state) {
    verify::GridSpec g;
    g.alphas = {1.0, 2.0};
    g.lambdas = {0.0, 0.5};
    g.n_max = 10;
    g.k_max = 2;
    g.mc_samples = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(verify::run_verification(g));
    }
}
BENCHMARK(BM_VerifySmallGrid)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
