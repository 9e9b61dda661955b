#include <benchmark/benchmark.h>

#include "qrng/bitstream.hpp"
#include "qrng/prng.hpp"
#include "qrng/randtests.hpp"

namespace {

qrng::BitStream random_bits(std::size_t n, std::uint64_t seed) {
    qrng::Xoshiro256pp rng(seed);
    qrng::BitStream bits;
    for (std::size_t i = 0; i < n; i += 64) {
        const std::uint64_t w = rng.next();
        for (int b = 0; b < 64 && i + static_cast<std::size_t>(b) < n; ++b)
            bits.push_back((w >> (63 - b)) & 1);
    }
    return bits;
}

void BM_FullBattery(benchmark::State& state) {
    const auto bits = random_bits(static_cast<std::size_t>(state.range(0)), 3);
    qrng::TestParams params;
    params.parallel = state.range(1) != 0;
    for (auto _ : state) {
        auto report = qrng::run_battery(bits, params);
        benchmark::DoNotOptimize(report);
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_FullBattery)
    ->Args({100000, 0})
    ->Args({1000000, 0})
    ->Args({1000000, 1})
    ->Unit(benchmark::kMillisecond);

void BM_Dft(benchmark::State& state) {
    const auto bits = random_bits(static_cast<std::size_t>(state.range(0)), 3);
    for (auto _ : state) {
        auto r = qrng::test_dft(bits);
        benchmark::DoNotOptimize(r);
    }
}
BENCHMARK(BM_Dft)->Arg(100000)->Arg(1000000)->Unit(benchmark::kMillisecond);

void BM_LinearComplexity(benchmark::State& state) {
    const auto bits = random_bits(static_cast<std::size_t>(state.range(0)), 3);
    for (auto _ : state) {
        auto r = qrng::test_linear_complexity(bits);
        benchmark::DoNotOptimize(r);
    }
}
BENCHMARK(BM_LinearComplexity)->Arg(100000)->Arg(1000000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
