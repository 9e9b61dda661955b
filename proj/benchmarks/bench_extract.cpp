#include <benchmark/benchmark.h>

#include "qrng/bitstream.hpp"
#include "qrng/extract.hpp"
#include "qrng/prng.hpp"

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

void BM_DebiasStage1(benchmark::State& state) {
    const auto bits = random_bits(static_cast<std::size_t>(state.range(0)), 7);
    for (auto _ : state) {
        auto out = qrng::debias_stage1(bits);
        benchmark::DoNotOptimize(out);
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_DebiasStage1)->Arg(1 << 20)->Arg(1 << 24);

void BM_DebiasCascade(benchmark::State& state) {
    const auto bits = random_bits(static_cast<std::size_t>(state.range(0)), 7);
    for (auto _ : state) {
        auto out = qrng::debias_cascade(bits);
        benchmark::DoNotOptimize(out);
    }
    // items/s ~ raw input bits per second through both stages
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_DebiasCascade)->Arg(1 << 20)->Arg(1 << 24);

}  // namespace

BENCHMARK_MAIN();
