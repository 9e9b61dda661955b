#include <benchmark/benchmark.h>

#include "qrng/g2.hpp"
#include "qrng/scene.hpp"
#include "qrng/simulate.hpp"
#include "qrng/timetag.hpp"

namespace {

void BM_SimulateScene(benchmark::State& state) {
    qrng::SceneConfig scene = qrng::default_scene();
    scene.duration_ns = static_cast<double>(state.range(0));
    scene.seed = 5;
    scene.has_seed = true;
    std::size_t tags = 0;
    for (auto _ : state) {
        auto out = qrng::simulate_scene(scene);
        tags = out.size();
        benchmark::DoNotOptimize(out);
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(tags));
}
BENCHMARK(BM_SimulateScene)->Arg(1000000)->Arg(10000000)->Unit(benchmark::kMillisecond);

void BM_Histogram(benchmark::State& state) {
    qrng::SceneConfig scene = qrng::default_scene();
    scene.duration_ns = static_cast<double>(state.range(0));
    scene.seed = 5;
    scene.has_seed = true;
    const auto tags = qrng::simulate_scene(scene);
    const auto r1 = qrng::select_channel(tags, qrng::Detector::R1);
    const auto r2 = qrng::select_channel(tags, qrng::Detector::R2);
    for (auto _ : state) {
        auto curve = qrng::histogram_coincidences(r1, r2, 0.77 / 8.0, 12 * 0.77);
        benchmark::DoNotOptimize(curve);
    }
    state.SetItemsProcessed(state.iterations() *
                            static_cast<std::int64_t>(r1.size() + r2.size()));
}
BENCHMARK(BM_Histogram)->Arg(10000000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
