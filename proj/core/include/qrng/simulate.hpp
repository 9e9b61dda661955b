#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "qrng/prng.hpp"
#include "qrng/scene.hpp"
#include "qrng/timetag.hpp"

namespace qrng {

/// Iterator-style renewal-process source: each emission is one exponential
/// pump wait plus one exponential decay wait after the previous emission.
/// Streams emissions without materializing them.
class EmissionGenerator {
public:
    EmissionGenerator(const EmitterParams& params, std::uint64_t seed)
        : rng_(seed), pump_rate_(params.pump_rate_per_ns),
          decay_rate_(1.0 / params.lifetime_ns) {}

    /// Time of the next emission in ns; strictly increasing (a gap smaller
    /// than one ulp of the running time is bumped to the next double).
    double next() {
        const double prev = t_;
        t_ += rng_.exponential(pump_rate_) + rng_.exponential(decay_rate_);
        if (t_ <= prev) t_ = std::nextafter(prev, std::numeric_limits<double>::infinity());
        return t_;
    }

private:
    Xoshiro256pp rng_;
    double pump_rate_;
    double decay_rate_;
    double t_ = 0.0;
};

/// Emission times of one emitter over [0, duration_ns), in ns, strictly
/// increasing. Identical (params, seed) give identical output.
std::vector<double> simulate_emissions(const EmitterParams& params, double duration_ns,
                                       std::uint64_t seed);

/// Route pre-computed emission lists (one per scene emitter) through the
/// branching/detection chain: collection weight, R/T branch, reflection HBT
/// split, detector efficiency, Gaussian jitter, picosecond quantization,
/// per-detector dead-time filtering, superposed dark counts, sorted merge.
std::vector<TimeTag> branch_and_detect(const std::vector<std::vector<double>>& emissions,
                                       const SceneConfig& scene);

/// Full scene simulation; equals branch_and_detect over simulate_emissions
/// outputs with the scene's derived sub-seeds, but never materializes the
/// emission lists.
std::vector<TimeTag> simulate_scene(const SceneConfig& scene);

/// Zero-delay second-order coherence of a sum of independent ideal
/// single-photon emitters with relative intensity weights, plus a flat
/// uncorrelated background fraction: 1 - sum_i p_i^2 over the emitter shares
/// p_i = (1 - background) * w_i / sum(w).
double expected_g2_zero(const std::vector<double>& weights, double background_fraction);

}  // namespace qrng
