#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace qrng {

/// splitmix64 finalizer. Used for seed derivation and generator seeding so
/// that nearby seeds land far apart in state space.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

/// Roles for the documented seed-splitting rule: every random component of a
/// scene draws from its own sub-generator so it is independently reproducible.
enum class SeedRole : std::uint64_t {
    Emission = 1,  ///< per-emitter emission-time stream
    Routing = 2,   ///< per-emitter branch/split/efficiency/jitter draws
    Dark = 3,      ///< per-detector dark-count stream
};

/// Sub-seed derivation: mix64(mix64(master ^ role*C1) ^ index*C2) with the
/// multiplier constants below. This is the normative splitting rule for all
/// file-format-reproducible streams.
constexpr std::uint64_t derive_seed(std::uint64_t master, SeedRole role,
                                    std::uint64_t index) noexcept {
    const std::uint64_t h =
        mix64(master ^ (static_cast<std::uint64_t>(role) * 0xA24BAED4963EE407ull));
    return mix64(h ^ (index * 0x9FB21C651E98DF25ull));
}

/// xoshiro256++ with explicit, libm-only variate transforms. The standard
/// <random> distributions are implementation-defined, which would break the
/// byte-identical reproducibility contract; everything here is pinned.
class Xoshiro256pp {
public:
    explicit Xoshiro256pp(std::uint64_t seed) noexcept {
        std::uint64_t s = seed;
        for (auto& word : state_) {
            word = mix64(s);
            s = word;
        }
    }

    std::uint64_t next() noexcept {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// Uniform double in [0, 1), 53 random bits.
    double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Uniform double in (0, 1], safe as a log() argument.
    double uniform_pos() noexcept {
        return static_cast<double>((next() >> 11) + 1) * 0x1.0p-53;
    }

    bool bernoulli(double p) noexcept { return uniform() < p; }

    /// Exponential waiting time with the given rate (mean 1/rate).
    double exponential(double rate) noexcept { return -std::log(uniform_pos()) / rate; }

    /// Standard normal via Box-Muller. Uses two uniforms per draw; no cached
    /// second value, so the draw count per event is fixed.
    double gaussian() noexcept {
        const double u1 = uniform_pos();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
    }

private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
        return (x << k) | (x >> (64 - k));
    }

    std::array<std::uint64_t, 4> state_{};
};

}  // namespace qrng
