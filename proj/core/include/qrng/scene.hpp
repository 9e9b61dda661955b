#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace qrng {

/// Detection channels. R1/R2 are the two halves of the reflection arm
/// (the two-detector split used both for HBT correlation and for bit
/// encoding); T1 is the single transmission-arm detector.
enum class Detector : std::uint8_t { R1 = 0, R2 = 1, T1 = 2 };

inline constexpr std::array<Detector, 3> kAllDetectors{Detector::R1, Detector::R2,
                                                       Detector::T1};

std::string_view detector_name(Detector d);
Detector detector_from_name(std::string_view name);

/// One dipole emitter, modeled as a two-stage renewal process: an exponential
/// re-excitation wait (mean 1/pump_rate_per_ns) followed by an exponential
/// radiative decay wait (mean lifetime_ns). Mean inter-emission interval is
/// 1/pump_rate_per_ns + lifetime_ns.
struct EmitterParams {
    double lifetime_ns = 0.0;
    double pump_rate_per_ns = 0.0;
    /// Relative brightness. Scales the fraction of this emitter's photons
    /// that enter the collection path; only ratios between emitters matter.
    double weight = 1.0;

    double mean_interval_ns() const { return 1.0 / pump_rate_per_ns + lifetime_ns; }
    double emission_rate_per_ns() const { return 1.0 / mean_interval_ns(); }
};

/// Branching probabilities between the two observation channels.
/// prob_transmission is always stored as 1 - prob_reflection.
struct SplitParams {
    double prob_reflection = 0.5;

    double prob_transmission() const { return 1.0 - prob_reflection; }
};

struct DetectorParams {
    double efficiency = 1.0;        ///< detection probability per arriving photon
    double dead_time_ns = 0.0;      ///< minimum spacing between accepted events
    double dark_rate_per_ns = 0.0;  ///< Poisson dark-count rate
    double jitter_sigma_ns = 0.0;   ///< Gaussian timestamp noise
};

struct SceneConfig {
    std::vector<EmitterParams> emitters;
    SplitParams split;
    std::array<DetectorParams, 3> detectors{};  // indexed by Detector
    double reflection_hbt_split = 0.5;  ///< P(reflected photon -> R1)
    double duration_ns = 0.0;
    std::uint64_t seed = 0;
    bool has_seed = false;

    DetectorParams& detector(Detector d) { return detectors[static_cast<std::size_t>(d)]; }
    const DetectorParams& detector(Detector d) const {
        return detectors[static_cast<std::size_t>(d)];
    }

    /// Throws ConfigError on any invariant violation (non-finite or
    /// out-of-range parameters, empty emitter list, missing seed, ...).
    void validate() const;
};

/// Parse the plain-text key-value scene grammar (see README). Throws
/// ConfigError with a line number on unknown keys or malformed values.
SceneConfig parse_scene(std::string_view text);
SceneConfig load_scene_file(const std::filesystem::path& path);
std::string serialize_scene(const SceneConfig& scene);

/// Built-in scenes. None of them carries a seed; callers must set one.
///
/// "default": desk-scale two-emitter scene. Emitter weights solve
/// 1 - p1^2 - p2^2 = 0.47 and rates are high enough that a few-ms run gives
/// well-resolved correlation histograms.
SceneConfig default_scene();
/// "reference-rate": same topology rescaled (pump, efficiency, APD dead time
/// and dark counts) so the total detection rate is ~264,000 events/s, the raw
/// bit rate reported for the reference experiment this models.
SceneConfig reference_rate_scene();
/// "skewed": default scene with reflection_hbt_split = 0.7; produces biased
/// raw bits that must fail the frequency test while debiased output passes.
SceneConfig skewed_scene();

SceneConfig scene_preset(std::string_view name);
std::vector<std::string> scene_preset_names();

}  // namespace qrng
