#include "qrng/simulate.hpp"

#include <algorithm>
#include <cmath>

#include "qrng/errors.hpp"

namespace qrng {

namespace {

void check_emitter(const EmitterParams& params) {
    if (!(std::isfinite(params.lifetime_ns) && params.lifetime_ns > 0.0))
        throw ConfigError("emitter lifetime_ns must be finite and > 0");
    if (!(std::isfinite(params.pump_rate_per_ns) && params.pump_rate_per_ns > 0.0))
        throw ConfigError("emitter pump_rate_per_ns must be finite and > 0");
    if (!(std::isfinite(params.weight) && params.weight > 0.0))
        throw ConfigError("emitter weight must be finite and > 0");
}

constexpr double kPsPerNs = 1000.0;

std::int64_t to_ps(double t_ns) { return std::llround(t_ns * kPsPerNs); }

/// Per-detector candidate accumulator; dead-time filtering happens after the
/// per-detector merge of signal and dark candidates, mirroring hardware
/// order (discriminator sits after the timing circuit).
struct DetectorBuffer {
    std::vector<std::int64_t> candidates;
};

/// Routes one emitter's emission times into detector candidates. Consumes
/// the routing RNG in a fixed per-photon draw order: collection, branch,
/// HBT split (reflection only), efficiency, then jitter when accepted.
class Router {
public:
    Router(const SceneConfig& scene, double weight, double max_weight, std::uint64_t seed)
        : rng_(seed), scene_(scene), collect_prob_(weight / max_weight) {}

    void route(double t_ns, std::array<DetectorBuffer, 3>& buffers) {
        if (collect_prob_ < 1.0 && !rng_.bernoulli(collect_prob_)) return;
        Detector det;
        if (rng_.bernoulli(scene_.split.prob_transmission())) {
            det = Detector::T1;
        } else {
            det = rng_.bernoulli(scene_.reflection_hbt_split) ? Detector::R1 : Detector::R2;
        }
        const DetectorParams& dp = scene_.detector(det);
        if (!rng_.bernoulli(dp.efficiency)) return;
        double detected_ns = t_ns;
        if (dp.jitter_sigma_ns > 0.0) detected_ns += dp.jitter_sigma_ns * rng_.gaussian();
        if (detected_ns < 0.0) return;  // jitter pushed the event before stream start
        buffers[static_cast<std::size_t>(det)].candidates.push_back(to_ps(detected_ns));
    }

private:
    Xoshiro256pp rng_;
    const SceneConfig& scene_;
    double collect_prob_;
};

std::vector<TimeTag> finalize(std::array<DetectorBuffer, 3>& buffers,
                              const SceneConfig& scene) {
    // dark counts, one independent Poisson process per detector
    for (Detector d : kAllDetectors) {
        const DetectorParams& dp = scene.detector(d);
        if (dp.dark_rate_per_ns <= 0.0) continue;
        Xoshiro256pp rng(derive_seed(scene.seed, SeedRole::Dark,
                                     static_cast<std::uint64_t>(d)));
        double t = 0.0;
        auto& buf = buffers[static_cast<std::size_t>(d)].candidates;
        for (;;) {
            t += rng.exponential(dp.dark_rate_per_ns);
            if (t >= scene.duration_ns) break;
            buf.push_back(to_ps(t));
        }
    }

    // per-detector sort + dead-time filter; gaps must be >= dead time and
    // timestamps strictly increasing even with zero dead time
    std::array<std::vector<std::int64_t>, 3> accepted;
    for (Detector d : kAllDetectors) {
        auto& buf = buffers[static_cast<std::size_t>(d)].candidates;
        std::sort(buf.begin(), buf.end());
        const DetectorParams& dp = scene.detector(d);
        const std::int64_t dead_ps =
            std::max<std::int64_t>(to_ps(dp.dead_time_ns), 1);
        auto& out = accepted[static_cast<std::size_t>(d)];
        out.reserve(buf.size());
        std::int64_t last = std::numeric_limits<std::int64_t>::min();
        for (const std::int64_t ts : buf) {
            if (last != std::numeric_limits<std::int64_t>::min() && ts - last < dead_ps)
                continue;
            out.push_back(ts);
            last = ts;
        }
        buf.clear();
        buf.shrink_to_fit();
    }

    // deterministic three-way merge, ties broken by detector order R1 < R2 < T1
    std::vector<TimeTag> merged;
    merged.reserve(accepted[0].size() + accepted[1].size() + accepted[2].size());
    std::array<std::size_t, 3> pos{0, 0, 0};
    for (;;) {
        int best = -1;
        std::int64_t best_ts = 0;
        for (int d = 0; d < 3; ++d) {
            if (pos[d] >= accepted[d].size()) continue;
            const std::int64_t ts = accepted[d][pos[d]];
            if (best < 0 || ts < best_ts) {
                best = d;
                best_ts = ts;
            }
        }
        if (best < 0) break;
        merged.push_back({best_ts, static_cast<Detector>(best)});
        ++pos[best];
    }
    return merged;
}

}  // namespace

std::vector<double> simulate_emissions(const EmitterParams& params, double duration_ns,
                                       std::uint64_t seed) {
    check_emitter(params);
    if (!(std::isfinite(duration_ns) && duration_ns > 0.0))
        throw ConfigError("duration_ns must be finite and > 0");
    std::vector<double> times;
    times.reserve(static_cast<std::size_t>(duration_ns / params.mean_interval_ns() * 1.1) +
                  16);
    EmissionGenerator gen(params, seed);
    for (;;) {
        const double t = gen.next();
        if (t >= duration_ns) break;
        times.push_back(t);
    }
    return times;
}

std::vector<TimeTag> branch_and_detect(const std::vector<std::vector<double>>& emissions,
                                       const SceneConfig& scene) {
    scene.validate();
    if (emissions.size() != scene.emitters.size())
        throw ConfigError("branch_and_detect: one emission list per scene emitter required");
    double max_weight = 0.0;
    for (const auto& e : scene.emitters) max_weight = std::max(max_weight, e.weight);

    std::array<DetectorBuffer, 3> buffers;
    for (std::size_t i = 0; i < emissions.size(); ++i) {
        Router router(scene, scene.emitters[i].weight, max_weight,
                      derive_seed(scene.seed, SeedRole::Routing, i));
        double last = -1.0;
        for (const double t : emissions[i]) {
            if (t <= last)
                throw ConfigError("branch_and_detect: emission lists must be sorted");
            last = t;
            router.route(t, buffers);
        }
    }
    return finalize(buffers, scene);
}

std::vector<TimeTag> simulate_scene(const SceneConfig& scene) {
    scene.validate();
    double max_weight = 0.0;
    for (const auto& e : scene.emitters) max_weight = std::max(max_weight, e.weight);

    std::array<DetectorBuffer, 3> buffers;
    for (std::size_t i = 0; i < scene.emitters.size(); ++i) {
        EmissionGenerator gen(scene.emitters[i],
                              derive_seed(scene.seed, SeedRole::Emission, i));
        Router router(scene, scene.emitters[i].weight, max_weight,
                      derive_seed(scene.seed, SeedRole::Routing, i));
        for (;;) {
            const double t = gen.next();
            if (t >= scene.duration_ns) break;
            router.route(t, buffers);
        }
    }
    return finalize(buffers, scene);
}

double expected_g2_zero(const std::vector<double>& weights, double background_fraction) {
    if (weights.empty()) throw ConfigError("expected_g2_zero: empty weight list");
    if (!(background_fraction >= 0.0 && background_fraction < 1.0))
        throw ConfigError("expected_g2_zero: background_fraction must be in [0, 1)");
    double sum = 0.0;
    for (const double w : weights) {
        if (!(std::isfinite(w) && w > 0.0))
            throw ConfigError("expected_g2_zero: weights must be > 0");
        sum += w;
    }
    double sum_sq_shares = 0.0;
    for (const double w : weights) {
        const double share = (1.0 - background_fraction) * w / sum;
        sum_sq_shares += share * share;
    }
    return 1.0 - sum_sq_shares;
}

}  // namespace qrng
