#include "qrng/scene.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include "qrng/errors.hpp"

namespace qrng {

namespace {

bool finite_positive(double v) { return std::isfinite(v) && v > 0.0; }
bool finite_nonnegative(double v) { return std::isfinite(v) && v >= 0.0; }

[[noreturn]] void fail(const std::string& msg) { throw ConfigError("scene: " + msg); }

}  // namespace

std::string_view detector_name(Detector d) {
    switch (d) {
        case Detector::R1: return "R1";
        case Detector::R2: return "R2";
        case Detector::T1: return "T1";
    }
    fail("unknown detector id");
}

Detector detector_from_name(std::string_view name) {
    if (name == "R1") return Detector::R1;
    if (name == "R2") return Detector::R2;
    if (name == "T1") return Detector::T1;
    throw ConfigError("unknown detector name '" + std::string(name) +
                      "' (expected R1, R2 or T1)");
}

void SceneConfig::validate() const {
    if (emitters.empty()) fail("at least one emitter is required");
    for (std::size_t i = 0; i < emitters.size(); ++i) {
        const auto& e = emitters[i];
        const std::string tag = "emitter." + std::to_string(i + 1) + ": ";
        if (!finite_positive(e.lifetime_ns)) fail(tag + "lifetime_ns must be > 0");
        if (!finite_positive(e.pump_rate_per_ns)) fail(tag + "pump_rate_per_ns must be > 0");
        if (!finite_positive(e.weight)) fail(tag + "weight must be > 0");
    }
    if (!(std::isfinite(split.prob_reflection) && split.prob_reflection >= 0.0 &&
          split.prob_reflection <= 1.0))
        fail("prob_reflection must be in [0, 1]");
    if (!(std::isfinite(reflection_hbt_split) && reflection_hbt_split >= 0.0 &&
          reflection_hbt_split <= 1.0))
        fail("reflection_hbt_split must be in [0, 1]");
    for (Detector d : kAllDetectors) {
        const auto& p = detector(d);
        const std::string tag = "detector." + std::string(detector_name(d)) + ": ";
        if (!(std::isfinite(p.efficiency) && p.efficiency >= 0.0 && p.efficiency <= 1.0))
            fail(tag + "efficiency must be in [0, 1]");
        if (!finite_nonnegative(p.dead_time_ns)) fail(tag + "dead_time_ns must be >= 0");
        if (!finite_nonnegative(p.dark_rate_per_ns))
            fail(tag + "dark_rate_per_ns must be >= 0");
        if (!finite_nonnegative(p.jitter_sigma_ns))
            fail(tag + "jitter_sigma_ns must be >= 0");
    }
    if (!finite_positive(duration_ns)) fail("duration_ns must be > 0");
    if (!has_seed) fail("seed is required (set it in the scene file or pass --seed)");
}

namespace {

double parse_double(const std::string& value, int line) {
    char* end = nullptr;
    const double v = std::strtod(value.c_str(), &end);
    if (end == value.c_str() || *end != '\0')
        throw ConfigError("scene line " + std::to_string(line) + ": bad number '" + value +
                          "'");
    return v;
}

std::uint64_t parse_u64(const std::string& value, int line) {
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
    if (ec != std::errc() || ptr != value.data() + value.size())
        throw ConfigError("scene line " + std::to_string(line) + ": bad seed '" + value +
                          "'");
    return v;
}

std::string trim(std::string_view s) {
    const auto a = s.find_first_not_of(" \t\r");
    const auto b = s.find_last_not_of(" \t\r");
    if (a == std::string_view::npos) return {};
    return std::string(s.substr(a, b - a + 1));
}

}  // namespace

SceneConfig parse_scene(std::string_view text) {
    SceneConfig scene;
    std::map<std::size_t, EmitterParams> emitters;
    bool have_t = false;
    double prob_t = 0.0;

    std::istringstream in{std::string(text)};
    std::string raw_line;
    int line = 0;
    while (std::getline(in, raw_line)) {
        ++line;
        std::string stripped = raw_line.substr(0, raw_line.find('#'));
        stripped = trim(stripped);
        if (stripped.empty()) continue;
        const auto eq = stripped.find('=');
        if (eq == std::string::npos)
            throw ConfigError("scene line " + std::to_string(line) +
                              ": expected 'key = value'");
        const std::string key = trim(std::string_view(stripped).substr(0, eq));
        const std::string value = trim(std::string_view(stripped).substr(eq + 1));
        if (key.empty() || value.empty())
            throw ConfigError("scene line " + std::to_string(line) +
                              ": expected 'key = value'");

        if (key == "seed") {
            scene.seed = parse_u64(value, line);
            scene.has_seed = true;
        } else if (key == "duration_ns") {
            scene.duration_ns = parse_double(value, line);
        } else if (key == "prob_reflection") {
            scene.split.prob_reflection = parse_double(value, line);
        } else if (key == "prob_transmission") {
            prob_t = parse_double(value, line);
            have_t = true;
        } else if (key == "reflection_hbt_split") {
            scene.reflection_hbt_split = parse_double(value, line);
        } else if (key.starts_with("emitter.")) {
            const auto rest = key.substr(8);
            const auto dot = rest.find('.');
            if (dot == std::string::npos)
                throw ConfigError("scene line " + std::to_string(line) + ": bad key '" +
                                  key + "'");
            const std::size_t index = std::strtoull(rest.substr(0, dot).c_str(), nullptr, 10);
            if (index == 0)
                throw ConfigError("scene line " + std::to_string(line) +
                                  ": emitter indices are 1-based");
            const std::string field = rest.substr(dot + 1);
            auto& e = emitters[index];
            if (field == "lifetime_ns") e.lifetime_ns = parse_double(value, line);
            else if (field == "pump_rate_per_ns") e.pump_rate_per_ns = parse_double(value, line);
            else if (field == "weight") e.weight = parse_double(value, line);
            else
                throw ConfigError("scene line " + std::to_string(line) +
                                  ": unknown emitter field '" + field + "'");
        } else if (key.starts_with("detector.")) {
            const auto rest = key.substr(9);
            const auto dot = rest.find('.');
            if (dot == std::string::npos)
                throw ConfigError("scene line " + std::to_string(line) + ": bad key '" +
                                  key + "'");
            const Detector d = detector_from_name(rest.substr(0, dot));
            const std::string field = rest.substr(dot + 1);
            auto& p = scene.detector(d);
            if (field == "efficiency") p.efficiency = parse_double(value, line);
            else if (field == "dead_time_ns") p.dead_time_ns = parse_double(value, line);
            else if (field == "dark_rate_per_ns") p.dark_rate_per_ns = parse_double(value, line);
            else if (field == "jitter_sigma_ns") p.jitter_sigma_ns = parse_double(value, line);
            else
                throw ConfigError("scene line " + std::to_string(line) +
                                  ": unknown detector field '" + field + "'");
        } else {
            throw ConfigError("scene line " + std::to_string(line) + ": unknown key '" +
                              key + "'");
        }
    }

    if (emitters.empty()) fail("no emitters defined");
    std::size_t expect = 1;
    for (const auto& [index, params] : emitters) {
        if (index != expect)
            fail("emitter indices must be contiguous from 1 (missing emitter." +
                 std::to_string(expect) + ")");
        scene.emitters.push_back(params);
        ++expect;
    }
    if (have_t && std::abs(prob_t - scene.split.prob_transmission()) > 1e-12)
        fail("prob_transmission must equal 1 - prob_reflection");
    scene.validate();
    return scene;
}

SceneConfig load_scene_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open scene file: " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_scene(buffer.str());
}

std::string serialize_scene(const SceneConfig& scene) {
    std::ostringstream out;
    out.precision(17);
    out << "seed = " << scene.seed << "\n";
    out << "duration_ns = " << scene.duration_ns << "\n";
    out << "prob_reflection = " << scene.split.prob_reflection << "\n";
    out << "reflection_hbt_split = " << scene.reflection_hbt_split << "\n";
    for (std::size_t i = 0; i < scene.emitters.size(); ++i) {
        const auto& e = scene.emitters[i];
        const std::string p = "emitter." + std::to_string(i + 1) + ".";
        out << p << "lifetime_ns = " << e.lifetime_ns << "\n";
        out << p << "pump_rate_per_ns = " << e.pump_rate_per_ns << "\n";
        out << p << "weight = " << e.weight << "\n";
    }
    for (Detector d : kAllDetectors) {
        const auto& dp = scene.detector(d);
        const std::string p = "detector." + std::string(detector_name(d)) + ".";
        out << p << "efficiency = " << dp.efficiency << "\n";
        out << p << "dead_time_ns = " << dp.dead_time_ns << "\n";
        out << p << "dark_rate_per_ns = " << dp.dark_rate_per_ns << "\n";
        out << p << "jitter_sigma_ns = " << dp.jitter_sigma_ns << "\n";
    }
    return out.str();
}

namespace {

// Emitter intensity shares solving 1 - p1^2 - p2^2 = 0.47 with p1 + p2 = 1.
constexpr double kShareBright = 0.62247448713915890;
constexpr double kShareDim = 0.37752551286084110;

SceneConfig two_emitter_scene(double pump_rate, double efficiency, double dead_time,
                              double dark_rate, double jitter, double duration_ns) {
    SceneConfig scene;
    scene.emitters = {
        {.lifetime_ns = 0.77, .pump_rate_per_ns = pump_rate, .weight = kShareBright},
        {.lifetime_ns = 0.77, .pump_rate_per_ns = pump_rate, .weight = kShareDim},
    };
    scene.split.prob_reflection = 0.91;
    scene.reflection_hbt_split = 0.5;
    for (Detector d : kAllDetectors) {
        scene.detector(d) = {.efficiency = efficiency,
                             .dead_time_ns = dead_time,
                             .dark_rate_per_ns = dark_rate,
                             .jitter_sigma_ns = jitter};
    }
    scene.duration_ns = duration_ns;
    return scene;
}

}  // namespace

SceneConfig default_scene() {
    // ~5.0e7 detections/s so a 1e7 ns run resolves the antibunching dip.
    return two_emitter_scene(0.05, 0.65, 0.0, 1e-8, 0.01, 1e7);
}

SceneConfig reference_rate_scene() {
    // Calibrated to ~264,000 detections/s total: emission rate per emitter
    // 1/(1/0.005 + 0.77) = 4.9808e-3 /ns, collection-weighted sum x1.6065,
    // efficiency 0.0331, ~0.33% dead-time loss at 30 ns => ~2.640e-4 /ns.
    return two_emitter_scene(0.005, 0.0331, 30.0, 1e-7, 0.35, 1e9);
}

SceneConfig skewed_scene() {
    SceneConfig scene = default_scene();
    scene.reflection_hbt_split = 0.7;
    return scene;
}

SceneConfig scene_preset(std::string_view name) {
    if (name == "default") return default_scene();
    if (name == "reference-rate") return reference_rate_scene();
    if (name == "skewed") return skewed_scene();
    throw ConfigError("unknown scene preset '" + std::string(name) +
                      "' (available: default, reference-rate, skewed)");
}

std::vector<std::string> scene_preset_names() {
    return {"default", "reference-rate", "skewed"};
}

}  // namespace qrng
