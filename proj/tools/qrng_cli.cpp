// qrng: command-line pipeline for simulating branching-path photon scenes,
// measuring second-order correlations, extracting debiased bits, and running
// the statistical randomness battery.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "qrng/errors.hpp"
#include "qrng/extract.hpp"
#include "qrng/fit.hpp"
#include "qrng/g2.hpp"
#include "qrng/ptag.hpp"
#include "qrng/randtests.hpp"
#include "qrng/scene.hpp"
#include "qrng/simulate.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitIo = 3;
constexpr int kExitStatFail = 4;

struct SceneArgs {
    std::string scene_file;
    std::string preset;
    std::optional<std::uint64_t> seed;
    std::optional<double> duration_ns;

    void add_to(CLI::App& cmd) {
        cmd.add_option("--scene", scene_file, "scene description file");
        cmd.add_option("--preset", preset,
                       "built-in scene preset (default, reference-rate, skewed)");
        cmd.add_option("--seed", seed, "64-bit reproducibility seed (overrides the file)");
        cmd.add_option("--duration-ns", duration_ns,
                       "simulated wall time in ns (overrides the file)");
    }

    qrng::SceneConfig resolve() const {
        if (scene_file.empty() == preset.empty())
            throw qrng::ConfigError("exactly one of --scene or --preset is required");
        qrng::SceneConfig scene = scene_file.empty()
                                      ? qrng::scene_preset(preset)
                                      : qrng::load_scene_file(scene_file);
        if (seed) {
            scene.seed = *seed;
            scene.has_seed = true;
        }
        if (duration_ns) scene.duration_ns = *duration_ns;
        scene.validate();
        return scene;
    }
};

std::string read_text_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw qrng::IoError("cannot open: " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

json sidecar_json(const qrng::SceneConfig& scene, const std::vector<qrng::TimeTag>& tags,
                  const std::string& file, const std::string& format) {
    const auto counts = qrng::channel_counts(tags);
    const double seconds = scene.duration_ns * 1e-9;
    json j;
    j["file"] = file;
    j["format"] = format;
    j["seed"] = scene.seed;
    j["duration_ns"] = scene.duration_ns;
    json jc, jr;
    for (qrng::Detector d : qrng::kAllDetectors) {
        const auto name = std::string(qrng::detector_name(d));
        jc[name] = counts[static_cast<std::size_t>(d)];
        jr[name] = static_cast<double>(counts[static_cast<std::size_t>(d)]) / seconds;
    }
    const std::uint64_t total = counts[0] + counts[1] + counts[2];
    j["counts"] = jc;
    j["rates_per_s"] = jr;
    j["total_count"] = total;
    j["total_rate_per_s"] = static_cast<double>(total) / seconds;
    return j;
}

// --- simulate ---------------------------------------------------------------

int cmd_simulate(const SceneArgs& args, const fs::path& out_dir,
                 const std::string& format) {
    const qrng::SceneConfig scene = args.resolve();  // validation before any write
    fs::create_directories(out_dir);
    const std::vector<qrng::TimeTag> tags = qrng::simulate_scene(scene);

    std::string file;
    if (format == "csv") {
        file = "tags.csv";
        qrng::write_tags_csv(out_dir / file, tags);
    } else if (format == "bin") {
        file = "tags.ptag";
        qrng::write_ptag_file(out_dir / file, tags);
    } else {
        throw qrng::ConfigError("simulate: --format must be bin or csv");
    }
    const json side = sidecar_json(scene, tags, file, format == "csv" ? "csv" : "ptag");
    qrng::atomic_write_file(out_dir / "tags.counts.json", side.dump(2) + "\n");
    std::cout << "wrote " << (out_dir / file).string() << " (" << tags.size()
              << " tags), sidecar tags.counts.json\n";
    return kExitOk;
}

// --- g2 ---------------------------------------------------------------------

std::pair<qrng::Detector, qrng::Detector> parse_pair(const std::string& pair) {
    const auto x = pair.find('x');
    if (x == std::string::npos)
        throw qrng::ConfigError("bad --pair '" + pair + "' (expected e.g. R1xR2)");
    return {qrng::detector_from_name(pair.substr(0, x)),
            qrng::detector_from_name(pair.substr(x + 1))};
}

int cmd_g2(const fs::path& tags_file, const std::string& pair, double bin_ns,
           double max_lag_ns, const fs::path& out_prefix) {
    const auto tags = qrng::read_tags_auto(tags_file);
    const auto [da, db] = parse_pair(pair);
    const auto a = qrng::select_channel(tags, da);
    const auto b = qrng::select_channel(tags, db);
    if (a.empty())
        throw qrng::ConfigError("channel " + std::string(qrng::detector_name(da)) +
                                " has no events");
    if (b.empty())
        throw qrng::ConfigError("channel " + std::string(qrng::detector_name(db)) +
                                " has no events");
    const qrng::G2Curve curve =
        qrng::histogram_coincidences(a, b, bin_ns, max_lag_ns, da == db);
    if (out_prefix.has_parent_path()) fs::create_directories(out_prefix.parent_path());
    qrng::atomic_write_file(out_prefix.string() + ".g2.csv", qrng::g2_to_csv(curve));
    const qrng::AntibunchFit fit = qrng::fit_antibunching(curve);
    qrng::atomic_write_file(out_prefix.string() + ".fit.json", fit.to_json());
    std::cout << pair << ": g2(0) = " << fit.g2_at_zero << ", tau0 = " << fit.tau0_ns
              << " ns" << (fit.unidentifiable ? " [unidentifiable]" : "") << "\n";
    return kExitOk;
}

// --- extract ----------------------------------------------------------------

int cmd_extract(const fs::path& tags_file, const std::string& zero, const std::string& one,
                const fs::path& out_prefix) {
    const auto tags = qrng::read_tags_auto(tags_file);
    std::vector<qrng::Detector> discard;
    for (qrng::Detector d : qrng::kAllDetectors) {
        const auto name = std::string(qrng::detector_name(d));
        if (name != zero && name != one) discard.push_back(d);
    }
    const qrng::EncodingRule rule({qrng::detector_from_name(zero)},
                                  {qrng::detector_from_name(one)}, discard);
    const qrng::BitStream raw = qrng::encode_bits(tags, rule);
    const qrng::BitStream stage1 = qrng::debias_stage1(raw);
    const qrng::BitStream unbiased = qrng::debias_von_neumann(stage1);
    qrng::RateReport rates;
    rates.raw_bits = raw.size();
    rates.stage1_bits = stage1.size();
    rates.unbiased_bits = unbiased.size();

    if (out_prefix.has_parent_path()) fs::create_directories(out_prefix.parent_path());
    qrng::write_qbit_file(out_prefix.string() + ".raw.qbit", raw);
    qrng::write_qbit_file(out_prefix.string() + ".stage1.qbit", stage1);
    qrng::write_qbit_file(out_prefix.string() + ".unbiased.qbit", unbiased);
    qrng::atomic_write_file(out_prefix.string() + ".rates.json", rates.to_json());
    std::cout << "bits: raw " << rates.raw_bits << " -> stage1 " << rates.stage1_bits
              << " -> unbiased " << rates.unbiased_bits << "\n";
    return kExitOk;
}

// --- test -------------------------------------------------------------------

int cmd_test(const fs::path& bits_file, double alpha, const fs::path& out_prefix,
             std::uint64_t partition_bits) {
    qrng::BitStream bits;
    if (bits_file.extension() == ".csv" || bits_file.extension() == ".txt")
        bits = qrng::bits_from_csv_text(read_text_file(bits_file));
    else
        bits = qrng::read_qbit_file(bits_file);

    qrng::TestParams params;
    params.alpha = alpha;
    if (out_prefix.has_parent_path()) fs::create_directories(out_prefix.parent_path());

    if (partition_bits > 0) {
        const auto report = qrng::second_level_analysis(bits, partition_bits, params);
        qrng::atomic_write_file(out_prefix.string() + ".second_level.json",
                                report.to_json());
        std::cout << "second-level over " << report.n_sequences << " sequences: "
                  << (report.overall_pass ? "pass" : "FAIL") << "\n";
        return report.overall_pass ? kExitOk : kExitStatFail;
    }

    const qrng::TestReport report = qrng::run_battery(bits, params);
    qrng::atomic_write_file(out_prefix.string() + ".report.json", report.to_json());
    qrng::atomic_write_file(out_prefix.string() + ".report.csv", report.to_csv());
    for (const auto& r : report.results) {
        std::cout << "  " << r.name << ": ";
        if (r.skipped) std::cout << "skipped (" << r.skip_reason << ")";
        else std::cout << (r.pass ? "pass" : "FAIL") << " (min p = " << r.min_p() << ")";
        std::cout << "\n";
    }
    std::cout << "battery: " << (report.overall_pass ? "pass" : "FAIL") << " on "
              << report.n_bits << " bits\n";
    return report.overall_pass ? kExitOk : kExitStatFail;
}

// --- report -----------------------------------------------------------------

json try_load_json(const fs::path& path) {
    if (!fs::exists(path)) return json();
    return json::parse(read_text_file(path));
}

int cmd_report(const fs::path& run_dir, const fs::path& out_prefix) {
    json run;
    const json sidecar = try_load_json(run_dir / "tags.counts.json");
    if (!sidecar.is_null()) run["simulate"] = sidecar;

    json fits = json::object();
    json rates;
    json battery;
    for (const auto& entry : fs::directory_iterator(run_dir)) {
        const std::string name = entry.path().filename().string();
        if (name.ends_with(".fit.json"))
            fits[name.substr(0, name.size() - 9)] = try_load_json(entry.path());
        else if (name.ends_with(".rates.json"))
            rates = try_load_json(entry.path());
        else if (name.ends_with(".report.json"))
            battery = try_load_json(entry.path());
    }
    if (!fits.empty()) run["correlations"] = fits;
    if (!rates.is_null()) run["debias"] = rates;
    if (!battery.is_null()) run["battery"] = battery;

    // Rate accounting against the reference experiment's published numbers:
    // 264 kbit/s raw reduced to 21 kbit/s unbiased (retention ~0.0795). The
    // ideal scene model cannot reproduce that retention: unbiased two-stage
    // cascade retention on ideal input is exactly 1/16 = 0.0625. The gap
    // implies bias/correlation structure in the hardware raw bits that the
    // ideal model intentionally leaves out.
    json acct;
    acct["reference_raw_bits_per_s"] = 264000.0;
    acct["reference_unbiased_bits_per_s"] = 21000.0;
    acct["reference_retention"] = 21.0 / 264.0;
    acct["ideal_cascade_retention"] = 1.0 / 16.0;
    if (!sidecar.is_null() && !rates.is_null()) {
        const double duration_s = sidecar["duration_ns"].get<double>() * 1e-9;
        acct["raw_bits_per_s"] = rates["raw_bits"].get<double>() / duration_s;
        acct["unbiased_bits_per_s"] = rates["unbiased_bits"].get<double>() / duration_s;
        if (rates.contains("total_retention") && !rates["total_retention"].is_null())
            acct["measured_retention"] = rates["total_retention"];
    }
    acct["note"] =
        "Measured cascade retention tracks the ideal 1/16, not the reference "
        "experiment's 21/264 ~ 0.0795; the higher reference retention implies "
        "bias or correlation in the hardware raw bits that the ideal scene "
        "model intentionally does not reproduce.";
    run["rate_accounting"] = acct;

    if (out_prefix.has_parent_path()) fs::create_directories(out_prefix.parent_path());
    qrng::atomic_write_file(out_prefix.string() + ".json", run.dump(2) + "\n");

    std::ostringstream csv;
    csv << "section,key,value\n";
    if (!sidecar.is_null()) {
        csv << "simulate,total_rate_per_s," << sidecar["total_rate_per_s"].dump() << "\n";
        for (const auto& [k, v] : sidecar["counts"].items())
            csv << "simulate,count_" << k << "," << v.dump() << "\n";
    }
    for (const auto& [pair, fit] : fits.items()) {
        csv << "g2," << pair << "_g2_at_zero," << fit["g2_at_zero"].dump() << "\n";
        csv << "g2," << pair << "_tau0_ns," << fit["tau0_ns"].dump() << "\n";
    }
    if (!rates.is_null()) {
        csv << "debias,raw_bits," << rates["raw_bits"].dump() << "\n";
        csv << "debias,unbiased_bits," << rates["unbiased_bits"].dump() << "\n";
        csv << "debias,total_retention," << rates["total_retention"].dump() << "\n";
    }
    if (!battery.is_null())
        csv << "battery,overall_pass," << battery["overall_pass"].dump() << "\n";
    qrng::atomic_write_file(out_prefix.string() + ".csv", csv.str());
    std::cout << "wrote " << out_prefix.string() << ".json\n";
    return kExitOk;
}

// --- pipeline ---------------------------------------------------------------

int cmd_pipeline(const SceneArgs& args, const fs::path& out_dir, const std::string& format,
                 double bin_ns, double max_lag_ns, double alpha) {
    int rc = cmd_simulate(args, out_dir, format);
    if (rc != kExitOk) return rc;
    const std::string tags_name = (format == "csv") ? "tags.csv" : "tags.ptag";
    for (const std::string pair : {"R1xR2", "R1xT1"}) {
        try {
            rc = cmd_g2(out_dir / tags_name, pair, bin_ns, max_lag_ns, out_dir / pair);
        } catch (const qrng::ConfigError& e) {
            std::cerr << "g2 " << pair << " skipped: " << e.what() << "\n";
        }
    }
    rc = cmd_extract(out_dir / tags_name, "R1", "R2", out_dir / "bits");
    if (rc != kExitOk) return rc;
    const int test_rc =
        cmd_test(out_dir / "bits.unbiased.qbit", alpha, out_dir / "battery", 0);
    rc = cmd_report(out_dir, out_dir / "run");
    if (rc != kExitOk) return rc;
    return test_rc;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "Simulation and analysis pipeline for branching-path single-photon "
        "random number generation"};
    app.require_subcommand(1);

    // simulate
    auto* sim = app.add_subcommand("simulate", "simulate a scene into a time-tag file");
    SceneArgs sim_args;
    sim_args.add_to(*sim);
    std::string sim_out = ".";
    std::string sim_format = "bin";
    sim->add_option("--out", sim_out, "output directory");
    sim->add_option("--format", sim_format, "bin (PTAG) or csv")
        ->check(CLI::IsMember({"bin", "csv"}));

    // g2
    auto* g2 = app.add_subcommand("g2", "correlation histogram + antibunching fit");
    std::string g2_tags, g2_pair = "R1xT1";
    double g2_bin = 0.77 / 8.0, g2_maxlag = 12.0 * 0.77;
    std::string g2_out = "g2";
    g2->add_option("--tags", g2_tags, "PTAG or CSV time-tag file")->required();
    g2->add_option("--pair", g2_pair, "detector pair, e.g. R1xR2 or R1xT1");
    g2->add_option("--bin-ns", g2_bin, "histogram bin width (ns)");
    g2->add_option("--max-lag-ns", g2_maxlag, "maximum |lag| (ns)");
    g2->add_option("--out", g2_out, "output prefix");

    // extract
    auto* ext = app.add_subcommand("extract", "encode tags to bits and debias");
    std::string ext_tags, ext_zero = "R1", ext_one = "R2", ext_out = "bits";
    ext->add_option("--tags", ext_tags, "PTAG or CSV time-tag file")->required();
    ext->add_option("--zero", ext_zero, "detector mapping to bit 0");
    ext->add_option("--one", ext_one, "detector mapping to bit 1");
    ext->add_option("--out", ext_out, "output prefix");

    // test
    auto* tst = app.add_subcommand("test", "run the randomness test battery");
    std::string tst_bits, tst_out = "battery";
    double tst_alpha = 0.01;
    std::uint64_t tst_partition = 0;
    tst->add_option("--bits", tst_bits, "QBIT file (or .csv/.txt of 0/1 chars)")
        ->required();
    tst->add_option("--alpha", tst_alpha, "significance level");
    tst->add_option("--out", tst_out, "output prefix");
    tst->add_option("--partition-bits", tst_partition,
                    "run second-level analysis over partitions of this size");

    // report
    auto* rep = app.add_subcommand("report", "consolidate a run directory");
    std::string rep_dir = ".", rep_out = "run";
    rep->add_option("--run-dir", rep_dir, "directory with pipeline outputs");
    rep->add_option("--out", rep_out, "output prefix");

    // pipeline
    auto* pipe = app.add_subcommand("pipeline", "simulate, correlate, extract, test, report");
    SceneArgs pipe_args;
    pipe_args.add_to(*pipe);
    std::string pipe_out = "run";
    std::string pipe_format = "bin";
    double pipe_bin = 0.77 / 8.0, pipe_maxlag = 12.0 * 0.77, pipe_alpha = 0.01;
    pipe->add_option("--out", pipe_out, "output directory");
    pipe->add_option("--format", pipe_format, "bin (PTAG) or csv")
        ->check(CLI::IsMember({"bin", "csv"}));
    pipe->add_option("--bin-ns", pipe_bin, "g2 bin width (ns)");
    pipe->add_option("--max-lag-ns", pipe_maxlag, "g2 maximum |lag| (ns)");
    pipe->add_option("--alpha", pipe_alpha, "battery significance level");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitValidation;
    }

    try {
        if (sim->parsed()) return cmd_simulate(sim_args, sim_out, sim_format);
        if (g2->parsed()) return cmd_g2(g2_tags, g2_pair, g2_bin, g2_maxlag, g2_out);
        if (ext->parsed()) return cmd_extract(ext_tags, ext_zero, ext_one, ext_out);
        if (tst->parsed()) return cmd_test(tst_bits, tst_alpha, tst_out, tst_partition);
        if (rep->parsed()) return cmd_report(rep_dir, rep_out);
        if (pipe->parsed())
            return cmd_pipeline(pipe_args, pipe_out, pipe_format, pipe_bin, pipe_maxlag,
                                pipe_alpha);
    } catch (const qrng::FormatError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const qrng::IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const qrng::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const qrng::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    }
    return kExitValidation;
}
