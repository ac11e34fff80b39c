#pragma once

/**
 * The fibqkd command line: run, sweep, spiral-spectrum, verify-scheme.
 *
 * Exit codes: 0 pass, 1 security verdict (compromised, or an undecodable
 * scheme), 2 usage or configuration error, or an inconclusive verdict.
 * Nothing is written to the output directory unless the command succeeded
 * in computing its results.
 */

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fibqkd/config.hpp"
#include "fibqkd/digest.hpp"
#include "fibqkd/errors.hpp"
#include "fibqkd/fibcode.hpp"
#include "fibqkd/harness.hpp"
#include "fibqkd/spiral.hpp"

namespace fibqkd::cli {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr int kExitPass = 0;
inline constexpr int kExitVerdict = 1;
inline constexpr int kExitUsage = 2;

namespace detail {

inline std::filesystem::path output_dir(const std::string& flag) {
    if (!flag.empty()) return flag;
    if (const char* env = std::getenv("FIBQKD_OUT_DIR"); env && *env) return env;
    return "out";
}

inline void write_text(const std::filesystem::path& p, const std::string& text) {
    std::ofstream f(p, std::ios::binary);
    if (!f) throw Error("cannot write " + p.string());
    f << text;
}

inline void write_json(const std::filesystem::path& p, const Json& j) { write_text(p, j.dump(2) + "\n"); }

inline Json manifest(const std::string& command, const std::vector<std::string>& args, Json config,
                     const std::vector<std::string>& outputs, double runtime) {
    return Json{{"tool", "fibqkd"},
                {"version", kVersion},
                {"command", command},
                {"arguments", args},
                {"config", std::move(config)},
                {"outputs", outputs},
                {"runtime_seconds", runtime}};
}

inline std::string percent(double x) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(2) << 100.0 * x << "%";
    return s.str();
}

inline std::string join(const std::vector<Oam>& v) {
    std::string s;
    for (Oam x : v) s += (s.empty() ? "" : ", ") + std::to_string(x);
    return s;
}

} // namespace detail

struct RunArgs {
    std::string config;
    std::string out;
    std::int64_t seed = -1;
    std::string events = "none";
    bool verbose = false;
};

inline int cmd_run(const RunArgs& a, const std::vector<std::string>& argv, std::ostream& out, std::ostream& err) {
    SessionConfig cfg;
    try {
        cfg = load_config(a.config);
        if (a.seed >= 0) cfg.seed = static_cast<std::uint64_t>(a.seed);
        if (a.events != "none") cfg.record_events = true;
        cfg.validate();
    } catch (const Error& e) {
        err << "fibqkd run: " << e.what() << "\n";
        return kExitUsage;
    }
    const SessionReport rep = run_session(cfg);
    const Json report = report_to_json(rep);

    const auto dir = detail::output_dir(a.out);
    std::filesystem::create_directories(dir);
    std::vector<std::string> outputs{"report.json", "key_alice.hex", "key_bob.hex"};
    detail::write_json(dir / "report.json", report);
    detail::write_text(dir / "key_alice.hex", key_hex(rep.key.alice) + "\n");
    detail::write_text(dir / "key_bob.hex", key_hex(rep.key.bob) + "\n");
    if (a.events == "csv" || a.events == "jsonl") {
        const std::string name = "events." + a.events;
        std::ofstream f(dir / name, std::ios::binary);
        if (a.events == "csv") write_events_csv(f, rep.events);
        else write_events_jsonl(f, rep.events);
        outputs.push_back(name);
    }
    detail::write_json(dir / "manifest.json",
                       detail::manifest("run", argv, config_to_json(cfg), outputs, rep.runtime_seconds));

    out << "kept pairs " << rep.counts.kept_pairs << ", key " << rep.key.alice.size() << " bits ("
        << (rep.key.agreed() ? "agreed" : "MISMATCH") << "), non-adjacent "
        << detail::percent(rep.security.non_adjacent.fraction()) << " of " << rep.security.non_adjacent.trials
        << " checked, verdict " << to_string(rep.verdict) << "\n";
    if (a.verbose) out << report.dump(2) << "\n";
    return exit_code(rep.verdict);
}

struct SweepArgs {
    std::string config;
    std::string out;
    std::string parameter;
    std::vector<double> values;
    unsigned threads = 1;
};

inline int cmd_sweep(const SweepArgs& a, const std::vector<std::string>& argv, std::ostream& out, std::ostream& err) {
    SessionConfig base;
    SweepParameter p{};
    try {
        base = load_config(a.config);
        p = parse_sweep_parameter(a.parameter);
        if (a.values.empty()) throw ConfigError("no sweep values given");
        for (std::size_t i = 0; i < a.values.size(); ++i) (void)sweep_config(base, p, a.values[i], i);
    } catch (const Error& e) {
        err << "fibqkd sweep: " << e.what() << "\n";
        return kExitUsage;
    }
    const auto started = std::chrono::steady_clock::now();
    const auto reports = attack_sweep(base, p, a.values, a.threads);
    const double runtime = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

    const auto dir = detail::output_dir(a.out);
    std::filesystem::create_directories(dir);
    detail::write_json(dir / "sweep.json", sweep_to_json(base, p, a.values, reports));
    {
        std::ofstream f(dir / "sweep.csv", std::ios::binary);
        write_sweep_csv(f, p, a.values, reports);
    }
    detail::write_json(dir / "manifest.json",
                       detail::manifest("sweep", argv, config_to_json(base), {"sweep.json", "sweep.csv"}, runtime));
    write_sweep_csv(out, p, a.values, reports);
    return kExitPass;
}

struct SpiralArgs {
    int particles = 2000;
    double a0_um = 9.28;
    double wavelength_nm = 405.0;
    double cone_deg = 2.0;
    std::string alpha = "golden";
    int radial = 256;
    int azimuthal = 512;
    int m_max = 100;
    int k_samples = 256;
    double threshold = 0.5;
    bool field_csv = false;
    unsigned threads = 0;
    std::string out;
};

inline int cmd_spiral(const SpiralArgs& a, const std::vector<std::string>& argv, std::ostream& out,
                      std::ostream& err) {
    const auto started = std::chrono::steady_clock::now();
    spiral::OamSpectrum spectrum;
    spiral::FarFieldGrid field(2, 1, 1.0, {});
    double alpha = 0.0;
    try {
        if (a.alpha == "golden") {
            alpha = spiral::golden_angle();
        } else {
            std::size_t used = 0;
            double deg = 0.0;
            try {
                deg = std::stod(a.alpha, &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used == 0 || used != a.alpha.size())
                throw ConfigError("--alpha must be \"golden\" or an angle in degrees, got \"" + a.alpha + "\"");
            alpha = deg * std::numbers::pi / 180.0;
        }
        if (!(a.threshold >= 0.0 && a.threshold <= 1.0)) throw ConfigError("--threshold must be in [0, 1]");
        const auto geometry = spiral::vogel_points(a.particles, a.a0_um, alpha);
        spiral::GridSpec gs;
        gs.radial = a.radial;
        gs.azimuthal = a.azimuthal;
        gs.wavelength_um = a.wavelength_nm / 1000.0;
        gs.cone_deg = a.cone_deg;
        gs.threads = a.threads;
        gs.validate();
        if (a.azimuthal < 4 * a.m_max)
            throw ConfigError("azimuthal resolution " + std::to_string(a.azimuthal) + " aliases m_max " +
                              std::to_string(a.m_max) + " (need >= " + std::to_string(4 * a.m_max) + ")");
        field = spiral::far_field(geometry, gs);
        spiral::HankelSpec hs{a.m_max, a.k_samples, geometry.radius(), a.threads};
        spectrum = spiral::fourier_hankel(field, hs);
    } catch (const Error& e) {
        err << "fibqkd spiral-spectrum: " << e.what() << "\n";
        return kExitUsage;
    }
    const auto peaks = spiral::classify_peaks(spectrum, a.threshold);
    const double runtime = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

    Json pj = Json::array();
    bool all_fib = true;
    for (const auto& p : peaks) {
        pj.push_back({{"m", p.m}, {"height", p.height}, {"relative", p.relative}, {"is_fibonacci", p.is_fibonacci}});
        all_fib = all_fib && p.is_fibonacci;
    }
    const Json params{{"particles", a.particles},    {"a0_um", a.a0_um},         {"alpha_rad", alpha},
                      {"wavelength_nm", a.wavelength_nm}, {"cone_deg", a.cone_deg}, {"radial", a.radial},
                      {"azimuthal", a.azimuthal},    {"m_max", a.m_max},         {"k_samples", a.k_samples},
                      {"threshold", a.threshold}};
    const Json report{{"schema_version", 1},
                      {"parameters", params},
                      {"field_at_origin", {field.at(0, 0).real(), field.at(0, 0).imag()}},
                      {"peaks", pj},
                      {"all_peaks_fibonacci", all_fib}};

    const auto dir = detail::output_dir(a.out);
    std::filesystem::create_directories(dir);
    std::vector<std::string> outputs{"spectrum.csv", "peaks.json"};
    {
        std::ofstream f(dir / "spectrum.csv", std::ios::binary);
        spiral::write_spectrum_csv(f, spectrum);
    }
    detail::write_json(dir / "peaks.json", report);
    if (a.field_csv) {
        std::ofstream f(dir / "field.csv", std::ios::binary);
        spiral::write_field_csv(f, field);
        outputs.push_back("field.csv");
    }
    detail::write_json(dir / "manifest.json", detail::manifest("spiral-spectrum", argv, params, outputs, runtime));

    out << "peaks above " << a.threshold << " of max:";
    for (const auto& p : peaks) out << " " << p.m << (p.is_fibonacci ? "" : "*");
    out << (all_fib ? "  (all Fibonacci)" : "  (* = not Fibonacci)") << "\n";
    return kExitPass;
}

struct VerifyArgs {
    Oam start_value = 3;
    int size = 8;
    std::vector<Oam> flip_bits;
    std::uint64_t monte_carlo = 0;
    std::uint64_t seed = 1;
    std::string out;
};

inline int cmd_verify_scheme(const VerifyArgs& a, const std::vector<std::string>& argv, std::ostream& out,
                             std::ostream& err) {
    const auto started = std::chrono::steady_clock::now();
    std::optional<FibAlphabet> alphabet;
    try {
        alphabet = FibAlphabet::starting_at(a.start_value, a.size);
    } catch (const Error& e) {
        err << "fibqkd verify-scheme: " << e.what() << "\n";
        return kExitUsage;
    }
    std::map<Oam, int> bits;
    for (Oam v : alphabet->arm_values()) bits[v] = ExchangeScheme::index_parity_bit(v);
    for (Oam v : a.flip_bits) {
        if (!bits.count(v)) {
            err << "fibqkd verify-scheme: --flip-bit " << v << " is not an arm value of this alphabet\n";
            return kExitUsage;
        }
        bits[v] = 1 - bits[v];
    }
    const auto scheme = ExchangeScheme::from_table(*alphabet, bits);

    Json table = Json::object();
    for (const auto& [v, b] : bits) table[std::to_string(v)] = b;
    Json result{{"schema_version", 1},
                {"alphabet", {{"start_value", a.start_value}, {"size", a.size}}},
                {"alice_bits", table}};

    if (const auto violation = scheme.verify()) {
        result["decodable"] = false;
        result["violation"] = {{"pump", violation->configuration.pump},
                               {"alice", violation->configuration.alice},
                               {"bob", violation->configuration.bob},
                               {"decoder", violation->decoder == Role::alice ? "alice" : "bob"},
                               {"reason", violation->reason}};
        out << "NOT decodable: pump " << violation->configuration.pump << " (Alice " << violation->configuration.alice
            << ", Bob " << violation->configuration.bob << "): " << violation->reason << "\n";
        const auto dir = detail::output_dir(a.out);
        std::filesystem::create_directories(dir);
        detail::write_json(dir / "scheme.json", result);
        detail::write_json(dir / "manifest.json", detail::manifest("verify-scheme", argv, result["alphabet"],
                                                                   {"scheme.json"}, 0.0));
        return kExitVerdict;
    }

    const auto eve = EveTable::enumerate(scheme);
    const Rational uniform = eve.uniform_guess_success();
    const Rational ml = eve.max_likelihood_success();
    Json outcomes = Json::object();
    out << "Eve sees | pump could be\n";
    for (const auto& [obs, pumps] : eve.outcomes()) {
        const std::string key = std::to_string(obs.first) + std::to_string(obs.second);
        Json counts = Json::object();
        for (const auto& [pump, n] : pumps) counts[std::to_string(pump)] = n;
        outcomes[key] = counts;
        out << "   " << key << "    | " << detail::join(eve.candidates(obs)) << "\n";
    }
    result["decodable"] = true;
    result["configurations"] = eve.total();
    result["outcomes"] = outcomes;
    result["uniform_guess_success"] = {{"numerator", uniform.num}, {"denominator", uniform.den}, {"value", uniform.to_double()}};
    result["max_likelihood_success"] = {{"numerator", ml.num}, {"denominator", ml.den}, {"value", ml.to_double()}};
    out << "average uniform-guess success " << uniform.num << "/" << uniform.den << " = "
        << detail::percent(uniform.to_double()) << "; maximum-likelihood " << ml.num << "/" << ml.den << " = "
        << detail::percent(ml.to_double()) << "\n";

    if (a.monte_carlo > 0) {
        SeedTree tree(a.seed);
        auto cfg_rng = tree.stream("configuration");
        auto guess_rng = tree.stream("guess");
        const auto configs = honest_configurations(*alphabet);
        Proportion hits;
        for (std::uint64_t i = 0; i < a.monte_carlo; ++i) {
            const auto& c = configs[static_cast<std::size_t>(cfg_rng.below(configs.size()))];
            const ExchangeBits obs{scheme.alice_bit(c.alice), scheme.bob_bit(c.bob, c.alice)};
            hits.add(eve_classical_guess(eve, obs, GuessMode::uniform, guess_rng).guess == c.pump);
        }
        result["monte_carlo"] = {{"exchanges", hits.trials},
                                 {"successes", hits.hits},
                                 {"fraction", hits.fraction()},
                                 {"sigma", hits.sigma_at(uniform.to_double())},
                                 {"consistent_3sigma", hits.consistent_with(uniform.to_double())}};
        out << "Monte Carlo over " << hits.trials << " exchanges: " << detail::percent(hits.fraction()) << "\n";
    }
    const double runtime = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    const auto dir = detail::output_dir(a.out);
    std::filesystem::create_directories(dir);
    detail::write_json(dir / "scheme.json", result);
    detail::write_json(dir / "manifest.json",
                       detail::manifest("verify-scheme", argv, result["alphabet"], {"scheme.json"}, runtime));
    return kExitPass;
}

/// Parses argv and dispatches; never throws.
inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"Fibonacci OAM key distribution simulator", "fibqkd"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    RunArgs run;
    auto* run_cmd = app.add_subcommand("run", "simulate one session from a config file");
    run_cmd->add_option("--config", run.config, "session config (JSON)")->required();
    run_cmd->add_option("--out", run.out, "output directory (default $FIBQKD_OUT_DIR or ./out)");
    run_cmd->add_option("--seed", run.seed, "override the config seed")->check(CLI::NonNegativeNumber);
    run_cmd->add_option("--events", run.events, "per-event log format")->check(CLI::IsMember({"none", "csv", "jsonl"}));
    run_cmd->add_flag("-v,--verbose", run.verbose, "print the full report");

    SweepArgs sweep;
    auto* sweep_cmd = app.add_subcommand("sweep", "run one session per parameter value");
    sweep_cmd->add_option("--config", sweep.config, "base session config (JSON)")->required();
    sweep_cmd->add_option("--parameter", sweep.parameter, "intercept_rate | alphabet_size | security_rate | filters")->required();
    sweep_cmd->add_option("--values", sweep.values, "comma-separated values")->required()->delimiter(',');
    sweep_cmd->add_option("--out", sweep.out, "output directory");
    sweep_cmd->add_option("--threads", sweep.threads, "sessions run concurrently")->check(CLI::PositiveNumber);

    SpiralArgs sp;
    auto* sp_cmd = app.add_subcommand("spiral-spectrum", "far field and OAM spectrum of a Vogel spiral");
    sp_cmd->add_option("--particles", sp.particles, "number of scatterers")->capture_default_str();
    sp_cmd->add_option("--a0-um", sp.a0_um, "scaling factor a0 in micrometres")->capture_default_str();
    sp_cmd->add_option("--wavelength-nm", sp.wavelength_nm, "wavelength in nanometres")->capture_default_str();
    sp_cmd->add_option("--cone-deg", sp.cone_deg, "far-field cone half-angle in degrees")->capture_default_str();
    sp_cmd->add_option("--alpha", sp.alpha, "divergence angle: golden or degrees")->capture_default_str();
    sp_cmd->add_option("--radial", sp.radial, "radial grid samples")->capture_default_str();
    sp_cmd->add_option("--azimuthal", sp.azimuthal, "azimuthal grid samples")->capture_default_str();
    sp_cmd->add_option("--m-max", sp.m_max, "largest |m| in the spectrum")->capture_default_str();
    sp_cmd->add_option("--k-samples", sp.k_samples, "radial frequency samples")->capture_default_str();
    sp_cmd->add_option("--threshold", sp.threshold, "peak threshold relative to the maximum")->capture_default_str();
    sp_cmd->add_flag("--field-csv", sp.field_csv, "also write |E| on the grid");
    sp_cmd->add_option("--threads", sp.threads, "worker threads (0 = all cores)");
    sp_cmd->add_option("--out", sp.out, "output directory");

    VerifyArgs vs;
    auto* vs_cmd = app.add_subcommand("verify-scheme", "enumerate the bit exchange and Eve's inference table");
    vs_cmd->add_option("--start-value", vs.start_value, "smallest alphabet member")->capture_default_str();
    vs_cmd->add_option("--size", vs.size, "alphabet size")->capture_default_str();
    vs_cmd->add_option("--flip-bit", vs.flip_bits, "corrupt the scheme by flipping Alice's bit for a value (test fixture)");
    vs_cmd->add_option("--monte-carlo", vs.monte_carlo, "also simulate this many exchanges");
    vs_cmd->add_option("--seed", vs.seed, "seed for the Monte Carlo run")->capture_default_str();
    vs_cmd->add_option("--out", vs.out, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kExitPass;
    } catch (const CLI::CallForAllHelp& e) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitPass;
    } catch (const CLI::CallForVersion& e) {
        out << kVersion << "\n";
        return kExitPass;
    } catch (const CLI::ParseError& e) {
        err << "fibqkd: " << e.what() << "\n";
        return kExitUsage;
    }

    const std::vector<std::string> args(argv + 1, argv + argc);
    try {
        if (*run_cmd) return cmd_run(run, args, out, err);
        if (*sweep_cmd) return cmd_sweep(sweep, args, out, err);
        if (*sp_cmd) return cmd_spiral(sp, args, out, err);
        if (*vs_cmd) return cmd_verify_scheme(vs, args, out, err);
    } catch (const ConfigError& e) {
        err << "fibqkd: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "fibqkd: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}

} // namespace fibqkd::cli
