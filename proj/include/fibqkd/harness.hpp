#pragma once

/**
 * End-to-end sessions: source, sorters, filters, Eve, Bob, the security
 * sample, the bit exchange and key assembly, with every stochastic stage on
 * its own named substream of the session seed.
 */

#include <chrono>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "fibqkd/channel.hpp"
#include "fibqkd/config.hpp"
#include "fibqkd/digest.hpp"
#include "fibqkd/errors.hpp"
#include "fibqkd/fibcode.hpp"
#include "fibqkd/parties.hpp"
#include "fibqkd/quantum.hpp"
#include "fibqkd/rng.hpp"
#include "fibqkd/stats.hpp"

namespace fibqkd {

inline constexpr int kReportSchemaVersion = 1;

using CountMap = std::map<Oam, std::uint64_t>;

struct SessionCounts {
    std::uint64_t emissions = 0;
    std::uint64_t empty_pulses = 0;
    std::uint64_t sorter_kept = 0;      // pairs past both sorters, decoys included
    std::uint64_t alice_lost = 0;
    std::uint64_t bob_lost = 0;
    std::uint64_t filter_trials = 0;    // pairs that reached Alice's filter
    std::uint64_t filter_dropped = 0;
    std::uint64_t bob_undetected = 0;   // Bob's sorter rejected what arrived
    std::uint64_t sign_discarded = 0;
    std::uint64_t kept_pairs = 0;       // detected by both, sifted; security + key
    std::uint64_t security_pairs = 0;
    std::uint64_t key_events = 0;
    std::uint64_t decoy_events = 0;     // decoys Bob registered
};

struct KeyStats {
    int bits_per_event = 0;
    std::vector<bool> alice;
    std::vector<bool> bob;
    std::uint64_t block_mismatches = 0;
    std::uint64_t decode_failures = 0;

    bool agreed() const { return alice == bob; }
};

struct EveStats {
    std::uint64_t intercepted = 0;
    std::uint64_t intercepted_registered = 0; // Bob registered Eve's resend
    std::uint64_t kept_intercepted = 0;       // kept pairs whose Bob photon Eve had replaced
    Proportion classical_success;
    RunningMean pump_candidates;              // from her measured value alone
    Proportion single_candidate;
};

struct PnsStats {
    std::uint64_t multi_photon_pulses = 0;
    std::vector<PnsObservation> observations;
    IndependenceTest test;
};

/// Outcome counts for criterion-style conditional laws.
struct OutcomeTables {
    CountMap kept_pump;
    CountMap alice;
    CountMap bob;
    std::map<Oam, CountMap> bob_given_alice;
    std::map<std::pair<Oam, Oam>, CountMap> bob_given_alice_eve; // intercepted events only
};

struct SessionReport {
    SessionConfig config;
    std::string config_hash;
    SessionCounts counts;
    KeyStats key;
    SecurityCheck security;
    std::optional<DecoyCheck> decoy;
    RunningMean decoy_untampered;
    RunningMean decoy_tampered;
    EveStats eve;
    std::optional<PnsStats> pns;
    OutcomeTables outcomes;
    double filter_throughput = 1.0;
    bool truncated = false;
    Verdict verdict = Verdict::inconclusive;
    std::vector<PairEvent> events;
    double runtime_seconds = 0.0; // not part of the canonical report
};

namespace harness_detail {

inline Json count_map_json(const CountMap& m) {
    Json j = Json::object();
    for (const auto& [k, v] : m) j[std::to_string(k)] = v;
    return j;
}

inline Json proportion_json(const Proportion& p, double k = 3.0) {
    return Json{{"count", p.hits},
                {"samples", p.trials},
                {"fraction", p.fraction()},
                {"sigma", p.sigma()},
                {"interval", {p.lower(k), p.upper(k)}}};
}

inline Json mean_json(const RunningMean& m) {
    return Json{{"samples", m.count}, {"mean", m.mean}, {"standard_error", m.standard_error()}};
}

} // namespace harness_detail

inline std::string config_hash(const SessionConfig& c) { return sha256_hex(config_to_json(c).dump()); }

/// The canonical JSON report. Runtime is deliberately absent so identical
/// runs serialize to identical bytes.
inline Json report_to_json(const SessionReport& r) {
    using namespace harness_detail;
    const auto& c = r.counts;
    Json counts{{"emissions", c.emissions},
                {"empty_pulses", c.empty_pulses},
                {"sorter_kept", c.sorter_kept},
                {"alice_lost", c.alice_lost},
                {"bob_lost", c.bob_lost},
                {"filter_trials", c.filter_trials},
                {"filter_dropped", c.filter_dropped},
                {"bob_undetected", c.bob_undetected},
                {"sign_discarded", c.sign_discarded},
                {"kept_pairs", c.kept_pairs},
                {"security_pairs", c.security_pairs},
                {"key_events", c.key_events},
                {"decoy_events", c.decoy_events}};
    Json key{{"bits_per_event", r.key.bits_per_event},
             {"length_bits", r.key.alice.size()},
             {"alice_hash", key_hash(r.key.alice)},
             {"bob_hash", key_hash(r.key.bob)},
             {"agreed", r.key.agreed()},
             {"block_mismatches", r.key.block_mismatches},
             {"decode_failures", r.key.decode_failures}};
    Json security{{"non_adjacent", proportion_json(r.security.non_adjacent, r.config.security.sigmas)},
                  {"threshold", r.security.threshold},
                  {"verdict", to_string(r.security.verdict)}};
    Json decoy = nullptr;
    if (r.decoy) {
        decoy = Json{{"events", r.decoy->clicks.trials},
                     {"overlap_squared", mean_json(r.decoy->overlap)},
                     {"untampered_overlap_squared", mean_json(r.decoy_untampered)},
                     {"tampered_overlap_squared", mean_json(r.decoy_tampered)},
                     {"clicks", proportion_json(r.decoy->clicks, r.config.decoy.sigmas)},
                     {"expected", r.decoy->expected},
                     {"threshold", r.decoy->threshold},
                     {"verdict", to_string(r.decoy->verdict)}};
    }
    Json eve{{"strategy", to_string(r.config.eve.strategy)},
             {"intercepted", r.eve.intercepted},
             {"intercepted_registered", r.eve.intercepted_registered},
             {"effective_interception_rate",
              r.eve.intercepted == 0 ? 0.0 : static_cast<double>(r.eve.intercepted_registered) / r.eve.intercepted},
             {"kept_intercepted_fraction",
              c.kept_pairs == 0 ? 0.0 : static_cast<double>(r.eve.kept_intercepted) / c.kept_pairs},
             {"classical_success", proportion_json(r.eve.classical_success)},
             {"pump_candidates", mean_json(r.eve.pump_candidates)},
             {"single_candidate", proportion_json(r.eve.single_candidate)}};
    Json pns = nullptr;
    if (r.pns) {
        pns = Json{{"multi_photon_pulses", r.pns->multi_photon_pulses},
                   {"observations", r.pns->test.samples},
                   {"mutual_information_bits", r.pns->test.mutual_information_bits},
                   {"g_statistic", r.pns->test.g_statistic},
                   {"degrees_of_freedom", r.pns->test.degrees_of_freedom},
                   {"p_value", r.pns->test.p_value}};
    }
    Json given_alice = Json::object();
    for (const auto& [a, m] : r.outcomes.bob_given_alice) given_alice[std::to_string(a)] = count_map_json(m);
    Json given_alice_eve = Json::array();
    for (const auto& [ae, m] : r.outcomes.bob_given_alice_eve)
        given_alice_eve.push_back({{"alice", ae.first}, {"eve", ae.second}, {"bob", count_map_json(m)}});
    Json outcomes{{"kept_pump", count_map_json(r.outcomes.kept_pump)},
                  {"alice", count_map_json(r.outcomes.alice)},
                  {"bob", count_map_json(r.outcomes.bob)},
                  {"bob_given_alice", given_alice},
                  {"bob_given_alice_and_eve", given_alice_eve}};
    return Json{{"schema_version", kReportSchemaVersion},
                {"config_hash", r.config_hash},
                {"seed", r.config.seed},
                {"alphabet", {{"start_index", r.config.alphabet_start_index}, {"size", r.config.alphabet_size}}},
                {"counts", counts},
                {"key", key},
                {"security", security},
                {"decoy", decoy},
                {"eve", eve},
                {"photon_number_splitting", pns},
                {"outcomes", outcomes},
                {"filter_throughput", r.filter_throughput},
                {"truncated", r.truncated},
                {"verdict", to_string(r.verdict)}};
}

namespace harness_detail {

inline void append_block(std::vector<bool>& key, const std::optional<BitBlock>& block, int width) {
    const std::uint32_t bits = block ? block->bits : 0U;
    for (int i = width - 1; i >= 0; --i) key.push_back(((bits >> i) & 1U) != 0);
}

struct Streams {
    RandomStream pump, sign, spdc, orientation, alice, bob, eve, eve_classical, security, filters, loss, pulse,
        sibling;
    explicit Streams(const SeedTree& t)
        : pump(t.stream("pump")), sign(t.stream("sign")), spdc(t.stream("spdc")),
          orientation(t.stream("orientation")), alice(t.stream("alice")), bob(t.stream("bob")), eve(t.stream("eve")),
          eve_classical(t.stream("eve-classical")), security(t.stream("security")), filters(t.stream("filters")),
          loss(t.stream("loss")), pulse(t.stream("pulse")), sibling(t.stream("sibling")) {}
};

} // namespace harness_detail

/**
 * Runs one session until the kept-pair target (and in decoy mode the
 * decoy-event target) is reached or the emission cap is hit. Invalid
 * configuration is reported before anything is simulated.
 */
inline SessionReport run_session(const SessionConfig& config) {
    using namespace harness_detail;
    config.validate();
    const auto started = std::chrono::steady_clock::now();

    SessionReport rep;
    rep.config = config;
    rep.config_hash = config_hash(config);

    const FibAlphabet alphabet = config.alphabet();
    const ExchangeScheme scheme = ExchangeScheme::canonical(alphabet);
    const EveTable eve_table = EveTable::enumerate(scheme);
    const std::optional<SignedCodebook> codebook =
        config.signed_mode ? std::optional<SignedCodebook>(SignedCodebook(alphabet)) : std::nullopt;
    const SpdcProfile profile = config.spdc();
    const PumpDistribution raw = config.raw_pump();
    const SorterConfig sorter{config.decoy_mode ? SortMode::decoy : SortMode::strict, config.signed_mode};
    const OamKet test = test_state(alphabet);
    const bool intercepting = intercepts(config.eve.strategy);
    const bool listening = listens(config.eve.strategy);

    FilterBank detector;
    if (config.filters) {
        const auto eq = equalization_filters(sorted_pump_distribution(raw, profile, alphabet));
        const auto det = detector_filters(eq.bank, alphabet);
        detector = det.bank;
        rep.filter_throughput = eq.throughput;
    }
    auto passes_filter = [&](Oam v, RandomStream& rng) {
        return !config.filters || rng.bernoulli(detector.transmission(v < 0 ? -v : v));
    };
    auto bob_admits = [&](Oam v) {
        const Oam mag = v < 0 ? -v : v;
        return (config.signed_mode ? v != 0 : v > 0) && alphabet.is_arm_value(mag);
    };

    Streams rs(SeedTree(config.seed));
    rep.key.bits_per_event = codebook ? codebook->width() : alphabet.bits_per_segment();
    if (config.decoy_mode) rep.decoy = DecoyCheck{};
    if (config.multiphoton.enabled) rep.pns = PnsStats{};

    std::vector<std::pair<Oam, Oam>> revealed;
    std::vector<DecoyObservation> decoys;
    std::uint64_t clock = 0;

    auto emit = [&](RandomStream& pump_rng, RandomStream& sign_rng, RandomStream& spdc_rng,
                    RandomStream& orient_rng) {
        Oam pump = raw.sample(pump_rng);
        if (config.signed_mode && sign_rng.bernoulli(0.5)) pump = -pump;
        const auto split = spdc_split(pump, profile, spdc_rng, orient_rng);
        PairEvent e;
        e.pump = pump;
        e.alice_value = split.alice;
        e.bob_emitted = split.bob;
        return sort_pair(e, alphabet, sorter);
    };

    auto done = [&] {
        const bool pairs_done = rep.counts.kept_pairs >= config.target_kept_pairs;
        const bool decoys_done = !config.decoy_mode || rep.counts.decoy_events >= config.decoy.target_events;
        return pairs_done && decoys_done;
    };

    const std::uint64_t cap = config.emission_cap();
    while (!done()) {
        if (rep.counts.emissions >= cap) {
            rep.truncated = true;
            break;
        }
        const std::uint64_t seq = rep.counts.emissions++;

        std::uint64_t photons = 1;
        if (config.multiphoton.enabled) {
            photons = rs.pulse.poisson(config.multiphoton.mean_photons);
            if (photons == 0) {
                ++rep.counts.empty_pulses;
                continue;
            }
            if (photons >= 2) ++rep.pns->multi_photon_pulses;
        }

        PairEvent ev = emit(rs.pump, rs.sign, rs.spdc, rs.orientation);
        ev.sequence = seq;
        if (!ev.sorter_kept) continue;
        ++rep.counts.sorter_kept;

        if (rs.loss.bernoulli(config.loss.alice)) {
            ++rep.counts.alice_lost;
            ev.lost = true;
            continue;
        }
        ++rep.counts.filter_trials;
        if (!passes_filter(ev.alice_value, rs.filters)) {
            ++rep.counts.filter_dropped;
            ev.filter_kept = false;
            continue;
        }
        ev.alice_tick = ++clock;

        OamKet arriving = OamKet::basis(ev.bob_emitted);
        if (intercepting && rs.eve.bernoulli(config.eve.intercept_rate)) {
            const auto r = eve_intercept_resend(arriving, alphabet, config.eve.resend_policy, rs.eve);
            arriving = r.resent;
            ev.eve_intercepted = true;
            ev.eve_measured = r.measured;
            ev.eve_choice = r.choice;
            ev.eve_tick = ++clock;
            ++rep.eve.intercepted;
            const auto cands = eve_pump_candidates(r.anchor, alphabet);
            rep.eve.pump_candidates.add(static_cast<double>(cands.size()));
            rep.eve.single_candidate.add(cands.size() == 1);
        }

        if (rs.loss.bernoulli(config.loss.bob)) {
            ++rep.counts.bob_lost;
            ev.lost = true;
            continue;
        }

        if (ev.decoy) {
            const auto obs = observe_decoy(arriving, alphabet, test, rs.bob);
            if (!obs) {
                ++rep.counts.bob_undetected;
                continue;
            }
            DecoyObservation o = *obs;
            o.tampered = ev.eve_intercepted;
            decoys.push_back(o);
            (o.tampered ? rep.decoy_tampered : rep.decoy_untampered).add(o.overlap_squared);
            if (ev.eve_intercepted) ++rep.eve.intercepted_registered;
            ev.decoy_registered = true;
            ev.decoy_overlap = o.overlap_squared;
            ev.decoy_click = o.click;
            ev.bob_tick = ++clock;
            ++rep.counts.decoy_events;
            if (config.record_events && rep.events.size() < config.max_recorded_events) rep.events.push_back(ev);
            continue;
        }

        const Oam b = measure(arriving, rs.bob);
        if (!bob_admits(b)) {
            ++rep.counts.bob_undetected;
            continue;
        }
        if (!passes_filter(b, rs.filters)) {
            ++rep.counts.filter_dropped;
            ev.filter_kept = false;
            continue;
        }
        ev.bob_value = b;
        ev.bob_tick = ++clock;
        if (ev.eve_intercepted) ++rep.eve.intercepted_registered;

        auto& out = rep.outcomes;
        ++out.alice[ev.alice_value];
        ++out.bob[b];
        ++out.bob_given_alice[ev.alice_value][b];
        if (ev.eve_intercepted) ++out.bob_given_alice_eve[{ev.alice_value, *ev.eve_measured}][b];

        if (rep.pns && photons >= 2 && config.multiphoton.eve_splits) {
            // Eve keeps one extra photon of the pulse and reads it with her own sorter.
            Oam eve_value = 0;
            if (config.multiphoton.control_same_state) {
                eve_value = ev.bob_emitted;
            } else {
                const PairEvent sib = emit(rs.sibling, rs.sibling, rs.sibling, rs.sibling);
                eve_value = sib.sorter_kept && !sib.decoy ? sib.bob_emitted : 0;
            }
            if (eve_value != 0) rep.pns->observations.push_back({eve_value, b});
        }

        if (config.signed_mode && !same_sign(ev)) {
            ++rep.counts.sign_discarded;
            if (config.record_events && rep.events.size() < config.max_recorded_events) rep.events.push_back(ev);
            continue;
        }

        ++rep.counts.kept_pairs;
        ++out.kept_pump[ev.pump];
        if (ev.eve_intercepted) ++rep.eve.kept_intercepted;
        if (config.record_events && rep.events.size() < config.max_recorded_events) rep.events.push_back(ev);

        if (rs.security.bernoulli(config.security.sample_rate)) {
            ++rep.counts.security_pairs;
            revealed.emplace_back(ev.alice_value, b);
            continue;
        }

        const ExchangeRecord x = classical_exchange(ev.alice_value, b, scheme, codebook ? &*codebook : nullptr);
        ++rep.counts.key_events;
        append_block(rep.key.alice, x.alice_block, rep.key.bits_per_event);
        append_block(rep.key.bob, x.bob_block, rep.key.bits_per_event);
        if (!x.agreed()) ++rep.key.block_mismatches;
        if (x.corruption) ++rep.key.decode_failures;

        if (listening) {
            const auto g = eve_classical_guess(eve_table, {x.alice_bit, x.bob_bit}, config.eve.guess_mode,
                                               rs.eve_classical);
            const Oam true_mag = ev.pump < 0 ? -ev.pump : ev.pump;
            rep.eve.classical_success.add(g.guess == true_mag);
        }
    }

    const CheckThresholds sec{config.security.baseline, config.security.sigmas, config.security.min_samples};
    rep.security = security_check(revealed, sec);
    if (rep.decoy) {
        const CheckThresholds dc{0.0, config.decoy.sigmas, config.decoy.min_samples};
        rep.decoy = decoy_check(decoys, alphabet, dc);
    }
    if (rep.pns) rep.pns->test = pns_information(rep.pns->observations);

    const bool compromised = rep.security.verdict == Verdict::compromised ||
                             (rep.decoy && rep.decoy->verdict == Verdict::compromised);
    const bool inconclusive = rep.security.verdict == Verdict::inconclusive ||
                              (rep.decoy && rep.decoy->verdict == Verdict::inconclusive);
    rep.verdict = compromised ? Verdict::compromised : inconclusive ? Verdict::inconclusive : Verdict::pass;

    rep.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return rep;
}

/// Exit code contract: 0 pass, 1 compromised, 2 inconclusive.
inline int exit_code(Verdict v) {
    switch (v) {
    case Verdict::pass: return 0;
    case Verdict::compromised: return 1;
    case Verdict::inconclusive: return 2;
    }
    return 2;
}

enum class SweepParameter { intercept_rate, alphabet_size, security_rate, filters };

inline SweepParameter parse_sweep_parameter(const std::string& name) {
    if (name == "intercept_rate") return SweepParameter::intercept_rate;
    if (name == "alphabet_size") return SweepParameter::alphabet_size;
    if (name == "security_rate") return SweepParameter::security_rate;
    if (name == "filters") return SweepParameter::filters;
    throw ConfigError("unknown sweep parameter \"" + name +
                      "\" (expected intercept_rate, alphabet_size, security_rate or filters)");
}

inline std::string to_string(SweepParameter p) {
    switch (p) {
    case SweepParameter::intercept_rate: return "intercept_rate";
    case SweepParameter::alphabet_size: return "alphabet_size";
    case SweepParameter::security_rate: return "security_rate";
    case SweepParameter::filters: return "filters";
    }
    return "?";
}

/// The i-th sweep config: the base with one parameter replaced and seed
/// base + i.
inline SessionConfig sweep_config(const SessionConfig& base, SweepParameter p, double value, std::size_t index) {
    SessionConfig c = base;
    c.seed = base.seed + index;
    switch (p) {
    case SweepParameter::intercept_rate:
        c.eve.intercept_rate = value;
        if (c.eve.strategy == EveStrategy::none) c.eve.strategy = EveStrategy::intercept_resend;
        if (c.eve.strategy == EveStrategy::classical_only) c.eve.strategy = EveStrategy::both;
        break;
    case SweepParameter::alphabet_size:
        if (value != std::floor(value)) throw ConfigError("alphabet_size values must be integers");
        c.alphabet_size = static_cast<int>(value);
        if (c.pump.kind == PumpKind::point || c.pump.kind == PumpKind::weights) c.pump = PumpConfig{};
        break;
    case SweepParameter::security_rate: c.security.sample_rate = value; break;
    case SweepParameter::filters:
        if (value != 0.0 && value != 1.0) throw ConfigError("filters values must be 0 or 1");
        c.filters = value != 0.0;
        break;
    }
    c.validate();
    return c;
}

/**
 * One session per value. All configs are validated before the first
 * session runs; sessions are independent and may run on several threads
 * without changing any result.
 */
inline std::vector<SessionReport> attack_sweep(const SessionConfig& base, SweepParameter p,
                                               const std::vector<double>& values, unsigned threads = 1) {
    std::vector<SessionConfig> configs;
    configs.reserve(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) configs.push_back(sweep_config(base, p, values[i], i));
    std::vector<SessionReport> out(configs.size());
    const unsigned workers = std::max(1U, std::min<unsigned>(threads, static_cast<unsigned>(configs.size())));
    if (workers == 1) {
        for (std::size_t i = 0; i < configs.size(); ++i) out[i] = run_session(configs[i]);
        return out;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (std::size_t i = w; i < configs.size(); i += workers) out[i] = run_session(configs[i]);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return out;
}

inline Json sweep_to_json(const SessionConfig& base, SweepParameter p, const std::vector<double>& values,
                          const std::vector<SessionReport>& reports) {
    Json rows = Json::array();
    for (std::size_t i = 0; i < reports.size(); ++i) rows.push_back({{"value", values[i]}, {"report", report_to_json(reports[i])}});
    return Json{{"schema_version", kReportSchemaVersion},
                {"parameter", to_string(p)},
                {"base_config_hash", config_hash(base)},
                {"rows", rows}};
}

/// Tidy per-row summary of a sweep.
inline void write_sweep_csv(std::ostream& os, SweepParameter p, const std::vector<double>& values,
                            const std::vector<SessionReport>& reports) {
    os << to_string(p)
       << ",seed,kept_pairs,security_pairs,non_adjacent_fraction,non_adjacent_sigma,key_bits,bits_per_event,"
          "key_agreed,effective_interception_rate,verdict\n";
    os.precision(17);
    for (std::size_t i = 0; i < reports.size(); ++i) {
        const auto& r = reports[i];
        const double eff =
            r.eve.intercepted == 0 ? 0.0 : static_cast<double>(r.eve.intercepted_registered) / r.eve.intercepted;
        os << values[i] << ',' << r.config.seed << ',' << r.counts.kept_pairs << ',' << r.counts.security_pairs << ','
           << r.security.non_adjacent.fraction() << ',' << r.security.non_adjacent.sigma() << ','
           << r.key.alice.size() << ',' << r.key.bits_per_event << ',' << (r.key.agreed() ? 1 : 0) << ',' << eff
           << ',' << to_string(r.verdict) << '\n';
    }
}

inline Json event_to_json(const PairEvent& e) {
    auto opt = [](const auto& o) -> Json { return o ? Json(*o) : Json(nullptr); };
    return Json{{"sequence", e.sequence},
                {"pump", e.pump},
                {"alice_value", e.alice_value},
                {"bob_emitted", e.bob_emitted},
                {"bob_value", opt(e.bob_value)},
                {"alice_fibonacci", e.alice_fibonacci},
                {"bob_fibonacci", e.bob_fibonacci},
                {"alice_sign", e.alice_sign},
                {"bob_sign", e.bob_sign},
                {"decoy", e.decoy},
                {"eve_intercepted", e.eve_intercepted},
                {"eve_measured", opt(e.eve_measured)},
                {"eve_choice", opt(e.eve_choice)},
                {"decoy_overlap", opt(e.decoy_overlap)},
                {"decoy_click", e.decoy_click},
                {"alice_tick", e.alice_tick},
                {"eve_tick", e.eve_tick},
                {"bob_tick", e.bob_tick}};
}

inline void write_events_jsonl(std::ostream& os, const std::vector<PairEvent>& events) {
    for (const auto& e : events) os << event_to_json(e).dump() << '\n';
}

inline void write_events_csv(std::ostream& os, const std::vector<PairEvent>& events) {
    os << "sequence,pump,alice_value,bob_emitted,bob_value,decoy,eve_intercepted,eve_measured,eve_choice,"
          "decoy_overlap,decoy_click,alice_tick,eve_tick,bob_tick\n";
    os.precision(17);
    for (const auto& e : events) {
        os << e.sequence << ',' << e.pump << ',' << e.alice_value << ',' << e.bob_emitted << ',';
        if (e.bob_value) os << *e.bob_value;
        os << ',' << (e.decoy ? 1 : 0) << ',' << (e.eve_intercepted ? 1 : 0) << ',';
        if (e.eve_measured) os << *e.eve_measured;
        os << ',';
        if (e.eve_choice) os << *e.eve_choice;
        os << ',';
        if (e.decoy_overlap) os << *e.decoy_overlap;
        os << ',' << (e.decoy_click ? 1 : 0) << ',' << e.alice_tick << ',' << e.eve_tick << ',' << e.bob_tick << '\n';
    }
}

} // namespace fibqkd
