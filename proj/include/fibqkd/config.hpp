#pragma once

/**
 * Session configuration and its JSON form (schema version 1).
 *
 * Every key is optional except "seed". Unknown keys, wrong types and
 * out-of-range values are rejected with the JSON path of the offender.
 */

#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "fibqkd/channel.hpp"
#include "fibqkd/errors.hpp"
#include "fibqkd/fibcode.hpp"
#include "fibqkd/parties.hpp"

namespace fibqkd {

using Json = nlohmann::json;

inline constexpr int kConfigSchemaVersion = 1;

enum class PumpKind { uniform, geometric, point, weights };

struct PumpConfig {
    PumpKind kind = PumpKind::uniform;
    double ratio = 0.5;                 // geometric
    Oam value = 21;                     // point
    std::map<Oam, double> weights;      // weights
};

struct EveConfig {
    EveStrategy strategy = EveStrategy::none;
    double intercept_rate = 1.0;
    ResendPolicy resend_policy = ResendPolicy::partner;
    GuessMode guess_mode = GuessMode::uniform;
};

struct SecurityConfig {
    double sample_rate = 0.1;
    std::uint64_t min_samples = 100;
    double sigmas = 3.0;
    double baseline = 0.0;
};

struct DecoyConfig {
    std::uint64_t target_events = 0;  // extra stop condition in decoy mode
    std::uint64_t min_samples = 100;
    double sigmas = 3.0;
};

struct MultiphotonConfig {
    bool enabled = false;
    double mean_photons = 0.5;
    bool eve_splits = true;
    bool control_same_state = false;  // sibling copies the signal (contrast run)
};

struct LossConfig {
    double alice = 0.0;
    double bob = 0.0;
};

struct SessionConfig {
    std::uint64_t seed = 0;
    int alphabet_start_index = 3;
    int alphabet_size = 8;
    bool signed_mode = false;
    bool decoy_mode = false;
    bool filters = false;
    PumpConfig pump;
    SpdcShape spdc_shape = SpdcShape::uniform;
    Oam spdc_bandwidth = 89;
    EveConfig eve;
    SecurityConfig security;
    DecoyConfig decoy;
    MultiphotonConfig multiphoton;
    LossConfig loss;
    std::uint64_t target_kept_pairs = 10000;
    std::uint64_t max_emissions = 0;  // 0: derived from the target
    std::uint64_t max_recorded_events = 100000;
    bool record_events = false;

    FibAlphabet alphabet() const { return FibAlphabet(alphabet_start_index, alphabet_size); }

    std::uint64_t emission_cap() const {
        return max_emissions ? max_emissions : 2000 * std::max<std::uint64_t>(target_kept_pairs, decoy.target_events) + 1000000;
    }

    /// Throws ConfigError describing the first problem found.
    void validate() const {
        auto prob = [](double p, const char* what) {
            if (!(p >= 0.0 && p <= 1.0)) throw ConfigError(std::string(what) + " must be in [0, 1]");
        };
        const FibAlphabet a = alphabet();
        prob(eve.intercept_rate, "eve.intercept_rate");
        prob(security.sample_rate, "security.sample_rate");
        prob(security.baseline, "security.baseline");
        prob(loss.alice, "loss.alice");
        prob(loss.bob, "loss.bob");
        if (!(security.sigmas > 0.0)) throw ConfigError("security.sigmas must be > 0");
        if (!(decoy.sigmas > 0.0)) throw ConfigError("decoy.sigmas must be > 0");
        if (spdc_bandwidth < 1) throw ConfigError("spdc.bandwidth must be >= 1");
        if (2 * spdc_bandwidth < a.largest())
            throw ConfigError("spdc.bandwidth " + std::to_string(spdc_bandwidth) + " cannot split the largest pump " +
                              std::to_string(a.largest()));
        if (decoy_mode && signed_mode) throw ConfigError("decoy mode is defined for unsigned OAM only");
        if (target_kept_pairs == 0 && !(decoy_mode && decoy.target_events > 0))
            throw ConfigError("target_kept_pairs must be > 0");
        if (multiphoton.enabled && !(multiphoton.mean_photons > 0.0 && multiphoton.mean_photons <= 20.0))
            throw ConfigError("multiphoton.mean_photons must be in (0, 20]");
        switch (pump.kind) {
        case PumpKind::uniform: break;
        case PumpKind::geometric:
            if (!(pump.ratio > 0.0)) throw ConfigError("pump.ratio must be > 0");
            break;
        case PumpKind::point:
            if (!a.contains(pump.value)) throw ConfigError("pump.value " + std::to_string(pump.value) + " is not in the alphabet");
            break;
        case PumpKind::weights:
            if (pump.weights.empty()) throw ConfigError("pump.weights is empty");
            for (const auto& [v, w] : pump.weights) {
                if (!a.contains(v)) throw ConfigError("pump.weights key " + std::to_string(v) + " is not in the alphabet");
                if (!(w >= 0.0) || !std::isfinite(w)) throw ConfigError("pump.weights values must be finite and >= 0");
            }
            break;
        }
        const PumpDistribution raw = raw_pump();
        if (filters) {
            // Equalization needs every pump value to be reachable.
            for (const auto& [v, w] : raw.weights())
                if (w <= 0.0) throw ConfigError("filters need a strictly positive pump weight for " + std::to_string(v));
        }
    }

    PumpDistribution raw_pump() const {
        const FibAlphabet a = alphabet();
        switch (pump.kind) {
        case PumpKind::uniform: return PumpDistribution::uniform(a);
        case PumpKind::geometric: return PumpDistribution::geometric(a, pump.ratio);
        case PumpKind::point: return PumpDistribution::point(pump.value);
        case PumpKind::weights: return PumpDistribution::from_weights({pump.weights.begin(), pump.weights.end()});
        }
        throw ConfigError("unknown pump kind");
    }

    SpdcProfile spdc() const { return SpdcProfile(spdc_shape, spdc_bandwidth); }
};

namespace config_detail {

template <class E>
struct EnumNames {
    std::vector<std::pair<E, const char*>> items;

    const char* name(E e) const {
        for (const auto& [v, n] : items)
            if (v == e) return n;
        return "?";
    }
    E parse(const std::string& s, const std::string& path) const {
        std::string allowed;
        for (const auto& [v, n] : items) {
            if (s == n) return v;
            allowed += std::string(allowed.empty() ? "" : ", ") + n;
        }
        throw ConfigError(path + ": unknown value \"" + s + "\" (expected one of " + allowed + ")");
    }
};

inline const EnumNames<PumpKind> kPumpKinds{{{PumpKind::uniform, "uniform"},
                                             {PumpKind::geometric, "geometric"},
                                             {PumpKind::point, "point"},
                                             {PumpKind::weights, "weights"}}};
inline const EnumNames<SpdcShape> kShapes{{{SpdcShape::uniform, "uniform"}, {SpdcShape::triangular, "triangular"}}};
inline const EnumNames<EveStrategy> kStrategies{{{EveStrategy::none, "none"},
                                                 {EveStrategy::intercept_resend, "intercept_resend"},
                                                 {EveStrategy::classical_only, "classical_only"},
                                                 {EveStrategy::both, "both"}}};
inline const EnumNames<ResendPolicy> kPolicies{{{ResendPolicy::partner, "partner"}, {ResendPolicy::consecutive, "consecutive"}}};
inline const EnumNames<GuessMode> kGuessModes{{{GuessMode::uniform, "uniform"}, {GuessMode::max_likelihood, "max_likelihood"}}};

/// Typed access to one JSON object that remembers which keys were read.
class ObjectReader {
public:
    ObjectReader(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(path_ + ": expected an object");
    }

    bool has(const std::string& key) {
        seen_.insert(key);
        return j_.contains(key);
    }

    std::string child(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    const Json& raw(const std::string& key) {
        seen_.insert(key);
        return j_.at(key);
    }

    bool get_bool(const std::string& key, bool fallback) {
        if (!has(key)) return fallback;
        const Json& v = j_.at(key);
        if (!v.is_boolean()) throw ConfigError(child(key) + ": expected a boolean");
        return v.get<bool>();
    }

    double get_double(const std::string& key, double fallback) {
        if (!has(key)) return fallback;
        const Json& v = j_.at(key);
        if (!v.is_number()) throw ConfigError(child(key) + ": expected a number");
        return v.get<double>();
    }

    std::int64_t get_int(const std::string& key, std::int64_t fallback) {
        if (!has(key)) return fallback;
        const Json& v = j_.at(key);
        if (!v.is_number_integer()) throw ConfigError(child(key) + ": expected an integer");
        return v.get<std::int64_t>();
    }

    std::uint64_t get_count(const std::string& key, std::uint64_t fallback) {
        if (!has(key)) return fallback;
        const Json& v = j_.at(key);
        if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0))
            throw ConfigError(child(key) + ": expected a non-negative integer");
        return v.get<std::uint64_t>();
    }

    std::string get_string(const std::string& key, const std::string& fallback) {
        if (!has(key)) return fallback;
        const Json& v = j_.at(key);
        if (!v.is_string()) throw ConfigError(child(key) + ": expected a string");
        return v.get<std::string>();
    }

    template <class E>
    E get_enum(const std::string& key, E fallback, const EnumNames<E>& names) {
        if (!has(key)) return fallback;
        return names.parse(get_string(key, ""), child(key));
    }

    void finish() const {
        for (const auto& [k, v] : j_.items())
            if (!seen_.count(k)) throw ConfigError(child(k) + ": unknown key");
    }

private:
    const Json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

} // namespace config_detail

/// Parses and validates a schema-1 config. Throws ConfigError.
inline SessionConfig config_from_json(const Json& j) {
    using namespace config_detail;
    SessionConfig c;
    ObjectReader root(j, "");
    const auto version = root.get_int("schema_version", kConfigSchemaVersion);
    if (version != kConfigSchemaVersion)
        throw ConfigError("schema_version " + std::to_string(version) + " is not supported (expected 1)");
    if (!root.has("seed")) throw ConfigError("seed: required");
    c.seed = root.get_count("seed", 0);

    if (root.has("alphabet")) {
        ObjectReader a(root.raw("alphabet"), "alphabet");
        const bool by_value = a.has("start_value");
        const bool by_index = a.has("start_index");
        if (by_value && by_index) throw ConfigError("alphabet: give start_value or start_index, not both");
        if (by_value) {
            const auto v = a.get_int("start_value", 3);
            const auto k = fib::index_of(v);
            if (!k) throw ConfigError("alphabet.start_value: " + std::to_string(v) + " is not a Fibonacci value");
            c.alphabet_start_index = *k;
        } else {
            c.alphabet_start_index = static_cast<int>(a.get_int("start_index", 3));
        }
        c.alphabet_size = static_cast<int>(a.get_int("size", 8));
        a.finish();
    }
    if (root.has("modes")) {
        ObjectReader m(root.raw("modes"), "modes");
        c.signed_mode = m.get_bool("signed", false);
        c.decoy_mode = m.get_bool("decoy", false);
        c.filters = m.get_bool("filters", false);
        m.finish();
    }
    if (root.has("pump")) {
        ObjectReader p(root.raw("pump"), "pump");
        c.pump.kind = p.get_enum("kind", PumpKind::uniform, kPumpKinds);
        c.pump.ratio = p.get_double("ratio", c.pump.ratio);
        c.pump.value = p.get_int("value", c.pump.value);
        if (p.has("weights")) {
            ObjectReader w(p.raw("weights"), "pump.weights");
            for (const auto& [k, v] : p.raw("weights").items()) {
                Oam key = 0;
                try {
                    std::size_t used = 0;
                    key = std::stoll(k, &used);
                    if (used != k.size()) throw std::invalid_argument(k);
                } catch (const std::exception&) {
                    throw ConfigError("pump.weights: key \"" + k + "\" is not an integer");
                }
                c.pump.weights[key] = w.get_double(k, 0.0);
            }
            w.finish();
        }
        p.finish();
    }
    if (root.has("spdc")) {
        ObjectReader s(root.raw("spdc"), "spdc");
        c.spdc_shape = s.get_enum("shape", SpdcShape::uniform, kShapes);
        c.spdc_bandwidth = s.get_int("bandwidth", 89);
        s.finish();
    }
    if (root.has("eve")) {
        ObjectReader e(root.raw("eve"), "eve");
        c.eve.strategy = e.get_enum("strategy", EveStrategy::none, kStrategies);
        c.eve.intercept_rate = e.get_double("intercept_rate", c.eve.intercept_rate);
        c.eve.resend_policy = e.get_enum("resend_policy", ResendPolicy::partner, kPolicies);
        c.eve.guess_mode = e.get_enum("guess_mode", GuessMode::uniform, kGuessModes);
        e.finish();
    }
    if (root.has("security")) {
        ObjectReader s(root.raw("security"), "security");
        c.security.sample_rate = s.get_double("sample_rate", c.security.sample_rate);
        c.security.min_samples = s.get_count("min_samples", c.security.min_samples);
        c.security.sigmas = s.get_double("sigmas", c.security.sigmas);
        c.security.baseline = s.get_double("baseline", c.security.baseline);
        s.finish();
    }
    if (root.has("decoy")) {
        ObjectReader d(root.raw("decoy"), "decoy");
        c.decoy.target_events = d.get_count("target_events", 0);
        c.decoy.min_samples = d.get_count("min_samples", c.decoy.min_samples);
        c.decoy.sigmas = d.get_double("sigmas", c.decoy.sigmas);
        d.finish();
    }
    if (root.has("multiphoton")) {
        ObjectReader m(root.raw("multiphoton"), "multiphoton");
        c.multiphoton.enabled = m.get_bool("enabled", false);
        c.multiphoton.mean_photons = m.get_double("mean_photons", c.multiphoton.mean_photons);
        c.multiphoton.eve_splits = m.get_bool("eve_splits", true);
        c.multiphoton.control_same_state = m.get_bool("control_same_state", false);
        m.finish();
    }
    if (root.has("loss")) {
        ObjectReader l(root.raw("loss"), "loss");
        c.loss.alice = l.get_double("alice", 0.0);
        c.loss.bob = l.get_double("bob", 0.0);
        l.finish();
    }
    c.target_kept_pairs = root.get_count("target_kept_pairs", c.target_kept_pairs);
    c.max_emissions = root.get_count("max_emissions", 0);
    c.max_recorded_events = root.get_count("max_recorded_events", c.max_recorded_events);
    c.record_events = root.get_bool("record_events", false);
    root.finish();

    try {
        c.validate();
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }
    return c;
}

/// Fully explicit form: every default spelled out. Its dump is the basis of
/// the config hash.
inline Json config_to_json(const SessionConfig& c) {
    using namespace config_detail;
    Json pump{{"kind", kPumpKinds.name(c.pump.kind)}};
    if (c.pump.kind == PumpKind::geometric) pump["ratio"] = c.pump.ratio;
    if (c.pump.kind == PumpKind::point) pump["value"] = c.pump.value;
    if (c.pump.kind == PumpKind::weights) {
        Json w = Json::object();
        for (const auto& [v, p] : c.pump.weights) w[std::to_string(v)] = p;
        pump["weights"] = w;
    }
    return Json{
        {"schema_version", kConfigSchemaVersion},
        {"seed", c.seed},
        {"alphabet", {{"start_index", c.alphabet_start_index}, {"size", c.alphabet_size}}},
        {"modes", {{"signed", c.signed_mode}, {"decoy", c.decoy_mode}, {"filters", c.filters}}},
        {"pump", pump},
        {"spdc", {{"shape", kShapes.name(c.spdc_shape)}, {"bandwidth", c.spdc_bandwidth}}},
        {"eve",
         {{"strategy", kStrategies.name(c.eve.strategy)},
          {"intercept_rate", c.eve.intercept_rate},
          {"resend_policy", kPolicies.name(c.eve.resend_policy)},
          {"guess_mode", kGuessModes.name(c.eve.guess_mode)}}},
        {"security",
         {{"sample_rate", c.security.sample_rate},
          {"min_samples", c.security.min_samples},
          {"sigmas", c.security.sigmas},
          {"baseline", c.security.baseline}}},
        {"decoy",
         {{"target_events", c.decoy.target_events}, {"min_samples", c.decoy.min_samples}, {"sigmas", c.decoy.sigmas}}},
        {"multiphoton",
         {{"enabled", c.multiphoton.enabled},
          {"mean_photons", c.multiphoton.mean_photons},
          {"eve_splits", c.multiphoton.eve_splits},
          {"control_same_state", c.multiphoton.control_same_state}}},
        {"loss", {{"alice", c.loss.alice}, {"bob", c.loss.bob}}},
        {"target_kept_pairs", c.target_kept_pairs},
        {"max_emissions", c.max_emissions},
        {"max_recorded_events", c.max_recorded_events},
        {"record_events", c.record_events},
    };
}

inline std::string to_string(EveStrategy s) { return config_detail::kStrategies.name(s); }
inline std::string to_string(ResendPolicy p) { return config_detail::kPolicies.name(p); }
inline std::string to_string(GuessMode g) { return config_detail::kGuessModes.name(g); }

inline SessionConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    Json j;
    try {
        j = Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw ConfigError("config " + path + " is not valid JSON: " + e.what());
    }
    return config_from_json(j);
}

} // namespace fibqkd
