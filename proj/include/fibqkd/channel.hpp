#pragma once

/**
 * The photon pipeline: pump OAM sampling, OAM-conserving SPDC splitting,
 * OAM sorting and the per-position filters that flatten the detected pump
 * distribution.
 */

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fibqkd/errors.hpp"
#include "fibqkd/fibcode.hpp"
#include "fibqkd/quantum.hpp"
#include "fibqkd/rng.hpp"

namespace fibqkd {

enum class Provenance { raw, equalized };

class PumpDistribution {
public:
    PumpDistribution() = default;

    /// Normalizes the given non-negative weights. Zero-weight entries are
    /// kept so that equalization can reject them explicitly.
    static PumpDistribution from_weights(std::vector<std::pair<Oam, double>> weights,
                                         Provenance provenance = Provenance::raw) {
        if (weights.empty()) throw ConfigError("pump distribution is empty");
        double total = 0.0;
        for (const auto& [v, w] : weights) {
            if (!(w >= 0.0) || !std::isfinite(w))
                throw ConfigError("pump weight for " + std::to_string(v) + " must be finite and >= 0");
            total += w;
        }
        if (total <= 0.0) throw ConfigError("pump distribution has zero total weight");
        std::sort(weights.begin(), weights.end());
        for (std::size_t i = 1; i < weights.size(); ++i)
            if (weights[i].first == weights[i - 1].first)
                throw ConfigError("duplicate pump value " + std::to_string(weights[i].first));
        PumpDistribution d;
        d.provenance_ = provenance;
        double acc = 0.0;
        for (auto& [v, w] : weights) {
            w /= total;
            acc += w;
            d.cumulative_.push_back(acc);
        }
        d.weights_ = std::move(weights);
        return d;
    }

    static PumpDistribution uniform(const FibAlphabet& alphabet) {
        std::vector<std::pair<Oam, double>> w;
        for (Oam v : alphabet.members()) w.emplace_back(v, 1.0);
        return from_weights(std::move(w));
    }

    /// Weight ratio^k on the k-th alphabet member.
    static PumpDistribution geometric(const FibAlphabet& alphabet, double ratio) {
        if (!(ratio > 0.0)) throw ConfigError("geometric ratio must be > 0");
        std::vector<std::pair<Oam, double>> w;
        double x = 1.0;
        for (Oam v : alphabet.members()) {
            w.emplace_back(v, x);
            x *= ratio;
        }
        return from_weights(std::move(w));
    }

    static PumpDistribution point(Oam v) { return from_weights({{v, 1.0}}); }

    bool empty() const noexcept { return weights_.empty(); }
    Provenance provenance() const noexcept { return provenance_; }
    const std::vector<std::pair<Oam, double>>& weights() const noexcept { return weights_; }

    double weight(Oam v) const {
        const auto it = std::lower_bound(weights_.begin(), weights_.end(), std::pair<Oam, double>{v, -1.0});
        return (it != weights_.end() && it->first == v) ? it->second : 0.0;
    }

    std::map<Oam, double> as_map() const { return {weights_.begin(), weights_.end()}; }

    Oam sample(RandomStream& rng) const {
        if (weights_.empty()) throw ConfigError("cannot sample an empty pump distribution");
        const double u = rng.uniform();
        const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
        const auto idx = std::min<std::size_t>(static_cast<std::size_t>(it - cumulative_.begin()), weights_.size() - 1);
        return weights_[idx].first;
    }

private:
    std::vector<std::pair<Oam, double>> weights_;
    std::vector<double> cumulative_;
    Provenance provenance_ = Provenance::raw;
};

inline Oam sample_pump(const PumpDistribution& dist, RandomStream& rng) { return dist.sample(rng); }

enum class SpdcShape { uniform, triangular };

/**
 * Distribution of the first arm's OAM l (partner pump - l) for a given
 * pump. Both arms are limited to |l| <= bandwidth. The triangular shape
 * favours near-equal splits and falls linearly to the bandwidth edge.
 */
class SpdcProfile {
public:
    SpdcProfile(SpdcShape shape, Oam bandwidth) : shape_(shape), bandwidth_(bandwidth) {
        if (bandwidth < 1) throw ConfigError("SPDC bandwidth must be >= 1");
    }

    SpdcShape shape() const noexcept { return shape_; }
    Oam bandwidth() const noexcept { return bandwidth_; }

    std::pair<Oam, Oam> support(Oam pump) const {
        const Oam lo = std::max(-bandwidth_, pump - bandwidth_);
        const Oam hi = std::min(bandwidth_, pump + bandwidth_);
        if (lo > hi) throw ConfigError("pump " + std::to_string(pump) + " exceeds twice the SPDC bandwidth");
        return {lo, hi};
    }

    double weight(Oam l, Oam pump) const {
        const auto [lo, hi] = support(pump);
        if (l < lo || l > hi) return 0.0;
        if (shape_ == SpdcShape::uniform) return 1.0 / static_cast<double>(hi - lo + 1);
        double total = 0.0;
        for (Oam x = lo; x <= hi; ++x) total += raw_triangle(x, pump);
        return raw_triangle(l, pump) / total;
    }

    Oam sample(Oam pump, RandomStream& rng) const {
        const auto [lo, hi] = support(pump);
        if (shape_ == SpdcShape::uniform) return rng.uniform_int(lo, hi);
        const double peak = static_cast<double>(bandwidth_ + 1 - (std::abs(pump) + 1) / 2);
        for (;;) {
            const Oam l = rng.uniform_int(lo, hi);
            if (rng.uniform() * peak < raw_triangle(l, pump)) return l;
        }
    }

private:
    double raw_triangle(Oam l, Oam pump) const {
        return static_cast<double>(bandwidth_ + 1 - std::max(std::abs(l), std::abs(pump - l)));
    }

    SpdcShape shape_;
    Oam bandwidth_;
};

struct SplitResult {
    Oam alice;
    Oam bob;
};

/// Draws l from the profile; the pair (l, pump - l) goes to Alice/Bob in
/// either orientation with equal probability.
inline SplitResult spdc_split(Oam pump, const SpdcProfile& profile, RandomStream& split_rng,
                              RandomStream& orientation_rng) {
    const Oam l = profile.sample(pump, split_rng);
    const Oam partner = pump - l;
    return orientation_rng.bernoulli(0.5) ? SplitResult{l, partner} : SplitResult{partner, l};
}

/**
 * Pump distribution as seen by the detectors: raw pump weight times the
 * probability that SPDC lands on the Fibonacci decomposition.
 */
inline PumpDistribution sorted_pump_distribution(const PumpDistribution& raw, const SpdcProfile& profile,
                                                 const FibAlphabet& alphabet) {
    std::vector<std::pair<Oam, double>> w;
    for (const auto& [pump, p] : raw.weights()) {
        const Oam mag = pump < 0 ? -pump : pump;
        if (!alphabet.contains(mag)) throw ConfigError("pump value " + std::to_string(pump) + " is not in the alphabet");
        const auto [larger, smaller] = decompose(mag);
        const Oam s = pump < 0 ? -1 : 1;
        w.emplace_back(pump, p * (profile.weight(s * larger, pump) + profile.weight(s * smaller, pump)));
    }
    return PumpDistribution::from_weights(std::move(w), raw.provenance());
}

class FilterBank {
public:
    FilterBank() = default;

    explicit FilterBank(std::map<Oam, double> transmissions) : t_(std::move(transmissions)) {
        bool any_open = t_.empty();
        for (const auto& [v, t] : t_) {
            if (!(t >= 0.0 && t <= 1.0)) throw ConfigError("filter transmission for " + std::to_string(v) + " not in [0, 1]");
            if (t >= 1.0 - 1e-15) any_open = true;
        }
        if (!any_open) throw ConfigError("filter bank needs at least one fully open channel");
    }

    /// Values without an explicit filter pass unattenuated.
    double transmission(Oam v) const {
        const auto it = t_.find(v);
        return it == t_.end() ? 1.0 : it->second;
    }

    const std::map<Oam, double>& transmissions() const noexcept { return t_; }

    bool trivial() const {
        return std::all_of(t_.begin(), t_.end(), [](const auto& kv) { return kv.second >= 1.0; });
    }

private:
    std::map<Oam, double> t_;
};

struct Equalization {
    FilterBank bank;          // keyed by pump value
    double throughput = 1.0;  // expected surviving fraction, N * p_min
};

/// t_l = p_min / p_l, so p_l t_l is flat.
inline Equalization equalization_filters(const PumpDistribution& detected) {
    if (detected.empty()) throw ConfigError("cannot equalize an empty distribution");
    double p_min = 1.0;
    for (const auto& [v, p] : detected.weights()) {
        if (p <= 0.0) throw ConfigError("cannot equalize: value " + std::to_string(v) + " has zero weight");
        p_min = std::min(p_min, p);
    }
    std::map<Oam, double> t;
    for (const auto& [v, p] : detected.weights()) t[v] = std::min(1.0, p_min / p);
    return {FilterBank(std::move(t)), static_cast<double>(detected.weights().size()) * p_min};
}

struct DetectorFilters {
    FilterBank bank;     // keyed by arm value (|l|), same bank at both detectors
    double scale = 1.0;  // g(a) g(b) = scale * t(a + b) for every pump
};

/**
 * Factor a pump-keyed bank into per-detector transmissions. Arm values
 * a_0 < ... < a_N satisfy a_i + a_{i+1} = pump_i, so g(a_i) g(a_{i+1}) =
 * c t(pump_i) is a chain: solved in log space, then even- and odd-position
 * values are scaled separately so each class peaks at transmission 1.
 */
inline DetectorFilters detector_filters(const FilterBank& pump_bank, const FibAlphabet& alphabet) {
    const auto arms = alphabet.arm_values();
    const auto members = alphabet.members();
    std::vector<double> x(arms.size(), 0.0);
    for (std::size_t i = 0; i < members.size(); ++i) {
        const double t = pump_bank.transmission(members[i]);
        if (t <= 0.0) throw ConfigError("pump transmission must be > 0 to factor into detector filters");
        x[i + 1] = std::log(t) - x[i];
    }
    double even_max = -INFINITY;
    double odd_max = -INFINITY;
    for (std::size_t i = 0; i < x.size(); ++i) (i % 2 == 0 ? even_max : odd_max) = std::max(i % 2 == 0 ? even_max : odd_max, x[i]);
    std::map<Oam, double> g;
    for (std::size_t i = 0; i < x.size(); ++i) g[arms[i]] = std::min(1.0, std::exp(x[i] - (i % 2 == 0 ? even_max : odd_max)));
    return {FilterBank(std::move(g)), std::exp(-(even_max + odd_max))};
}

enum class SortMode { strict, decoy };

struct SorterConfig {
    SortMode mode = SortMode::strict;
    bool signed_values = false;
};

/// One source emission and everything that happened to it.
struct PairEvent {
    std::uint64_t sequence = 0;
    Oam pump = 0;
    Oam alice_value = 0;
    Oam bob_emitted = 0;              // partner value at emission; alice_value + bob_emitted == pump
    std::optional<Oam> bob_value;     // what Bob's detector registered, if anything

    bool alice_fibonacci = false;
    bool bob_fibonacci = false;
    int alice_sign = 1;
    int bob_sign = 1;

    bool sorter_kept = false;
    bool decoy = false;
    bool filter_kept = true;
    bool lost = false;

    bool eve_intercepted = false;
    std::optional<Oam> eve_measured;
    std::optional<std::size_t> eve_choice;

    // Decoy events only: Bob's test-state measurement.
    bool decoy_registered = false;
    std::optional<double> decoy_overlap;
    bool decoy_click = false;

    // Logical clock; 0 means the step did not happen.
    std::uint64_t alice_tick = 0;
    std::uint64_t eve_tick = 0;
    std::uint64_t bob_tick = 0;
};

/**
 * Arm classification and sorter survival on a realized pair. Strict mode
 * keeps pairs with both arms in the arm-value set. Decoy mode also keeps
 * pairs where Alice's value is not Fibonacci but Bob's is an alphabet
 * member; those are flagged for the test-state check. Without signed mode
 * negative and zero OAM never reach a detector.
 */
inline PairEvent sort_pair(PairEvent event, const FibAlphabet& alphabet, const SorterConfig& config = {}) {
    auto admissible = [&](Oam v) { return config.signed_values ? v != 0 : v > 0; };
    auto mag = [](Oam v) { return v < 0 ? -v : v; };
    const Oam a = event.alice_value;
    const Oam b = event.bob_emitted;
    event.alice_sign = sign_of(a);
    event.bob_sign = sign_of(b);
    event.alice_fibonacci = admissible(a) && fib::is_fibonacci(mag(a));
    event.bob_fibonacci = admissible(b) && fib::is_fibonacci(mag(b));
    const bool alice_arm = admissible(a) && alphabet.is_arm_value(mag(a));
    const bool bob_arm = admissible(b) && alphabet.is_arm_value(mag(b));
    event.sorter_kept = alice_arm && bob_arm;
    event.decoy = false;
    if (!event.sorter_kept && config.mode == SortMode::decoy && admissible(a) && !fib::is_fibonacci(mag(a)) &&
        admissible(b) && alphabet.contains(mag(b))) {
        event.sorter_kept = true;
        event.decoy = true;
    }
    return event;
}

/**
 * State of Bob's photon after Alice registers `measured` on a sorted pair:
 * the Fibonacci neighbours of |measured| whose sum with it is an alphabet
 * member, weighted by sqrt of the (sorted) pump weight. Boundary values
 * give a single term.
 */
inline OamKet conditional_partner_ket(Oam measured, const FibAlphabet& alphabet,
                                      const std::map<Oam, double>& pump_weights = {}) {
    const Oam mag = measured < 0 ? -measured : measured;
    if (!alphabet.is_arm_value(mag))
        throw DomainError(std::to_string(measured) + " does not appear in any decomposition of the alphabet");
    const Oam s = measured < 0 ? -1 : 1;
    std::vector<Oam> values;
    std::vector<Amplitude> amps;
    for (auto c : {fib::below(mag), fib::above(mag)}) {
        if (!c || !alphabet.contains(mag + *c)) continue;
        double w = 1.0;
        if (!pump_weights.empty()) {
            const auto it = pump_weights.find(s * (mag + *c));
            w = it == pump_weights.end() ? 0.0 : it->second;
        }
        if (w <= 0.0) continue;
        values.push_back(s * *c);
        amps.emplace_back(std::sqrt(w), 0.0);
    }
    if (values.empty()) throw DomainError("no partner with positive weight for " + std::to_string(measured));
    return superpose(values, amps);
}

} // namespace fibqkd
