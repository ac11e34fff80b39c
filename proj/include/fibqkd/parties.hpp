#pragma once

/**
 * Alice, Bob and Eve: the intercept-resend attack, the classical bit
 * exchange, the adjacency check on revealed pairs, the test-state check on
 * decoy events, sign sifting and Eve's classical guess.
 */

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fibqkd/channel.hpp"
#include "fibqkd/errors.hpp"
#include "fibqkd/fibcode.hpp"
#include "fibqkd/quantum.hpp"
#include "fibqkd/rng.hpp"
#include "fibqkd/stats.hpp"

namespace fibqkd {

enum class EveStrategy { none, intercept_resend, classical_only, both };

inline bool intercepts(EveStrategy s) { return s == EveStrategy::intercept_resend || s == EveStrategy::both; }
inline bool listens(EveStrategy s) { return s == EveStrategy::classical_only || s == EveStrategy::both; }

/**
 * What Eve rebuilds after measuring v.
 *
 * partner: she assumes Alice holds one of v's neighbours and sends the
 * state Bob would have had in that case, e.g. v = 5 gives (|2>+|5>) or
 * (|5>+|13>). consecutive: (|below v>+|v>) or (|v>+|above v>), using only
 * pairs inside the alphabet when there are any, else pairs a sorter can
 * pass.
 */
enum class ResendPolicy { partner, consecutive };

enum class GuessMode { uniform, max_likelihood };

/// The Fibonacci value Eve builds her resend around. Non-Fibonacci
/// measurements snap to the nearest value (ties down); sign is kept.
inline Oam eve_anchor(Oam measured) {
    const Oam mag = measured < 0 ? -measured : measured;
    const Oam a = fib::nearest(mag);
    return measured < 0 ? -a : a;
}

inline std::vector<OamKet> resend_options(Oam measured, const FibAlphabet& alphabet, ResendPolicy policy) {
    const Oam anchor = eve_anchor(measured);
    const Oam s = anchor < 0 ? -1 : 1;
    const Oam m = anchor * s;
    const auto lo = fib::below(m);
    const auto hi = fib::above(m);
    std::vector<OamKet> out;
    auto pair_ket = [&](Oam x, Oam y) {
        const std::vector<Oam> v{s * x, s * y};
        return equal_superposition(v);
    };

    if (policy == ResendPolicy::partner) {
        for (auto c : {lo, hi})
            if (c && alphabet.contains(m + *c)) out.push_back(conditional_partner_ket(s * *c, alphabet));
        if (out.empty()) {
            const auto k = *fib::index_of(m);
            if (k >= 3) out.push_back(pair_ket(fib::value(k - 2), m));
            if (k + 2 <= fib::kMaxIndex) out.push_back(pair_ket(m, fib::value(k + 2)));
        }
        return out;
    }

    auto add_pairs = [&](auto admit) {
        if (lo && admit(*lo) && admit(m)) out.push_back(pair_ket(*lo, m));
        if (hi && admit(m) && admit(*hi)) out.push_back(pair_ket(m, *hi));
    };
    add_pairs([&](Oam v) { return alphabet.contains(v); });
    if (out.empty()) add_pairs([&](Oam v) { return alphabet.contains(v) || alphabet.is_arm_value(v); });
    if (out.empty()) {
        if (lo) out.push_back(pair_ket(*lo, m));
        if (hi) out.push_back(pair_ket(m, *hi));
    }
    return out;
}

struct InterceptResult {
    Oam measured = 0;
    Oam anchor = 0;
    OamKet resent;
    std::size_t choice = 0;
    std::size_t options = 0;
};

/// Eve measures the photon in transit and replaces it with one of her
/// resend options, chosen uniformly.
inline InterceptResult eve_intercept_resend(const OamKet& in_transit, const FibAlphabet& alphabet,
                                            ResendPolicy policy, RandomStream& rng) {
    InterceptResult r;
    r.measured = measure(in_transit, rng);
    r.anchor = eve_anchor(r.measured);
    auto options = resend_options(r.measured, alphabet, policy);
    r.options = options.size();
    r.choice = static_cast<std::size_t>(rng.below(options.size()));
    r.resent = std::move(options[r.choice]);
    return r;
}

/// Pump values consistent with one arm value alone: what Eve's quantum
/// measurement tells her.
inline std::vector<Oam> eve_pump_candidates(Oam arm_value, const FibAlphabet& alphabet) {
    const Oam mag = arm_value < 0 ? -arm_value : arm_value;
    std::vector<Oam> out;
    for (auto c : {fib::below(mag), fib::above(mag)})
        if (c && alphabet.contains(mag + *c)) out.push_back(arm_value < 0 ? -(mag + *c) : mag + *c);
    return out;
}

struct ExchangeRecord {
    Oam alice_value = 0;
    Oam bob_value = 0;
    int alice_bit = 0;
    int bob_bit = 0;
    std::optional<Oam> bob_decoded;    // Bob's reading of Alice's value
    std::optional<Oam> alice_decoded;  // Alice's reading of Bob's value
    std::optional<Oam> alice_pump;     // each side's reconciled pump
    std::optional<Oam> bob_pump;
    std::optional<BitBlock> alice_block;
    std::optional<BitBlock> bob_block;
    bool protocol_violation = false;   // the true values are not adjacent
    bool corruption = false;           // some decode had no unique answer

    bool agreed() const { return alice_block && bob_block && *alice_block == *bob_block; }
};

/**
 * One round of the bit exchange. Alice announces her bit; Bob decodes her
 * value, then answers with the scheme chosen by the parity of the value he
 * decoded; Alice decodes Bob. Each side adds its own value to the decoded
 * one. With a codebook the signed block is used, otherwise the unsigned one.
 */
inline ExchangeRecord classical_exchange(Oam alice_value, Oam bob_value, const ExchangeScheme& scheme,
                                         const SignedCodebook* codebook = nullptr) {
    ExchangeRecord r;
    r.alice_value = alice_value;
    r.bob_value = bob_value;
    r.protocol_violation = !is_adjacent(alice_value, bob_value);

    r.alice_bit = scheme.alice_bit(alice_value);
    r.bob_decoded = scheme.decode_partner_value(bob_value, r.alice_bit, Role::bob);
    // Bob can only condition on what he decoded; an undecodable bit leaves
    // him assuming an even partner.
    r.bob_bit = scheme.bob_bit(bob_value, r.bob_decoded.value_or(0));
    r.alice_decoded = scheme.decode_partner_value(alice_value, r.bob_bit, Role::alice);
    r.corruption = !r.bob_decoded || !r.alice_decoded;

    auto block_for = [&](Oam pump) -> std::optional<BitBlock> {
        const Oam mag = pump < 0 ? -pump : pump;
        if (!scheme.alphabet().contains(mag)) return std::nullopt;
        if (codebook) return codebook->encode(pump);
        if (pump < 0) return std::nullopt;
        return scheme.alphabet().encode_segment(pump);
    };
    if (r.alice_decoded) {
        r.alice_pump = alice_value + *r.alice_decoded;
        r.alice_block = block_for(*r.alice_pump);
    }
    if (r.bob_decoded) {
        r.bob_pump = bob_value + *r.bob_decoded;
        r.bob_block = block_for(*r.bob_pump);
    }
    return r;
}

enum class Verdict { pass, compromised, inconclusive };

inline std::string to_string(Verdict v) {
    switch (v) {
    case Verdict::pass: return "pass";
    case Verdict::compromised: return "compromised";
    case Verdict::inconclusive: return "inconclusive";
    }
    return "inconclusive";
}

struct CheckThresholds {
    double baseline = 0.0;           // non-adjacency expected without Eve
    double sigmas = 3.0;
    std::uint64_t min_samples = 100; // below this no verdict is issued
};

struct SecurityCheck {
    Proportion non_adjacent;
    double threshold = 0.0;
    Verdict verdict = Verdict::inconclusive;
};

/// Adjacency check on the revealed (Alice, Bob) pairs. The threshold is
/// baseline + k sigma at the sample's own size.
inline SecurityCheck security_check(std::span<const std::pair<Oam, Oam>> revealed, const CheckThresholds& cfg = {}) {
    SecurityCheck out;
    for (const auto& [a, b] : revealed) out.non_adjacent.add(!is_adjacent(a, b));
    out.threshold = cfg.baseline + cfg.sigmas * out.non_adjacent.sigma_at(cfg.baseline);
    if (out.non_adjacent.trials == 0 || out.non_adjacent.trials < cfg.min_samples) {
        out.verdict = Verdict::inconclusive;
    } else {
        out.verdict = out.non_adjacent.fraction() > out.threshold + 1e-15 ? Verdict::compromised : Verdict::pass;
    }
    return out;
}

struct DecoyObservation {
    double overlap_squared = 0.0;
    bool click = false;
    bool tampered = false;
};

/**
 * Bob's side of a decoy event: the arriving photon passes the sorter
 * (projection onto the alphabet, registered with the surviving weight),
 * then a test-state measurement clicks with probability |<test|state>|^2.
 */
inline std::optional<DecoyObservation> observe_decoy(const OamKet& arriving, const FibAlphabet& alphabet,
                                                     const OamKet& test, RandomStream& rng) {
    const Projection p = project_fib_subspace(arriving, alphabet);
    if (p.empty() || !rng.bernoulli(p.survival)) return std::nullopt;
    DecoyObservation obs;
    obs.overlap_squared = std::norm(inner_product(test, p.state));
    obs.click = rng.bernoulli(obs.overlap_squared);
    return obs;
}

struct DecoyCheck {
    RunningMean overlap;
    Proportion clicks;
    double expected = 0.0;
    double threshold = 0.0;
    Verdict verdict = Verdict::inconclusive;
};

/// Untampered decoys click at rate 1/N; a rate more than k sigma below that
/// means the partner photons were replaced.
inline DecoyCheck decoy_check(std::span<const DecoyObservation> observations, const FibAlphabet& alphabet,
                              const CheckThresholds& cfg = {}) {
    DecoyCheck out;
    out.expected = 1.0 / alphabet.size();
    for (const auto& o : observations) {
        out.overlap.add(o.overlap_squared);
        out.clicks.add(o.click);
    }
    out.threshold = out.expected - cfg.sigmas * out.clicks.sigma_at(out.expected);
    if (out.clicks.trials == 0 || out.clicks.trials < cfg.min_samples) {
        out.verdict = Verdict::inconclusive;
    } else {
        out.verdict = out.clicks.fraction() < out.threshold ? Verdict::compromised : Verdict::pass;
    }
    return out;
}

inline bool same_sign(const PairEvent& e) {
    return e.bob_value && sign_of(e.alice_value) == sign_of(*e.bob_value);
}

/// Signed mode: only events where both detected values share a sign survive.
inline std::vector<PairEvent> sift_signed(std::span<const PairEvent> events) {
    std::vector<PairEvent> out;
    for (const auto& e : events)
        if (same_sign(e)) out.push_back(e);
    return out;
}

struct ClassicalGuess {
    Oam guess = 0;
    std::size_t candidates = 0;
};

/// Eve's pump guess from the two public bits. Maximum-likelihood ties go to
/// the smallest candidate.
inline ClassicalGuess eve_classical_guess(const EveTable& table, ExchangeBits bits, GuessMode mode,
                                          RandomStream& rng) {
    const auto cands = table.candidates(bits);
    if (cands.empty()) return {};
    if (mode == GuessMode::uniform) return {cands[static_cast<std::size_t>(rng.below(cands.size()))], cands.size()};
    Oam best = cands.front();
    for (Oam c : cands)
        if (table.count(bits, c) > table.count(bits, best)) best = c;
    return {best, cands.size()};
}

/// One split-off photon and its sibling from the same pulse.
struct PnsObservation {
    Oam eve_value = 0;
    Oam sibling_value = 0;
};

inline IndependenceTest pns_information(std::span<const PnsObservation> observations) {
    std::vector<std::pair<Oam, Oam>> pairs;
    pairs.reserve(observations.size());
    for (const auto& o : observations) pairs.emplace_back(o.eve_value, o.sibling_value);
    return independence_test(pairs);
}

} // namespace fibqkd
