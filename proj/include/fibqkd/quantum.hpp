#pragma once

/**
 * Sparse pure states over integer OAM labels.
 *
 * States carry at most a few dozen terms, so they are kept as ordered
 * label -> amplitude maps instead of dense vectors. Mixtures (for example
 * Eve's random choice of what to resend) are never represented directly:
 * callers sample the branch and then hold the pure state of that branch.
 */

#include <cmath>
#include <complex>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fibqkd/errors.hpp"
#include "fibqkd/fibcode.hpp"
#include "fibqkd/rng.hpp"

namespace fibqkd {

using Amplitude = std::complex<double>;

/// Tolerance for algebraic identities (normalization, orthogonality).
inline constexpr double kAlgebraTolerance = 1e-12;

class OamKet {
public:
    OamKet() = default;

    static OamKet basis(Oam l) {
        OamKet k;
        k.terms_.emplace(l, Amplitude{1.0, 0.0});
        return k;
    }

    /// Builds a state from raw terms; zero amplitudes are dropped and
    /// duplicate labels accumulate. The result is NOT normalized.
    static OamKet from_terms(std::span<const std::pair<Oam, Amplitude>> terms) {
        OamKet k;
        for (const auto& [l, a] : terms) k.terms_[l] += a;
        k.prune();
        return k;
    }

    bool empty() const noexcept { return terms_.empty(); }
    std::size_t size() const noexcept { return terms_.size(); }
    const std::map<Oam, Amplitude>& terms() const noexcept { return terms_; }

    Amplitude amplitude(Oam l) const {
        const auto it = terms_.find(l);
        return it == terms_.end() ? Amplitude{} : it->second;
    }

    double probability(Oam l) const { return std::norm(amplitude(l)); }

    double norm_squared() const {
        double s = 0.0;
        for (const auto& [l, a] : terms_) s += std::norm(a);
        return s;
    }

    bool is_normalized(double tol = kAlgebraTolerance) const { return std::abs(norm_squared() - 1.0) <= tol; }

    OamKet normalized() const {
        const double n2 = norm_squared();
        if (n2 <= 0.0) throw DomainError("cannot normalize the zero state");
        OamKet k = *this;
        const double inv = 1.0 / std::sqrt(n2);
        for (auto& [l, a] : k.terms_) a *= inv;
        return k;
    }

    std::vector<Oam> labels() const {
        std::vector<Oam> out;
        out.reserve(terms_.size());
        for (const auto& [l, a] : terms_) out.push_back(l);
        return out;
    }

    std::string to_string() const {
        std::string s;
        for (const auto& [l, a] : terms_) {
            if (!s.empty()) s += " + ";
            s += "(" + std::to_string(a.real()) + (a.imag() < 0 ? "" : "+") + std::to_string(a.imag()) + "i)|" +
                 std::to_string(l) + ">";
        }
        return s.empty() ? "0" : s;
    }

private:
    void prune() {
        for (auto it = terms_.begin(); it != terms_.end();) {
            if (it->second == Amplitude{}) it = terms_.erase(it);
            else ++it;
        }
    }

    std::map<Oam, Amplitude> terms_;
};

/// Normalized superposition sum_i amplitudes[i] |values[i]>.
inline OamKet superpose(std::span<const Oam> values, std::span<const Amplitude> amplitudes) {
    if (values.size() != amplitudes.size())
        throw DomainError("superpose: " + std::to_string(values.size()) + " values but " +
                          std::to_string(amplitudes.size()) + " amplitudes");
    std::vector<std::pair<Oam, Amplitude>> terms;
    terms.reserve(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) terms.emplace_back(values[i], amplitudes[i]);
    const OamKet raw = OamKet::from_terms(terms);
    if (raw.empty()) throw DomainError("superpose: all amplitudes are zero");
    return raw.normalized();
}

/// Equal-weight superposition of the given labels.
inline OamKet equal_superposition(std::span<const Oam> values) {
    std::vector<Amplitude> amps(values.size(), Amplitude{1.0, 0.0});
    return superpose(values, amps);
}

/// <a|b>, conjugate-linear in the first argument.
inline Amplitude inner_product(const OamKet& a, const OamKet& b) {
    Amplitude acc{};
    const auto& ta = a.terms();
    const auto& tb = b.terms();
    auto ia = ta.begin();
    auto ib = tb.begin();
    while (ia != ta.end() && ib != tb.end()) {
        if (ia->first < ib->first) ++ia;
        else if (ib->first < ia->first) ++ib;
        else {
            acc += std::conj(ia->second) * ib->second;
            ++ia;
            ++ib;
        }
    }
    return acc;
}

/// Projective measurement in the OAM basis.
inline Oam measure(const OamKet& ket, RandomStream& rng) {
    if (!ket.is_normalized())
        throw ContractViolation("measure: state is not normalized (norm^2 = " + std::to_string(ket.norm_squared()) + ")");
    const double u = rng.uniform();
    double acc = 0.0;
    Oam last = 0;
    for (const auto& [l, a] : ket.terms()) {
        acc += std::norm(a);
        last = l;
        if (u < acc) return l;
    }
    return last; // u landed in the rounding slack above the final partial sum
}

/**
 * (1/sqrt N) sum_k (-1)^k |F_{n0+k}>: overlaps every alphabet member with
 * magnitude 1/sqrt N and is orthogonal to (|F_k> + |F_{k+1}>)/sqrt 2.
 */
inline OamKet test_state(const FibAlphabet& alphabet) {
    const auto members = alphabet.members();
    std::vector<Amplitude> amps;
    amps.reserve(members.size());
    for (std::size_t k = 0; k < members.size(); ++k) amps.emplace_back(k % 2 == 0 ? 1.0 : -1.0, 0.0);
    return superpose(members, amps);
}

struct Projection {
    OamKet state;           // renormalized, empty when nothing survives
    double survival = 0.0;  // weight of the kept part before renormalizing

    bool empty() const noexcept { return state.empty(); }
};

inline Projection project_onto(const OamKet& ket, const std::function<bool(Oam)>& keep) {
    std::vector<std::pair<Oam, Amplitude>> kept;
    for (const auto& [l, a] : ket.terms())
        if (keep(l)) kept.emplace_back(l, a);
    const OamKet raw = OamKet::from_terms(kept);
    const double weight = raw.norm_squared();
    if (weight <= 0.0) return {};
    return {raw.normalized(), weight / ket.norm_squared()};
}

/// Sorter model: restriction to the alphabet members, renormalized.
inline Projection project_fib_subspace(const OamKet& ket, const FibAlphabet& alphabet) {
    return project_onto(ket, [&](Oam l) { return alphabet.contains(l); });
}

/**
 * Joint two-photon state sum over (l_A, l_B) with l_A + l_B equal to the
 * pump value of each term.
 */
class EntangledPairState {
public:
    using Key = std::pair<Oam, Oam>;

    /**
     * The sorted source state: every pump F_n of the alphabet, weighted by
     * sqrt(p(F_n)), split symmetrically into |F_{n-1}>|F_{n-2}> and
     * |F_{n-2}>|F_{n-1}>. An empty weight map means uniform pumps.
     */
    static EntangledPairState sorted_source(const FibAlphabet& alphabet, const std::map<Oam, double>& pump_weights = {}) {
        EntangledPairState s;
        for (Oam pump : alphabet.members()) {
            double w = 1.0;
            if (!pump_weights.empty()) {
                const auto it = pump_weights.find(pump);
                w = it == pump_weights.end() ? 0.0 : it->second;
            }
            if (w <= 0.0) continue;
            const auto [larger, smaller] = decompose(pump);
            const double a = std::sqrt(w);
            s.terms_[{larger, smaller}] += a;
            s.terms_[{smaller, larger}] += a;
        }
        s.normalize();
        return s;
    }

    const std::map<Key, Amplitude>& terms() const noexcept { return terms_; }

    double norm_squared() const {
        double n = 0.0;
        for (const auto& [k, a] : terms_) n += std::norm(a);
        return n;
    }

    /// Bob's state after Alice measures `alice_value`, with the probability
    /// of that outcome.
    Projection condition_on_alice(Oam alice_value) const {
        std::vector<std::pair<Oam, Amplitude>> bob_terms;
        for (const auto& [k, a] : terms_)
            if (k.first == alice_value) bob_terms.emplace_back(k.second, a);
        const OamKet raw = OamKet::from_terms(bob_terms);
        const double w = raw.norm_squared();
        if (w <= 0.0) return {};
        return {raw.normalized(), w / norm_squared()};
    }

private:
    void normalize() {
        const double n = norm_squared();
        if (n <= 0.0) throw DomainError("entangled state has no support");
        const double inv = 1.0 / std::sqrt(n);
        for (auto& [k, a] : terms_) a *= inv;
    }

    std::map<Key, Amplitude> terms_;
};

} // namespace fibqkd
