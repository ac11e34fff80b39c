#pragma once

// Exact enumeration of what Bob registers when Eve intercepts every photon.
// Written from the protocol description only; shares no code with the
// library.

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include "exchange_oracle.hpp"

namespace oracle {

struct Alphabet {
    std::vector<long long> members;   // F_{n0} .. F_{n0+N-1}
    std::vector<long long> arms;      // F_{n0-2} .. F_{n0+N-2}
    std::vector<long long> sequence;  // 1, 2, 3, 5, ...

    bool member(long long v) const { return std::find(members.begin(), members.end(), v) != members.end(); }
    bool arm(long long v) const { return std::find(arms.begin(), arms.end(), v) != arms.end(); }
    int index(long long v) const {
        const auto it = std::find(sequence.begin(), sequence.end(), v);
        return it == sequence.end() ? -1 : static_cast<int>(it - sequence.begin());
    }
    long long at(int i) const { return (i < 0 || i >= static_cast<int>(sequence.size())) ? 0 : sequence[static_cast<std::size_t>(i)]; }
    bool adjacent(long long a, long long b) const {
        const int i = index(a), j = index(b);
        return i >= 0 && j >= 0 && (i - j == 1 || j - i == 1);
    }
};

/// Alphabet whose smallest member is `first`.
inline Alphabet make_alphabet(long long first, int n) {
    Alphabet a;
    a.sequence = fibonacci_upto(1LL << 40);
    const int k = a.index(first);
    for (int i = k; i < k + n; ++i) a.members.push_back(a.at(i));
    for (int i = k - 2; i <= k + n - 2; ++i) a.arms.push_back(a.at(i));
    return a;
}

/// Raw pump weights times the chance a uniform split within +-bandwidth lands
/// on the Fibonacci pair (two orientations out of 2B + 1 - F values).
inline std::map<long long, double> sorted_weights(const Alphabet& a, const std::map<long long, double>& raw,
                                                  long long bandwidth) {
    std::map<long long, double> w;
    double total = 0.0;
    for (long long f : a.members) {
        const long long lo = std::max(-bandwidth, f - bandwidth);
        const long long hi = std::min(bandwidth, f + bandwidth);
        const double x = raw.at(f) * 2.0 / static_cast<double>(hi - lo + 1);
        w[f] = x;
        total += x;
    }
    for (auto& [f, x] : w) x /= total;
    return w;
}

using Ket = std::vector<long long>; // equal-weight superposition

/// Eve's resend options after she measured v.
inline std::vector<Ket> resend_options(const Alphabet& a, long long v, const std::string& policy) {
    const int k = a.index(v);
    const long long below = a.at(k - 1);
    const long long above = a.at(k + 1);
    std::vector<Ket> out;
    if (policy == "partner") {
        for (long long c : {below, above}) {
            if (c == 0 || !a.member(v + c)) continue;
            Ket ket;
            const int kc = a.index(c);
            for (long long d : {a.at(kc - 1), a.at(kc + 1)})
                if (d != 0 && a.member(c + d)) ket.push_back(d);
            out.push_back(ket);
        }
        if (out.empty()) {
            if (a.at(k - 2)) out.push_back({a.at(k - 2), v});
            out.push_back({v, a.at(k + 2)});
        }
        return out;
    }
    auto try_pairs = [&](auto ok) {
        if (below && ok(below) && ok(v)) out.push_back({below, v});
        if (ok(v) && ok(above)) out.push_back({v, above});
    };
    try_pairs([&](long long x) { return a.member(x); });
    if (out.empty()) try_pairs([&](long long x) { return a.member(x) || a.arm(x); });
    if (out.empty()) try_pairs([](long long) { return true; });
    return out;
}

/// Bob's registered-value law given Alice's value and the photon value Eve
/// measured.
inline std::map<long long, double> bob_law(const Alphabet& a, long long eve_value, const std::string& policy) {
    std::map<long long, double> law;
    double total = 0.0;
    const auto opts = resend_options(a, eve_value, policy);
    for (const auto& ket : opts)
        for (long long d : ket) {
            if (!a.arm(d)) continue;
            const double p = 1.0 / static_cast<double>(opts.size() * ket.size());
            law[d] += p;
            total += p;
        }
    for (auto& [d, p] : law) p /= total;
    return law;
}

struct InterceptLaw {
    double non_adjacent = 0.0; // among pairs Bob registers
    double registered = 0.0;   // chance Bob registers Eve's resend
    double non_adjacent_mass = 0.0;
};

/// Full interception with the given detected pump weights.
inline InterceptLaw intercept_law(const Alphabet& a, const std::map<long long, double>& pump_weights,
                                  const std::string& policy) {
    InterceptLaw out;
    for (long long f : a.members) {
        const int k = a.index(f);
        const long long big = a.at(k - 1), small = a.at(k - 2);
        for (auto [alice, bob] : {std::pair{big, small}, std::pair{small, big}}) {
            const double w = pump_weights.at(f) / 2.0;
            const auto opts = resend_options(a, bob, policy);
            for (const auto& ket : opts)
                for (long long d : ket) {
                    if (!a.arm(d)) continue;
                    const double p = w / static_cast<double>(opts.size() * ket.size());
                    out.registered += p;
                    if (!a.adjacent(alice, d)) out.non_adjacent_mass += p;
                }
        }
    }
    out.non_adjacent = out.non_adjacent_mass / out.registered;
    return out;
}

/// Non-adjacency when a fraction r of photons is intercepted.
inline double non_adjacency_at_rate(const InterceptLaw& full, double r) {
    return r * full.non_adjacent_mass / ((1.0 - r) + r * full.registered);
}

} // namespace oracle
