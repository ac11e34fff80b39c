#pragma once

/**
 * Fibonacci arithmetic and the classical side of the protocol.
 *
 * The sequence uses F_1 = 1, F_2 = 2, F_k = F_{k-1} + F_{k-2}, so every
 * value has exactly one index. A FibAlphabet is N consecutive members
 * F_{n0} .. F_{n0+N-1}; each pump value in it splits into the two arm
 * values F_{n-1} and F_{n-2}, so the arms range over F_{n0-2} .. F_{n0+N-2}.
 *
 * Classical exchange: Alice announces b(a) for her value a, where
 * b(F_k) = floor((k-1)/2) mod 2. Bob, whose candidates for Alice's value
 * are the two neighbours of his own index, can always tell them apart
 * because their indices differ by two. Bob answers with b(his value),
 * complemented when Alice's value is odd.
 */

#include <algorithm>
#include <array>
#include <cstdint>
#include <cstdlib>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fibqkd/errors.hpp"

namespace fibqkd {

using Oam = std::int64_t;

enum class Role { alice, bob };

namespace fib {

/// Largest index whose value fits in int64 (F_91 ~ 7.5e18).
inline constexpr int kMaxIndex = 91;

namespace detail {
inline constexpr std::array<Oam, kMaxIndex + 1> make_table() {
    std::array<Oam, kMaxIndex + 1> t{};
    t[0] = 0; // unused
    t[1] = 1;
    t[2] = 2;
    for (int k = 3; k <= kMaxIndex; ++k) t[k] = t[k - 1] + t[k - 2];
    return t;
}
inline constexpr auto kTable = make_table();
} // namespace detail

/// F_k for 1 <= k <= kMaxIndex.
inline constexpr Oam value(int k) {
    if (k < 1 || k > kMaxIndex) throw DomainError("Fibonacci index out of range: " + std::to_string(k));
    return detail::kTable[static_cast<std::size_t>(k)];
}

/// Index k with F_k == v, if v is a (positive) Fibonacci value.
inline constexpr std::optional<int> index_of(Oam v) {
    if (v < 1) return std::nullopt;
    const auto first = detail::kTable.begin() + 1;
    const auto it = std::lower_bound(first, detail::kTable.end(), v);
    if (it == detail::kTable.end() || *it != v) return std::nullopt;
    return static_cast<int>(it - detail::kTable.begin());
}

inline constexpr bool is_fibonacci(Oam v) { return index_of(v).has_value(); }

inline std::optional<Oam> below(Oam v) {
    const auto k = index_of(v);
    if (!k || *k <= 1) return std::nullopt;
    return value(*k - 1);
}

inline std::optional<Oam> above(Oam v) {
    const auto k = index_of(v);
    if (!k || *k >= kMaxIndex) return std::nullopt;
    return value(*k + 1);
}

/// Nearest Fibonacci value to a positive integer; ties go to the lower one.
/// Non-positive inputs map to F_1 = 1.
inline Oam nearest(Oam v) {
    if (v <= 1) return 1;
    const auto first = detail::kTable.begin() + 1;
    const auto it = std::lower_bound(first, detail::kTable.end(), v);
    if (it == detail::kTable.end()) return detail::kTable.back();
    if (*it == v || it == first) return *it;
    const Oam hi = *it;
    const Oam lo = *(it - 1);
    return (v - lo <= hi - v) ? lo : hi;
}

} // namespace fib

/// Sign of an OAM value as +1 / -1 (zero counts as positive).
inline constexpr int sign_of(Oam v) { return v < 0 ? -1 : 1; }

/// A fixed-width block of key bits, most significant bit first.
struct BitBlock {
    std::uint32_t bits = 0;
    int width = 0;

    bool operator==(const BitBlock&) const = default;

    std::string to_string() const {
        std::string s(static_cast<std::size_t>(width), '0');
        for (int i = 0; i < width; ++i)
            if ((bits >> (width - 1 - i)) & 1U) s[static_cast<std::size_t>(i)] = '1';
        return s;
    }
};

/// Exact fraction; used for enumeration results such as Eve's guess rate.
struct Rational {
    std::int64_t num = 0;
    std::int64_t den = 1;

    static Rational make(std::int64_t n, std::int64_t d) {
        if (d == 0) throw DomainError("zero denominator");
        if (d < 0) n = -n, d = -d;
        const auto g = std::gcd(n < 0 ? -n : n, d);
        return {n / (g == 0 ? 1 : g), d / (g == 0 ? 1 : g)};
    }
    Rational operator+(const Rational& o) const { return make(num * o.den + o.num * den, den * o.den); }
    Rational operator*(const Rational& o) const { return make(num * o.num, den * o.den); }
    bool operator==(const Rational&) const = default;
    double to_double() const { return static_cast<double>(num) / static_cast<double>(den); }
};

class FibAlphabet {
public:
    /// N consecutive values starting at F_{start_index}. N must be a power
    /// of two (>= 2) and start_index >= 3 so both arm values are positive.
    FibAlphabet(int start_index, int size) : start_(start_index), size_(size) {
        if (size < 2 || (size & (size - 1)) != 0)
            throw ConfigError("alphabet size must be a power of two >= 2, got " + std::to_string(size));
        if (start_index < 3)
            throw DomainError("alphabet start index must be >= 3, got " + std::to_string(start_index));
        if (start_index + size - 1 > fib::kMaxIndex)
            throw ConfigError("alphabet exceeds representable Fibonacci range");
        bits_ = 0;
        while ((1 << bits_) < size) ++bits_;
        members_.reserve(static_cast<std::size_t>(size));
        for (int k = start_index; k < start_index + size; ++k) members_.push_back(fib::value(k));
        arms_.reserve(static_cast<std::size_t>(size) + 1);
        for (int k = start_index - 2; k <= start_index + size - 2; ++k) arms_.push_back(fib::value(k));
    }

    /// Alphabet whose smallest member is `smallest` (must be Fibonacci).
    static FibAlphabet starting_at(Oam smallest, int size) {
        const auto k = fib::index_of(smallest);
        if (!k) throw DomainError("alphabet must start at a Fibonacci value, got " + std::to_string(smallest));
        return FibAlphabet(*k, size);
    }

    int start_index() const noexcept { return start_; }
    int size() const noexcept { return size_; }
    int bits_per_segment() const noexcept { return bits_; }
    std::span<const Oam> members() const noexcept { return members_; }
    Oam smallest() const noexcept { return members_.front(); }
    Oam largest() const noexcept { return members_.back(); }

    /// Values that can appear on one arm of a kept pair.
    std::span<const Oam> arm_values() const noexcept { return arms_; }

    bool contains(Oam v) const { return std::binary_search(members_.begin(), members_.end(), v); }
    bool is_arm_value(Oam v) const { return std::binary_search(arms_.begin(), arms_.end(), v); }

    std::optional<int> position(Oam v) const {
        const auto it = std::lower_bound(members_.begin(), members_.end(), v);
        if (it == members_.end() || *it != v) return std::nullopt;
        return static_cast<int>(it - members_.begin());
    }

    /// Key block for an alphabet member: ascending value <-> ascending binary.
    BitBlock encode_segment(Oam v) const {
        const auto pos = position(v);
        if (!pos) throw DomainError(std::to_string(v) + " is not in the alphabet");
        return {static_cast<std::uint32_t>(*pos), bits_};
    }

    Oam decode_segment(BitBlock block) const {
        if (block.width != bits_ || block.bits >= static_cast<std::uint32_t>(size_))
            throw DomainError("bit block does not belong to this alphabet");
        return members_[block.bits];
    }

    bool operator==(const FibAlphabet& o) const { return start_ == o.start_ && size_ == o.size_; }

private:
    int start_;
    int size_;
    int bits_;
    std::vector<Oam> members_;
    std::vector<Oam> arms_;
};

inline FibAlphabet fib_alphabet(int start_index, int size) { return FibAlphabet(start_index, size); }

inline BitBlock encode_segment(const FibAlphabet& alphabet, Oam v) { return alphabet.encode_segment(v); }

/// Signed values: leading sign bit (1 = negative) followed by the unsigned block.
class SignedCodebook {
public:
    explicit SignedCodebook(FibAlphabet alphabet) : alphabet_(std::move(alphabet)) {}

    int width() const noexcept { return alphabet_.bits_per_segment() + 1; }

    BitBlock encode(Oam v) const {
        const Oam mag = v < 0 ? -v : v;
        if (!alphabet_.contains(mag)) throw DomainError(std::to_string(v) + " is not a signed alphabet member");
        const BitBlock low = alphabet_.encode_segment(mag);
        const std::uint32_t sign = v < 0 ? 1U : 0U;
        return {(sign << low.width) | low.bits, low.width + 1};
    }

    Oam decode(BitBlock block) const {
        if (block.width != width()) throw DomainError("bit block width mismatch");
        const int low_width = width() - 1;
        const bool negative = (block.bits >> low_width) & 1U;
        const Oam mag = alphabet_.decode_segment({block.bits & ((1U << low_width) - 1U), low_width});
        return negative ? -mag : mag;
    }

    const FibAlphabet& alphabet() const noexcept { return alphabet_; }

private:
    FibAlphabet alphabet_;
};

inline BitBlock encode_signed(const FibAlphabet& alphabet, Oam v) { return SignedCodebook(alphabet).encode(v); }

/// (F_{n-1}, F_{n-2}) for a Fibonacci value F_n with n >= 3.
inline std::pair<Oam, Oam> decompose(Oam value) {
    const auto k = fib::index_of(value);
    if (!k) throw DomainError(std::to_string(value) + " is not a Fibonacci value");
    if (*k < 3) throw DomainError(std::to_string(value) + " has no decomposition into two positive Fibonacci values");
    return {fib::value(*k - 1), fib::value(*k - 2)};
}

/// True iff a and b are consecutive Fibonacci values of the same sign.
inline bool is_adjacent(Oam a, Oam b) {
    if (sign_of(a) != sign_of(b)) return false;
    const auto ka = fib::index_of(a < 0 ? -a : a);
    const auto kb = fib::index_of(b < 0 ? -b : b);
    return ka && kb && std::abs(*ka - *kb) == 1;
}

/// One honest outcome of the source after sorting: which arm went where.
struct ExchangeConfiguration {
    Oam pump;
    Oam alice;
    Oam bob;
};

/// All 2N honest configurations: each pump with both orientations.
inline std::vector<ExchangeConfiguration> honest_configurations(const FibAlphabet& alphabet) {
    std::vector<ExchangeConfiguration> out;
    for (Oam pump : alphabet.members()) {
        const auto [larger, smaller] = decompose(pump);
        out.push_back({pump, larger, smaller});
        out.push_back({pump, smaller, larger});
    }
    return out;
}

struct DecodabilityViolation {
    ExchangeConfiguration configuration;
    Role decoder;
    std::string reason;
};

class ExchangeScheme {
public:
    /// The index-parity scheme. Verified by enumeration before returning.
    static ExchangeScheme canonical(const FibAlphabet& alphabet) {
        std::map<Oam, int> bits;
        for (Oam v : alphabet.arm_values()) bits[v] = index_parity_bit(v);
        ExchangeScheme scheme(alphabet, std::move(bits));
        if (auto violation = scheme.verify())
            throw ConfigError("canonical exchange scheme is not decodable: " + violation->reason);
        return scheme;
    }

    /// Arbitrary bit table (used to exercise the verifier). Not verified.
    static ExchangeScheme from_table(const FibAlphabet& alphabet, std::map<Oam, int> alice_bits) {
        return ExchangeScheme(alphabet, std::move(alice_bits));
    }

    static int index_parity_bit(Oam v) {
        const auto k = fib::index_of(v < 0 ? -v : v);
        if (!k) throw DomainError(std::to_string(v) + " is not a Fibonacci value");
        return ((*k - 1) / 2) % 2;
    }

    const FibAlphabet& alphabet() const noexcept { return alphabet_; }
    const std::map<Oam, int>& table() const noexcept { return bits_; }

    /// Bit Alice announces for her own value.
    int alice_bit(Oam alice_value) const { return lookup(alice_value); }

    /// Bit Bob announces: same scheme when Alice's value is even, the
    /// complement when it is odd.
    int bob_bit(Oam bob_value, Oam alice_value) const {
        const int b = lookup(bob_value);
        return is_odd(alice_value) ? 1 - b : b;
    }

    /**
     * Partner values consistent with holding `own`: the Fibonacci
     * neighbours of |own| whose sum with |own| is an alphabet member.
     */
    std::vector<Oam> partner_candidates(Oam own) const {
        std::vector<Oam> out;
        const Oam mag = own < 0 ? -own : own;
        for (auto c : {fib::below(mag), fib::above(mag)}) {
            if (c && alphabet_.contains(mag + *c) && bits_.count(*c)) out.push_back(own < 0 ? -*c : *c);
        }
        return out;
    }

    /**
     * Recover the partner's value from the partner's announced bit.
     * Bob decoding Alice compares against alice_bit; Alice decoding Bob
     * undoes the parity conjugation with her own value. Returns nullopt
     * when no candidate (or more than one) matches, which honest
     * operation never produces.
     */
    std::optional<Oam> decode_partner_value(Oam own, int partner_bit, Role decoder) const {
        if (!bits_.count(own < 0 ? -own : own)) return std::nullopt;
        std::optional<Oam> found;
        for (Oam c : partner_candidates(own)) {
            const int expected = decoder == Role::bob ? alice_bit(c) : bob_bit(c, own);
            if (expected == partner_bit) {
                if (found) return std::nullopt;
                found = c;
            }
        }
        return found;
    }

    /// Exhaustive check over honest configurations, both directions.
    std::optional<DecodabilityViolation> verify() const {
        for (const auto& cfg : honest_configurations(alphabet_)) {
            if (!bits_.count(cfg.alice) || !bits_.count(cfg.bob))
                return DecodabilityViolation{cfg, Role::bob, "value missing from bit table"};
            const int a = alice_bit(cfg.alice);
            const int b = bob_bit(cfg.bob, cfg.alice);
            if (decode_partner_value(cfg.bob, a, Role::bob) != std::optional<Oam>(cfg.alice))
                return DecodabilityViolation{cfg, Role::bob,
                                             "Bob holding " + std::to_string(cfg.bob) +
                                                 " cannot recover Alice's " + std::to_string(cfg.alice)};
            if (decode_partner_value(cfg.alice, b, Role::alice) != std::optional<Oam>(cfg.bob))
                return DecodabilityViolation{cfg, Role::alice,
                                             "Alice holding " + std::to_string(cfg.alice) +
                                                 " cannot recover Bob's " + std::to_string(cfg.bob)};
        }
        return std::nullopt;
    }

private:
    ExchangeScheme(FibAlphabet alphabet, std::map<Oam, int> bits)
        : alphabet_(std::move(alphabet)), bits_(std::move(bits)) {}

    static bool is_odd(Oam v) { return (v < 0 ? -v : v) % 2 == 1; }

    int lookup(Oam v) const {
        const auto it = bits_.find(v < 0 ? -v : v);
        if (it == bits_.end()) throw DomainError(std::to_string(v) + " is not a valid arm value for this scheme");
        return it->second;
    }

    FibAlphabet alphabet_;
    std::map<Oam, int> bits_;
};

using ExchangeBits = std::pair<int, int>; // (Alice's bit, Bob's bit)

/**
 * What an eavesdropper on the classical channel learns: for each observed
 * bit pair, the pump values that could have produced it and how many of
 * the equally likely honest configurations map there.
 */
class EveTable {
public:
    static EveTable enumerate(const ExchangeScheme& scheme) {
        EveTable t;
        const auto configs = honest_configurations(scheme.alphabet());
        t.total_ = static_cast<std::int64_t>(configs.size());
        for (const auto& cfg : configs) {
            const ExchangeBits bits{scheme.alice_bit(cfg.alice), scheme.bob_bit(cfg.bob, cfg.alice)};
            t.counts_[bits][cfg.pump] += 1;
        }
        return t;
    }

    /// Candidate pump values for an observed exchange (ascending).
    std::vector<Oam> candidates(ExchangeBits bits) const {
        std::vector<Oam> out;
        if (auto it = counts_.find(bits); it != counts_.end())
            for (const auto& [pump, n] : it->second) out.push_back(pump);
        return out;
    }

    /// Configurations (out of total()) producing `bits` with pump `pump`.
    std::int64_t count(ExchangeBits bits, Oam pump) const {
        const auto it = counts_.find(bits);
        if (it == counts_.end()) return 0;
        const auto jt = it->second.find(pump);
        return jt == it->second.end() ? 0 : jt->second;
    }

    std::int64_t total() const noexcept { return total_; }
    const std::map<ExchangeBits, std::map<Oam, std::int64_t>>& outcomes() const noexcept { return counts_; }

    /// Success of guessing uniformly among the candidates.
    Rational uniform_guess_success() const {
        Rational acc = Rational::make(0, 1);
        for (const auto& [bits, pumps] : counts_) {
            std::int64_t outcome_count = 0;
            for (const auto& [pump, n] : pumps) outcome_count += n;
            acc = acc + Rational::make(outcome_count, total_) *
                            Rational::make(1, static_cast<std::int64_t>(pumps.size()));
        }
        return acc;
    }

    /// Success of always guessing a most frequent candidate.
    Rational max_likelihood_success() const {
        std::int64_t hits = 0;
        for (const auto& [bits, pumps] : counts_) {
            std::int64_t best = 0;
            for (const auto& [pump, n] : pumps) best = std::max(best, n);
            hits += best;
        }
        return Rational::make(hits, total_);
    }

private:
    std::map<ExchangeBits, std::map<Oam, std::int64_t>> counts_;
    std::int64_t total_ = 0;
};

inline std::vector<Oam> eve_infer(const ExchangeScheme& scheme, ExchangeBits bits) {
    return EveTable::enumerate(scheme).candidates(bits);
}

} // namespace fibqkd
