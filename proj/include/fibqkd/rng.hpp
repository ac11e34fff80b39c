#pragma once

/**
 * Seeded random streams.
 *
 * A session owns one master seed. Each stochastic stage (pump sampling,
 * SPDC splitting, orientation, Eve, security sampling, filters, ...) draws
 * from its own named substream so that enabling one feature never shifts
 * the draws seen by another. Conversions from raw 64-bit words are done
 * here rather than through <random> distributions, whose output is
 * implementation-defined.
 */

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace fibqkd {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

inline constexpr std::uint64_t fnv1a64(std::string_view s) noexcept {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001B3ULL;
    }
    return h;
}

class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed) : engine_(splitmix64(seed)) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) {
        if (p <= 0.0) return false;
        if (p >= 1.0) return true;
        return uniform() < p;
    }

    /// Unbiased integer in [0, n).
    std::uint64_t below(std::uint64_t n) {
        if (n == 0) return 0;
        const std::uint64_t limit = (~std::uint64_t{0}) - ((~std::uint64_t{0}) % n);
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return x % n;
    }

    /// Uniform integer in the closed range [lo, hi].
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        return lo + static_cast<std::int64_t>(below(static_cast<std::uint64_t>(hi - lo) + 1));
    }

    /// Knuth's product method; adequate for the small means used for pulses.
    std::uint64_t poisson(double mean) {
        const double limit = std::exp(-mean);
        std::uint64_t k = 0;
        double p = uniform();
        while (p > limit) {
            ++k;
            p *= uniform();
        }
        return k;
    }

private:
    std::mt19937_64 engine_;
};

/// Expands one master seed into independent named substreams.
class SeedTree {
public:
    explicit SeedTree(std::uint64_t master) : master_(master) {}

    std::uint64_t master() const noexcept { return master_; }

    std::uint64_t derive(std::string_view name) const noexcept {
        return splitmix64(master_ ^ splitmix64(fnv1a64(name)));
    }

    RandomStream stream(std::string_view name) const { return RandomStream(derive(name)); }

private:
    std::uint64_t master_;
};

} // namespace fibqkd
