#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

namespace fibqkd {

/// A counted fraction with its binomial standard error.
struct Proportion {
    std::uint64_t hits = 0;
    std::uint64_t trials = 0;

    void add(bool hit) {
        ++trials;
        if (hit) ++hits;
    }

    double fraction() const { return trials == 0 ? 0.0 : static_cast<double>(hits) / trials; }

    /// Standard error estimated from the observed fraction.
    double sigma() const {
        if (trials == 0) return 0.0;
        const double p = fraction();
        return std::sqrt(p * (1.0 - p) / trials);
    }

    /// Standard error of a fraction with true value `p` at this sample size.
    double sigma_at(double p) const {
        return trials == 0 ? 0.0 : std::sqrt(p * (1.0 - p) / trials);
    }

    /// True when the observed fraction lies within k standard errors of `p`
    /// (standard error taken at `p`). For p in {0, 1} this is exact equality.
    bool consistent_with(double p, double k = 3.0) const {
        return std::abs(fraction() - p) <= k * sigma_at(p) + 1e-15;
    }

    double lower(double k = 3.0) const { return std::max(0.0, fraction() - k * sigma()); }
    double upper(double k = 3.0) const { return std::min(1.0, fraction() + k * sigma()); }
};

/// Welford running mean and variance.
struct RunningMean {
    std::uint64_t count = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double x) {
        ++count;
        const double delta = x - mean;
        mean += delta / static_cast<double>(count);
        m2 += delta * (x - mean);
    }

    double variance() const { return count < 2 ? 0.0 : m2 / static_cast<double>(count - 1); }
    double standard_error() const {
        return count == 0 ? 0.0 : std::sqrt(variance() / static_cast<double>(count));
    }
};

struct IndependenceTest {
    double g_statistic = 0.0;
    int degrees_of_freedom = 0;
    double p_value = 1.0;
    double mutual_information_bits = 0.0;
    std::uint64_t samples = 0;
};

/**
 * G-test of independence on paired observations. The plug-in mutual
 * information (bits) is reported alongside; G = 2 n MI_nats, which is
 * asymptotically chi-square with (rows-1)(cols-1) degrees of freedom.
 */
template <class X, class Y>
IndependenceTest independence_test(const std::vector<std::pair<X, Y>>& pairs) {
    IndependenceTest out;
    out.samples = pairs.size();
    if (pairs.empty()) return out;

    std::map<X, double> row;
    std::map<Y, double> col;
    std::map<std::pair<X, Y>, double> joint;
    for (const auto& p : pairs) {
        row[p.first] += 1.0;
        col[p.second] += 1.0;
        joint[p] += 1.0;
    }
    const double n = static_cast<double>(pairs.size());
    double mi_nats = 0.0;
    for (const auto& [key, observed] : joint) {
        const double expected = row[key.first] * col[key.second] / n;
        mi_nats += observed / n * std::log(observed / expected);
    }
    out.mutual_information_bits = mi_nats / std::log(2.0);
    out.g_statistic = 2.0 * n * mi_nats;
    out.degrees_of_freedom =
        static_cast<int>((row.size() - 1) * (col.size() - 1));
    if (out.degrees_of_freedom > 0) {
        out.p_value = boost::math::gamma_q(0.5 * out.degrees_of_freedom,
                                           0.5 * std::max(0.0, out.g_statistic));
    }
    return out;
}

} // namespace fibqkd
