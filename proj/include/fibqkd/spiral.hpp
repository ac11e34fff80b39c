#pragma once

/**
 * Vogel spiral optics: point sets, Fraunhofer far field by direct phasor
 * summation, Fourier-Hankel decomposition and the reduced azimuthal
 * spectrum S(m).
 *
 * Lengths are in micrometres, spatial frequencies in 1/um.
 */

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <numbers>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "fibqkd/errors.hpp"
#include "fibqkd/fibcode.hpp"

namespace fibqkd::spiral {

using Complex = std::complex<double>;

/// 2 pi (1 - 1/phi), about 2.399963 rad (137.508 deg).
inline double golden_angle() { return 2.0 * std::numbers::pi * (1.0 - 1.0 / std::numbers::phi); }

struct PolarPoint {
    double r;
    double theta;
};

struct SpiralGeometry {
    int particles = 0;
    double a0_um = 0.0;
    double alpha = 0.0;
    std::vector<PolarPoint> points;

    double radius() const { return std::sqrt(static_cast<double>(particles)) * a0_um; }
};

/// r_n = sqrt(n) a0, theta_n = n alpha for n = 1..N.
inline SpiralGeometry vogel_points(int particles, double a0_um, double alpha) {
    if (particles < 1) throw ConfigError("particle count must be >= 1");
    if (!(a0_um > 0.0) || !std::isfinite(a0_um)) throw ConfigError("a0 must be > 0");
    if (!std::isfinite(alpha)) throw ConfigError("divergence angle must be finite");
    SpiralGeometry g{particles, a0_um, alpha, {}};
    g.points.reserve(static_cast<std::size_t>(particles));
    for (int n = 1; n <= particles; ++n)
        g.points.push_back({std::sqrt(static_cast<double>(n)) * a0_um, static_cast<double>(n) * alpha});
    return g;
}

/// The same point set rotated by `angle` about the origin.
inline SpiralGeometry rotated(SpiralGeometry g, double angle) {
    for (auto& p : g.points) p.theta += angle;
    return g;
}

struct GridSpec {
    int radial = 256;
    int azimuthal = 512;
    double wavelength_um = 0.405;
    double cone_deg = 2.0;
    Complex e0{1.0, 0.0};
    unsigned threads = 0; // 0: hardware concurrency

    double nu_max() const { return std::sin(cone_deg * std::numbers::pi / 180.0) / wavelength_um; }

    void validate() const {
        if (radial < 2) throw ConfigError("radial resolution must be >= 2");
        if (azimuthal < 1) throw ConfigError("azimuthal resolution must be >= 1");
        if (!(wavelength_um > 0.0)) throw ConfigError("wavelength must be > 0");
        if (!(cone_deg > 0.0 && cone_deg < 90.0)) throw ConfigError("cone half-angle must be in (0, 90) degrees");
    }
};

/**
 * Field on the polar grid nu_r = i nu_max / (radial - 1), nu_theta =
 * 2 pi j / azimuthal, stored row-major by radial index.
 */
class FarFieldGrid {
public:
    FarFieldGrid(int radial, int azimuthal, double nu_max, Complex e0)
        : radial_(radial), azimuthal_(azimuthal), nu_max_(nu_max), e0_(e0),
          values_(static_cast<std::size_t>(radial) * static_cast<std::size_t>(azimuthal)) {}

    static FarFieldGrid from_function(const GridSpec& spec, const std::function<Complex(double, double)>& f) {
        spec.validate();
        FarFieldGrid g(spec.radial, spec.azimuthal, spec.nu_max(), spec.e0);
        for (int i = 0; i < g.radial_; ++i)
            for (int j = 0; j < g.azimuthal_; ++j) g.at(i, j) = f(g.nu_r(i), g.nu_theta(j));
        return g;
    }

    int radial() const noexcept { return radial_; }
    int azimuthal() const noexcept { return azimuthal_; }
    double nu_max() const noexcept { return nu_max_; }
    Complex e0() const noexcept { return e0_; }
    double nu_r(int i) const { return nu_max_ * i / (radial_ - 1); }
    double nu_theta(int j) const { return 2.0 * std::numbers::pi * j / azimuthal_; }

    Complex& at(int i, int j) { return values_[index(i, j)]; }
    const Complex& at(int i, int j) const { return values_[index(i, j)]; }

private:
    std::size_t index(int i, int j) const {
        return static_cast<std::size_t>(i) * static_cast<std::size_t>(azimuthal_) + static_cast<std::size_t>(j);
    }

    int radial_;
    int azimuthal_;
    double nu_max_;
    Complex e0_;
    std::vector<Complex> values_;
};

namespace detail {
inline unsigned worker_count(unsigned requested, int work) {
    unsigned n = requested ? requested : std::max(1U, std::thread::hardware_concurrency());
    return std::min<unsigned>(n, static_cast<unsigned>(std::max(1, work)));
}

/// Runs body(j) for j in [0, count) over contiguous blocks.
inline void parallel_for(int count, unsigned threads, const std::function<void(int)>& body) {
    const unsigned workers = worker_count(threads, count);
    if (workers <= 1) {
        for (int j = 0; j < count; ++j) body(j);
        return;
    }
    std::vector<std::thread> pool;
    const int chunk = (count + static_cast<int>(workers) - 1) / static_cast<int>(workers);
    for (unsigned w = 0; w < workers; ++w) {
        const int lo = static_cast<int>(w) * chunk;
        const int hi = std::min(count, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &body] {
            for (int j = lo; j < hi; ++j) body(j);
        });
    }
    for (auto& t : pool) t.join();
}
} // namespace detail

/**
 * E(nu_r, nu_theta) = E0 sum_n exp(i 2 pi r_n nu_r cos(nu_theta - theta_n)).
 * Along each azimuthal ray nu_r is evenly spaced, so every particle's term
 * is a power of one unit phasor.
 */
inline FarFieldGrid far_field(const SpiralGeometry& geometry, const GridSpec& spec) {
    spec.validate();
    FarFieldGrid g(spec.radial, spec.azimuthal, spec.nu_max(), spec.e0);
    const double dnu = g.nu_max() / (spec.radial - 1);
    detail::parallel_for(spec.azimuthal, spec.threads, [&](int j) {
        const double phi = g.nu_theta(j);
        std::vector<Complex> acc(static_cast<std::size_t>(spec.radial), Complex{});
        for (const auto& p : geometry.points) {
            const double step = 2.0 * std::numbers::pi * p.r * dnu * std::cos(phi - p.theta);
            const Complex z{std::cos(step), std::sin(step)};
            Complex w{1.0, 0.0};
            for (int i = 0; i < spec.radial; ++i) {
                acc[static_cast<std::size_t>(i)] += w;
                w *= z;
            }
        }
        for (int i = 0; i < spec.radial; ++i) g.at(i, j) = spec.e0 * acc[static_cast<std::size_t>(i)];
    });
    return g;
}

/**
 * J_0(x) .. J_order(x) by Miller's downward recurrence, normalized with
 * J_0 + 2 sum J_2k = 1. Accurate to ~1e-15 relative for the orders and
 * arguments used here.
 */
inline std::vector<double> bessel_j_all(int order, double x) {
    if (order < 0) throw DomainError("Bessel order must be >= 0");
    std::vector<double> out(static_cast<std::size_t>(order) + 1, 0.0);
    const double ax = std::abs(x);
    if (ax == 0.0) {
        out[0] = 1.0;
        return out;
    }
    const int top = std::max(order, static_cast<int>(ax));
    int start = top + 20 + static_cast<int>(std::sqrt(40.0 * top));
    start += start % 2; // even, so the normalization sum pairs up
    double next = 0.0;  // J_{k+1}
    double cur = 1e-300; // J_k
    double norm = 0.0;
    for (int k = start; k >= 1; --k) {
        const double prev = 2.0 * k / ax * cur - next; // J_{k-1}
        next = cur;
        cur = prev;
        if (k - 1 <= order) out[static_cast<std::size_t>(k - 1)] = cur;
        if ((k - 1) % 2 == 0 && k - 1 > 0) norm += 2.0 * cur;
        if (std::abs(cur) > 1e250) {
            next *= 1e-250;
            cur *= 1e-250;
            norm *= 1e-250;
            for (auto& v : out) v *= 1e-250;
        }
    }
    norm += cur;
    for (auto& v : out) v /= norm;
    if (x < 0.0)
        for (std::size_t m = 1; m < out.size(); m += 2) out[m] = -out[m];
    return out;
}

struct OamSpectrum {
    int m_max = 0;
    std::vector<double> k;               // radial frequency samples (um)
    std::vector<Complex> f;              // f(k, m), row-major by k, m from -m_max
    std::vector<double> s;               // S(m) = sum_k |f(k, m)|, index m + m_max

    double at(int m) const { return s.at(static_cast<std::size_t>(m + m_max)); }
    Complex coefficient(std::size_t ki, int m) const {
        return f.at(ki * static_cast<std::size_t>(2 * m_max + 1) + static_cast<std::size_t>(m + m_max));
    }
};

/// (1/T) sum_j E(i, j) e^{-i m nu_theta_j}, indexed [i][m + m_max].
inline std::vector<Complex> azimuthal_coefficients(const FarFieldGrid& field, int m_max) {
    const int width = 2 * m_max + 1;
    const int t = field.azimuthal();
    std::vector<Complex> table(static_cast<std::size_t>(width) * static_cast<std::size_t>(t));
    for (int m = -m_max; m <= m_max; ++m)
        for (int j = 0; j < t; ++j) {
            // integer phase index keeps the table exact to rounding
            const long long idx = (static_cast<long long>(m) * j) % t;
            const double ang = -2.0 * std::numbers::pi * static_cast<double>(idx) / t;
            table[static_cast<std::size_t>(m + m_max) * static_cast<std::size_t>(t) + static_cast<std::size_t>(j)] = {std::cos(ang), std::sin(ang)};
        }
    std::vector<Complex> out(static_cast<std::size_t>(field.radial()) * static_cast<std::size_t>(width));
    for (int i = 0; i < field.radial(); ++i)
        for (int m = 0; m < width; ++m) {
            Complex acc{};
            const Complex* row = &table[static_cast<std::size_t>(m) * static_cast<std::size_t>(t)];
            for (int j = 0; j < t; ++j) acc += field.at(i, j) * row[j];
            out[static_cast<std::size_t>(i) * static_cast<std::size_t>(width) + static_cast<std::size_t>(m)] = acc / static_cast<double>(t);
        }
    return out;
}

/**
 * Composite Simpson weights on n evenly spaced nodes; with an odd number of
 * intervals the last three use the 3/8 rule. Two nodes fall back to the
 * trapezoid.
 */
inline std::vector<double> simpson_weights(int n, double h) {
    if (n < 2) throw DomainError("quadrature needs at least two nodes");
    std::vector<double> w(static_cast<std::size_t>(n), 0.0);
    if (n == 2) {
        w[0] = w[1] = 0.5 * h;
        return w;
    }
    const int intervals = n - 1;
    const int simpson_end = intervals % 2 == 0 ? intervals : intervals - 3;
    for (int i = 0; i < simpson_end; i += 2) {
        w[static_cast<std::size_t>(i)] += h / 3.0;
        w[static_cast<std::size_t>(i + 1)] += 4.0 * h / 3.0;
        w[static_cast<std::size_t>(i + 2)] += h / 3.0;
    }
    if (simpson_end != intervals) {
        const auto i = static_cast<std::size_t>(simpson_end);
        w[i] += 3.0 * h / 8.0;
        w[i + 1] += 9.0 * h / 8.0;
        w[i + 2] += 9.0 * h / 8.0;
        w[i + 3] += 3.0 * h / 8.0;
    }
    return w;
}

struct HankelSpec {
    int m_max = 100;
    int k_samples = 256;
    double k_max_um = 0.0; // usually the spiral radius sqrt(N) a0
    unsigned threads = 0;
};

/**
 * f(k, m) = int_0^numax c_m(nu) J_m(2 pi k nu) nu dnu (Simpson), with
 * c_m the azimuthal coefficients; k runs over k_samples points in
 * [0, k_max].
 */
inline OamSpectrum fourier_hankel(const FarFieldGrid& field, const HankelSpec& spec) {
    if (spec.m_max < 0) throw ConfigError("m_max must be >= 0");
    if (field.azimuthal() < 4 * spec.m_max)
        throw ConfigError("azimuthal resolution " + std::to_string(field.azimuthal()) + " aliases m_max " +
                          std::to_string(spec.m_max) + " (need >= " + std::to_string(4 * spec.m_max) + ")");
    if (spec.k_samples < 1) throw ConfigError("need at least one radial frequency sample");
    if (!(spec.k_max_um > 0.0)) throw ConfigError("k_max must be > 0");

    const int width = 2 * spec.m_max + 1;
    const auto c = azimuthal_coefficients(field, spec.m_max);
    const int nr = field.radial();
    const auto quad = simpson_weights(nr, field.nu_max() / (nr - 1));

    OamSpectrum out;
    out.m_max = spec.m_max;
    out.k.resize(static_cast<std::size_t>(spec.k_samples));
    for (int q = 0; q < spec.k_samples; ++q)
        out.k[static_cast<std::size_t>(q)] = spec.k_samples == 1 ? 0.0 : spec.k_max_um * q / (spec.k_samples - 1);
    out.f.assign(static_cast<std::size_t>(spec.k_samples) * static_cast<std::size_t>(width), Complex{});

    detail::parallel_for(spec.k_samples, spec.threads, [&](int q) {
        const double kq = out.k[static_cast<std::size_t>(q)];
        Complex* row = &out.f[static_cast<std::size_t>(q) * static_cast<std::size_t>(width)];
        for (int i = 0; i < nr; ++i) {
            const double nu = field.nu_r(i);
            const double w = quad[static_cast<std::size_t>(i)] * nu;
            if (w == 0.0) continue;
            const auto j = bessel_j_all(spec.m_max, 2.0 * std::numbers::pi * kq * nu);
            const Complex* ci = &c[static_cast<std::size_t>(i) * static_cast<std::size_t>(width)];
            for (int m = -spec.m_max; m <= spec.m_max; ++m) {
                const int am = m < 0 ? -m : m;
                const double jm = (m < 0 && am % 2 == 1) ? -j[static_cast<std::size_t>(am)] : j[static_cast<std::size_t>(am)];
                row[m + spec.m_max] += w * jm * ci[m + spec.m_max];
            }
        }
    });

    out.s.assign(static_cast<std::size_t>(width), 0.0);
    for (int q = 0; q < spec.k_samples; ++q)
        for (int m = 0; m < width; ++m)
            out.s[static_cast<std::size_t>(m)] += std::abs(out.f[static_cast<std::size_t>(q) * static_cast<std::size_t>(width) + static_cast<std::size_t>(m)]);
    return out;
}

struct Peak {
    int m = 0;
    double height = 0.0;
    double relative = 0.0; // height / global maximum
    bool is_fibonacci = false;
};

/// Fibonacci membership of an azimuthal index; 0 counts (F_0 = 0).
inline bool is_fibonacci_index(int m) {
    const int am = m < 0 ? -m : m;
    return am == 0 || fib::is_fibonacci(am);
}

/**
 * Local maxima of S (strictly above the left neighbour, not below the
 * right one) whose height is at least `threshold` times the global maximum.
 * `s[i]` belongs to m = m_min + i.
 */
inline std::vector<Peak> classify_peaks(const std::vector<double>& s, int m_min, double threshold) {
    std::vector<Peak> out;
    if (s.empty()) return out;
    const double top = *std::max_element(s.begin(), s.end());
    if (!(top > 0.0)) return out;
    const std::size_t n = s.size();
    for (std::size_t i = 0; i < n; ++i) {
        const bool left = i == 0 ? (n == 1 || s[0] > s[1]) : s[i] > s[i - 1];
        const bool right = i + 1 == n || s[i] >= s[i + 1];
        if (!(left && right)) continue;
        if (s[i] < threshold * top) continue;
        const int m = m_min + static_cast<int>(i);
        out.push_back({m, s[i], s[i] / top, is_fibonacci_index(m)});
    }
    return out;
}

inline std::vector<Peak> classify_peaks(const OamSpectrum& spectrum, double threshold) {
    return classify_peaks(spectrum.s, -spectrum.m_max, threshold);
}

inline void write_spectrum_csv(std::ostream& os, const OamSpectrum& spectrum) {
    os << "m,S\n";
    os.precision(17);
    for (int m = -spectrum.m_max; m <= spectrum.m_max; ++m) os << m << ',' << spectrum.at(m) << '\n';
}

inline void write_field_csv(std::ostream& os, const FarFieldGrid& field) {
    os << "nu_r,nu_theta,abs_e\n";
    os.precision(17);
    for (int i = 0; i < field.radial(); ++i)
        for (int j = 0; j < field.azimuthal(); ++j)
            os << field.nu_r(i) << ',' << field.nu_theta(j) << ',' << std::abs(field.at(i, j)) << '\n';
}

} // namespace fibqkd::spiral
