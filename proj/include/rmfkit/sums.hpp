#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <vector>

#include "rmfkit/primes.hpp"
#include "rmfkit/rmf.hpp"
#include "rmfkit/stats.hpp"

namespace rmfkit {

/// Prefix sums of f over 1..x_max for O(1) M_f(x) queries.
struct PrefixSumSeries {
    std::uint64_t x_max = 0;
    std::vector<std::complex<double>> f_values;   // index n, 0 unused
    std::vector<std::complex<double>> cumulative; // cumulative[n] = M_f(n)
};

inline PrefixSumSeries build_prefix_series(const RmfModel& m, const PrimeTable& table,
                                           std::uint64_t x_max) {
    PrefixSumSeries s;
    s.x_max = x_max;
    s.f_values = values_up_to(m, table, x_max);
    s.cumulative.resize(s.f_values.size());
    KahanComplexSum acc;
    s.cumulative[0] = 0.0;
    for (std::uint64_t n = 1; n <= x_max; ++n) {
        acc.add(s.f_values[n]);
        s.cumulative[n] = acc.value();
    }
    return s;
}

/// M_f(x) = sum_{n <= floor(x)} f(n).
inline std::complex<double> mf_sum(const PrefixSumSeries& s, double x) {
    if (!(x >= 1.0) || x > static_cast<double>(s.x_max))
        throw std::invalid_argument("mf_sum: x out of range [1, x_max]");
    return s.cumulative[static_cast<std::uint64_t>(std::floor(x))];
}

/// Psi_f(x, y): sum of f(n) over n <= x with P(n) <= y (strict: P(n) < y).
inline std::complex<double> psi_sum(const RmfModel& m, const PrimeTable& table, double x, double y,
                                    bool strict) {
    if (!(x >= 0.0) || x > static_cast<double>(table.limit) || !(y >= 1.0))
        throw std::invalid_argument("psi_sum: arguments out of range");
    std::uint64_t xi = static_cast<std::uint64_t>(std::floor(x));
    KahanComplexSum acc;
    for (std::uint64_t n = 1; n <= xi; ++n) {
        double pn = static_cast<double>(largest_prime_factor(table, n));
        if (strict ? pn < y : pn <= y) acc.add(value(m, table, n));
    }
    return acc.value();
}

/// Psi'_f(x, z, y): sum of f(n) over z < n <= x with P(n) < y.
inline std::complex<double> psi_range_sum(const RmfModel& m, const PrimeTable& table, double x,
                                          double z, double y) {
    if (!(z >= 0.0) || !(z <= x) || x > static_cast<double>(table.limit))
        throw std::invalid_argument("psi_range_sum: need 0 <= z <= x <= limit");
    std::uint64_t lo = static_cast<std::uint64_t>(std::floor(z));
    std::uint64_t hi = static_cast<std::uint64_t>(std::floor(x));
    KahanComplexSum acc;
    for (std::uint64_t n = lo + 1; n <= hi; ++n) {
        if (static_cast<double>(largest_prime_factor(table, n)) < y) acc.add(value(m, table, n));
    }
    return acc.value();
}

/// Depth-first enumeration of d in (d_min, x] whose prime factors all lie in
/// (y_lo, y_hi], optionally restricted to v_{P(d)}(d) >= 2. Calls
/// visit(d, exponent-of-largest-prime, f(d)). Never scans all integers <= x;
/// the recursion only touches window-supported d. d = 1 is excluded.
template <typename Visitor>
inline void for_each_window_supported(const RmfModel& m, const PrimeTable& table, double x,
                                      double y_lo, double y_hi, double d_min,
                                      bool require_repeated_top, Visitor&& visit) {
    if (!(y_lo < y_hi)) throw std::invalid_argument("window enumeration: need y_lo < y_hi");
    if (!(d_min >= 0.0) || x > static_cast<double>(table.limit))
        throw std::invalid_argument("window enumeration: range error");
    std::vector<std::uint32_t> window;
    for (std::uint32_t p : table.primes) {
        if (static_cast<double>(p) <= y_lo) continue;
        if (static_cast<double>(p) > y_hi || static_cast<double>(p) > x) break;
        window.push_back(p);
    }
    // recurse over primes in ascending order; the last chosen prime is P(d)
    auto rec = [&](auto&& self, std::size_t start, std::uint64_t d, std::complex<double> fd,
                   std::uint32_t top_exp) -> void {
        if (d > 1 && static_cast<double>(d) > d_min && (!require_repeated_top || top_exp >= 2))
            visit(d, top_exp, fd);
        for (std::size_t i = start; i < window.size(); ++i) {
            std::uint64_t p = window[i];
            if (static_cast<double>(d) * static_cast<double>(p) > x) break;
            std::complex<double> fp = value(m, table, p);
            std::uint64_t nd = d * p;
            std::complex<double> fpk = fp;  // f(p^e); exact 0 past e=1 for Rademacher
            std::uint32_t e = 1;
            while (true) {
                self(self, i + 1, nd, fd * fpk, e);
                if (static_cast<double>(nd) * static_cast<double>(p) > x) break;
                nd *= p;
                ++e;
                fpk = m.mode == Mode::rademacher ? std::complex<double>(0.0, 0.0) : fpk * fp;
            }
        }
    };
    rec(rec, 0, 1, {1.0, 0.0}, 0);
}

/// Sum of f(d) over the window-supported d described above.
inline std::complex<double> restricted_sum(const RmfModel& m, const PrimeTable& table, double x,
                                           double y_lo, double y_hi, double d_min,
                                           bool require_repeated_top) {
    if (m.mode == Mode::rademacher && require_repeated_top) return {0.0, 0.0};
    KahanComplexSum acc;
    for_each_window_supported(m, table, x, y_lo, y_hi, d_min, require_repeated_top,
                              [&](std::uint64_t, std::uint32_t, std::complex<double> fd) {
                                  acc.add(fd);
                              });
    return acc.value();
}

/// Psi_1(x, y): exact count of y-smooth integers <= x.
inline std::uint64_t smooth_count(const PrimeTable& table, double x, double y) {
    if (!(x >= 0.0) || x > static_cast<double>(table.limit))
        throw std::invalid_argument("smooth_count: x out of range");
    std::uint64_t xi = static_cast<std::uint64_t>(std::floor(x));
    std::uint64_t c = 0;
    for (std::uint64_t n = 1; n <= xi; ++n)
        if (static_cast<double>(largest_prime_factor(table, n)) <= y) ++c;
    return c;
}

/// (log log x)^{1/4 + eps}, the fluctuation normalizer.
inline double fluctuation_normalizer(double x, double eps) {
    if (!(eps > 0.0)) throw std::invalid_argument("fluctuation_normalizer: eps must be > 0");
    if (!(x > std::exp(std::exp(1.0))))
        throw std::invalid_argument("fluctuation_normalizer: x must exceed e^e");
    return std::pow(std::log(std::log(x)), 0.25 + eps);
}

/// Same normalizer parameterized by log log x directly, for regimes where x
/// itself overflows a double.
inline double fluctuation_normalizer_from_loglog(double loglog_x, double eps) {
    if (!(eps > 0.0) || !(loglog_x > 1.0))
        throw std::invalid_argument("fluctuation_normalizer_from_loglog: bad arguments");
    return std::pow(loglog_x, 0.25 + eps);
}

}  // namespace rmfkit
