#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace rmfkit {

/// Smallest-prime-factor sieve plus the prime list. Immutable after
/// construction and safe to share across threads.
struct PrimeTable {
    std::uint64_t limit = 0;
    std::vector<std::uint32_t> spf;      // spf[n] for 2 <= n <= limit; spf[0]=spf[1]=0
    std::vector<std::uint32_t> primes;   // ascending primes <= limit

    bool is_prime(std::uint64_t n) const {
        return n >= 2 && n <= limit && spf[static_cast<std::size_t>(n)] == n;
    }
};

/// Linear sieve. limit >= 2.
inline PrimeTable build_prime_table(std::uint64_t limit) {
    if (limit < 2) throw std::invalid_argument("build_prime_table: limit must be >= 2");
    PrimeTable t;
    t.limit = limit;
    t.spf.assign(static_cast<std::size_t>(limit) + 1, 0);
    for (std::uint64_t n = 2; n <= limit; ++n) {
        if (t.spf[n] == 0) {
            t.spf[n] = static_cast<std::uint32_t>(n);
            t.primes.push_back(static_cast<std::uint32_t>(n));
        }
        for (std::uint32_t p : t.primes) {
            if (p > t.spf[n] || n * p > limit) break;
            t.spf[n * p] = p;
        }
    }
    return t;
}

namespace detail {
inline void check_range(const PrimeTable& t, std::uint64_t n, const char* who) {
    if (n < 1 || n > t.limit)
        throw std::invalid_argument(std::string(who) + ": n out of range [1, limit]");
}
}  // namespace detail

/// Factorization as ascending (prime, exponent) pairs; empty for n = 1.
inline std::vector<std::pair<std::uint64_t, std::uint32_t>> factorize(const PrimeTable& t,
                                                                      std::uint64_t n) {
    detail::check_range(t, n, "factorize");
    std::vector<std::pair<std::uint64_t, std::uint32_t>> out;
    while (n > 1) {
        std::uint64_t p = t.spf[static_cast<std::size_t>(n)];
        std::uint32_t e = 0;
        while (n % p == 0) {
            n /= p;
            ++e;
        }
        out.emplace_back(p, e);
    }
    return out;
}

/// P(n), with P(1) = 1.
inline std::uint64_t largest_prime_factor(const PrimeTable& t, std::uint64_t n) {
    detail::check_range(t, n, "largest_prime_factor");
    std::uint64_t p = 1;
    while (n > 1) {
        p = t.spf[static_cast<std::size_t>(n)];
        while (n % p == 0) n /= p;
    }
    return p;
}

inline bool is_squarefree(const PrimeTable& t, std::uint64_t n) {
    detail::check_range(t, n, "is_squarefree");
    while (n > 1) {
        std::uint64_t p = t.spf[static_cast<std::size_t>(n)];
        n /= p;
        if (n % p == 0) return false;
    }
    return true;
}

/// Exact finite sum of 1/p over primes a < p <= b.
inline double mertens_sum(const PrimeTable& t, double a, double b) {
    if (!(a >= 0.0) || !(a <= b)) throw std::invalid_argument("mertens_sum: need 0 <= a <= b");
    if (b > static_cast<double>(t.limit))
        throw std::invalid_argument("mertens_sum: b exceeds table limit");
    auto lo = std::upper_bound(t.primes.begin(), t.primes.end(), a,
                               [](double v, std::uint32_t p) { return v < static_cast<double>(p); });
    double s = 0.0;
    for (auto it = lo; it != t.primes.end() && static_cast<double>(*it) <= b; ++it)
        s += 1.0 / static_cast<double>(*it);
    return s;
}

namespace detail {
/// binomial(a + m - 1, m - 1) in exact integer arithmetic; throws on overflow.
inline std::uint64_t tau_local(std::uint32_t a, std::uint64_t m) {
    unsigned __int128 acc = 1;
    for (std::uint64_t i = 1; i < m; ++i) {
        acc = acc * (a + i);
        acc /= i;  // exact: prefix products of binomial recurrence divide evenly
        if (acc > static_cast<unsigned __int128>(UINT64_MAX))
            throw std::overflow_error("divisor_tau: value exceeds 64-bit range");
    }
    return static_cast<std::uint64_t>(acc);
}
}  // namespace detail

/// m-fold divisor function tau_m(n): ordered m-tuples with product n.
inline std::uint64_t divisor_tau(const PrimeTable& t, std::uint64_t m, std::uint64_t n) {
    if (m < 1) throw std::invalid_argument("divisor_tau: m must be >= 1");
    detail::check_range(t, n, "divisor_tau");
    unsigned __int128 acc = 1;
    while (n > 1) {
        std::uint64_t p = t.spf[static_cast<std::size_t>(n)];
        std::uint32_t e = 0;
        while (n % p == 0) {
            n /= p;
            ++e;
        }
        acc *= detail::tau_local(e, m);
        if (acc > static_cast<unsigned __int128>(UINT64_MAX))
            throw std::overflow_error("divisor_tau: value exceeds 64-bit range");
    }
    return static_cast<std::uint64_t>(acc);
}

struct TauSumBound {
    std::uint64_t sum = 0;
    double bound = 0.0;
    bool ok = false;
};

/// sum_{n<=x} tau_m(n) against x (2 log x)^{m-1}, for x >= 3.
inline TauSumBound tau_sum_bound_check(const PrimeTable& t, double x, std::uint64_t m) {
    if (m < 2) throw std::invalid_argument("tau_sum_bound_check: m must be >= 2");
    if (!(x >= 3.0) || x > static_cast<double>(t.limit))
        throw std::invalid_argument("tau_sum_bound_check: x out of range [3, limit]");
    std::uint64_t xi = static_cast<std::uint64_t>(std::floor(x));
    TauSumBound r;
    for (std::uint64_t n = 1; n <= xi; ++n) r.sum += divisor_tau(t, m, n);
    r.bound = x * std::pow(2.0 * std::log(x), static_cast<double>(m - 1));
    r.ok = static_cast<double>(r.sum) <= r.bound;
    return r;
}

/// Largest-prime-factor array for 1..x (entry 1 maps to 1); bulk companion
/// to largest_prime_factor for the sum engines.
inline std::vector<std::uint32_t> largest_factor_table(const PrimeTable& t, std::uint64_t x) {
    detail::check_range(t, std::max<std::uint64_t>(x, 1), "largest_factor_table");
    std::vector<std::uint32_t> lpf(static_cast<std::size_t>(x) + 1, 0);
    if (x >= 1) lpf[1] = 1;
    for (std::uint64_t n = 2; n <= x; ++n) {
        std::uint64_t p = t.spf[static_cast<std::size_t>(n)];
        lpf[n] = std::max(static_cast<std::uint32_t>(p), lpf[n / p]);
    }
    return lpf;
}

}  // namespace rmfkit
