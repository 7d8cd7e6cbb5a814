#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "rmfkit/errors.hpp"
#include "rmfkit/primes.hpp"
#include "rmfkit/rng.hpp"

namespace rmfkit {

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

enum class Mode { steinhaus, rademacher };

inline const char* mode_name(Mode m) {
    return m == Mode::steinhaus ? "steinhaus" : "rademacher";
}

inline Mode mode_from_name(const std::string& s) {
    if (s == "steinhaus") return Mode::steinhaus;
    if (s == "rademacher") return Mode::rademacher;
    throw std::invalid_argument("unknown mode: " + s);
}

/// One sampled random multiplicative function. Steinhaus values are stored
/// as angles in [0,1) so |f(p)| = 1 holds by construction; Rademacher values
/// are exact signs. Immutable after construction.
struct RmfModel {
    Mode mode = Mode::steinhaus;
    std::uint64_t seed = 0;
    std::uint64_t prime_limit = 0;
    std::vector<double> angles;      // per prime index, Steinhaus only
    std::vector<std::int8_t> signs;  // per prime index, Rademacher only

    int a_f() const { return mode == Mode::rademacher ? 1 : -1; }
};

namespace detail {
/// Index of prime p in table.primes, or npos.
inline std::size_t prime_index(const PrimeTable& t, std::uint64_t p) {
    auto it = std::lower_bound(t.primes.begin(), t.primes.end(), p);
    if (it == t.primes.end() || *it != p) return static_cast<std::size_t>(-1);
    return static_cast<std::size_t>(it - t.primes.begin());
}

inline double draw_angle(std::uint64_t seed, std::uint64_t p) { return stream_uniform01(seed, p); }
inline std::int8_t draw_sign(std::uint64_t seed, std::uint64_t p) {
    return stream_uniform01(seed, p) < 0.5 ? std::int8_t(-1) : std::int8_t(1);
}
}  // namespace detail

/// Values at distinct primes are independent draws from the per-prime stream
/// (seed, p), so enlarging prime_limit preserves existing values.
inline RmfModel sample_model(Mode mode, std::uint64_t seed, std::uint64_t prime_limit,
                             const PrimeTable& table) {
    if (prime_limit > table.limit)
        throw std::invalid_argument("sample_model: prime_limit exceeds table limit");
    RmfModel m;
    m.mode = mode;
    m.seed = seed;
    m.prime_limit = prime_limit;
    std::size_t np = 0;
    while (np < table.primes.size() && table.primes[np] <= prime_limit) ++np;
    if (mode == Mode::steinhaus) {
        m.angles.resize(np);
        for (std::size_t i = 0; i < np; ++i) m.angles[i] = detail::draw_angle(seed, table.primes[i]);
    } else {
        m.signs.resize(np);
        for (std::size_t i = 0; i < np; ++i) m.signs[i] = detail::draw_sign(seed, table.primes[i]);
    }
    return m;
}

/// f(n). Steinhaus: completely multiplicative, |f(n)| = 1. Rademacher:
/// product of signs on squarefree n, exactly 0 otherwise. f(1) = 1.
inline std::complex<double> value(const RmfModel& m, const PrimeTable& table, std::uint64_t n) {
    detail::check_range(table, n, "value");
    if (n == 1) return {1.0, 0.0};
    if (m.mode == Mode::steinhaus) {
        double angle = 0.0;
        std::uint64_t rest = n;
        while (rest > 1) {
            std::uint64_t p = table.spf[static_cast<std::size_t>(rest)];
            if (p > m.prime_limit)
                throw missing_prime_value("value: prime factor " + std::to_string(p) +
                                          " exceeds prime_limit");
            std::uint32_t e = 0;
            while (rest % p == 0) {
                rest /= p;
                ++e;
            }
            angle += static_cast<double>(e) * m.angles[detail::prime_index(table, p)];
        }
        angle -= std::floor(angle);
        return std::polar(1.0, kTwoPi * angle);
    }
    int sign = 1;
    std::uint64_t rest = n;
    while (rest > 1) {
        std::uint64_t p = table.spf[static_cast<std::size_t>(rest)];
        if (p > m.prime_limit)
            throw missing_prime_value("value: prime factor " + std::to_string(p) +
                                      " exceeds prime_limit");
        rest /= p;
        if (rest % p == 0) return {0.0, 0.0};
        sign *= m.signs[detail::prime_index(table, p)];
    }
    return {static_cast<double>(sign), 0.0};
}

/// Dense array f(0..x) (index 0 unused) by smallest-prime-factor recurrence.
inline std::vector<std::complex<double>> values_up_to(const RmfModel& m, const PrimeTable& table,
                                                      std::uint64_t x) {
    if (x < 1 || x > table.limit) throw std::invalid_argument("values_up_to: x out of range");
    std::vector<std::complex<double>> f(static_cast<std::size_t>(x) + 1, {0.0, 0.0});
    f[0] = 0.0;
    if (x >= 1) f[1] = 1.0;
    if (x < 2) return f;
    // seed the primes first, then fold composites in one pass
    for (std::size_t i = 0; i < table.primes.size(); ++i) {
        std::uint64_t p = table.primes[i];
        if (p > x) break;
        if (p > m.prime_limit)
            throw missing_prime_value("values_up_to: prime " + std::to_string(p) +
                                      " exceeds prime_limit");
        f[p] = m.mode == Mode::steinhaus
                   ? std::polar(1.0, kTwoPi * m.angles[i])
                   : std::complex<double>(static_cast<double>(m.signs[i]), 0.0);
    }
    for (std::uint64_t n = 2; n <= x; ++n) {
        std::uint64_t p = table.spf[static_cast<std::size_t>(n)];
        if (p == n) continue;
        std::uint64_t q = n / p;
        if (m.mode == Mode::rademacher && table.spf[static_cast<std::size_t>(q)] == p) {
            f[n] = 0.0;  // p^2 | n
        } else {
            f[n] = f[q] * f[p];
        }
    }
    return f;
}

/// Copy of `m` with values at primes in (p_lo, p_hi] redrawn from the
/// (block_seed, p) stream. The input model is unchanged.
inline RmfModel resample_block(const RmfModel& m, const PrimeTable& table, double p_lo, double p_hi,
                               std::uint64_t block_seed) {
    if (!(p_lo < p_hi) || p_hi > static_cast<double>(m.prime_limit))
        throw std::invalid_argument("resample_block: need p_lo < p_hi <= prime_limit");
    RmfModel out = m;
    for (std::size_t i = 0; i < table.primes.size(); ++i) {
        double p = static_cast<double>(table.primes[i]);
        if (p <= p_lo) continue;
        if (p > p_hi) break;
        if (m.mode == Mode::steinhaus)
            out.angles[i] = detail::draw_angle(block_seed, table.primes[i]);
        else
            out.signs[i] = detail::draw_sign(block_seed, table.primes[i]);
    }
    return out;
}

/// Descriptor serialization: values regenerate from (mode, seed, prime_limit).
inline std::string model_descriptor_json(const RmfModel& m) {
    return std::string("{\"mode\":\"") + mode_name(m.mode) +
           "\",\"seed\":" + std::to_string(m.seed) +
           ",\"prime_limit\":" + std::to_string(m.prime_limit) + "}";
}

}  // namespace rmfkit
