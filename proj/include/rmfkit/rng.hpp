#pragma once

#include <cmath>
#include <cstdint>

namespace rmfkit {

// Counter-based randomness: every draw is a pure function of (seed, index),
// so partial streams can be replayed or extended without touching the rest.

inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// One 64-bit word from the stream identified by `seed` at position `index`.
inline std::uint64_t stream_word(std::uint64_t seed, std::uint64_t index) {
    return mix64(mix64(seed) ^ mix64(index ^ 0x6a09e667f3bcc908ULL));
}

/// Uniform double in [0,1) from the (seed, index) stream.
inline double stream_uniform01(std::uint64_t seed, std::uint64_t index) {
    return static_cast<double>(stream_word(seed, index) >> 11) * 0x1.0p-53;
}

/// Derive an independent sub-seed, e.g. per (suite, trial).
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0) {
    return mix64(mix64(base ^ mix64(a)) ^ mix64(b ^ 0x3c6ef372fe94f82bULL));
}

/// Small sequential generator for Monte Carlo loops. Deterministic across
/// platforms; not exposed to users, only seeded through derive_seed.
class SmallRng {
public:
    explicit SmallRng(std::uint64_t seed) : state_(mix64(seed ^ 0xa5a5a5a5a5a5a5a5ULL)) {
        if (state_ == 0) state_ = 0x9e3779b97f4a7c15ULL;
    }

    std::uint64_t next() {
        // xorshift64* core
        state_ ^= state_ >> 12;
        state_ ^= state_ << 25;
        state_ ^= state_ >> 27;
        return state_ * 0x2545f4914f6cdd1dULL;
    }

    double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    int sign() { return (next() & 1) ? 1 : -1; }

    /// Standard normal via Box-Muller (pair cached).
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform01();
        double u2 = uniform01();
        while (u1 <= 0.0) u1 = uniform01();
        double r = std::sqrt(-2.0 * std::log(u1));
        double theta = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(theta);
        have_spare_ = true;
        return r * std::cos(theta);
    }

private:
    std::uint64_t state_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace rmfkit
