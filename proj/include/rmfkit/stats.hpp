#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace rmfkit {

/// Compensated (Kahan) accumulator for long real sums.
class KahanSum {
public:
    void add(double x) {
        double y = x - c_;
        double t = s_ + y;
        c_ = (t - s_) - y;
        s_ = t;
    }
    double value() const { return s_; }

private:
    double s_ = 0.0, c_ = 0.0;
};

/// Compensated accumulator for complex sums.
class KahanComplexSum {
public:
    void add(std::complex<double> z) {
        re_.add(z.real());
        im_.add(z.imag());
    }
    std::complex<double> value() const { return {re_.value(), im_.value()}; }

private:
    KahanSum re_, im_;
};

/// Streaming mean/variance (Welford) with associative merge, so trial
/// results can be aggregated in any grouping with the same final answer.
class MeanAccumulator {
public:
    void add(double x) {
        ++n_;
        double d = x - mean_;
        mean_ += d / static_cast<double>(n_);
        m2_ += d * (x - mean_);
    }
    void merge(const MeanAccumulator& o) {
        if (o.n_ == 0) return;
        if (n_ == 0) {
            *this = o;
            return;
        }
        double nd = static_cast<double>(n_ + o.n_);
        double delta = o.mean_ - mean_;
        m2_ += o.m2_ + delta * delta * static_cast<double>(n_) * static_cast<double>(o.n_) / nd;
        mean_ += delta * static_cast<double>(o.n_) / nd;
        n_ += o.n_;
    }
    std::size_t count() const { return n_; }
    double mean() const { return mean_; }
    double variance() const { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }
    double std_error() const {
        return n_ > 0 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0;
    }

private:
    std::size_t n_ = 0;
    double mean_ = 0.0, m2_ = 0.0;
};

/// Standard error of an empirical proportion, floored at 1/n so a run of
/// all-zero outcomes still yields a nonzero interval.
inline double binomial_std_error(double p_hat, std::size_t n) {
    if (n == 0) return 1.0;
    double nd = static_cast<double>(n);
    double se = std::sqrt(std::max(p_hat * (1.0 - p_hat), 0.0) / nd);
    return std::max(se, 1.0 / nd);
}

/// Run fn(i) for i in [0, n) over up to `jobs` threads. Results must be
/// written to per-index slots; the caller reduces in index order, so the
/// output is independent of the thread count.
inline void parallel_for(std::size_t n, unsigned jobs, const std::function<void(std::size_t)>& fn) {
    if (jobs <= 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    unsigned workers = std::min<std::size_t>(jobs, n);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            for (std::size_t i = w; i < n; i += workers) fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace rmfkit
