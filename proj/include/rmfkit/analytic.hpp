#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <vector>

#include "rmfkit/errors.hpp"
#include "rmfkit/rmf.hpp"
#include "rmfkit/rng.hpp"
#include "rmfkit/stats.hpp"

namespace rmfkit {

/// Finite-support Dirichlet polynomial A(s) = sum a_n n^{-s}.
struct DirichletPolynomial {
    std::map<std::uint64_t, std::complex<double>> coefficients;

    std::complex<double> coefficient(std::uint64_t n) const {
        auto it = coefficients.find(n);
        return it == coefficients.end() ? std::complex<double>{0.0, 0.0} : it->second;
    }
    std::complex<double> evaluate(std::complex<double> s) const {
        KahanComplexSum acc;
        for (const auto& [n, a] : coefficients) {
            double ln = std::log(static_cast<double>(n));
            acc.add(a * std::exp(-s * ln));
        }
        return acc.value();
    }
    std::uint64_t max_support() const {
        return coefficients.empty() ? 0 : coefficients.rbegin()->first;
    }
};

/// F_0(1/2 + it) = prod_{p<=y0} (1 + a_f f(p) p^{-1/2-it})^{a_f}. Steinhaus
/// factors are reciprocals, so a near-vanishing denominator is an error
/// instead of a silent overflow.
inline std::complex<double> euler_product_F0(const RmfModel& m, const PrimeTable& table, double y0,
                                             double t) {
    if (y0 > static_cast<double>(m.prime_limit))
        throw std::invalid_argument("euler_product_F0: y0 exceeds prime_limit");
    std::complex<double> s{0.5, t};
    std::complex<double> out{1.0, 0.0};
    for (std::uint32_t p : table.primes) {
        double pd = static_cast<double>(p);
        if (pd > y0) break;
        std::complex<double> fp = value(m, table, p);
        std::complex<double> local = fp * std::exp(-s * std::log(pd));
        if (m.mode == Mode::rademacher) {
            out *= 1.0 + local;
        } else {
            std::complex<double> den = 1.0 - local;
            if (std::abs(den) < 1e-14)
                throw numeric_singularity("euler_product_F0: near-singular Steinhaus factor at p=" +
                                          std::to_string(p));
            out /= den;
        }
    }
    return out;
}

struct I0Result {
    double value = 0.0;
    double t_max = 0.0;
    double tail_bound = 0.0;  // crude bound on the discarded |t| > t_max mass
};

/// I_0 = (1/log y0) int |F_0(1/2+it)/(1/2+it)|^2 dt, composite Simpson on
/// [-t_max, t_max]. Tail: |F_0| <= M pointwise, so the discarded integral is
/// at most M^2 int_{|t|>t_max} dt/(1/4+t^2) = M^2 (2 pi - 4 arctan(2 t_max)),
/// all divided by log y0.
inline I0Result compute_I0(const RmfModel& m, const PrimeTable& table, double y0, double t_max,
                           double quad_step) {
    if (!(t_max > 0.0) || !(quad_step > 0.0))
        throw std::invalid_argument("compute_I0: need t_max, quad_step > 0");
    if (!(y0 > 1.0)) throw std::invalid_argument("compute_I0: need y0 > 1");
    auto integrand = [&](double t) {
        std::complex<double> F = euler_product_F0(m, table, y0, t);
        return std::norm(F) / (0.25 + t * t);
    };
    std::size_t n = static_cast<std::size_t>(std::ceil(2.0 * t_max / quad_step));
    if (n % 2 == 1) ++n;
    if (n < 2) n = 2;
    double h = 2.0 * t_max / static_cast<double>(n);
    KahanSum acc;
    acc.add(integrand(-t_max));
    acc.add(integrand(t_max));
    for (std::size_t i = 1; i < n; ++i)
        acc.add((i % 2 == 1 ? 4.0 : 2.0) * integrand(-t_max + h * static_cast<double>(i)));
    double integral = acc.value() * h / 3.0;

    double M = 1.0;
    for (std::uint32_t p : table.primes) {
        double pd = static_cast<double>(p);
        if (pd > y0) break;
        double r = 1.0 / std::sqrt(pd);
        M *= m.mode == Mode::rademacher ? 1.0 + r : 1.0 / (1.0 - r);
    }
    I0Result out;
    out.value = integral / std::log(y0);
    out.t_max = t_max;
    out.tail_bound = M * M * (2.0 * 3.14159265358979323846 - 4.0 * std::atan(2.0 * t_max)) /
                     std::log(y0);
    return out;
}

struct I0MomentResult {
    double mean_pow_2_3 = 0.0;
    double std_error = 0.0;
};

/// Monte Carlo E[I_0^{2/3}] over fresh models.
inline I0MomentResult estimate_I0_low_moment(Mode mode, const PrimeTable& table, double y0,
                                             double t_max, double quad_step, std::size_t trials,
                                             std::uint64_t base_seed) {
    if (trials < 100) throw std::invalid_argument("estimate_I0_low_moment: trials < 100");
    std::uint64_t plimit = std::max<std::uint64_t>(static_cast<std::uint64_t>(y0), 2);
    I0MomentResult out;
    if (y0 < 2.0) {
        // empty product: deterministic closed form
        RmfModel m = sample_model(mode, base_seed, plimit, table);
        out.mean_pow_2_3 = std::pow(compute_I0(m, table, y0, t_max, quad_step).value, 2.0 / 3.0);
        out.std_error = 0.0;
        return out;
    }
    MeanAccumulator acc;
    for (std::size_t tr = 0; tr < trials; ++tr) {
        RmfModel m = sample_model(mode, derive_seed(base_seed, 0x49304D43u, tr), plimit, table);
        acc.add(std::pow(compute_I0(m, table, y0, t_max, quad_step).value, 2.0 / 3.0));
    }
    out.mean_pow_2_3 = acc.mean();
    out.std_error = acc.std_error();
    return out;
}

struct ParsevalResult {
    double lhs = 0.0;
    double rhs = 0.0;
    double rel_err = 0.0;
};

/// Parseval identity for finite Dirichlet polynomials:
///   int_0^inf |sum_{n<=x} a_n|^2 x^{-1-2s} dx = (1/2pi) int |A(s+it)/(s+it)|^2 dt.
/// The left side is exact (piecewise-constant numerator with closed-form
/// pieces and tail); the right side is Simpson quadrature, so agreement is a
/// genuine cross-validation.
inline ParsevalResult parseval_check(const DirichletPolynomial& poly, double sigma, double x_max,
                                     double t_max, double quad_step) {
    if (!(sigma > 0.0)) throw std::invalid_argument("parseval_check: sigma must be > 0");
    if (!(t_max > 0.0) || !(quad_step > 0.0))
        throw std::invalid_argument("parseval_check: need t_max, quad_step > 0");
    ParsevalResult out;
    if (poly.coefficients.empty()) return out;
    if (static_cast<double>(poly.max_support()) > x_max)
        throw std::invalid_argument("parseval_check: x_max below polynomial support");

    // exact left side: between consecutive support points the partial sum is
    // constant and int_a^b x^{-1-2s} dx = (a^{-2s} - b^{-2s})/(2s)
    KahanSum lhs;
    KahanComplexSum partial;
    auto it = poly.coefficients.begin();
    while (it != poly.coefficients.end()) {
        double a = static_cast<double>(it->first);
        while (it != poly.coefficients.end() && static_cast<double>(it->first) == a) {
            partial.add(it->second);
            ++it;
        }
        double b = it == poly.coefficients.end() ? x_max : static_cast<double>(it->first);
        lhs.add(std::norm(partial.value()) *
                (std::pow(a, -2.0 * sigma) - std::pow(b, -2.0 * sigma)) / (2.0 * sigma));
    }
    // exact tail beyond x_max (partial sum is complete there)
    lhs.add(std::norm(partial.value()) * std::pow(x_max, -2.0 * sigma) / (2.0 * sigma));
    out.lhs = lhs.value();

    auto integrand = [&](double t) {
        std::complex<double> s{sigma, t};
        return std::norm(poly.evaluate(s)) / std::norm(s);
    };
    std::size_t n = static_cast<std::size_t>(std::ceil(2.0 * t_max / quad_step));
    if (n % 2 == 1) ++n;
    if (n < 2) n = 2;
    double h = 2.0 * t_max / static_cast<double>(n);
    KahanSum acc;
    acc.add(integrand(-t_max));
    acc.add(integrand(t_max));
    for (std::size_t i = 1; i < n; ++i)
        acc.add((i % 2 == 1 ? 4.0 : 2.0) * integrand(-t_max + h * static_cast<double>(i)));
    out.rhs = acc.value() * h / 3.0 / (2.0 * 3.14159265358979323846);
    out.rel_err = out.lhs > 0.0 ? std::abs(out.lhs - out.rhs) / out.lhs : std::abs(out.rhs);
    return out;
}

enum class Method { exact, monte_carlo };

struct EulerExpectationResult {
    double estimate = 0.0;
    double target = 0.0;
    double err = 0.0;        // |estimate - target|
    double std_error = 0.0;  // 0 for exact
};

/// E prod_p |1 + a_f f(p) p^{-1/2-it}|^{2 a_f} against prod_p (1 + a_f/p)^{a_f}.
inline EulerExpectationResult euler_expectation_check(Mode mode,
                                                      const std::vector<std::uint64_t>& prime_set,
                                                      double t, Method method, std::size_t trials,
                                                      std::uint64_t base_seed = 1) {
    if (prime_set.empty()) throw std::invalid_argument("euler_expectation_check: empty prime set");
    int af = mode == Mode::rademacher ? 1 : -1;
    EulerExpectationResult out;
    double target = 1.0;
    for (std::uint64_t p : prime_set) {
        double base = 1.0 + static_cast<double>(af) / static_cast<double>(p);
        target *= af == 1 ? base : 1.0 / base;
    }
    out.target = target;

    std::complex<double> s{0.5, t};
    auto sample_value = [&](const std::vector<std::complex<double>>& fp) {
        double prod = 1.0;
        for (std::size_t i = 0; i < prime_set.size(); ++i) {
            std::complex<double> local =
                fp[i] * std::exp(-s * std::log(static_cast<double>(prime_set[i])));
            double factor = af == 1 ? std::norm(1.0 + local) : std::norm(1.0 - local);
            prod = af == 1 ? prod * factor : prod / factor;
        }
        return prod;
    };

    if (method == Method::exact) {
        if (mode != Mode::rademacher)
            throw unsupported_method("euler_expectation_check: exact path is Rademacher-only");
        if (prime_set.size() > 20)
            throw std::invalid_argument("euler_expectation_check: exact limited to 20 primes");
        std::size_t total = std::size_t{1} << prime_set.size();
        KahanSum acc;
        std::vector<std::complex<double>> fp(prime_set.size());
        for (std::size_t mask = 0; mask < total; ++mask) {
            for (std::size_t i = 0; i < prime_set.size(); ++i)
                fp[i] = (mask >> i) & 1 ? 1.0 : -1.0;
            acc.add(sample_value(fp));
        }
        out.estimate = acc.value() / static_cast<double>(total);
        out.std_error = 0.0;
    } else {
        MeanAccumulator acc;
        std::vector<std::complex<double>> fp(prime_set.size());
        for (std::size_t tr = 0; tr < trials; ++tr) {
            std::uint64_t ts = derive_seed(base_seed, 0x45554C52u, tr);
            for (std::size_t i = 0; i < prime_set.size(); ++i) {
                if (mode == Mode::rademacher)
                    fp[i] = detail::draw_sign(ts, prime_set[i]) > 0 ? 1.0 : -1.0;
                else
                    fp[i] = std::polar(1.0, kTwoPi * detail::draw_angle(ts, prime_set[i]));
            }
            acc.add(sample_value(fp));
        }
        out.estimate = acc.mean();
        out.std_error = acc.std_error();
    }
    out.err = std::abs(out.estimate - out.target);
    return out;
}

}  // namespace rmfkit
