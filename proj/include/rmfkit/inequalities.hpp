#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <vector>

#include "rmfkit/analytic.hpp"
#include "rmfkit/decomp.hpp"
#include "rmfkit/errors.hpp"
#include "rmfkit/rng.hpp"
#include "rmfkit/stats.hpp"

namespace rmfkit {

// ---------------------------------------------------------------------------
// Martingale difference processes
// ---------------------------------------------------------------------------

struct MdsStep {
    std::complex<double> Z;
    double S;
};

/// Predictable martingale-difference process: per step, S_n is a function of
/// the history only (checked by seed-replay), Z_n is the fresh draw with
/// |Z_n| <= S_n. `unconditional` declares sum S_n^2 <= T surely.
struct MdsProcess {
    std::size_t length = 0;
    double T = 0.0;
    bool unconditional = true;
    std::function<MdsStep(std::uint64_t seed, std::size_t n,
                          const std::vector<std::complex<double>>& prev)>
        step;
};

/// Z_n = S_n * (random sign), with S_n a bounded predictable function of the
/// history so that sum S_n^2 <= T always holds.
inline MdsProcess make_scaled_sign_process(std::size_t length, double T) {
    MdsProcess p;
    p.length = length;
    p.T = T;
    p.unconditional = true;
    p.step = [length, T](std::uint64_t seed, std::size_t n,
                         const std::vector<std::complex<double>>& prev) {
        double h = 0.0;
        for (std::complex<double> z : prev) h += z.real() + 0.5 * z.imag();
        double w = 0.25 + 0.75 * (0.5 + 0.5 * std::sin(h + static_cast<double>(n)));
        double S = std::sqrt(T / static_cast<double>(length)) * w;
        double u = stream_uniform01(seed, 2 * n);
        double theta = stream_uniform01(seed, 2 * n + 1);
        MdsStep st;
        st.S = S;
        st.Z = u < 0.5 ? std::polar(S, kTwoPi * theta) : -std::polar(S, kTwoPi * theta);
        return st;
    };
    return p;
}

/// Process whose trials may violate sum S_n^2 <= T (roughly the fraction
/// requested), for the conditioned Hoeffding variant.
inline MdsProcess make_mixed_process(std::size_t length, double T, double violate_scale) {
    MdsProcess p;
    p.length = length;
    p.T = T;
    p.unconditional = false;
    p.step = [length, T, violate_scale](std::uint64_t seed, std::size_t n,
                                        const std::vector<std::complex<double>>& prev) {
        // scale escalates after observing the first step's sign, so roughly
        // half the trials run hot; predictable because it reads history only
        double hot = 1.0;
        if (n >= 1) hot = prev.front().real() > 0.0 ? violate_scale : 0.8;
        double h = 0.0;
        for (std::complex<double> z : prev) h += z.real();
        double w = 0.5 + 0.5 * (0.5 + 0.5 * std::cos(h + static_cast<double>(n)));
        double S = hot * std::sqrt(T / static_cast<double>(length)) * w;
        double u = stream_uniform01(seed, 2 * n + 1);
        MdsStep st;
        st.S = S;
        st.Z = {u < 0.5 ? S : -S, 0.0};
        return st;
    };
    return p;
}

namespace detail {

struct MdsTrialOutcome {
    double abs_sum = 0.0;
    double ssq = 0.0;
};

inline MdsTrialOutcome run_mds_trial(const MdsProcess& proc, std::uint64_t seed,
                                     bool enforce_budget) {
    std::vector<std::complex<double>> prev;
    prev.reserve(proc.length);
    KahanComplexSum sum;
    KahanSum ssq;
    for (std::size_t n = 0; n < proc.length; ++n) {
        MdsStep st = proc.step(seed, n, prev);
        if (!(std::abs(st.Z) <= st.S * (1.0 + 1e-12)))
            throw invalid_process("mds process: |Z_n| > S_n at step " + std::to_string(n));
        // predictability: S must not depend on the step's own randomness
        MdsStep replay = proc.step(seed ^ 0x5DEECE66DULL, n, prev);
        if (replay.S != st.S)
            throw invalid_process("mds process: S_n depends on the current draw at step " +
                                  std::to_string(n));
        prev.push_back(st.Z);
        sum.add(st.Z);
        ssq.add(st.S * st.S);
    }
    if (enforce_budget && !(ssq.value() <= proc.T * (1.0 + 1e-12)))
        throw invalid_process("mds process: sum S_n^2 exceeds declared T");
    MdsTrialOutcome out;
    out.abs_sum = std::abs(sum.value());
    out.ssq = ssq.value();
    return out;
}

}  // namespace detail

struct HoeffdingRow {
    double eps = 0.0;
    double empirical = 0.0;
    double bound = 0.0;
    bool ok = false;
};

/// P[|sum Z_n| >= eps] <= 2 exp(-eps^2 / (10 T)) for unconditional processes.
inline std::vector<HoeffdingRow> hoeffding_tail_check(const MdsProcess& proc,
                                                      const std::vector<double>& eps_grid,
                                                      std::size_t trials,
                                                      std::uint64_t base_seed) {
    if (!proc.unconditional)
        throw std::invalid_argument("hoeffding_tail_check: process must be unconditional");
    if (trials == 0) throw std::invalid_argument("hoeffding_tail_check: trials == 0");
    std::vector<double> abs_sums(trials);
    for (std::size_t t = 0; t < trials; ++t)
        abs_sums[t] = detail::run_mds_trial(proc, derive_seed(base_seed, 0x484F4546u, t), true)
                          .abs_sum;
    std::vector<HoeffdingRow> rows;
    for (double eps : eps_grid) {
        HoeffdingRow r;
        r.eps = eps;
        std::size_t hits = 0;
        for (double a : abs_sums)
            if (a >= eps) ++hits;
        r.empirical = static_cast<double>(hits) / static_cast<double>(trials);
        r.bound = 2.0 * std::exp(-eps * eps / (10.0 * proc.T));
        r.ok = r.empirical <= r.bound + 3.0 * binomial_std_error(r.empirical, trials);
        rows.push_back(r);
    }
    return rows;
}

/// Conditioned variant: the *joint* probability of |sum Z_n| >= eps together
/// with the budget event sum S_n^2 <= T obeys the same bound.
inline std::vector<HoeffdingRow> hoeffding_conditioned_check(const MdsProcess& proc,
                                                             const std::vector<double>& eps_grid,
                                                             std::size_t trials,
                                                             std::uint64_t base_seed) {
    if (trials == 0) throw std::invalid_argument("hoeffding_conditioned_check: trials == 0");
    std::vector<detail::MdsTrialOutcome> outs(trials);
    for (std::size_t t = 0; t < trials; ++t)
        outs[t] = detail::run_mds_trial(proc, derive_seed(base_seed, 0x484F4543u, t), false);
    std::vector<HoeffdingRow> rows;
    for (double eps : eps_grid) {
        HoeffdingRow r;
        r.eps = eps;
        std::size_t hits = 0;
        for (const auto& o : outs)
            if (o.abs_sum >= eps && o.ssq <= proc.T) ++hits;
        r.empirical = static_cast<double>(hits) / static_cast<double>(trials);
        r.bound = 2.0 * std::exp(-eps * eps / (10.0 * proc.T));
        r.ok = r.empirical <= r.bound + 3.0 * binomial_std_error(r.empirical, trials);
        rows.push_back(r);
    }
    return rows;
}

// ---------------------------------------------------------------------------
// 2-D Doob
// ---------------------------------------------------------------------------

/// Family of nonnegative supermartingale columns sharing the initial value
/// X_{0,k} = X_0. The generator returns the (N+1) x K matrix for one trial.
struct SupermartingaleFamily {
    std::size_t K_count = 0;
    std::size_t N_count = 0;
    std::function<std::vector<std::vector<double>>(std::uint64_t seed)> generator;
    std::function<bool(double x0)> s0_predicate;
};

/// X_{n,k} = X_0 prod_{m<=n} xi_{m,k} with log-normal factors of mean 1, so
/// each column is a nonnegative martingale (hence supermartingale). The
/// columns share one driving factor sequence and differ by a staggered
/// horizon t_k after which xi_{m,k} = 1 (column k is frozen). This keeps the
/// column of the first exceedance determined by the filtration of the common
/// factors, which is what the maximal inequality's stopping-time argument
/// needs; K fully independent columns only obey the union bound K E[X_0] /
/// lambda and can exceed 2 E[X_0] / lambda.
inline SupermartingaleFamily make_multiplicative_family(std::size_t K_count, std::size_t N_count,
                                                        double s0_cut = 2.0) {
    SupermartingaleFamily fam;
    fam.K_count = K_count;
    fam.N_count = N_count;
    fam.s0_predicate = [s0_cut](double x0) { return x0 <= s0_cut; };
    fam.generator = [K_count, N_count](std::uint64_t seed) {
        SmallRng rng(seed);
        double x0 = 0.1 + 2.4 * rng.uniform01();
        std::vector<std::vector<double>> X(N_count + 1, std::vector<double>(K_count, 0.0));
        for (std::size_t k = 0; k < K_count; ++k) X[0][k] = x0;
        const double sigma = 0.3;
        std::vector<std::size_t> horizon(K_count);
        for (std::size_t k = 0; k < K_count; ++k)
            horizon[k] = ((k + 1) * N_count) / K_count;
        double running = x0;
        for (std::size_t n = 1; n <= N_count; ++n) {
            double xi = std::exp(sigma * rng.normal() - 0.5 * sigma * sigma);
            running *= xi;
            for (std::size_t k = 0; k < K_count; ++k)
                X[n][k] = n <= horizon[k] ? running : X[n - 1][k];
        }
        return X;
    };
    return fam;
}

struct DoobRow {
    double lambda = 0.0;
    double lhs = 0.0;
    double rhs = 0.0;
    bool ok = false;
};

/// lambda P[sup X_{n,k} > lambda | S_0] <= 2 E[X_0 | S_0].
inline std::vector<DoobRow> doob2d_check(const SupermartingaleFamily& fam,
                                         const std::vector<double>& lambda_grid,
                                         std::size_t trials, std::uint64_t base_seed) {
    if (trials == 0) throw std::invalid_argument("doob2d_check: trials == 0");
    std::vector<double> sups;
    MeanAccumulator x0_acc;
    for (std::size_t t = 0; t < trials; ++t) {
        auto X = fam.generator(derive_seed(base_seed, 0x444F4F42u, t));
        if (X.size() != fam.N_count + 1)
            throw invalid_process("doob2d_check: wrong row count from generator");
        double x0 = X[0].empty() ? 0.0 : X[0][0];
        for (double v : X[0])
            if (v != x0) throw invalid_process("doob2d_check: X_{0,k} not common across k");
        double sup = 0.0;
        for (const auto& row : X)
            for (double v : row) {
                if (!(v >= 0.0)) throw invalid_process("doob2d_check: negative X_{n,k}");
                sup = std::max(sup, v);
            }
        if (!fam.s0_predicate(x0)) continue;
        sups.push_back(sup);
        x0_acc.add(x0);
    }
    if (sups.empty())
        throw insufficient_conditioning_mass("doob2d_check: no trial satisfies S_0");
    std::vector<DoobRow> rows;
    for (double lambda : lambda_grid) {
        DoobRow r;
        r.lambda = lambda;
        std::size_t hits = 0;
        for (double s : sups)
            if (s > lambda) ++hits;
        double p_hat = static_cast<double>(hits) / static_cast<double>(sups.size());
        r.lhs = lambda * p_hat;
        r.rhs = 2.0 * x0_acc.mean();
        double slack = 3.0 * (lambda * binomial_std_error(p_hat, sups.size()) +
                              2.0 * x0_acc.std_error());
        r.ok = r.lhs <= r.rhs + slack;
        rows.push_back(r);
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Hypercontractivity
// ---------------------------------------------------------------------------

struct HypercontractivityResult {
    double lhs = 0.0;
    double rhs = 0.0;
    double std_error = 0.0;  // 0 on exact paths
    bool ok = false;
};

/// E|sum a_n f(n)|^{2m} <= (sum |a_n|^2 tau_{2m-1}(n))^m. Exact paths:
/// Rademacher enumeration over the support's prime signs (<= 20 primes), and
/// Steinhaus m = 1 by orthogonality (E f(u) conj(f(v)) = [u = v]).
inline HypercontractivityResult hypercontractivity_check(Mode mode, const PrimeTable& table,
                                                         const DirichletPolynomial& poly,
                                                         std::uint64_t m, Method method,
                                                         std::size_t trials,
                                                         std::uint64_t base_seed = 1) {
    if (m < 1) throw std::invalid_argument("hypercontractivity_check: m must be >= 1");
    HypercontractivityResult out;
    if (poly.coefficients.empty()) {
        out.ok = true;
        return out;
    }
    if (static_cast<double>(poly.max_support()) > static_cast<double>(table.limit))
        throw std::invalid_argument("hypercontractivity_check: support exceeds table limit");

    KahanSum rhs_inner;
    for (const auto& [n, a] : poly.coefficients)
        rhs_inner.add(std::norm(a) * static_cast<double>(divisor_tau(table, 2 * m - 1, n)));
    out.rhs = std::pow(rhs_inner.value(), static_cast<double>(m));

    // factor each support point over the union of its primes
    std::vector<std::uint64_t> primes;
    struct Term {
        std::complex<double> a;
        std::vector<std::pair<std::size_t, std::uint32_t>> factors;  // (prime index, exponent)
        bool squarefree = true;
    };
    std::vector<Term> terms;
    for (const auto& [n, a] : poly.coefficients) {
        Term t;
        t.a = a;
        for (auto [p, e] : factorize(table, n)) {
            auto it = std::find(primes.begin(), primes.end(), p);
            std::size_t idx;
            if (it == primes.end()) {
                idx = primes.size();
                primes.push_back(p);
            } else {
                idx = static_cast<std::size_t>(it - primes.begin());
            }
            t.factors.emplace_back(idx, e);
            if (e >= 2) t.squarefree = false;
        }
        terms.push_back(std::move(t));
    }

    if (method == Method::exact) {
        if (mode == Mode::steinhaus) {
            if (m != 1)
                throw unsupported_method(
                    "hypercontractivity_check: exact Steinhaus only for m = 1");
            KahanSum lhs;
            for (const auto& [n, a] : poly.coefficients) lhs.add(std::norm(a));
            out.lhs = lhs.value();
        } else {
            if (primes.size() > 20)
                throw unsupported_method("hypercontractivity_check: exact limited to 20 primes");
            std::size_t total = std::size_t{1} << primes.size();
            KahanSum lhs;
            for (std::size_t mask = 0; mask < total; ++mask) {
                KahanComplexSum s;
                for (const Term& t : terms) {
                    if (!t.squarefree) continue;
                    int sign = 1;
                    for (auto [idx, e] : t.factors)
                        if ((mask >> idx) & 1) sign = -sign;
                    s.add(static_cast<double>(sign) * t.a);
                }
                lhs.add(std::pow(std::norm(s.value()), static_cast<double>(m)));
            }
            out.lhs = lhs.value() / static_cast<double>(total);
        }
        out.ok = out.lhs <= out.rhs * (1.0 + 1e-12) + 1e-300;
    } else {
        MeanAccumulator acc;
        std::vector<std::complex<double>> fp(primes.size());
        for (std::size_t tr = 0; tr < trials; ++tr) {
            std::uint64_t ts = derive_seed(base_seed, 0x48595045u, tr);
            for (std::size_t i = 0; i < primes.size(); ++i) {
                if (mode == Mode::rademacher)
                    fp[i] = detail::draw_sign(ts, primes[i]) > 0 ? 1.0 : -1.0;
                else
                    fp[i] = std::polar(1.0, kTwoPi * detail::draw_angle(ts, primes[i]));
            }
            KahanComplexSum s;
            for (const Term& t : terms) {
                if (mode == Mode::rademacher && !t.squarefree) continue;
                std::complex<double> v = t.a;
                for (auto [idx, e] : t.factors)
                    for (std::uint32_t r = 0; r < e; ++r) v *= fp[idx];
                s.add(v);
            }
            acc.add(std::pow(std::norm(s.value()), static_cast<double>(m)));
        }
        out.lhs = acc.mean();
        out.std_error = acc.std_error();
        out.ok = out.lhs - 3.0 * out.std_error <= out.rhs;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Fourier lower bound
// ---------------------------------------------------------------------------

struct FourierResult {
    double integral = 0.0;
    double floor_value = 0.0;
    bool ok = false;
};

/// int_0^1 |b_0 + sum_{k>=1} e^{2 pi i k theta} b_k| dtheta >= |b_0|.
inline FourierResult fourier_lower_bound_check(const std::vector<std::complex<double>>& b,
                                               std::size_t quad_steps) {
    if (quad_steps < 8 * std::max<std::size_t>(b.size(), 1))
        throw std::invalid_argument("fourier_lower_bound_check: quad_steps too small");
    auto midpoint = [&](std::size_t N) {
        KahanSum acc;
        for (std::size_t i = 0; i < N; ++i) {
            double theta = (static_cast<double>(i) + 0.5) / static_cast<double>(N);
            KahanComplexSum s;
            for (std::size_t k = 0; k < b.size(); ++k)
                s.add(b[k] * std::polar(1.0, kTwoPi * static_cast<double>(k) * theta));
            acc.add(std::abs(s.value()));
        }
        return acc.value() / static_cast<double>(N);
    };
    FourierResult out;
    double coarse = midpoint(quad_steps);
    out.integral = midpoint(2 * quad_steps);
    out.floor_value = b.empty() ? 0.0 : std::abs(b.front());
    double tol = std::max(1e-9, 3.0 * std::abs(out.integral - coarse));
    out.ok = out.integral >= out.floor_value - tol;
    return out;
}

// ---------------------------------------------------------------------------
// Gaussian walk band
// ---------------------------------------------------------------------------

struct GaussianWalkResult {
    double prob = 0.0;
    double std_error = 0.0;
    double comparator = 0.0;
    double ratio = 0.0;
};

/// P[sum_{m<=k} G_m <= a + 2 log k + slack for all k <= n] against
/// min(1, a/sqrt(n)); the hidden O(1) is exposed as the slack parameter.
inline GaussianWalkResult gaussian_walk_check(std::size_t n, double a,
                                              const std::vector<double>& variance_profile,
                                              std::size_t trials, std::uint64_t base_seed,
                                              double slack = 0.0, unsigned jobs = 1) {
    if (!(a >= 1.0)) throw std::invalid_argument("gaussian_walk_check: need a >= 1");
    if (variance_profile.size() != n)
        throw std::invalid_argument("gaussian_walk_check: profile length != n");
    for (double v : variance_profile)
        if (!(v >= 0.05) || !(v <= 20.0))
            throw std::invalid_argument("gaussian_walk_check: variance outside [1/20, 20]");
    std::vector<double> sd(n);
    for (std::size_t i = 0; i < n; ++i) sd[i] = std::sqrt(variance_profile[i]);
    std::vector<double> threshold(n);
    for (std::size_t k = 1; k <= n; ++k)
        threshold[k - 1] = a + 2.0 * std::log(static_cast<double>(k)) + slack;

    std::vector<std::uint8_t> stay(trials, 0);
    parallel_for(trials, jobs, [&](std::size_t t) {
        SmallRng rng(derive_seed(base_seed, 0x47415553u, t));
        double sum = 0.0;
        bool below = true;
        for (std::size_t k = 0; k < n; ++k) {
            sum += sd[k] * rng.normal();
            if (sum > threshold[k]) {
                below = false;
                break;
            }
        }
        stay[t] = below ? 1 : 0;
    });
    std::size_t hits = 0;
    for (std::uint8_t s : stay) hits += s;
    GaussianWalkResult out;
    out.prob = static_cast<double>(hits) / static_cast<double>(trials);
    out.std_error = binomial_std_error(out.prob, trials);
    out.comparator = std::min(1.0, a / std::sqrt(static_cast<double>(n)));
    out.ratio = out.prob / out.comparator;
    return out;
}

// ---------------------------------------------------------------------------
// Submartingale |X_q(z)|
// ---------------------------------------------------------------------------

struct SubmartingaleResult {
    std::vector<std::uint64_t> primes;  // window primes, consecutive pairs checked
    std::vector<bool> ok_per_step;
    bool all_ok = true;
};

/// For consecutive window primes q < p, check E[|X_p(z)| | F_p] >= |X_q(z)|
/// where X_q(z) = sum_{n<=z, x/(z(1+1/X)) < P(n) <= q} f(n). Rademacher uses
/// the exact two-point average; Steinhaus uses dense quadrature over theta_p.
inline SubmartingaleResult submartingale_absXq_check(const RmfModel& m, const PrimeTable& table,
                                                     double z, double p_lo, double p_hi, double x,
                                                     double smoothing_X) {
    if (!(z >= 1.0) || z > static_cast<double>(table.limit) || !(x > 0.0) ||
        !(smoothing_X > 0.0) || !(p_lo < p_hi))
        throw std::invalid_argument("submartingale_absXq_check: bad window/bounds");
    double lower = x / (z * (1.0 + 1.0 / smoothing_X));
    std::uint64_t zi = static_cast<std::uint64_t>(std::floor(z));
    std::vector<std::uint32_t> lpf = largest_factor_table(table, zi);

    SubmartingaleResult out;
    for (std::uint32_t p : table.primes) {
        double pd = static_cast<double>(p);
        if (pd <= p_lo) continue;
        if (pd > p_hi) break;
        out.primes.push_back(p);
    }
    if (out.primes.size() < 2) return out;

    for (std::size_t i = 0; i + 1 < out.primes.size(); ++i) {
        std::uint64_t q = out.primes[i], p = out.primes[i + 1];
        // neutralize f(p), then split by v_p(n): X_p = sum_k C_k f(p)^k
        RmfModel mp = m;
        std::size_t pi = detail::prime_index(table, p);
        if (m.mode == Mode::steinhaus)
            mp.angles[pi] = 0.0;
        else
            mp.signs[pi] = 1;
        std::vector<std::complex<double>> fv = values_up_to(mp, table, zi);
        std::size_t kmax = 0;
        for (std::uint64_t pk = p; pk <= zi; pk *= p) {
            ++kmax;
            if (pk > zi / p) break;
        }
        std::vector<std::complex<double>> C(kmax + 1, {0.0, 0.0});
        for (std::uint64_t n = 1; n <= zi; ++n) {
            double P = static_cast<double>(lpf[n]);
            if (!(P > lower) || P > static_cast<double>(p)) continue;
            std::uint64_t rest = n;
            std::size_t k = 0;
            while (rest % p == 0) {
                rest /= p;
                ++k;
            }
            C[k] += fv[n];
        }
        // with q, p consecutive primes, every window n with P(n) <= q has
        // v_p(n) = 0, so X_q(z) is exactly C_0
        (void)q;
        double xq = std::abs(C[0]);
        bool ok;
        if (m.mode == Mode::rademacher) {
            std::complex<double> C1 = C.size() > 1 ? C[1] : std::complex<double>{0.0, 0.0};
            double lhs = 0.5 * std::abs(C[0] + C1) + 0.5 * std::abs(C[0] - C1);
            ok = lhs >= xq - 1e-12 * (1.0 + xq);
        } else {
            const std::size_t N = 4096;
            KahanSum acc;
            for (std::size_t s = 0; s < N; ++s) {
                double theta = (static_cast<double>(s) + 0.5) / static_cast<double>(N);
                KahanComplexSum val;
                for (std::size_t k = 0; k < C.size(); ++k)
                    val.add(C[k] * std::polar(1.0, kTwoPi * static_cast<double>(k) * theta));
                acc.add(std::abs(val.value()));
            }
            ok = acc.value() / static_cast<double>(N) >= xq - 1e-8;
        }
        out.ok_per_step.push_back(ok);
        if (!ok) out.all_ok = false;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Conditional moment of N_ij
// ---------------------------------------------------------------------------

struct NijMomentResult {
    double lhs_estimate = 0.0;
    double std_error = 0.0;
    double rhs = 0.0;
    bool ok = false;
};

/// E[|N_ij|^{2m} | F_{j-1}] <= X_{i,j}^m, conditioning realized by freezing
/// primes <= y_{j-1} and resampling the block (y_{j-1}, y_j].
inline NijMomentResult conditional_moment_Nij_check(const RmfModel& m, const PrimeTable& table,
                                                    const Schedule& sched, double x, int j,
                                                    std::uint64_t mom, std::size_t trials) {
    if (m.mode != Mode::steinhaus)
        throw std::invalid_argument("conditional_moment_Nij_check: Steinhaus mode required");
    if (trials < 1000)
        throw std::invalid_argument("conditional_moment_Nij_check: trials < 1000");
    detail::check_xs(table, sched, x, "conditional_moment_Nij_check");
    if (j < 1 || j > sched.J)
        throw std::invalid_argument("conditional_moment_Nij_check: j outside [1, J]");
    double ylo = sched.y_grid[j - 1], yhi = sched.y_grid[j];
    std::uint64_t xi = static_cast<std::uint64_t>(std::floor(x));
    detail::FnArrays arr = detail::make_arrays(m, table, xi);

    // frozen data per window-supported d: Psi_f(x/d, y_{j-1}) and the block
    // factorization of d (its f-value is recomputed per resample)
    struct DTerm {
        std::complex<double> psi;
        double tau = 0.0;
        std::vector<std::pair<std::uint64_t, std::uint32_t>> factors;
    };
    std::vector<DTerm> dterms;
    for_each_window_supported(m, table, x, ylo, yhi, ylo * ylo, /*require_repeated_top=*/true,
                              [&](std::uint64_t d, std::uint32_t, std::complex<double>) {
                                  DTerm t;
                                  t.psi = detail::arr_psi(arr, x / static_cast<double>(d), ylo);
                                  t.tau = static_cast<double>(
                                      divisor_tau(table, 2 * mom - 1, d));
                                  t.factors = factorize(table, d);
                                  dterms.push_back(std::move(t));
                              });

    NijMomentResult out;
    KahanSum xij;
    for (const DTerm& t : dterms) xij.add(t.tau * std::norm(t.psi));
    out.rhs = std::pow(xij.value(), static_cast<double>(mom));
    if (dterms.empty()) {
        out.ok = true;
        return out;
    }

    MeanAccumulator acc;
    for (std::size_t tr = 0; tr < trials; ++tr) {
        std::uint64_t ts = derive_seed(m.seed, 0x4E494A00u + static_cast<std::uint64_t>(j), tr);
        KahanComplexSum N;
        for (const DTerm& t : dterms) {
            double angle = 0.0;
            for (auto [p, e] : t.factors)
                angle += static_cast<double>(e) * detail::draw_angle(ts, p);
            angle -= std::floor(angle);
            N.add(std::polar(1.0, kTwoPi * angle) * t.psi);
        }
        acc.add(std::pow(std::norm(N.value()), static_cast<double>(mom)));
    }
    out.lhs_estimate = acc.mean();
    out.std_error = acc.std_error();
    out.ok = out.lhs_estimate - 3.0 * out.std_error <= out.rhs;
    return out;
}

}  // namespace rmfkit
