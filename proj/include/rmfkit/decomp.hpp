#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <tuple>
#include <vector>

#include "rmfkit/errors.hpp"
#include "rmfkit/rng.hpp"
#include "rmfkit/schedule.hpp"
#include "rmfkit/stats.hpp"
#include "rmfkit/sums.hpp"

namespace rmfkit {

struct DecompositionReport {
    double x = 0.0;
    std::complex<double> psi0{0.0, 0.0};
    std::complex<double> m1{0.0, 0.0};
    std::complex<double> m2{0.0, 0.0};
    std::complex<double> total{0.0, 0.0};
    double residual = 0.0;
};

struct VarianceReport {
    double V = 0.0;
    std::vector<double> per_block;  // index j-1 holds block (y_{j-1}, y_j]
};

struct SmoothedReport {
    double L1 = 0.0, L12 = 0.0, L2 = 0.0, W = 0.0;
};

struct SupermartingaleValue {
    double value = 0.0;
    double tail_bound = 0.0;
};

struct SupermartingaleStep {
    double lhs_estimate = 0.0;
    double std_error = 0.0;
    double rhs = 0.0;
    bool ok = false;
};

namespace detail {

/// Dense f-values and largest-prime-factor arrays shared by the sum engines.
struct FnArrays {
    std::uint64_t xi = 0;
    std::vector<std::complex<double>> fv;
    std::vector<std::uint32_t> lpf;
};

inline FnArrays make_arrays(const RmfModel& m, const PrimeTable& table, std::uint64_t xi) {
    FnArrays a;
    a.xi = xi;
    a.fv = values_up_to(m, table, std::max<std::uint64_t>(xi, 1));
    a.lpf = largest_factor_table(table, std::max<std::uint64_t>(xi, 1));
    return a;
}

/// Psi_f(z, y) from the arrays: sum over n <= floor(z) with P(n) <= y.
inline std::complex<double> arr_psi(const FnArrays& a, double z, double y) {
    std::uint64_t zi = z >= 1.0 ? static_cast<std::uint64_t>(std::floor(z)) : 0;
    KahanComplexSum acc;
    for (std::uint64_t n = 1; n <= zi; ++n)
        if (static_cast<double>(a.lpf[n]) <= y) acc.add(a.fv[n]);
    return acc.value();
}

/// Psi'_f(z, y): strict P(n) < y variant.
inline std::complex<double> arr_psi_strict(const FnArrays& a, double z, double y) {
    std::uint64_t zi = z >= 1.0 ? static_cast<std::uint64_t>(std::floor(z)) : 0;
    KahanComplexSum acc;
    for (std::uint64_t n = 1; n <= zi; ++n)
        if (static_cast<double>(a.lpf[n]) < y) acc.add(a.fv[n]);
    return acc.value();
}

struct SweepEvent {
    double pos;
    std::complex<double> delta;
};

/// Exact integral of |S(z)|^2 dz/z^2 over [z_lo, z_hi] where S is the
/// piecewise-constant function starting at s0 and jumping by delta at each
/// event position in (z_lo, z_hi). Events are sorted here.
inline double sweep_mod2_integral(double z_lo, double z_hi, std::complex<double> s0,
                                  std::vector<SweepEvent>& ev) {
    if (!(z_hi > z_lo)) return 0.0;
    std::sort(ev.begin(), ev.end(),
              [](const SweepEvent& a, const SweepEvent& b) { return a.pos < b.pos; });
    KahanSum acc;
    KahanComplexSum S;
    S.add(s0);
    double cur = z_lo;
    for (const auto& e : ev) {
        double b = std::min(e.pos, z_hi);
        if (b > cur) {
            acc.add(std::norm(S.value()) * (1.0 / cur - 1.0 / b));
            cur = b;
        }
        S.add(e.delta);
    }
    if (z_hi > cur) acc.add(std::norm(S.value()) * (1.0 / cur - 1.0 / z_hi));
    return acc.value();
}

/// Exact integral of |Psi'_f(floor(z), p)|^2 dz/z^2 over [a, b]; the
/// integrand only changes at integer z, so the running sum is advanced one
/// integer at a time.
inline double band_integral(const FnArrays& arr, double p, double a, double b) {
    if (!(b > a)) return 0.0;
    a = std::max(a, 1.0);
    if (!(b > a)) return 0.0;
    std::uint64_t k = static_cast<std::uint64_t>(std::floor(a));
    KahanComplexSum S;
    for (std::uint64_t n = 1; n <= k; ++n)
        if (static_cast<double>(arr.lpf[n]) < p) S.add(arr.fv[n]);
    KahanSum acc;
    double cur = a;
    while (cur < b) {
        double nxt = std::min(b, static_cast<double>(k + 1));
        if (nxt > cur) acc.add(std::norm(S.value()) * (1.0 / cur - 1.0 / nxt));
        if (nxt >= b) break;
        ++k;
        if (static_cast<double>(arr.lpf[k]) < p) S.add(arr.fv[k]);
        cur = nxt;
    }
    return acc.value();
}

inline void check_xs(const PrimeTable& table, const Schedule& sched, double x, const char* who) {
    if (!(x >= 1.0) || x > static_cast<double>(sched.x_max) ||
        x > static_cast<double>(table.limit))
        throw std::invalid_argument(std::string(who) + ": x outside [1, min(x_max, table limit)]");
}

}  // namespace detail

/// M_f(x) = Psi_f(x, y_0) + M^(1) + M^(2) split by the largest prime factor.
/// M^(2) is exactly 0 in Rademacher mode (f vanishes on d with a repeated
/// top prime), and the Rademacher residual is exactly 0 since every term is
/// integer-valued.
inline DecompositionReport decompose(const RmfModel& m, const PrimeTable& table,
                                     const Schedule& sched, double x) {
    detail::check_xs(table, sched, x, "decompose");
    std::uint64_t xi = static_cast<std::uint64_t>(std::floor(x));
    detail::FnArrays arr = detail::make_arrays(m, table, xi);
    double y0 = sched.y0(), yJ = sched.yJ();

    DecompositionReport r;
    r.x = x;
    r.psi0 = detail::arr_psi(arr, x, y0);

    KahanComplexSum m1;
    for (std::uint32_t p : table.primes) {
        double pd = static_cast<double>(p);
        if (pd <= y0) continue;
        if (pd > yJ || pd > x) break;
        KahanComplexSum inner;
        std::uint64_t lim = xi / p;
        for (std::uint64_t n = 1; n <= lim; ++n)
            if (static_cast<double>(arr.lpf[n]) < pd) inner.add(arr.fv[n]);
        m1.add(arr.fv[p] * inner.value());
    }
    r.m1 = m1.value();

    KahanComplexSum m2;
    for (int j = 1; j <= sched.J; ++j) {
        double ylo = sched.y_grid[j - 1], yhi = sched.y_grid[j];
        if (ylo * ylo > x) break;
        for_each_window_supported(
            m, table, x, ylo, yhi, ylo * ylo, /*require_repeated_top=*/true,
            [&](std::uint64_t d, std::uint32_t, std::complex<double> fd) {
                if (fd == std::complex<double>(0.0, 0.0)) return;
                m2.add(fd * detail::arr_psi(arr, x / static_cast<double>(d), ylo));
            });
    }
    r.m2 = m2.value();

    r.total = r.psi0 + r.m1 + r.m2;
    KahanComplexSum mf;
    for (std::uint64_t n = 1; n <= xi; ++n) mf.add(arr.fv[n]);
    r.residual = std::abs(r.total - mf.value());
    return r;
}

/// V(x) = sum over primes y_0 < p <= y_J of |Psi'_f(x/p, p)|^2, reported
/// per block (y_{j-1}, y_j].
inline VarianceReport variance_V(const RmfModel& m, const PrimeTable& table, const Schedule& sched,
                                 double x) {
    detail::check_xs(table, sched, x, "variance_V");
    std::uint64_t xi = static_cast<std::uint64_t>(std::floor(x));
    detail::FnArrays arr = detail::make_arrays(m, table, xi);
    VarianceReport r;
    r.per_block.assign(static_cast<std::size_t>(sched.J), 0.0);
    KahanSum total;
    for (int j = 1; j <= sched.J; ++j) {
        double ylo = sched.y_grid[j - 1], yhi = sched.y_grid[j];
        KahanSum blk;
        for (std::uint32_t p : table.primes) {
            double pd = static_cast<double>(p);
            if (pd <= ylo) continue;
            if (pd > yhi || pd > x) break;
            KahanComplexSum inner;
            std::uint64_t lim = xi / p;
            for (std::uint64_t n = 1; n <= lim; ++n)
                if (static_cast<double>(arr.lpf[n]) < pd) inner.add(arr.fv[n]);
            blk.add(std::norm(inner.value()));
        }
        r.per_block[static_cast<std::size_t>(j - 1)] = blk.value();
        total.add(blk.value());
    }
    r.V = total.value();
    return r;
}

/// Y_p = f(p) Psi'_f(x/p, p), the martingale increment revealed at prime p.
inline std::complex<double> martingale_increment(const RmfModel& m, const PrimeTable& table,
                                                 double x, std::uint64_t p) {
    if (!table.is_prime(p)) throw std::invalid_argument("martingale_increment: p is not prime");
    if (!(static_cast<double>(p) <= x) || x > static_cast<double>(table.limit))
        throw std::invalid_argument("martingale_increment: need p <= x <= table limit");
    std::uint64_t lim = static_cast<std::uint64_t>(std::floor(x)) / p;
    KahanComplexSum inner;
    for (std::uint64_t n = 1; n <= lim; ++n)
        if (static_cast<double>(largest_prime_factor(table, n)) < static_cast<double>(p))
            inner.add(value(m, table, n));
    return value(m, table, p) * inner.value();
}

/// Smoothed variance functionals. All integrands are step functions of z
/// (or t), so every integral is evaluated exactly over the pieces between
/// consecutive breakpoints. Blocks with log x / log y_{j-1} <= the schedule
/// threshold go to L1, the rest to L12.
inline SmoothedReport smoothed_functionals(const RmfModel& m, const PrimeTable& table,
                                           const Schedule& sched, double x) {
    detail::check_xs(table, sched, x, "smoothed_functionals");
    std::uint64_t xi = static_cast<std::uint64_t>(std::floor(x));
    detail::FnArrays arr = detail::make_arrays(m, table, xi);
    double X = sched.smoothing_X;
    double lx = std::log(x);
    SmoothedReport r;
    KahanSum L1, L12, L2, W;

    for (int j = 1; j <= sched.J; ++j) {
        double ylo = sched.y_grid[j - 1], yhi = sched.y_grid[j];
        if (x < ylo) break;
        bool in_L1 = lx / std::log(ylo) <= sched.block_threshold;
        double z_lo = x / yhi, z_hi = x / ylo;
        // L1/L12 block: z in [x/y_j, x/y_{j-1}], primes x/(z(1+1/X)) < p <= x/z;
        // per prime p the z-window is (x/(p(1+1/X)), x/p].
        for (std::uint32_t p : table.primes) {
            double pd = static_cast<double>(p);
            if (pd * (1.0 + 1.0 / X) <= ylo) continue;
            if (pd > yhi) break;
            double a = std::max(z_lo, x / (pd * (1.0 + 1.0 / X)));
            double b = std::min(z_hi, x / pd);
            double v = (X / pd) * detail::band_integral(arr, pd, a, b);
            if (in_L1)
                L1.add(v);
            else
                L12.add(v);
        }
        // L2 block: z in [x/(y_j(1+1/X)), x/y_j], primes
        // max{x/(z(1+1/X)), y_{j-1}} < p <= y_j.
        double zl = x / (yhi * (1.0 + 1.0 / X)), zh = x / yhi;
        for (std::uint32_t p : table.primes) {
            double pd = static_cast<double>(p);
            if (pd <= ylo) continue;
            if (pd > yhi) break;
            double a = std::max(zl, x / (pd * (1.0 + 1.0 / X)));
            L2.add((X / pd) * detail::band_integral(arr, pd, a, zh));
        }
    }

    // W: per prime p in (y_0, y_J], (X/p) * integral over t in [p, p(1+1/X)]
    // of |sum_{x/t < n <= x/p, P(n) < p} f(n)|^2 dt. S(t) gains f(n) as t
    // passes x/n, n descending from floor(x/p).
    for (std::uint32_t p : table.primes) {
        double pd = static_cast<double>(p);
        if (pd <= sched.y0()) continue;
        if (pd > sched.yJ() || pd > x) break;
        double a = pd, b = pd * (1.0 + 1.0 / X);
        std::uint64_t n_hi = xi / p;
        KahanComplexSum S;
        // n already present in the limit t -> a+: those with n >= x/a
        std::uint64_t n_first = static_cast<std::uint64_t>(std::ceil(x / a - 1e-12));
        for (std::uint64_t n = n_first; n <= n_hi; ++n)
            if (static_cast<double>(arr.lpf[n]) < pd) S.add(arr.fv[n]);
        KahanSum integ;
        double cur = a;
        for (std::uint64_t n = std::min(n_hi, n_first > 0 ? n_first - 1 : 0); n >= 1; --n) {
            double t = x / static_cast<double>(n);
            if (t <= a) continue;
            if (t >= b) break;
            integ.add(std::norm(S.value()) * (t - cur));
            cur = t;
            if (static_cast<double>(arr.lpf[n]) < pd) S.add(arr.fv[n]);
        }
        integ.add(std::norm(S.value()) * (b - cur));
        W.add((X / pd) * integ.value());
    }

    r.L1 = L1.value();
    r.L12 = L12.value();
    r.L2 = L2.value();
    r.W = W.value();
    return r;
}

/// lambda^(k) for k in {1,2,3}, breakpoint-exact. The lambda^(2) supremum
/// ranges over primes q in (x/(z(1+1/X)), x/z]; an empty prime set yields 0.
inline double lambda_k(const RmfModel& m, const PrimeTable& table, const Schedule& sched, double x,
                       int j, int k) {
    detail::check_xs(table, sched, x, "lambda_k");
    if (j < 1 || j > sched.J) throw std::invalid_argument("lambda_k: j outside [1, J]");
    if (k < 1 || k > 3) throw std::invalid_argument("lambda_k: k must be 1, 2 or 3");
    std::uint64_t xi = static_cast<std::uint64_t>(std::floor(x));
    detail::FnArrays arr = detail::make_arrays(m, table, xi);
    double yhi = sched.y_grid[j], ylo = sched.y_grid[j - 1];
    double z_lo = x / yhi, z_hi = x / ylo;
    double X = sched.smoothing_X;
    double pref = 1.0 / std::log(yhi);
    if (!(z_hi > z_lo)) return 0.0;

    if (k == 1) {
        // membership of n: n <= z and P(n) <= x/z, i.e. z in [n, x/P(n)]
        std::complex<double> s0{0.0, 0.0};
        {
            KahanComplexSum acc;
            std::uint64_t lim = static_cast<std::uint64_t>(std::floor(z_lo));
            for (std::uint64_t n = 1; n <= lim; ++n)
                if (static_cast<double>(n) * static_cast<double>(arr.lpf[n]) <= x) acc.add(arr.fv[n]);
            s0 = acc.value();
        }
        std::vector<detail::SweepEvent> ev;
        std::uint64_t lim = static_cast<std::uint64_t>(std::floor(z_hi));
        for (std::uint64_t n = 1; n <= lim; ++n) {
            double en = static_cast<double>(n);
            double exi = x / static_cast<double>(arr.lpf[n]);
            if (exi < en) continue;
            if (en > z_lo && en < z_hi) ev.push_back({en, arr.fv[n]});
            if (exi > z_lo && exi < z_hi) ev.push_back({exi, -arr.fv[n]});
        }
        return pref * detail::sweep_mod2_integral(z_lo, z_hi, s0, ev);
    }

    // Shared membership for k=2,3: n <= z and x/(z(1+1/X)) < P(n) <= x/z,
    // i.e. z in [max(n, x/(P(n)(1+1/X))), x/P(n)].
    auto interval = [&](std::uint64_t n, double& a, double& b) {
        double P = static_cast<double>(arr.lpf[n]);
        a = std::max(static_cast<double>(n), x / (P * (1.0 + 1.0 / X)));
        b = x / P;
    };

    if (k == 3) {
        std::complex<double> s0{0.0, 0.0};
        {
            KahanComplexSum acc;
            std::uint64_t lim = static_cast<std::uint64_t>(std::floor(z_lo));
            for (std::uint64_t n = 1; n <= lim; ++n) {
                double P = static_cast<double>(arr.lpf[n]);
                if (x / (z_lo * (1.0 + 1.0 / X)) < P && P <= x / z_lo) acc.add(arr.fv[n]);
            }
            s0 = acc.value();
        }
        std::vector<detail::SweepEvent> ev;
        std::uint64_t lim = static_cast<std::uint64_t>(std::floor(z_hi));
        for (std::uint64_t n = 1; n <= lim; ++n) {
            double a, b;
            interval(n, a, b);
            if (!(b > a)) continue;
            if (a > z_lo && a < z_hi) ev.push_back({a, arr.fv[n]});
            if (b > z_lo && b < z_hi) ev.push_back({b, -arr.fv[n]});
        }
        return pref * detail::sweep_mod2_integral(z_lo, z_hi, s0, ev);
    }

    // k == 2: per-prime buckets; per piece, sup over candidate primes q of
    // |sum of buckets with key < q|^2. Breakpoints include bucket changes
    // and every z where a prime enters/leaves the q-window.
    struct BucketEvent {
        double pos;
        std::uint32_t key;  // 0 => breakpoint only
        std::complex<double> delta;
    };
    std::vector<BucketEvent> ev;
    std::map<std::uint32_t, std::complex<double>> buckets;
    {
        std::uint64_t lim = static_cast<std::uint64_t>(std::floor(z_lo));
        for (std::uint64_t n = 1; n <= lim; ++n) {
            double P = static_cast<double>(arr.lpf[n]);
            if (x / (z_lo * (1.0 + 1.0 / X)) < P && P <= x / z_lo) buckets[arr.lpf[n]] += arr.fv[n];
        }
    }
    std::uint64_t lim = static_cast<std::uint64_t>(std::floor(z_hi));
    for (std::uint64_t n = 1; n <= lim; ++n) {
        double a, b;
        interval(n, a, b);
        if (!(b > a)) continue;
        if (a > z_lo && a < z_hi) ev.push_back({a, arr.lpf[n], arr.fv[n]});
        if (b > z_lo && b < z_hi) ev.push_back({b, arr.lpf[n], -arr.fv[n]});
    }
    // q-window edge crossings for primes that can appear as candidates
    for (std::uint32_t q : table.primes) {
        double qd = static_cast<double>(q);
        if (qd * (1.0 + 1.0 / X) <= ylo) continue;
        if (qd > yhi) break;
        double e1 = x / qd;                        // q <= x/z boundary
        double e2 = x / (qd * (1.0 + 1.0 / X));    // q > x/(z(1+1/X)) boundary
        if (e1 > z_lo && e1 < z_hi) ev.push_back({e1, 0, {0.0, 0.0}});
        if (e2 > z_lo && e2 < z_hi) ev.push_back({e2, 0, {0.0, 0.0}});
    }
    std::sort(ev.begin(), ev.end(),
              [](const BucketEvent& a, const BucketEvent& b) { return a.pos < b.pos; });

    auto piece_sup = [&](double zm) {
        double lower = x / (zm * (1.0 + 1.0 / X));
        double upper = x / zm;
        auto qs = std::upper_bound(table.primes.begin(), table.primes.end(), lower,
                                   [](double v, std::uint32_t p) {
                                       return v < static_cast<double>(p);
                                   });
        double best = 0.0;
        KahanComplexSum prefix;
        auto bit = buckets.begin();
        for (auto it = qs; it != table.primes.end() && static_cast<double>(*it) <= upper; ++it) {
            while (bit != buckets.end() && bit->first < *it) {
                prefix.add(bit->second);
                ++bit;
            }
            best = std::max(best, std::norm(prefix.value()));
        }
        return best;
    };

    KahanSum acc;
    double cur = z_lo;
    for (const auto& e : ev) {
        double b = std::min(e.pos, z_hi);
        if (b > cur) {
            acc.add(piece_sup(0.5 * (cur + b)) * (1.0 / cur - 1.0 / b));
            cur = b;
        }
        if (e.key != 0) {
            buckets[e.key] += e.delta;
        }
    }
    if (z_hi > cur) acc.add(piece_sup(0.5 * (cur + z_hi)) * (1.0 / cur - 1.0 / z_hi));
    return pref * acc.value();
}

/// The cutoff function of U_{j,i}: y_j, then x/z, then y_0.
inline double g_function(const Schedule& sched, double x, int j, double z) {
    if (j < 0 || j > sched.J) throw std::invalid_argument("g_function: j outside [0, J]");
    if (!(z > 0.0) || !(x > 0.0)) throw std::invalid_argument("g_function: need z, x > 0");
    double yj = sched.y_grid[j], y0 = sched.y0();
    if (z <= x / yj) return yj;
    if (z <= x / y0) return x / z;
    return y0;
}

namespace detail {

/// Precomputed sweep structure for U_{j,i}: the event layout depends only on
/// (x, j, z_cap), not on f, so one plan serves every Monte Carlo trial.
struct UPlan {
    double z_cap = 0.0;
    double pref = 0.0;
    std::vector<std::uint64_t> initial;               // members at z = 1
    std::vector<std::tuple<double, std::uint64_t, int>> events;  // (pos, n, +1/-1)
};

inline UPlan make_u_plan(const PrimeTable& table, const Schedule& sched, double x, int j,
                         double z_cap, const std::vector<std::uint32_t>& lpf) {
    UPlan plan;
    plan.z_cap = z_cap;
    double yj = sched.y_grid[j], y0 = sched.y0();
    double lK = std::pow(static_cast<double>(sched.ell), sched.bigK);
    plan.pref = (1.0 / std::log(yj)) * std::pow(std::log(yj) / std::log(y0), -1.0 / lK);
    std::uint64_t lim = static_cast<std::uint64_t>(std::floor(z_cap));
    for (std::uint64_t n = 1; n <= lim; ++n) {
        double P = static_cast<double>(lpf[n]);
        if (P > yj) continue;  // never a member: g <= y_j everywhere
        double en = static_cast<double>(n);
        if (P <= y0) {
            // member for all z >= n
            if (en <= 1.0)
                plan.initial.push_back(n);
            else
                plan.events.emplace_back(en, n, 1);
            continue;
        }
        double exi = x / P;  // leaves when g(z) = x/z drops below P
        if (exi < en) continue;
        if (en <= 1.0)
            plan.initial.push_back(n);
        else
            plan.events.emplace_back(en, n, 1);
        if (exi < z_cap) plan.events.emplace_back(exi, n, -1);
    }
    std::sort(plan.events.begin(), plan.events.end(),
              [](const auto& a, const auto& b) { return std::get<0>(a) < std::get<0>(b); });
    return plan;
}

inline double eval_u_plan(const UPlan& plan, const std::vector<std::complex<double>>& fv) {
    KahanComplexSum S;
    for (std::uint64_t n : plan.initial) S.add(fv[n]);
    KahanSum acc;
    double cur = 1.0;
    for (const auto& e : plan.events) {
        double b = std::min(std::get<0>(e), plan.z_cap);
        if (b > cur) {
            acc.add(std::norm(S.value()) * (1.0 / cur - 1.0 / b));
            cur = b;
        }
        std::complex<double> d = fv[std::get<1>(e)];
        S.add(std::get<2>(e) > 0 ? d : -d);
    }
    if (plan.z_cap > cur) acc.add(std::norm(S.value()) * (1.0 / cur - 1.0 / plan.z_cap));
    return plan.pref * acc.value();
}

}  // namespace detail

/// U_{j,i} truncated at z_cap, plus a rigorous bound on the discarded tail.
/// Tail derivation: for z >= z_cap >= x/y_0 the cutoff is y_0, and
///   |Psi_f(z, y_0)| <= Psi_1(z, y_0) <= prod_{p<=y_0} (log z/log p + 1)
///                   <= 2^{pi(y_0)} (log z)^{pi(y_0)} / prod_{p<=y_0} log p
/// (each factor log z/log p + 1 <= 2 log z/log p once z >= p). With
/// k = 2 pi(y_0) and C the displayed constant,
///   int_Z^inf (log z)^k dz/z^2 = (k!/Z) sum_{i<=k} (log Z)^i / i!
/// by repeated integration by parts, giving tail <= pref * C^2 * that value.
inline SupermartingaleValue supermartingale_U(const RmfModel& m, const PrimeTable& table,
                                              const Schedule& sched, double x, int j,
                                              double z_cap) {
    detail::check_xs(table, sched, x, "supermartingale_U");
    if (j < 0 || j > sched.J) throw std::invalid_argument("supermartingale_U: j outside [0, J]");
    double y0 = sched.y0();
    if (!(z_cap >= x / y0) || !(z_cap >= y0))
        throw std::invalid_argument("supermartingale_U: need z_cap >= max(x/y_0, y_0)");
    if (z_cap > static_cast<double>(table.limit))
        throw std::invalid_argument("supermartingale_U: z_cap exceeds table limit");
    std::uint64_t zi = static_cast<std::uint64_t>(std::floor(z_cap));
    detail::FnArrays arr = detail::make_arrays(m, table, zi);
    detail::UPlan plan = detail::make_u_plan(table, sched, x, j, z_cap, arr.lpf);
    SupermartingaleValue out;
    out.value = detail::eval_u_plan(plan, arr.fv);

    std::size_t npi = 0;
    double log_prod = 0.0;  // log of prod_{p<=y0} log p
    for (std::uint32_t p : table.primes) {
        if (static_cast<double>(p) > y0) break;
        ++npi;
        log_prod += std::log(std::log(static_cast<double>(p)));
    }
    double C = std::exp(static_cast<double>(npi) * std::log(2.0) - log_prod);
    std::size_t k = 2 * npi;
    double lz = std::log(z_cap);
    // t_i = (k!/i!) (log Z)^i, accumulated downward from i = k
    double term = std::pow(lz, static_cast<double>(k));
    double sum = term;
    for (std::size_t i = k; i >= 1; --i) {
        term = term * static_cast<double>(i) / lz;
        sum += term;
    }
    out.tail_bound = plan.pref * C * C * sum / z_cap;
    return out;
}

/// One-step supermartingale inequality E[U_j | F_{y_{j-1}}] <= b U_{j-1},
/// with b computed exactly from the block Euler product. Conditioning is
/// realized by resampling only the primes in (y_{j-1}, y_j]. Both sides use
/// the same z_cap truncation, under which the inequality still holds (the
/// substitution u = z/d only shrinks the integration domain). b <= 1 only
/// for large ell, so the check compares against b U_{j-1}, not U_{j-1}.
inline SupermartingaleStep check_supermartingale_step(const RmfModel& m, const PrimeTable& table,
                                                      const Schedule& sched, double x, int j,
                                                      std::size_t trials, unsigned jobs = 1) {
    detail::check_xs(table, sched, x, "check_supermartingale_step");
    if (j < 1 || j > sched.J)
        throw std::invalid_argument("check_supermartingale_step: j outside [1, J]");
    if (trials < 100) throw std::invalid_argument("check_supermartingale_step: trials < 100");
    double y0 = sched.y0();
    double ylo = sched.y_grid[j - 1], yhi = sched.y_grid[j];
    double z_cap = 2.0 * std::max(x / y0, y0);
    if (z_cap > static_cast<double>(table.limit))
        throw std::invalid_argument("check_supermartingale_step: table too small for z_cap");

    SupermartingaleStep r;
    double lK = std::pow(static_cast<double>(sched.ell), sched.bigK);
    double ratio = std::log(yhi) / std::log(ylo);  // = e^{1/ell} by construction
    double prod = 1.0;
    for (std::uint32_t p : table.primes) {
        double pd = static_cast<double>(p);
        if (pd <= ylo) continue;
        if (pd > yhi) break;
        prod /= 1.0 - 1.0 / pd;
    }
    double b = prod * (1.0 / ratio) * std::pow(ratio, -1.0 / lK);
    r.rhs = b * supermartingale_U(m, table, sched, x, j - 1, z_cap).value;

    std::uint64_t zi = static_cast<std::uint64_t>(std::floor(z_cap));
    std::vector<std::uint32_t> lpf = largest_factor_table(table, zi);
    detail::UPlan plan = detail::make_u_plan(table, sched, x, j, z_cap, lpf);

    double p_hi = std::min(yhi, static_cast<double>(m.prime_limit));
    std::vector<std::uint32_t> block;
    for (std::uint32_t p : table.primes) {
        double pd = static_cast<double>(p);
        if (pd <= ylo) continue;
        if (pd > p_hi) break;
        block.push_back(p);
    }

    if (block.empty()) {
        // nothing random in the step: U_j itself must sit below b U_{j-1}
        std::vector<std::complex<double>> fv = values_up_to(m, table, zi);
        r.lhs_estimate = detail::eval_u_plan(plan, fv);
        r.std_error = 0.0;
    } else if (m.mode == Mode::rademacher && block.size() == 1) {
        // exact two-point conditional expectation
        double acc = 0.0;
        for (int sgn : {-1, 1}) {
            RmfModel m2 = m;
            m2.signs[detail::prime_index(table, block.front())] = static_cast<std::int8_t>(sgn);
            std::vector<std::complex<double>> fv = values_up_to(m2, table, zi);
            acc += detail::eval_u_plan(plan, fv);
        }
        r.lhs_estimate = 0.5 * acc;
        r.std_error = 0.0;
    } else {
        std::vector<double> slot(trials, 0.0);
        parallel_for(trials, jobs, [&](std::size_t t) {
            std::uint64_t ts = derive_seed(m.seed, 0x53544550u + static_cast<std::uint64_t>(j),
                                           static_cast<std::uint64_t>(t));
            RmfModel mt = resample_block(m, table, ylo, p_hi, ts);
            std::vector<std::complex<double>> fv = values_up_to(mt, table, zi);
            slot[t] = detail::eval_u_plan(plan, fv);
        });
        MeanAccumulator acc;
        for (double v : slot) acc.add(v);
        r.lhs_estimate = acc.mean();
        r.std_error = acc.std_error();
    }
    r.ok = r.lhs_estimate <= r.rhs * (1.0 + 1e-12) + 3.0 * r.std_error;
    return r;
}

/// N_{ij}: block-j contribution to M^(2).
inline std::complex<double> n_ij(const RmfModel& m, const PrimeTable& table, const Schedule& sched,
                                 double x, int j) {
    detail::check_xs(table, sched, x, "n_ij");
    if (j < 1 || j > sched.J) throw std::invalid_argument("n_ij: j outside [1, J]");
    if (m.mode == Mode::rademacher) return {0.0, 0.0};  // f vanishes on every summand
    double ylo = sched.y_grid[j - 1], yhi = sched.y_grid[j];
    std::uint64_t xi = static_cast<std::uint64_t>(std::floor(x));
    detail::FnArrays arr = detail::make_arrays(m, table, xi);
    KahanComplexSum acc;
    for_each_window_supported(m, table, x, ylo, yhi, ylo * ylo, /*require_repeated_top=*/true,
                              [&](std::uint64_t d, std::uint32_t, std::complex<double> fd) {
                                  acc.add(fd * detail::arr_psi(arr, x / static_cast<double>(d), ylo));
                              });
    return acc.value();
}

/// X_{i,j}: tau-weighted conditional second-moment majorant for N_{ij}.
inline double x_ij_weight(const RmfModel& m, const PrimeTable& table, const Schedule& sched,
                          double x, int j, std::uint64_t mom) {
    detail::check_xs(table, sched, x, "x_ij_weight");
    if (j < 1 || j > sched.J) throw std::invalid_argument("x_ij_weight: j outside [1, J]");
    if (mom < 1) throw std::invalid_argument("x_ij_weight: m must be >= 1");
    double ylo = sched.y_grid[j - 1], yhi = sched.y_grid[j];
    std::uint64_t xi = static_cast<std::uint64_t>(std::floor(x));
    detail::FnArrays arr = detail::make_arrays(m, table, xi);
    KahanSum acc;
    for_each_window_supported(m, table, x, ylo, yhi, ylo * ylo, /*require_repeated_top=*/true,
                              [&](std::uint64_t d, std::uint32_t, std::complex<double>) {
                                  double w = static_cast<double>(divisor_tau(table, 2 * mom - 1, d));
                                  acc.add(w * std::norm(detail::arr_psi(
                                                  arr, x / static_cast<double>(d), ylo)));
                              });
    return acc.value();
}

}  // namespace rmfkit
