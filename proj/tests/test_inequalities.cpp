#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>

#include "rmfkit/inequalities.hpp"

using namespace rmfkit;

namespace {
const PrimeTable& table() {
    static PrimeTable t = build_prime_table(5000);
    return t;
}
}  // namespace

TEST_CASE("Hoeffding tail bound holds for the scaled sign process") {
    MdsProcess proc = make_scaled_sign_process(32, 1.0);
    std::vector<double> eps{0.5, 1.0, 1.5, 2.0, 3.0};
    auto rows = hoeffding_tail_check(proc, eps, 20000, 2);
    REQUIRE(rows.size() == eps.size());
    for (const auto& r : rows) {
        CAPTURE(r.eps, r.empirical, r.bound);
        REQUIRE(r.ok);
        REQUIRE(r.bound == Catch::Approx(2.0 * std::exp(-r.eps * r.eps / 10.0)));
    }
    // determinism
    auto rows2 = hoeffding_tail_check(proc, eps, 20000, 2);
    for (std::size_t i = 0; i < rows.size(); ++i)
        REQUIRE(rows[i].empirical == rows2[i].empirical);
    REQUIRE_THROWS_AS(hoeffding_tail_check(proc, eps, 0, 2), std::invalid_argument);
}

TEST_CASE("process invariants are enforced, not assumed") {
    // |Z_n| > S_n must be rejected
    MdsProcess bad = make_scaled_sign_process(8, 1.0);
    auto good_step = bad.step;
    bad.step = [good_step](std::uint64_t seed, std::size_t n,
                           const std::vector<std::complex<double>>& prev) {
        MdsStep st = good_step(seed, n, prev);
        st.Z *= 2.0;
        return st;
    };
    REQUIRE_THROWS_AS(hoeffding_tail_check(bad, {1.0}, 10, 2), invalid_process);

    // S_n depending on the current draw must be rejected
    MdsProcess peek = make_scaled_sign_process(8, 1.0);
    peek.step = [](std::uint64_t seed, std::size_t n,
                   const std::vector<std::complex<double>>&) {
        double u = stream_uniform01(seed, 2 * n);
        MdsStep st;
        st.S = 0.1 + 0.1 * u;  // not predictable
        st.Z = {u < 0.5 ? st.S : -st.S, 0.0};
        return st;
    };
    REQUIRE_THROWS_AS(hoeffding_tail_check(peek, {1.0}, 10, 2), invalid_process);

    // a budget violation under the unconditional contract must be rejected
    MdsProcess hot = make_mixed_process(8, 0.01, 50.0);
    hot.unconditional = true;
    REQUIRE_THROWS_AS(hoeffding_tail_check(hot, {1.0}, 50, 2), invalid_process);
}

TEST_CASE("conditioned Hoeffding bound holds jointly with the budget event") {
    MdsProcess proc = make_mixed_process(32, 1.0, 1.8);
    REQUIRE_FALSE(proc.unconditional);
    std::vector<double> eps{0.5, 1.0, 2.0, 3.0};
    auto rows = hoeffding_conditioned_check(proc, eps, 20000, 3);
    for (const auto& r : rows) {
        CAPTURE(r.eps);
        REQUIRE(r.ok);
    }
    // the unconditional harness must refuse a conditioned process
    REQUIRE_THROWS_AS(hoeffding_tail_check(proc, eps, 100, 3), std::invalid_argument);
}

TEST_CASE("2-D Doob inequality holds for the multiplicative family") {
    SupermartingaleFamily fam = make_multiplicative_family(4, 32);
    auto rows = doob2d_check(fam, {0.5, 1.0, 2.0, 5.0, 10.0}, 20000, 4);
    for (const auto& r : rows) {
        CAPTURE(r.lambda, r.lhs, r.rhs);
        REQUIRE(r.ok);
    }

    SupermartingaleFamily neg = fam;
    neg.generator = [](std::uint64_t) {
        return std::vector<std::vector<double>>(33, std::vector<double>(4, -1.0));
    };
    REQUIRE_THROWS_AS(doob2d_check(neg, {1.0}, 10, 4), invalid_process);

    SupermartingaleFamily nomass = make_multiplicative_family(4, 32);
    nomass.s0_predicate = [](double) { return false; };
    REQUIRE_THROWS_AS(doob2d_check(nomass, {1.0}, 50, 4), insufficient_conditioning_mass);

    REQUIRE_THROWS_AS(doob2d_check(fam, {1.0}, 0, 4), std::invalid_argument);
}

TEST_CASE("hypercontractivity: exact Rademacher path matches a brute oracle") {
    const auto& t = table();
    DirichletPolynomial poly;
    poly.coefficients[1] = {0.7, 0.0};
    poly.coefficients[2] = {-0.3, 0.4};
    poly.coefficients[3] = {0.2, 0.0};
    poly.coefficients[6] = {0.1, -0.1};
    poly.coefficients[4] = {0.5, 0.0};  // non-squarefree: f(4) = 0 for Rademacher
    for (std::uint64_t m : {1, 2, 3}) {
        HypercontractivityResult r =
            hypercontractivity_check(Mode::rademacher, t, poly, m, Method::exact, 0);
        // brute force over the 4 sign patterns of f(2), f(3)
        double lhs = 0.0;
        for (int s2 : {-1, 1})
            for (int s3 : {-1, 1}) {
                std::complex<double> v = poly.coefficients[1];
                v += poly.coefficients[2] * static_cast<double>(s2);
                v += poly.coefficients[3] * static_cast<double>(s3);
                v += poly.coefficients[6] * static_cast<double>(s2 * s3);
                lhs += std::pow(std::norm(v), static_cast<double>(m));
            }
        lhs /= 4.0;
        CAPTURE(m);
        REQUIRE(r.lhs == Catch::Approx(lhs).epsilon(1e-12));
        REQUIRE(r.ok);
        REQUIRE(r.lhs <= r.rhs * (1.0 + 1e-12));
    }
}

TEST_CASE("hypercontractivity: Steinhaus m = 1 is an exact equality") {
    const auto& t = table();
    DirichletPolynomial poly;
    poly.coefficients[2] = {1.0, -0.5};
    poly.coefficients[9] = {0.25, 0.0};
    poly.coefficients[10] = {0.0, 0.75};
    HypercontractivityResult r =
        hypercontractivity_check(Mode::steinhaus, t, poly, 1, Method::exact, 0);
    double sum = std::norm(poly.coefficients[2]) + std::norm(poly.coefficients[9]) +
                 std::norm(poly.coefficients[10]);
    REQUIRE(r.lhs == Catch::Approx(sum).epsilon(1e-14));
    REQUIRE(r.rhs == Catch::Approx(sum).epsilon(1e-14));  // tau_1 = 1
    REQUIRE(r.ok);
    REQUIRE_THROWS_AS(hypercontractivity_check(Mode::steinhaus, t, poly, 2, Method::exact, 0),
                      unsupported_method);
}

TEST_CASE("hypercontractivity: Monte Carlo path is deterministic and bounded") {
    const auto& t = table();
    DirichletPolynomial poly;
    for (std::uint64_t n : {1, 2, 3, 5, 6, 15}) poly.coefficients[n] = {1.0 / n, 0.2};
    for (Mode mode : {Mode::steinhaus, Mode::rademacher}) {
        HypercontractivityResult a =
            hypercontractivity_check(mode, t, poly, 2, Method::monte_carlo, 20000, 6);
        HypercontractivityResult b =
            hypercontractivity_check(mode, t, poly, 2, Method::monte_carlo, 20000, 6);
        CAPTURE(mode_name(mode));
        REQUIRE(a.lhs == b.lhs);
        REQUIRE(a.ok);
    }
    DirichletPolynomial empty;
    REQUIRE(hypercontractivity_check(Mode::steinhaus, t, empty, 2, Method::exact, 0).ok);
}

TEST_CASE("Fourier lower bound") {
    FourierResult single = fourier_lower_bound_check({{2.0, -1.0}}, 64);
    REQUIRE(single.integral == Catch::Approx(std::sqrt(5.0)).epsilon(1e-12));
    REQUIRE(single.ok);

    std::vector<std::complex<double>> b{{1.0, 0.0}, {0.9, 0.2}, {-0.4, 0.6}, {0.0, -0.3}};
    FourierResult r = fourier_lower_bound_check(b, 256);
    REQUIRE(r.floor_value == Catch::Approx(1.0));
    REQUIRE(r.integral >= r.floor_value - 1e-6);
    REQUIRE(r.ok);
    REQUIRE_THROWS_AS(fourier_lower_bound_check(b, 8), std::invalid_argument);
}

TEST_CASE("Gaussian walk check is deterministic with sane outputs") {
    std::vector<double> prof(200, 1.0);
    GaussianWalkResult a = gaussian_walk_check(200, 2.0, prof, 5000, 8);
    GaussianWalkResult b = gaussian_walk_check(200, 2.0, prof, 5000, 8);
    REQUIRE(a.prob == b.prob);
    REQUIRE(a.prob >= 0.0);
    REQUIRE(a.prob <= 1.0);
    REQUIRE(a.comparator == Catch::Approx(std::min(1.0, 2.0 / std::sqrt(200.0))));
    REQUIRE(a.ratio == Catch::Approx(a.prob / a.comparator));
    // jobs must not change the result
    GaussianWalkResult c = gaussian_walk_check(200, 2.0, prof, 5000, 8, 0.0, 4);
    REQUIRE(a.prob == c.prob);

    REQUIRE_THROWS_AS(gaussian_walk_check(200, 0.5, prof, 100, 8), std::invalid_argument);
    std::vector<double> badprof(200, 100.0);
    REQUIRE_THROWS_AS(gaussian_walk_check(200, 2.0, badprof, 100, 8), std::invalid_argument);
    REQUIRE_THROWS_AS(gaussian_walk_check(100, 2.0, prof, 100, 8), std::invalid_argument);
}

TEST_CASE("submartingale |X_q| check passes in both modes") {
    const auto& t = table();
    const double x = 3000.0, z = 150.0;
    for (Mode mode : {Mode::steinhaus, Mode::rademacher}) {
        RmfModel m = sample_model(mode, 91, 3000, t);
        SubmartingaleResult r = submartingale_absXq_check(m, t, z, 10.0, 40.0, x, 1e6);
        CAPTURE(mode_name(mode));
        REQUIRE(r.primes.size() >= 2);
        REQUIRE(r.ok_per_step.size() == r.primes.size() - 1);
        REQUIRE(r.all_ok);
    }
    RmfModel m = sample_model(Mode::steinhaus, 91, 3000, t);
    REQUIRE_THROWS_AS(submartingale_absXq_check(m, t, z, 40.0, 10.0, x, 1e6),
                      std::invalid_argument);
}

TEST_CASE("conditional moment of N_ij stays below the tau majorant") {
    const auto& t = table();
    Schedule sched = build_schedule(800, 3, 25.0, 1.0, 1e-3, 2, true);
    RmfModel m = sample_model(Mode::steinhaus, 95, 800, t);
    int j = 1;
    NijMomentResult r = conditional_moment_Nij_check(m, t, sched, 800.0, j, 2, 2000);
    REQUIRE(r.rhs >= 0.0);
    REQUIRE(r.ok);
    // deterministic
    NijMomentResult r2 = conditional_moment_Nij_check(m, t, sched, 800.0, j, 2, 2000);
    REQUIRE(r.lhs_estimate == r2.lhs_estimate);
    RmfModel mr = sample_model(Mode::rademacher, 95, 800, t);
    REQUIRE_THROWS_AS(conditional_moment_Nij_check(mr, t, sched, 800.0, j, 2, 2000),
                      std::invalid_argument);
    REQUIRE_THROWS_AS(conditional_moment_Nij_check(m, t, sched, 800.0, j, 2, 10),
                      std::invalid_argument);
}
