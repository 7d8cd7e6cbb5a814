#include <catch2/catch_amalgamated.hpp>

#include <map>
#include <set>

#include "rmfkit/sums.hpp"

using namespace rmfkit;

namespace {
const PrimeTable& table() {
    static PrimeTable t = build_prime_table(5000);
    return t;
}
}  // namespace

TEST_CASE("prefix series matches direct partial sums") {
    const auto& t = table();
    RmfModel m = sample_model(Mode::steinhaus, 3, 2000, t);
    auto s = build_prefix_series(m, t, 2000);
    KahanComplexSum acc;
    for (std::uint64_t n = 1; n <= 2000; ++n) {
        acc.add(value(m, t, n));
        if (n % 97 == 0 || n < 20)
            REQUIRE(std::abs(mf_sum(s, static_cast<double>(n)) - acc.value()) < 1e-9);
    }
    REQUIRE(mf_sum(s, 1234.7) == s.cumulative[1234]);
    REQUIRE_THROWS_AS(mf_sum(s, 0.5), std::invalid_argument);
    REQUIRE_THROWS_AS(mf_sum(s, 2001.0), std::invalid_argument);
}

TEST_CASE("psi sums match brute enumeration") {
    const auto& t = table();
    for (Mode mode : {Mode::steinhaus, Mode::rademacher}) {
        RmfModel m = sample_model(mode, 7, 1000, t);
        for (double y : {2.0, 5.0, 13.0, 100.0}) {
            std::complex<double> loose{0.0, 0.0}, strict{0.0, 0.0};
            for (std::uint64_t n = 1; n <= 600; ++n) {
                double P = static_cast<double>(largest_prime_factor(t, n));
                if (P <= y) loose += value(m, t, n);
                if (P < y) strict += value(m, t, n);
            }
            REQUIRE(std::abs(psi_sum(m, t, 600.0, y, false) - loose) < 1e-9);
            REQUIRE(std::abs(psi_sum(m, t, 600.0, y, true) - strict) < 1e-9);
        }
        // range variant
        std::complex<double> rng{0.0, 0.0};
        for (std::uint64_t n = 51; n <= 400; ++n)
            if (static_cast<double>(largest_prime_factor(t, n)) < 7.0) rng += value(m, t, n);
        REQUIRE(std::abs(psi_range_sum(m, t, 400.0, 50.0, 7.0) - rng) < 1e-9);
    }
    RmfModel m = sample_model(Mode::steinhaus, 7, 1000, t);
    REQUIRE_THROWS_AS(psi_range_sum(m, t, 10.0, 20.0, 3.0), std::invalid_argument);
}

TEST_CASE("window enumeration visits exactly the right d") {
    const auto& t = table();
    const double x = 800.0, y_lo = 5.0, y_hi = 30.0;
    for (bool repeated : {false, true}) {
        for (Mode mode : {Mode::steinhaus, Mode::rademacher}) {
            RmfModel m = sample_model(mode, 19, 1000, t);
            std::map<std::uint64_t, std::complex<double>> visited;
            std::map<std::uint64_t, std::uint32_t> top_exp;
            for_each_window_supported(m, t, x, y_lo, y_hi, 40.0, repeated,
                                      [&](std::uint64_t d, std::uint32_t e,
                                          std::complex<double> fd) {
                                          REQUIRE(visited.count(d) == 0);
                                          visited[d] = fd;
                                          top_exp[d] = e;
                                      });
            // brute-force reference
            std::set<std::uint64_t> expected;
            for (std::uint64_t d = 2; d <= 800; ++d) {
                if (static_cast<double>(d) <= 40.0) continue;
                bool in_window = true;
                std::uint64_t top_p = 0;
                std::uint32_t top_e = 0;
                for (auto [p, e] : factorize(t, d)) {
                    double pd = static_cast<double>(p);
                    if (pd <= y_lo || pd > y_hi) in_window = false;
                    top_p = p;
                    top_e = e;
                }
                (void)top_p;
                if (!in_window) continue;
                if (repeated && top_e < 2) continue;
                expected.insert(d);
            }
            REQUIRE(visited.size() == expected.size());
            for (std::uint64_t d : expected) {
                CAPTURE(d);
                REQUIRE(visited.count(d) == 1);
                REQUIRE(std::abs(visited[d] - value(m, t, d)) < 1e-10);
                REQUIRE(top_exp[d] == factorize(t, d).back().second);
            }
        }
    }
    RmfModel m = sample_model(Mode::steinhaus, 19, 1000, t);
    REQUIRE_THROWS_AS(
        for_each_window_supported(m, t, 100.0, 10.0, 5.0, 0.0, false,
                                  [](std::uint64_t, std::uint32_t, std::complex<double>) {}),
        std::invalid_argument);
}

TEST_CASE("restricted sum over repeated-top d vanishes identically for Rademacher") {
    const auto& t = table();
    RmfModel m = sample_model(Mode::rademacher, 23, 1000, t);
    REQUIRE(restricted_sum(m, t, 900.0, 3.0, 50.0, 9.0, true) == std::complex<double>(0.0, 0.0));
    // and matches brute force for Steinhaus
    RmfModel ms = sample_model(Mode::steinhaus, 23, 1000, t);
    std::complex<double> brute{0.0, 0.0};
    for (std::uint64_t d = 10; d <= 900; ++d) {
        auto f = factorize(t, d);
        bool ok = !f.empty() && f.back().second >= 2;
        for (auto [p, e] : f)
            if (p <= 3 || p > 50) ok = false;
        if (ok) brute += value(ms, t, d);
    }
    REQUIRE(std::abs(restricted_sum(ms, t, 900.0, 3.0, 50.0, 9.0, true) - brute) < 1e-9);
}

TEST_CASE("smooth count matches brute enumeration") {
    const auto& t = table();
    for (double y : {2.0, 7.0, 50.0}) {
        std::uint64_t c = 0;
        for (std::uint64_t n = 1; n <= 700; ++n)
            if (static_cast<double>(largest_prime_factor(t, n)) <= y) ++c;
        REQUIRE(smooth_count(t, 700.0, y) == c);
    }
    REQUIRE(smooth_count(t, 0.5, 10.0) == 0);
}

TEST_CASE("fluctuation normalizer formula and domain") {
    REQUIRE(fluctuation_normalizer(1000.0, 0.05) ==
            Catch::Approx(std::pow(std::log(std::log(1000.0)), 0.3)));
    REQUIRE(fluctuation_normalizer_from_loglog(50.0, 0.25) ==
            Catch::Approx(std::pow(50.0, 0.5)));
    REQUIRE_THROWS_AS(fluctuation_normalizer(10.0, 0.05), std::invalid_argument);
    REQUIRE_THROWS_AS(fluctuation_normalizer(1000.0, 0.0), std::invalid_argument);
    REQUIRE_THROWS_AS(fluctuation_normalizer_from_loglog(0.5, 0.1), std::invalid_argument);
}
