#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "rmfkit/rng.hpp"
#include "rmfkit/stats.hpp"

using namespace rmfkit;

TEST_CASE("counter streams are deterministic and in range") {
    for (std::uint64_t i = 0; i < 1000; ++i) {
        double u = stream_uniform01(42, i);
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        REQUIRE(u == stream_uniform01(42, i));
    }
    REQUIRE(stream_uniform01(42, 0) != stream_uniform01(43, 0));
    REQUIRE(derive_seed(1, 2, 3) != derive_seed(1, 3, 2));
    REQUIRE(derive_seed(1, 2, 3) == derive_seed(1, 2, 3));
}

TEST_CASE("stream uniforms look uniform") {
    double sum = 0.0;
    const std::size_t n = 100000;
    for (std::size_t i = 0; i < n; ++i) sum += stream_uniform01(7, i);
    REQUIRE(std::abs(sum / n - 0.5) < 0.01);
}

TEST_CASE("Kahan summation keeps long sums accurate") {
    KahanSum s;
    for (int i = 0; i < 100000; ++i) s.add(0.1);
    REQUIRE(s.value() == Catch::Approx(10000.0).epsilon(1e-12));
    KahanComplexSum c;
    for (int i = 0; i < 1000; ++i) c.add({0.1, -0.2});
    REQUIRE(c.value().real() == Catch::Approx(100.0).epsilon(1e-12));
    REQUIRE(c.value().imag() == Catch::Approx(-200.0).epsilon(1e-12));
}

TEST_CASE("MeanAccumulator matches direct formulas and merges associatively") {
    std::vector<double> xs;
    SmallRng rng(99);
    for (int i = 0; i < 500; ++i) xs.push_back(rng.uniform01() * 10.0 - 3.0);
    MeanAccumulator whole;
    for (double x : xs) whole.add(x);
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= xs.size();
    double var = 0.0;
    for (double x : xs) var += (x - mean) * (x - mean);
    var /= (xs.size() - 1);
    REQUIRE(whole.mean() == Catch::Approx(mean).epsilon(1e-12));
    REQUIRE(whole.variance() == Catch::Approx(var).epsilon(1e-10));
    REQUIRE(whole.std_error() == Catch::Approx(std::sqrt(var / xs.size())).epsilon(1e-10));

    MeanAccumulator a, b;
    for (std::size_t i = 0; i < xs.size(); ++i) (i < 123 ? a : b).add(xs[i]);
    a.merge(b);
    REQUIRE(a.count() == whole.count());
    REQUIRE(a.mean() == Catch::Approx(whole.mean()).epsilon(1e-12));
    REQUIRE(a.variance() == Catch::Approx(whole.variance()).epsilon(1e-10));
}

TEST_CASE("binomial standard error is floored at 1/n") {
    REQUIRE(binomial_std_error(0.0, 100) == Catch::Approx(0.01));
    REQUIRE(binomial_std_error(0.5, 100) == Catch::Approx(0.05));
    REQUIRE(binomial_std_error(0.3, 0) == 1.0);
}

TEST_CASE("parallel_for result is independent of the thread count") {
    const std::size_t n = 1000;
    std::vector<double> a(n), b(n);
    auto fill = [](std::vector<double>& out) {
        return [&out](std::size_t i) {
            SmallRng r(derive_seed(5, 0, i));
            out[i] = r.uniform01();
        };
    };
    parallel_for(n, 1, fill(a));
    parallel_for(n, 4, fill(b));
    REQUIRE(a == b);
}

TEST_CASE("SmallRng normal has the right first two moments") {
    SmallRng rng(2024);
    MeanAccumulator acc;
    for (int i = 0; i < 200000; ++i) acc.add(rng.normal());
    REQUIRE(std::abs(acc.mean()) < 0.01);
    REQUIRE(acc.variance() == Catch::Approx(1.0).margin(0.02));
}
