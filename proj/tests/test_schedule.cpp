#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "rmfkit/schedule.hpp"

using namespace rmfkit;

TEST_CASE("desk schedule preserves the two grid invariants") {
    Schedule s = build_schedule(100000, 3, 25.0, 1.0, 1e-3, 2, true);
    // invariant 1: log y_j = e^{j/ell} log y_0
    double ly0 = std::log(s.y0());
    for (int j = 0; j <= s.J; ++j) {
        double expect = std::exp(static_cast<double>(j) / 3.0) * ly0;
        REQUIRE(std::log(s.y_grid[j]) == Catch::Approx(expect).epsilon(1e-12));
    }
    // invariant 2: J minimal with y_J >= x_max
    REQUIRE(s.yJ() >= 100000.0);
    REQUIRE(s.y_grid[s.J - 1] < 100000.0);
    // test points ascend and end at x_max
    REQUIRE(!s.x_points.empty());
    for (std::size_t i = 1; i < s.x_points.size(); ++i)
        REQUIRE(s.x_points[i] > s.x_points[i - 1]);
    REQUIRE(s.x_points.back() == 100000.0);
}

TEST_CASE("smoothing X follows (log x)^{8r^2-8r+4} with a recorded cap") {
    Schedule s = build_schedule(1000, 2, 25.0, 1.0, 1e-3, 2, true);
    double expect = std::pow(std::log(1000.0), 8.0 * 4.0 - 16.0 + 4.0);
    if (expect > 1e6) {
        REQUIRE(s.smoothing_capped);
        REQUIRE(s.smoothing_X == 1e6);
    } else {
        REQUIRE_FALSE(s.smoothing_capped);
        REQUIRE(s.smoothing_X == Catch::Approx(expect));
    }
    Schedule big = build_schedule(1000000, 2, 25.0, 1.0, 1e-3, 3, true);
    REQUIRE(big.smoothing_capped);  // (log 1e6)^28 is astronomically large
    REQUIRE(big.smoothing_X == big.smoothing_cap);
}

TEST_CASE("block threshold sits between the extreme log-ratios") {
    Schedule s = build_schedule(100000, 3, 25.0, 1.0, 1e-3, 2, true);
    double v_hi = std::log(100000.0) / std::log(s.y0());
    double v_lo = std::log(100000.0) / std::log(s.y_grid[s.J - 1]);
    REQUIRE(s.block_threshold >= v_lo);
    REQUIRE(s.block_threshold <= v_hi);
    REQUIRE(s.block_threshold == Catch::Approx(std::sqrt(v_hi * v_lo)));
}

TEST_CASE("parameter validation") {
    REQUIRE_THROWS_AS(build_schedule(50, 3, 25.0, 1.0, 1e-3, 2, true), std::invalid_argument);
    REQUIRE_THROWS_AS(build_schedule(1000, 0, 25.0, 1.0, 1e-3, 2, true), std::invalid_argument);
    REQUIRE_THROWS_AS(build_schedule(1000, 3, 25.0, 1.0, 0.01, 2, true), std::invalid_argument);
    REQUIRE_THROWS_AS(build_schedule(1000, 3, 25.0, 1.0, 1e-3, 1, true), std::invalid_argument);
    REQUIRE_THROWS_AS(build_schedule(1000, 3, 25.0, 1.0, 1e-3, 2, true, 1.0),
                      std::invalid_argument);
    REQUIRE_THROWS_AS(build_schedule(1000, 3, 25.0, 1.0, 1e-3, 2, true, 5000.0),
                      std::invalid_argument);
}

TEST_CASE("paper-faithful parameters fail loudly with the offending magnitude") {
    // K*eps constraint enforced first
    REQUIRE_THROWS_AS(build_schedule(100000, 3, 10.0, 1.0, 1e-3, 2, false),
                      std::invalid_argument);
    // the honest parameter regime is numerically unrepresentable
    try {
        build_schedule(100000, 3, 25.0, 1.0, 1e-3, 2, false);
        FAIL("expected infeasible_parameters");
    } catch (const infeasible_parameters& e) {
        REQUIRE(std::string(e.what()).find("desk_scale") != std::string::npos);
    }
    // even the smallest exponents fall over on the test-point count
    REQUIRE_THROWS_AS(build_schedule(100000, 1, 5.0, 5.0, 1e-3, 2, false),
                      infeasible_parameters);
}

TEST_CASE("schedule serialization is flat key=value") {
    Schedule s = build_schedule(10000, 2, 25.0, 1.0, 1e-3, 2, true);
    std::string txt = schedule_to_text(s);
    REQUIRE(txt.find("x_max=10000\n") != std::string::npos);
    REQUIRE(txt.find("ell=2\n") != std::string::npos);
    REQUIRE(txt.find("desk_scale=1\n") != std::string::npos);
    REQUIRE(txt.find("J=") != std::string::npos);
}
