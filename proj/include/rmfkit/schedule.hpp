#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "rmfkit/errors.hpp"

namespace rmfkit {

/// Test-point / y-grid parameter system. The y-grid is geometric in log:
/// log y_j = e^{j/ell} log y_0, and J is minimal with y_J >= x_max. In
/// desk_scale mode only those two relations are enforced; the paper-faithful
/// mode additionally pins y_0 and the test points, and is feasible only for
/// tiny parameters.
struct Schedule {
    std::uint64_t x_max = 0;
    int ell = 1;
    double bigK = 25.0;
    double eps = 1.0;
    double c0 = 1e-3;
    int r_param = 2;
    bool desk_scale = true;

    std::vector<double> x_points;  // ascending test points
    std::vector<double> y_grid;    // y_0 .. y_J
    int J = 0;

    double smoothing_X = 0.0;  // (log x_max)^{8r^2-8r+4}, possibly capped
    bool smoothing_capped = false;
    double smoothing_cap = 0.0;

    // block split for the smoothed functionals, applied to log x / log y_{j-1}
    double block_threshold = 0.0;

    double y0() const { return y_grid.front(); }
    double yJ() const { return y_grid.back(); }
};

inline Schedule build_schedule(std::uint64_t x_max, int ell, double bigK, double eps, double c0,
                               int r_param, bool desk_scale, double desk_y0 = 10.0,
                               double smoothing_cap = 1e6) {
    if (x_max < 100) throw std::invalid_argument("build_schedule: x_max must be >= 100");
    if (ell < 1 || !(bigK > 0.0) || !(eps > 0.0) || r_param <= 1)
        throw std::invalid_argument("build_schedule: parameters must be positive, r > 1");
    if (!(c0 > 0.0) || c0 > 1e-3)
        throw std::invalid_argument("build_schedule: c0 must lie in (0, 1e-3]");

    Schedule s;
    s.x_max = x_max;
    s.ell = ell;
    s.bigK = bigK;
    s.eps = eps;
    s.c0 = c0;
    s.r_param = r_param;
    s.desk_scale = desk_scale;

    double log_x_max = std::log(static_cast<double>(x_max));
    double y0;
    if (!desk_scale) {
        if (std::abs(bigK * eps - 25.0) > 1e-9)
            throw std::invalid_argument("build_schedule: paper-faithful mode requires K*eps = 25");
        double lK = std::pow(static_cast<double>(ell), bigK);  // exponent of 2 in log X_ell
        if (lK > 60.0)
            throw infeasible_parameters(
                "build_schedule: log2(log X_ell) = ell^K = " + std::to_string(lK) +
                " makes X_ell = e^{2^{ell^K}} unrepresentable; use desk_scale");
        double log_X_ell = std::pow(2.0, lK);
        double log_y0 = std::pow(log_X_ell, 1.0 - bigK / static_cast<double>(ell));
        if (!(log_y0 > 0.0) || log_y0 >= log_x_max)
            throw infeasible_parameters(
                "build_schedule: paper-faithful y_0 = exp(" + std::to_string(log_y0) +
                ") is not below x_max; use desk_scale");
        double i_hi = std::pow(log_X_ell, 1.0 / c0);
        if (!(i_hi <= 1e6))
            throw infeasible_parameters(
                "build_schedule: test-point index bound (log X_ell)^{1/c0} = " +
                std::to_string(i_hi) + " is unrepresentable; use desk_scale");
        y0 = std::exp(log_y0);
        double i_lo = ell > 1 ? std::pow(std::pow(2.0, std::pow(ell - 1.0, bigK)), 1.0 / c0) : 1.0;
        for (double i = std::floor(i_lo) + 1.0; i <= i_hi; i += 1.0) {
            double xp = std::floor(std::exp(std::pow(i, c0)));
            if (xp <= static_cast<double>(x_max) &&
                (s.x_points.empty() || xp > s.x_points.back()))
                s.x_points.push_back(xp);
        }
    } else {
        if (!(desk_y0 > 1.0) || desk_y0 >= static_cast<double>(x_max))
            throw std::invalid_argument("build_schedule: need 1 < y0 < x_max");
        y0 = desk_y0;
        // geometric test points, ratio 2, ending at x_max
        double xp = static_cast<double>(x_max);
        std::vector<double> rev;
        while (xp >= 100.0) {
            rev.push_back(std::floor(xp));
            xp /= 2.0;
        }
        s.x_points.assign(rev.rbegin(), rev.rend());
    }

    double log_y0 = std::log(y0);
    s.y_grid.push_back(y0);
    int j = 0;
    while (s.y_grid.back() < static_cast<double>(x_max)) {
        ++j;
        s.y_grid.push_back(
            std::exp(std::exp(static_cast<double>(j) / static_cast<double>(ell)) * log_y0));
        if (j > 100000)
            throw infeasible_parameters("build_schedule: y-grid does not reach x_max");
    }
    s.J = j;

    double exponent = 8.0 * r_param * r_param - 8.0 * r_param + 4.0;
    double raw_X = std::pow(log_x_max, exponent);
    s.smoothing_cap = smoothing_cap;
    if (raw_X > smoothing_cap) {
        s.smoothing_X = smoothing_cap;
        s.smoothing_capped = true;
    } else {
        s.smoothing_X = raw_X;
        s.smoothing_capped = false;
    }

    // Default block split: geometric mean of the extreme values of
    // log x_max / log y_{j-1}, so both sides are populated when J > 1.
    double v_hi = log_x_max / log_y0;
    double v_lo = log_x_max / std::log(s.y_grid[s.J - (s.J > 0 ? 1 : 0)]);
    s.block_threshold = std::sqrt(v_hi * v_lo);
    return s;
}

/// Flat key=value serialization (one pair per line).
inline std::string schedule_to_text(const Schedule& s) {
    std::string out;
    out += "x_max=" + std::to_string(s.x_max) + "\n";
    out += "ell=" + std::to_string(s.ell) + "\n";
    out += "bigK=" + std::to_string(s.bigK) + "\n";
    out += "eps=" + std::to_string(s.eps) + "\n";
    out += "c0=" + std::to_string(s.c0) + "\n";
    out += "r_param=" + std::to_string(s.r_param) + "\n";
    out += "desk_scale=" + std::string(s.desk_scale ? "1" : "0") + "\n";
    out += "y0=" + std::to_string(s.y_grid.front()) + "\n";
    out += "J=" + std::to_string(s.J) + "\n";
    out += "smoothing_X=" + std::to_string(s.smoothing_X) + "\n";
    out += "block_threshold=" + std::to_string(s.block_threshold) + "\n";
    return out;
}

}  // namespace rmfkit
