#pragma once

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "rmfkit/analytic.hpp"
#include "rmfkit/decomp.hpp"
#include "rmfkit/inequalities.hpp"
#include "rmfkit/schedule.hpp"
#include "rmfkit/sums.hpp"

namespace rmfkit {

inline constexpr const char* kArtifactVersion = "1.0.0";

struct ExperimentConfig {
    std::string mode = "steinhaus";
    std::uint64_t base_seed = 1;
    std::uint64_t x_max = 100000;
    int ell = 3;
    double bigK = 25.0;
    double eps = 1.0;
    double c0 = 1e-3;
    int r_param = 2;
    bool desk_scale = true;
    double y0 = 10.0;
    double block_threshold = 0.0;  // 0 = schedule default
    std::uint64_t trials = 10000;
    std::uint64_t seeds = 50;
    double t_threshold = 1.0;  // desk stand-in coefficient for T(ell)
    double t_max = 50.0;
    double quad_step = 0.01;
    double grid_ratio = 2.0;
    double slack = 0.0;        // gaussian-walk O(1) slack
    double fluct_eps = 0.05;   // epsilon in the fluctuation normalizer
    unsigned jobs = 1;
    std::string out_dir = "out";
};

namespace detail {
inline std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}
}  // namespace detail

inline std::string config_to_text(const ExperimentConfig& c) {
    std::ostringstream os;
    os << "mode=" << c.mode << "\n";
    os << "base_seed=" << c.base_seed << "\n";
    os << "x_max=" << c.x_max << "\n";
    os << "ell=" << c.ell << "\n";
    os << "bigK=" << detail::fmt_double(c.bigK) << "\n";
    os << "eps=" << detail::fmt_double(c.eps) << "\n";
    os << "c0=" << detail::fmt_double(c.c0) << "\n";
    os << "r_param=" << c.r_param << "\n";
    os << "desk_scale=" << (c.desk_scale ? 1 : 0) << "\n";
    os << "y0=" << detail::fmt_double(c.y0) << "\n";
    os << "block_threshold=" << detail::fmt_double(c.block_threshold) << "\n";
    os << "trials=" << c.trials << "\n";
    os << "seeds=" << c.seeds << "\n";
    os << "t_threshold=" << detail::fmt_double(c.t_threshold) << "\n";
    os << "t_max=" << detail::fmt_double(c.t_max) << "\n";
    os << "quad_step=" << detail::fmt_double(c.quad_step) << "\n";
    os << "grid_ratio=" << detail::fmt_double(c.grid_ratio) << "\n";
    os << "slack=" << detail::fmt_double(c.slack) << "\n";
    os << "fluct_eps=" << detail::fmt_double(c.fluct_eps) << "\n";
    os << "jobs=" << c.jobs << "\n";
    os << "out_dir=" << c.out_dir << "\n";
    return os.str();
}

inline ExperimentConfig config_from_text(const std::string& text) {
    ExperimentConfig c;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        auto pos = line.find('=');
        if (pos == std::string::npos)
            throw std::invalid_argument("config: malformed line '" + line + "'");
        std::string key = line.substr(0, pos), val = line.substr(pos + 1);
        if (key == "mode") c.mode = val;
        else if (key == "base_seed") c.base_seed = std::stoull(val);
        else if (key == "x_max") c.x_max = std::stoull(val);
        else if (key == "ell") c.ell = std::stoi(val);
        else if (key == "bigK") c.bigK = std::stod(val);
        else if (key == "eps") c.eps = std::stod(val);
        else if (key == "c0") c.c0 = std::stod(val);
        else if (key == "r_param") c.r_param = std::stoi(val);
        else if (key == "desk_scale") c.desk_scale = std::stoi(val) != 0;
        else if (key == "y0") c.y0 = std::stod(val);
        else if (key == "block_threshold") c.block_threshold = std::stod(val);
        else if (key == "trials") c.trials = std::stoull(val);
        else if (key == "seeds") c.seeds = std::stoull(val);
        else if (key == "t_threshold") c.t_threshold = std::stod(val);
        else if (key == "t_max") c.t_max = std::stod(val);
        else if (key == "quad_step") c.quad_step = std::stod(val);
        else if (key == "grid_ratio") c.grid_ratio = std::stod(val);
        else if (key == "slack") c.slack = std::stod(val);
        else if (key == "fluct_eps") c.fluct_eps = std::stod(val);
        else if (key == "jobs") c.jobs = static_cast<unsigned>(std::stoul(val));
        else if (key == "out_dir") c.out_dir = val;
        else throw std::invalid_argument("config: unknown key '" + key + "'");
    }
    if (c.trials == 0 || c.seeds == 0)
        throw std::invalid_argument("config: counts must be positive");
    if (!(c.t_max > 0.0) || !(c.quad_step > 0.0) || !(c.grid_ratio > 1.0) ||
        !(c.fluct_eps > 0.0))
        throw std::invalid_argument("config: tolerances/steps must be positive");
    return c;
}

inline Schedule schedule_from_config(const ExperimentConfig& c) {
    Schedule s = build_schedule(c.x_max, c.ell, c.bigK, c.eps, c.c0, c.r_param, c.desk_scale,
                                c.y0);
    if (c.block_threshold > 0.0) s.block_threshold = c.block_threshold;
    return s;
}

// ---------------------------------------------------------------------------
// Scans
// ---------------------------------------------------------------------------

struct FluctuationRow {
    std::uint64_t seed = 0;
    double sup_statistic = 0.0;
    double argmax_x = 0.0;
};

struct FluctuationPoint {
    std::uint64_t seed = 0;
    double x = 0.0;
    double statistic = 0.0;
};

struct FluctuationScanResult {
    std::vector<FluctuationRow> rows;
    std::vector<FluctuationPoint> points;
};

namespace detail {
inline std::vector<double> geometric_grid(double lo, double hi, double ratio) {
    std::vector<double> g;
    for (double x = lo; x < hi; x *= ratio) g.push_back(std::floor(x));
    g.push_back(std::floor(hi));
    return g;
}
}  // namespace detail

/// Per seed, sup over a geometric x-grid of |M_f(x)| / (sqrt(x) (log log x)^{1/4+eps}).
inline FluctuationScanResult fluctuation_scan(const ExperimentConfig& c, const PrimeTable& table) {
    if (c.x_max < 1000) throw std::invalid_argument("fluctuation_scan: x_max < 1000");
    Mode mode = mode_from_name(c.mode);
    std::vector<double> grid = detail::geometric_grid(100.0, static_cast<double>(c.x_max),
                                                      c.grid_ratio);
    FluctuationScanResult out;
    for (std::uint64_t s = 0; s < c.seeds; ++s) {
        std::uint64_t seed = derive_seed(c.base_seed, 0x464C5543u, s);
        RmfModel m = sample_model(mode, seed, c.x_max, table);
        std::vector<std::complex<double>> fv = values_up_to(m, table, c.x_max);
        KahanComplexSum run;
        std::size_t gi = 0;
        FluctuationRow row;
        row.seed = seed;
        for (std::uint64_t n = 1; n <= c.x_max && gi < grid.size(); ++n) {
            run.add(fv[n]);
            while (gi < grid.size() && static_cast<double>(n) == grid[gi]) {
                double x = grid[gi];
                double stat = std::abs(run.value()) /
                              (std::sqrt(x) * fluctuation_normalizer(x, c.fluct_eps));
                out.points.push_back({seed, x, stat});
                if (stat > row.sup_statistic) {
                    row.sup_statistic = stat;
                    row.argmax_x = x;
                }
                ++gi;
            }
        }
        out.rows.push_back(row);
    }
    return out;
}

struct MomentRow {
    double x = 0.0;
    double mean_abs = 0.0;
    double std_error = 0.0;
    double normalized = 0.0;
};

/// Mean of |M_f(x)| over seeds on the decade grid; normalized by
/// sqrt(x)/(log log x)^{1/4} (Harper's first-moment law proxy).
inline std::vector<MomentRow> moment_scan(const ExperimentConfig& c, const PrimeTable& table) {
    if (c.seeds < 50) throw std::invalid_argument("moment_scan: need >= 50 seeds");
    Mode mode = mode_from_name(c.mode);
    std::vector<double> grid;
    for (double x = 1000.0; x <= static_cast<double>(c.x_max); x *= 10.0) grid.push_back(x);
    if (grid.empty()) throw std::invalid_argument("moment_scan: x_max < 1000");
    std::vector<MeanAccumulator> acc(grid.size());
    for (std::uint64_t s = 0; s < c.seeds; ++s) {
        std::uint64_t seed = derive_seed(c.base_seed, 0x4D4F4D54u, s);
        RmfModel m = sample_model(mode, seed, c.x_max, table);
        std::vector<std::complex<double>> fv = values_up_to(m, table, c.x_max);
        KahanComplexSum run;
        std::size_t gi = 0;
        for (std::uint64_t n = 1; n <= c.x_max && gi < grid.size(); ++n) {
            run.add(fv[n]);
            if (static_cast<double>(n) == grid[gi]) {
                acc[gi].add(std::abs(run.value()));
                ++gi;
            }
        }
    }
    std::vector<MomentRow> rows;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        MomentRow r;
        r.x = grid[i];
        r.mean_abs = acc[i].mean();
        r.std_error = acc[i].std_error();
        r.normalized = r.mean_abs * std::pow(std::log(std::log(r.x)), 0.25) / std::sqrt(r.x);
        rows.push_back(r);
    }
    return rows;
}

struct VarianceEventRow {
    double x = 0.0;
    double threshold = 0.0;
    double fraction_exceeding = 0.0;
};

/// Fraction of seeds with V(x) > t_threshold * x per test point: the
/// desk-scale analogue of the paper's variance event (its literal threshold
/// T(ell) x / ell^{K/2} is unrepresentable at desk parameters).
inline std::vector<VarianceEventRow> variance_event_scan(const ExperimentConfig& c,
                                                         const PrimeTable& table,
                                                         const Schedule& sched) {
    Mode mode = mode_from_name(c.mode);
    std::vector<VarianceEventRow> rows;
    for (double x : sched.x_points) {
        VarianceEventRow r;
        r.x = x;
        r.threshold = c.t_threshold * x;
        std::size_t hits = 0;
        for (std::uint64_t s = 0; s < c.seeds; ++s) {
            std::uint64_t seed = derive_seed(c.base_seed, 0x56455654u, s);
            RmfModel m = sample_model(mode, seed, c.x_max, table);
            if (variance_V(m, table, sched, x).V > r.threshold) ++hits;
        }
        r.fraction_exceeding = static_cast<double>(hits) / static_cast<double>(c.seeds);
        rows.push_back(r);
    }
    return rows;
}

struct I0ScanRow {
    double y0 = 0.0;
    double mean_pow_2_3 = 0.0;
    double std_error = 0.0;
};

inline std::vector<I0ScanRow> i0_scan(const ExperimentConfig& c, const PrimeTable& table) {
    Mode mode = mode_from_name(c.mode);
    std::vector<I0ScanRow> rows;
    std::size_t trials = std::min<std::uint64_t>(c.trials, 400);
    for (double y0 : {4.0, 8.0, 16.0, 32.0}) {
        if (y0 >= static_cast<double>(c.x_max)) break;
        I0MomentResult r = estimate_I0_low_moment(mode, table, y0, c.t_max, 0.05,
                                                  std::max<std::size_t>(trials, 100),
                                                  c.base_seed);
        rows.push_back({y0, r.mean_pow_2_3, r.std_error});
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Report plumbing
// ---------------------------------------------------------------------------

inline void write_csv(const std::filesystem::path& path, const std::string& header,
                      const std::vector<std::vector<std::string>>& rows) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open for writing: " + path.string());
    f << header << "\n";
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) f << (i ? "," : "") << row[i];
        f << "\n";
    }
}

struct RunReport {
    std::vector<std::pair<std::string, bool>> suite_results;  // asserting suites
    std::vector<std::string> exploratory;                     // scans executed
    double wall_seconds = 0.0;
    bool all_ok = true;
};

namespace detail {

inline std::vector<std::string> decomposition_csv_row(double x, std::uint64_t seed,
                                                      const std::string& mode,
                                                      const DecompositionReport& r) {
    return {fmt_double(x),          std::to_string(seed),      mode,
            fmt_double(r.psi0.real()), fmt_double(r.psi0.imag()), fmt_double(r.m1.real()),
            fmt_double(r.m1.imag()),   fmt_double(r.m2.real()),   fmt_double(r.m2.imag()),
            fmt_double(r.residual)};
}

}  // namespace detail

/// Execute the selected suites, write CSV/JSON artifacts under out_dir.
/// Asserting suites contribute to all_ok; scans are exploratory only.
inline RunReport run_suite(const ExperimentConfig& c, const std::vector<std::string>& selection,
                           const PrimeTable& table) {
    auto t0 = std::chrono::steady_clock::now();
    std::filesystem::create_directories(c.out_dir);
    Schedule sched = schedule_from_config(c);
    Mode mode = mode_from_name(c.mode);
    RunReport rep;
    nlohmann::json jsuites = nlohmann::json::object();

    auto selected = [&](const std::string& name) {
        if (selection.empty()) return false;
        for (const auto& s : selection)
            if (s == name || s == "all") return true;
        return false;
    };
    auto record = [&](const std::string& name, bool ok, nlohmann::json detail) {
        rep.suite_results.emplace_back(name, ok);
        if (!ok) rep.all_ok = false;
        detail["ok"] = ok;
        jsuites[name] = std::move(detail);
    };

    if (selected("decompose")) {
        bool ok = true;
        std::vector<std::vector<std::string>> rows;
        for (std::uint64_t s = 0; s < std::min<std::uint64_t>(c.seeds, 10); ++s) {
            std::uint64_t seed = derive_seed(c.base_seed, 0x4445434Fu, s);
            for (Mode md : {Mode::steinhaus, Mode::rademacher}) {
                RmfModel m = sample_model(md, seed, c.x_max, table);
                DecompositionReport r = decompose(m, table, sched,
                                                  static_cast<double>(c.x_max));
                double tol = md == Mode::rademacher ? 0.0
                                                    : 1e-9 * std::sqrt(static_cast<double>(c.x_max));
                if (r.residual > tol) ok = false;
                if (md == Mode::rademacher && std::abs(r.m2) != 0.0) ok = false;
                rows.push_back(detail::decomposition_csv_row(r.x, seed, mode_name(md), r));
            }
        }
        write_csv(std::filesystem::path(c.out_dir) / "decomposition.csv",
                  "x,seed,mode,psi0_re,psi0_im,m1_re,m1_im,m2_re,m2_im,residual", rows);
        record("decompose", ok, {{"rows", rows.size()}});
    }

    if (selected("variance")) {
        bool ok = true;
        std::vector<std::vector<std::string>> rows;
        for (std::uint64_t s = 0; s < std::min<std::uint64_t>(c.seeds, 5); ++s) {
            std::uint64_t seed = derive_seed(c.base_seed, 0x56415220u, s);
            RmfModel m = sample_model(mode, seed, c.x_max, table);
            VarianceReport v = variance_V(m, table, sched, static_cast<double>(c.x_max));
            double sum = 0.0;
            for (double b : v.per_block) sum += b;
            if (std::abs(v.V - sum) > 1e-9 * std::max(1.0, v.V)) ok = false;
            rows.push_back({std::to_string(seed), detail::fmt_double(v.V)});
        }
        write_csv(std::filesystem::path(c.out_dir) / "variance.csv", "seed,V", rows);
        record("variance", ok, nlohmann::json::object());
    }

    if (selected("hoeffding")) {
        MdsProcess proc = make_scaled_sign_process(64, 1.0);
        std::vector<double> eps;
        for (int i = 1; i <= 10; ++i) eps.push_back(0.3 * i);
        auto rows = hoeffding_tail_check(proc, eps, c.trials, c.base_seed);
        bool ok = true;
        std::vector<std::vector<std::string>> csv;
        for (const auto& r : rows) {
            ok = ok && r.ok;
            csv.push_back({detail::fmt_double(r.eps), detail::fmt_double(r.empirical),
                           detail::fmt_double(r.bound), r.ok ? "1" : "0"});
        }
        write_csv(std::filesystem::path(c.out_dir) / "hoeffding.csv", "eps,empirical,bound,ok",
                  csv);
        record("hoeffding", ok, nlohmann::json::object());
    }

    if (selected("hoeffding-cond")) {
        MdsProcess proc = make_mixed_process(64, 1.0, 1.6);
        std::vector<double> eps;
        for (int i = 1; i <= 10; ++i) eps.push_back(0.3 * i);
        auto rows = hoeffding_conditioned_check(proc, eps, c.trials, c.base_seed);
        bool ok = true;
        std::vector<std::vector<std::string>> csv;
        for (const auto& r : rows) {
            ok = ok && r.ok;
            csv.push_back({detail::fmt_double(r.eps), detail::fmt_double(r.empirical),
                           detail::fmt_double(r.bound), r.ok ? "1" : "0"});
        }
        write_csv(std::filesystem::path(c.out_dir) / "hoeffding_cond.csv",
                  "eps,empirical_joint,bound,ok", csv);
        record("hoeffding-cond", ok, nlohmann::json::object());
    }

    if (selected("doob2d")) {
        SupermartingaleFamily fam = make_multiplicative_family(8, 64);
        std::vector<double> lambdas{0.5, 1.0, 2.0, 4.0, 8.0, 16.0};
        auto rows = doob2d_check(fam, lambdas, c.trials, c.base_seed);
        bool ok = true;
        std::vector<std::vector<std::string>> csv;
        for (const auto& r : rows) {
            ok = ok && r.ok;
            csv.push_back({detail::fmt_double(r.lambda), detail::fmt_double(r.lhs),
                           detail::fmt_double(r.rhs), r.ok ? "1" : "0"});
        }
        write_csv(std::filesystem::path(c.out_dir) / "doob2d.csv", "lambda,lhs,rhs,ok", csv);
        record("doob2d", ok, nlohmann::json::object());
    }

    if (selected("euler")) {
        bool ok = true;
        auto ex = euler_expectation_check(Mode::rademacher, {2, 3, 5, 7}, 0.0, Method::exact, 0);
        if (ex.err > 1e-12) ok = false;
        auto mc = euler_expectation_check(mode_from_name(c.mode), {2, 3, 5, 7}, 0.0,
                                          Method::monte_carlo, c.trials, c.base_seed);
        if (mc.err > std::max(3.0 * mc.std_error, 0.01 * mc.target)) ok = false;
        record("euler", ok,
               {{"exact_err", ex.err}, {"mc_err", mc.err}, {"mc_se", mc.std_error}});
    }

    if (selected("parseval")) {
        bool ok = true;
        DirichletPolynomial single;
        single.coefficients[1] = 1.0;
        auto r1 = parseval_check(single, 1.0, 10.0, c.t_max * 100.0, c.quad_step * 10.0);
        if (std::abs(r1.lhs - 0.5) > 1e-12 || std::abs(r1.rhs - 0.5) > 1e-6) ok = false;
        DirichletPolynomial ind;
        for (std::uint64_t n = 1; n <= 50; ++n) ind.coefficients[n] = 1.0;
        auto r2 = parseval_check(ind, 1.0, 100.0, c.t_max, c.quad_step);
        if (r2.rel_err > 1e-3) ok = false;
        record("parseval", ok, {{"single_rhs", r1.rhs}, {"indicator_rel_err", r2.rel_err}});
    }

    if (selected("hyper")) {
        bool ok = true;
        DirichletPolynomial poly;
        for (std::uint64_t n : {1, 2, 3, 5, 6, 10, 15, 30})
            poly.coefficients[n] = {1.0 / static_cast<double>(n), 0.25};
        for (std::uint64_t mm : {1, 2, 3}) {
            auto r = hypercontractivity_check(Mode::rademacher, table, poly, mm, Method::exact, 0);
            ok = ok && r.ok;
        }
        auto st = hypercontractivity_check(Mode::steinhaus, table, poly, 1, Method::exact, 0);
        if (std::abs(st.lhs - st.rhs) > 1e-12 * std::max(1.0, st.rhs)) ok = false;
        record("hyper", ok, nlohmann::json::object());
    }

    if (selected("fourier")) {
        std::vector<std::complex<double>> b{{1.0, 0.5}, {-0.3, 0.2}, {0.1, -0.7}, {0.4, 0.0}};
        auto r = fourier_lower_bound_check(b, 64);
        record("fourier", r.ok, {{"integral", r.integral}, {"floor", r.floor_value}});
    }

    if (selected("gaussian")) {
        bool ok = true;
        nlohmann::json detail = nlohmann::json::array();
        std::size_t n = 10000;
        std::vector<double> prof(n, 1.0);
        for (double a : {1.0, 10.0, 100.0}) {
            auto r = gaussian_walk_check(n, a, prof, c.trials, c.base_seed, c.slack, c.jobs);
            bool band = r.ratio >= 0.2 && r.ratio <= 5.0;
            ok = ok && band;
            detail.push_back({{"a", a}, {"prob", r.prob}, {"ratio", r.ratio}});
        }
        record("gaussian", ok, {{"cases", detail}});
    }

    if (selected("submartingale")) {
        RmfModel m = sample_model(mode, c.base_seed, c.x_max, table);
        double x = static_cast<double>(std::min<std::uint64_t>(c.x_max, 10000));
        auto r = submartingale_absXq_check(m, table, x / 20.0, 10.0, 40.0, x,
                                           sched.smoothing_X);
        record("submartingale", r.all_ok, {{"pairs", r.ok_per_step.size()}});
    }

    if (selected("super-step")) {
        RmfModel m = sample_model(mode, c.base_seed, c.x_max, table);
        int j = std::max(1, sched.J / 2);
        auto r = check_supermartingale_step(m, table, sched,
                                            static_cast<double>(std::min<std::uint64_t>(
                                                c.x_max, 100000)),
                                            j, c.trials, c.jobs);
        record("super-step", r.ok,
               {{"lhs", r.lhs_estimate}, {"rhs", r.rhs}, {"se", r.std_error}, {"j", j}});
    }

    if (selected("nij-moment")) {
        RmfModel m = sample_model(Mode::steinhaus, c.base_seed, c.x_max, table);
        double x = static_cast<double>(std::min<std::uint64_t>(c.x_max, 10000));
        int j = std::max(1, sched.J / 2);
        auto r = conditional_moment_Nij_check(m, table, sched, x, j, 2,
                                              std::max<std::size_t>(c.trials, 1000));
        record("nij-moment", r.ok, {{"lhs", r.lhs_estimate}, {"rhs", r.rhs}});
    }

    if (selected("tau-bound")) {
        bool ok = true;
        // running prefix sums avoid re-summing per x
        std::uint64_t xmax = std::min<std::uint64_t>(table.limit, 1000000);
        std::vector<unsigned __int128> sums(5, 0);
        for (std::uint64_t n = 1; n <= xmax; ++n) {
            for (std::uint64_t mm = 2; mm <= 6; ++mm)
                sums[mm - 2] += divisor_tau(table, mm, n);
            if (n >= 3) {
                double lx = std::log(static_cast<double>(n));
                for (std::uint64_t mm = 2; mm <= 6; ++mm) {
                    double bound = static_cast<double>(n) *
                                   std::pow(2.0 * lx, static_cast<double>(mm - 1));
                    if (static_cast<double>(sums[mm - 2]) > bound) ok = false;
                }
            }
        }
        record("tau-bound", ok, {{"x_max", xmax}});
    }

    // exploratory scans
    if (selected("scan-fluctuation")) {
        auto r = fluctuation_scan(c, table);
        std::vector<std::vector<std::string>> csv;
        for (const auto& row : r.rows)
            csv.push_back({std::to_string(row.seed), detail::fmt_double(row.sup_statistic),
                           detail::fmt_double(row.argmax_x)});
        write_csv(std::filesystem::path(c.out_dir) / "fluctuation.csv",
                  "seed,sup_statistic,argmax_x", csv);
        std::vector<std::vector<std::string>> pts;
        for (const auto& p : r.points)
            pts.push_back({std::to_string(p.seed), detail::fmt_double(p.x),
                           detail::fmt_double(p.statistic)});
        write_csv(std::filesystem::path(c.out_dir) / "fluctuation_points.csv",
                  "seed,x,statistic", pts);
        rep.exploratory.push_back("scan-fluctuation");
    }
    if (selected("scan-moments")) {
        auto rows = moment_scan(c, table);
        std::vector<std::vector<std::string>> csv;
        for (const auto& r : rows)
            csv.push_back({detail::fmt_double(r.x), detail::fmt_double(r.mean_abs),
                           detail::fmt_double(r.std_error), detail::fmt_double(r.normalized)});
        write_csv(std::filesystem::path(c.out_dir) / "moments.csv",
                  "x,mean_abs,std_error,normalized", csv);
        rep.exploratory.push_back("scan-moments");
    }
    if (selected("scan-variance-event")) {
        auto rows = variance_event_scan(c, table, sched);
        std::vector<std::vector<std::string>> csv;
        for (const auto& r : rows)
            csv.push_back({detail::fmt_double(r.x), detail::fmt_double(r.threshold),
                           detail::fmt_double(r.fraction_exceeding)});
        write_csv(std::filesystem::path(c.out_dir) / "variance_event.csv",
                  "x,threshold,fraction_exceeding", csv);
        rep.exploratory.push_back("scan-variance-event");
    }
    if (selected("scan-i0")) {
        auto rows = i0_scan(c, table);
        std::vector<std::vector<std::string>> csv;
        for (const auto& r : rows)
            csv.push_back({detail::fmt_double(r.y0), detail::fmt_double(r.mean_pow_2_3),
                           detail::fmt_double(r.std_error)});
        write_csv(std::filesystem::path(c.out_dir) / "i0_scan.csv", "y0,mean_pow_2_3,std_error",
                  csv);
        rep.exploratory.push_back("scan-i0");
    }

    auto t1 = std::chrono::steady_clock::now();
    rep.wall_seconds = std::chrono::duration<double>(t1 - t0).count();

    nlohmann::json report;
    report["artifact_version"] = kArtifactVersion;
    report["config"] = config_to_text(c);
    report["suites"] = jsuites;
    report["exploratory"] = rep.exploratory;
    report["wall_seconds"] = rep.wall_seconds;
    report["all_ok"] = rep.all_ok;
    std::ofstream jf(std::filesystem::path(c.out_dir) / "report.json");
    jf << report.dump(2) << "\n";
    return rep;
}

}  // namespace rmfkit
