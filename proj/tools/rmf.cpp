// Command-line front end for the rmfkit library: schedule inspection,
// decomposition/variance dumps, verification suites, and exploratory scans.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rmfkit/experiments.hpp"

namespace {

struct CommonFlags {
    std::string mode;
    std::uint64_t seed = 0;
    std::uint64_t x_max = 0;
    std::uint64_t trials = 0;
    std::string config_path;
    std::string out_dir;
    unsigned jobs = 0;
    bool seed_set = false, x_max_set = false, trials_set = false, jobs_set = false;
};

void add_common(CLI::App* cmd, CommonFlags& fl) {
    cmd->add_option("--mode", fl.mode, "steinhaus or rademacher");
    cmd->add_option("--seed", fl.seed, "base RNG seed")->each([&](const std::string&) {
        fl.seed_set = true;
    });
    cmd->add_option("--x-max", fl.x_max, "largest test point")->each([&](const std::string&) {
        fl.x_max_set = true;
    });
    cmd->add_option("--trials", fl.trials, "Monte Carlo trials")->each([&](const std::string&) {
        fl.trials_set = true;
    });
    cmd->add_option("--config", fl.config_path, "flat key=value config file");
    cmd->add_option("--out", fl.out_dir, "output directory");
    cmd->add_option("--jobs", fl.jobs, "worker threads")->each([&](const std::string&) {
        fl.jobs_set = true;
    });
}

rmfkit::ExperimentConfig resolve_config(const CommonFlags& fl) {
    rmfkit::ExperimentConfig c;
    if (!fl.config_path.empty()) {
        std::ifstream f(fl.config_path);
        if (!f) throw std::runtime_error("cannot read config file: " + fl.config_path);
        std::ostringstream ss;
        ss << f.rdbuf();
        c = rmfkit::config_from_text(ss.str());
    }
    if (!fl.mode.empty()) c.mode = fl.mode;
    if (fl.seed_set) c.base_seed = fl.seed;
    if (fl.x_max_set) c.x_max = fl.x_max;
    if (fl.trials_set) c.trials = fl.trials;
    if (!fl.out_dir.empty()) c.out_dir = fl.out_dir;
    if (fl.jobs_set) c.jobs = fl.jobs;
    rmfkit::mode_from_name(c.mode);  // validate early
    return c;
}

int run_selection(const rmfkit::ExperimentConfig& c, const std::string& selection) {
    rmfkit::PrimeTable table = rmfkit::build_prime_table(c.x_max);
    rmfkit::RunReport rep = rmfkit::run_suite(c, {selection}, table);
    for (const auto& [name, ok] : rep.suite_results)
        std::cout << name << ": " << (ok ? "PASS" : "FAIL") << "\n";
    for (const auto& name : rep.exploratory) std::cout << name << ": written\n";
    std::cout << "report: " << (std::filesystem::path(c.out_dir) / "report.json").string()
              << "\n";
    return rep.all_ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"random multiplicative function decomposition toolkit"};
    app.require_subcommand(1);

    CommonFlags fl;

    auto* schedule_cmd = app.add_subcommand("schedule", "parameter schedule");
    schedule_cmd->require_subcommand(1);
    auto* schedule_show = schedule_cmd->add_subcommand("show", "print the resolved schedule");
    add_common(schedule_show, fl);

    auto* decompose_cmd = app.add_subcommand("decompose", "three-term decomposition table");
    add_common(decompose_cmd, fl);

    auto* variance_cmd = app.add_subcommand("variance", "prime-sum variance V(x)");
    add_common(variance_cmd, fl);

    auto* verify_cmd = app.add_subcommand("verify", "assertion suites");
    std::string verify_which;
    verify_cmd
        ->add_option("suite", verify_which, "suite name")
        ->required()
        ->check(CLI::IsMember({"hoeffding", "hoeffding-cond", "doob2d", "euler", "parseval",
                               "hyper", "gaussian", "fourier", "submartingale", "super-step",
                               "nij-moment", "tau-bound"}));
    add_common(verify_cmd, fl);

    auto* scan_cmd = app.add_subcommand("scan", "exploratory scans");
    std::string scan_which;
    scan_cmd->add_option("scan", scan_which, "scan name")
        ->required()
        ->check(CLI::IsMember({"fluctuation", "moments", "variance-event", "i0"}));
    add_common(scan_cmd, fl);

    CLI11_PARSE(app, argc, argv);

    try {
        rmfkit::ExperimentConfig c = resolve_config(fl);
        if (schedule_show->parsed()) {
            rmfkit::Schedule s = rmfkit::schedule_from_config(c);
            std::cout << rmfkit::schedule_to_text(s);
            std::cout << "x_points=" << s.x_points.size() << "\n";
            for (std::size_t j = 0; j < s.y_grid.size(); ++j)
                std::printf("y_%zu=%.17g\n", j, s.y_grid[j]);
            return 0;
        }
        if (decompose_cmd->parsed()) return run_selection(c, "decompose");
        if (variance_cmd->parsed()) return run_selection(c, "variance");
        if (verify_cmd->parsed()) return run_selection(c, verify_which);
        if (scan_cmd->parsed()) return run_selection(c, "scan-" + scan_which);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
