#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "penal/config.hpp"
#include "penal/errors.hpp"
#include "penal/suites.hpp"

namespace {

struct Flags {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> workers;
    std::string out;
    std::string suite;
    bool timing = false;
};

void add_run_flags(CLI::App* cmd, Flags& f) {
    cmd->add_option("--config", f.config, "experiment config file")->envname("PENAL_CONFIG");
    cmd->add_option("--seed", f.seed, "master seed")->envname("PENAL_SEED");
    cmd->add_option("--workers", f.workers, "worker threads, default all cores")->envname("PENAL_WORKERS")->check(CLI::PositiveNumber);
    cmd->add_option("--out", f.out, "report directory")->envname("PENAL_OUT");
    cmd->add_option("--suite", f.suite, "suite name, or 'all'")->envname("PENAL_SUITE");
    cmd->add_flag("--timing", f.timing, "record wall_ms (rows are then no longer byte-stable)")->envname("PENAL_TIMING");
}

// Flags and environment override the file.
penal::ExperimentConfig resolve(const Flags& f) {
    penal::ExperimentConfig cfg = f.config.empty() ? penal::ExperimentConfig{} : penal::load_config(f.config);
    if (f.seed) cfg.seed = f.seed;
    if (f.workers) cfg.workers = f.workers;
    if (!f.out.empty()) cfg.out = f.out;
    if (!f.suite.empty()) cfg.suite = f.suite;
    if (f.timing) cfg.timing = true;
    if (cfg.suite.empty()) throw penal::ConfigError("no suite given (run.suite, --suite or PENAL_SUITE)");
    if (cfg.suite != "all") penal::find_suite(cfg.suite);
    return cfg;
}

int execute(const penal::ExperimentConfig& cfg, bool verbose) {
    const penal::SuiteOptions opt = penal::suite_options(cfg);
    const std::vector<std::string> suites = cfg.suite == "all" ? penal::suite_names() : std::vector<std::string>{cfg.suite};
    std::size_t failed = 0;
    std::size_t mandatory = 0;
    for (const auto& s : suites) {
        const auto rows = penal::run_suite(s, opt);
        const auto paths = penal::write_reports(rows, cfg.out, s);
        for (const auto& r : rows) {
            if (r.mandatory) {
                ++mandatory;
                if (!r.pass) ++failed;
            }
            if (verbose || (r.mandatory && !r.pass))
                std::printf("%s %s/%s: %s  estimate=%.6g target=%.6g margin=%.3g\n",
                            r.pass ? "PASS" : (r.mandatory ? "FAIL" : "info"), s.c_str(), r.experiment.c_str(),
                            r.name.c_str(), r.estimate, r.target, r.margin);
        }
        std::printf("%s: %zu rows in %zu files under %s/%s\n", s.c_str(), rows.size(), paths.size(), cfg.out.c_str(),
                    s.c_str());
    }
    std::printf("%zu of %zu mandatory checks passed\n", mandatory - failed, mandatory);
    return failed == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Penalized Brownian motion: simulation and verification suites"};
    app.require_subcommand(1);
    Flags run_flags, verify_flags;
    auto* run = app.add_subcommand("run", "run the suite named by a config file and write CSV reports");
    add_run_flags(run, run_flags);
    auto* verify = app.add_subcommand("verify", "run a suite and print every check");
    add_run_flags(verify, verify_flags);
    app.add_subcommand("list", "list the suites");
    std::string describe_name;
    auto* describe = app.add_subcommand("describe", "document a suite's parameters");
    describe->add_option("suite", describe_name, "suite name")->required();

    CLI11_PARSE(app, argc, argv);
    try {
        if (app.got_subcommand("list")) {
            for (const auto& s : penal::suite_catalog()) std::printf("%-13s %s\n", s.name.c_str(), s.summary.c_str());
            return 0;
        }
        if (app.got_subcommand("describe")) {
            std::cout << penal::describe_suite(describe_name);
            return 0;
        }
        if (app.got_subcommand("run")) {
            if (run_flags.config.empty()) throw penal::ConfigError("run needs --config");
            return execute(resolve(run_flags), false);
        }
        return execute(resolve(verify_flags), true);
    } catch (const penal::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
}
