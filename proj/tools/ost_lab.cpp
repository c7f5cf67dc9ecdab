#include <cstdio>
#include <exception>
#include <filesystem>
#include <string>

#include "CLI11.hpp"

#include "ostlab/experiment.hpp"

namespace {

enum Exit { kPass = 0, kCheckFailure = 1, kConfigError = 2 };

struct Options {
    std::string config;
    unsigned jobs = 1;
    std::string out;
};

int execute(const std::string& kind, const Options& opt) {
    ostlab::ExperimentConfig cfg;
    try {
        cfg = ostlab::load_config(opt.config);
        if (!kind.empty() && cfg.experiment.kind != kind)
            throw ostlab::ConfigError("experiment.kind", "config declares '" + cfg.experiment.kind +
                                                             "' but the '" + kind + "' subcommand was invoked");
    } catch (const ostlab::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kConfigError;
    }
    const std::filesystem::path dir = opt.out.empty() ? cfg.experiment.output_dir : opt.out;
    ostlab::ExperimentOutcome outcome;
    try {
        outcome = ostlab::run_experiment(cfg, opt.jobs);
    } catch (const ostlab::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kConfigError;
    } catch (const ostlab::DomainError& e) {
        std::fprintf(stderr, "invalid configuration: %s\n", e.what());
        return kConfigError;
    } catch (const ostlab::HypothesisError& e) {
        std::fprintf(stderr, "hypothesis violated: %s\n", e.what());
        return kConfigError;
    } catch (const ostlab::ResolutionError& e) {
        std::fprintf(stderr, "grid cannot resolve the request: %s\n", e.what());
        return kConfigError;
    } catch (const ostlab::ConvergenceError& e) {
        outcome = {};
        outcome.check_flag(std::string("run completed: ") + e.what(), false);
    }
    ostlab::write_outputs(dir, cfg, outcome, ostlab::utc_timestamp());
    for (const auto& c : outcome.checks) {
        if (!c["enforced"].get<bool>()) continue;
        std::printf("[%s] %s\n", c["pass"].get<bool>() ? "PASS" : "FAIL", c["name"].get<std::string>().c_str());
    }
    std::printf("%s: %s (report in %s)\n", cfg.experiment.kind.c_str(), outcome.pass ? "pass" : "FAIL",
                (dir / "report.json").string().c_str());
    return outcome.pass ? kPass : kCheckFailure;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Kernel, evolution and decay experiments for the damped KdV-Hilbert equation", "ost-lab"};
    app.set_version_flag("--version", std::string(ostlab::kToolVersion));
    app.require_subcommand(1);

    Options opt;
    std::string chosen;
    const auto add = [&](const std::string& name, const std::string& help) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("--config", opt.config, "INI experiment file")->required()->check(CLI::ExistingFile);
        sub->add_option("--jobs", opt.jobs, "parallel workers for sweeps")->check(CLI::PositiveNumber);
        sub->add_option("--out", opt.out, "output directory (overrides experiment.output_dir)");
        sub->callback([&chosen, name] { chosen = name; });
    };
    for (const auto& k : ostlab::experiment_kinds()) add(k, "run a " + k + " experiment");
    auto* run = app.add_subcommand("run", "run the experiment named by experiment.kind");
    run->add_option("config", opt.config, "INI experiment file")->required()->check(CLI::ExistingFile);
    run->add_option("--jobs", opt.jobs, "parallel workers for sweeps")->check(CLI::PositiveNumber);
    run->add_option("--out", opt.out, "output directory (overrides experiment.output_dir)");
    run->callback([&chosen] { chosen = ""; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kConfigError;
    }
    try {
        return execute(chosen, opt);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kConfigError;
    }
}
