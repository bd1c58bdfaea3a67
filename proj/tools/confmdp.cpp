// confmdp: run, compare and verify safe policy-model iteration experiments.
//
// Exit codes: 0 success, 1 usage, 2 config, 3 solver, 4 verification failure.

#include "confmdp/checks.hpp"
#include "confmdp/experiment.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kConfig = 2, kSolver = 3, kVerify = 4 };

int cmd_run(const std::string& config_path, const std::string& out) {
    confmdp::RunConfig cfg = confmdp::parse_config(config_path);
    if (!out.empty()) cfg.output_dir = out;
    const auto result = confmdp::run_experiment(cfg);
    std::printf("final_j = %.17g\niterations = %zu\ntermination = %s\nwrote %s\n", result.result.final_j,
                result.result.records.size(), confmdp::to_string(result.result.reason).c_str(),
                result.iterations_csv.string().c_str());
    return kOk;
}

int cmd_compare(const std::vector<std::string>& paths, const std::string& out) {
    std::vector<confmdp::RunConfig> configs;
    for (const auto& p : paths) configs.push_back(confmdp::parse_config(p));
    const auto rows = confmdp::compare_strategies(configs, out);
    for (const auto& r : rows) {
        std::printf("%-32s final_j = %.17g iterations = %zu (%s)\n", r.label.c_str(), r.final_j, r.iterations,
                    confmdp::to_string(r.reason).c_str());
    }
    return kOk;
}

int cmd_verify() {
    bool ok = true;
    for (const auto& check : confmdp::run_verification()) {
        std::printf("%s  %s: %s\n", check.passed ? "PASS" : "FAIL", check.name.c_str(), check.detail.c_str());
        ok = ok && check.passed;
    }
    return ok ? kOk : kVerify;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Safe policy-model iteration for tabular configurable MDPs"};
    app.require_subcommand(1);

    std::string config_path, out_dir;
    auto* run = app.add_subcommand("run", "Run one experiment and write iterations.csv and summary.txt");
    run->add_option("--config", config_path, "Run configuration file")->required();
    run->add_option("--out", out_dir, "Output directory (overrides output_dir)");

    std::vector<std::string> config_paths;
    std::string compare_out;
    auto* compare = app.add_subcommand("compare", "Run several strategies on one environment");
    compare->add_option("--configs", config_paths, "Run configuration files")->required();
    compare->add_option("--out", compare_out, "Output directory")->required();

    auto* verify = app.add_subcommand("verify", "Run the numerical self-checks");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (*run) return cmd_run(config_path, out_dir);
        if (*compare) return cmd_compare(config_paths, compare_out);
        if (*verify) return cmd_verify();
    } catch (const confmdp::UsageError& e) {
        std::fprintf(stderr, "usage error: %s\n", e.what());
        return kUsage;
    } catch (const confmdp::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kConfig;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kSolver;
    }
    return kUsage;
}
