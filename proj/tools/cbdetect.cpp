// cbdetect: config-driven cyberbullying-detection experiment runner.
//
//   cbdetect validate <config>           check a config, echo it normalized
//   cbdetect run <config> [overrides]    run the experiment grid + transfers
//   cbdetect render <results.csv> --layout table1a|table2a|table3a|table4|table5|table6
//   cbdetect gradcheck [--seeds N]       finite-difference gradient verification
//
// Exit codes: 0 success, 1 validation failure, 2 partial cell failures.
// Human-readable progress goes to stderr; machine outputs go to files (or
// stdout for validate/render, which exist to be piped).

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "cbd/config.hpp"
#include "cbd/runner.hpp"
#include "cbd/verification.hpp"

namespace {

int cmd_validate(const std::string& path) {
    try {
        const cbd::ExperimentConfig config = cbd::load_config(path);
        std::cout << cbd::normalized_config_json(config);
        std::fprintf(stderr, "config ok: %zu dataset(s), %zu architecture(s)\n",
                     config.datasets.size(), config.architectures.size());
        return 0;
    } catch (const cbd::ConfigError& e) {
        for (const auto& violation : e.violations)
            std::fprintf(stderr, "error: %s\n", violation.c_str());
        return 1;
    }
}

int cmd_run(const std::string& path, const std::optional<std::uint64_t>& seed,
            const std::optional<std::string>& mode, const std::optional<std::size_t>& jobs) {
    cbd::ExperimentConfig config;
    try {
        config = cbd::load_config(path);
        if (seed) config.seed = *seed;
        if (mode) config.mode = cbd::split_mode_from_string(*mode);
        if (jobs) config.jobs = *jobs;
    } catch (const cbd::ConfigError& e) {
        for (const auto& violation : e.violations)
            std::fprintf(stderr, "error: %s\n", violation.c_str());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    const cbd::RunSummary summary = cbd::run_experiment(config);
    return summary.exit_code;
}

int cmd_render(const std::string& csv_path, const std::string& layout_name,
               const std::string& out_path) {
    cbd::TableLayout layout;
    try {
        layout = cbd::table_layout_from_string(layout_name);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    std::vector<cbd::EvalRow> rows;
    try {
        rows = cbd::read_results_csv(csv_path);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    const std::string table = cbd::render_table(rows, layout);
    if (out_path.empty()) {
        std::cout << table;
    } else {
        std::ofstream out(out_path);
        if (!out) {
            std::fprintf(stderr, "error: cannot write %s\n", out_path.c_str());
            return 1;
        }
        out << table;
    }
    return 0;
}

int cmd_gradcheck(std::size_t seeds) {
    const cbd::VerificationReport report = cbd::run_gradient_verification(seeds);
    for (const auto& check : report.checks)
        std::fprintf(stderr, "%-12s seed %-3llu max rel err %.3e  (%s)\n",
                     check.architecture.c_str(),
                     static_cast<unsigned long long>(check.seed), check.max_rel_error,
                     check.worst_param.c_str());
    std::printf("gradcheck: %zu checks, worst %.3e, tolerance %.0e: %s\n",
                report.checks.size(), report.worst, report.tolerance,
                report.passed() ? "PASS" : "FAIL");
    return report.passed() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"cyberbullying-detection experiment runner"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> mode;
    std::optional<std::size_t> jobs;

    CLI::App* validate = app.add_subcommand("validate", "validate a config file");
    validate->add_option("config", config_path, "JSON config file")->required();

    CLI::App* run = app.add_subcommand("run", "run the experiment grid");
    run->add_option("config", config_path, "JSON config file")->required();
    run->add_option("--seed", seed, "override the master seed");
    run->add_option("--mode", mode, "override the split mode")
        ->check(CLI::IsMember({"strict", "fidelity"}));
    run->add_option("--jobs", jobs, "worker threads (default: available cores)");

    std::string csv_path, layout_name, out_path;
    CLI::App* render = app.add_subcommand("render", "render a results.csv as markdown");
    render->add_option("results", csv_path, "results.csv produced by run")->required();
    render->add_option("--layout", layout_name, "table layout")
        ->required()
        ->check(CLI::IsMember({"table1a", "table2a", "table3a", "table4", "table5",
                               "table6"}));
    render->add_option("-o,--out", out_path, "output file (default: stdout)");

    std::size_t seeds = 20;
    CLI::App* gradcheck = app.add_subcommand("gradcheck", "gradient verification suite");
    gradcheck->add_option("--seeds", seeds, "seeds per architecture")->check(CLI::PositiveNumber);

    CLI11_PARSE(app, argc, argv);

    if (validate->parsed()) return cmd_validate(config_path);
    if (run->parsed()) return cmd_run(config_path, seed, mode, jobs);
    if (render->parsed()) return cmd_render(csv_path, layout_name, out_path);
    return cmd_gradcheck(seeds);
}
