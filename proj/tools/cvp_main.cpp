// SPDX-License-Identifier: MIT
//
// cvp — solve, verify, and explore causal variational principles on the
// matrix set F from the command line.
//
// Exit codes: 0 success (converged and certified), 2 solver non-convergence,
// 3 certificate failure, 4 configuration or I/O errors, 1 unexpected errors.

#include "cvp/pipeline.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <exception>
#include <filesystem>
#include <iostream>
#include <string>

int main(int argc, char** argv) {
    CLI::App app{"causal variational principles: solver and certificate toolkit"};
    app.require_subcommand(1);
    app.fallthrough(); // global flags may follow the subcommand

    std::string config_path;
    std::uint64_t seed = 0;
    std::string out_dir;
    std::string format;
    app.add_option("--config", config_path, "configuration file (key = value lines)")
        ->check(CLI::ExistingFile);
    auto* seed_opt =
        app.add_option("--seed", seed, "master seed (overrides solver.seed in the config)");
    app.add_option("--out", out_dir, "output directory (overrides output.dir and CVP_OUT_DIR)");
    app.add_option("--format", format, "report format")
        ->check(CLI::IsMember({"tree", "columnar"}));

    auto* solve = app.add_subcommand(
        "solve", "minimize the causal action, then certify the minimizer");
    auto* verify =
        app.add_subcommand("verify", "certify optimality of a measure read from a file");
    std::string verify_measure;
    verify->add_option("measure", verify_measure, "measure file to verify")
        ->required()
        ->check(CLI::ExistingFile);
    auto* cmin = app.add_subcommand(
        "cmin", "estimate C_min = inf T under the linear constraint and emit a witness");
    auto* scan = app.add_subcommand(
        "scan", "sample the certificate functional off the support of a measure");
    std::string scan_measure;
    int scan_count = -1;
    scan->add_option("measure", scan_measure, "measure file around which to scan")
        ->required()
        ->check(CLI::ExistingFile);
    scan->add_option("--count", scan_count, "number of samples (default verify.scan_count)")
        ->check(CLI::NonNegativeNumber);
    auto* selftest =
        app.add_subcommand("selftest", "run the built-in closed-form example battery");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? cvp::kExitOk : cvp::kExitBadInput;
    }

    try {
        if (selftest->parsed()) return cvp::run_selftest(std::cout);

        cvp::RunConfig cfg =
            config_path.empty() ? cvp::RunConfig{} : cvp::read_config_file(config_path);
        if (seed_opt->count() > 0) cfg.solver.seed = seed;
        if (!format.empty()) cfg.output.format = format;
        cfg.validate();

        const std::string dir = cvp::resolve_output_dir(out_dir, cfg);
        std::filesystem::create_directories(dir);

        cvp::PipelineOutcome oc;
        if (solve->parsed())
            oc = cvp::run_solve(cfg, dir);
        else if (verify->parsed())
            oc = cvp::run_verify(cfg, verify_measure, dir);
        else if (cmin->parsed())
            oc = cvp::run_cmin(cfg, dir);
        else if (scan->parsed())
            oc = cvp::run_scan(cfg, scan_measure,
                               scan_count >= 0 ? scan_count : cfg.verify.scan_count, dir);
        std::cerr << "report written to " << oc.report_path << "\n";
        return oc.exit_code;
    } catch (const std::runtime_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return cvp::kExitBadInput;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return cvp::kExitBadInput;
    } catch (const std::exception& e) {
        std::cerr << "unexpected error: " << e.what() << "\n";
        return cvp::kExitError;
    }
}
