#include <iostream>

#include <CLI11.hpp>

#include "dse/report.hpp"

int main(int argc, char** argv)
{
    CLI::App app{"Multi-objective design space exploration with random-forest surrogates"};
    app.require_subcommand(1);

    dse::RunCommand run;
    std::uint64_t seed = 0;
    std::string reference;
    auto* run_cmd = app.add_subcommand("run", "Optimize a scenario and write artifacts to its output_dir");
    run_cmd->add_option("scenario", run.scenario_path, "Scenario JSON file")->required();
    auto* seed_opt = run_cmd->add_option("--seed", seed, "Override the scenario seed");
    run_cmd->add_option("--set", run.overrides, "Override a scenario field, key=value (repeatable)");
    auto* run_ref = run_cmd->add_option("--reference-front", reference, "true_front.csv for the HVI trace");

    std::string bf_path;
    auto* bf_cmd = app.add_subcommand("brute-force", "Evaluate every configuration and write the true front");
    bf_cmd->add_option("scenario", bf_path, "Scenario JSON file")->required();

    dse::ReportCommand report;
    std::string report_ref;
    auto* report_cmd = app.add_subcommand("report", "Compare finished runs by HVI");
    report_cmd->add_option("run_dirs", report.run_dirs, "Run output directories")->required();
    auto* report_ref_opt = report_cmd->add_option("--reference-front", report_ref, "true_front.csv");
    report_cmd->add_option("--output", report.output, "Report CSV path")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        // --help and --version exit 0; any other usage error exits 2.
        return app.exit(e) == 0 ? 0 : 2;
    }

    if (*run_cmd) {
        if (*seed_opt)
            run.seed = seed;
        if (*run_ref)
            run.reference_front = reference;
        return dse::cmd_run(run, std::cout, std::cerr);
    }
    if (*bf_cmd)
        return dse::cmd_brute_force(bf_path, std::cout, std::cerr);
    if (*report_ref_opt)
        report.reference_front = report_ref;
    return dse::cmd_report(report, std::cout, std::cerr);
}
