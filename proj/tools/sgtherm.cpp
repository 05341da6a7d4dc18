// Command-line front end: sweep execution, grid analysis, and the analytic
// VMF oracle. Exit codes: 0 success, 1 check failed, 2 configuration error,
// 3 runtime error.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "sgtherm/analysis.hpp"
#include "sgtherm/plan.hpp"
#include "sgtherm/reports.hpp"
#include "sgtherm/results.hpp"
#include "sgtherm/sweep.hpp"
#include "sgtherm/thermo.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitConfigError = 2;
constexpr int kExitRuntimeError = 3;

int cmd_sweep(const std::string& plan_path) {
    const sgtherm::ExperimentPlan plan = sgtherm::parse_plan(plan_path);
    const sgtherm::SweepOutput out = sgtherm::run_sweep(plan);
    std::cout << "results: " << out.results_csv.string() << "\n";
    std::cout << "manifest: " << out.manifest_json.string() << "\n";
    return kExitOk;
}

int cmd_plan_check(const std::string& plan_path) {
    const sgtherm::ExperimentPlan plan = sgtherm::parse_plan(plan_path);
    const std::size_t cells = plan.axis1.count * plan.axis2.count;
    std::cout << "plan OK: " << sgtherm::protocol_name(plan.protocol) << ", "
              << plan.axis1.count << "x" << plan.axis2.count << " grid (" << cells
              << " cells), " << plan.seeds_per_cell << " seed(s)/cell, "
              << plan.iterations << " iterations, d=" << plan.d << ", sigma=" << plan.sigma
              << "\n";
    std::cout << "runs: " << cells * plan.seeds_per_cell << "\n";
    return kExitOk;
}

int cmd_oracle(double T, std::size_t d, const std::string& mode, bool as_json) {
    const sgtherm::VmfMode m =
        mode == "exact" ? sgtherm::VmfMode::Exact : sgtherm::VmfMode::Asymptotic;
    const sgtherm::VmfStats stats = sgtherm::vmf_stats(T, d, m);
    if (as_json) {
        nlohmann::json j;
        j["T"] = T;
        j["d"] = d;
        j["mode"] = mode;
        j["kappa"] = stats.kappa;
        j["U"] = stats.U;
        j["S_sphere"] = stats.S_sphere;
        std::cout << j.dump(2) << "\n";
    } else {
        std::printf("VMF stationary statistics (%s, d=%zu)\n", mode.c_str(), d);
        std::printf("T        = %.12g\n", T);
        std::printf("kappa    = %.12g\n", stats.kappa);
        std::printf("U        = %.12g\n", stats.U);
        std::printf("S_sphere = %.12g\n", stats.S_sphere);
    }
    return kExitOk;
}

int cmd_analyze(const std::string& results_path, const std::string& check,
                std::string out_dir, double gamma, const std::string& vmf_mode) {
    const std::vector<sgtherm::ResultRow> rows = sgtherm::read_results_csv(results_path);
    const sgtherm::GridResult grid = sgtherm::load_grid(rows);
    if (out_dir.empty())
        out_dir = std::filesystem::path(results_path).parent_path().string();
    if (out_dir.empty()) out_dir = ".";

    sgtherm::CheckReport report;
    if (check == "v1") {
        report = sgtherm::v1_scaling_check(grid);
    } else if (check == "v2") {
        report = sgtherm::v2_argmin_check(grid, grid.d);
        sgtherm::write_v2_heatmap_csv(grid,
                                      std::filesystem::path(out_dir) / "v2_heatmap.csv");
    } else if (check == "maxwell") {
        switch (grid.protocol) {
            case sgtherm::Protocol::FixedLR:
                report = sgtherm::maxwell_check_fixed_lr(sgtherm::fit_entropy_surface(grid),
                                                         grid.d);
                break;
            case sgtherm::Protocol::FixedELR:
                report = sgtherm::maxwell_check_fixed_elr(
                    sgtherm::fit_entropy_surface(grid), grid.d);
                break;
            case sgtherm::Protocol::FixedSphere:
                report = sgtherm::maxwell_check_fixed_sphere(grid, grid.d);
                break;
        }
    } else if (check == "adiabatic") {
        report = sgtherm::adiabatic_check(grid, gamma).report;
    } else if (check == "first-law") {
        const sgtherm::VmfMode m = vmf_mode == "exact" ? sgtherm::VmfMode::Exact
                                                       : sgtherm::VmfMode::Asymptotic;
        report = sgtherm::first_law_check(grid, m);
    } else {
        std::cerr << "unknown check '" << check << "'\n";
        return kExitConfigError;
    }

    const std::string basename = check == "first-law" ? "first_law" : check;
    const sgtherm::ReportFiles files =
        sgtherm::write_report_files(report, out_dir, basename);
    std::cout << sgtherm::report_to_text(report);
    std::cout << "report: " << files.text_path.string() << "\n";
    std::cout << "report: " << files.json_path.string() << "\n";
    return report.pass ? kExitOk : kExitCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Noisy gradient descent on scale-invariant losses: simulation sweeps "
                 "and thermodynamic verification"};
    app.require_subcommand(1);

    std::string plan_path;
    auto* sweep = app.add_subcommand("sweep", "run an experiment plan");
    sweep->add_option("--plan", plan_path, "plan file")->required();

    std::string check_plan_path;
    auto* plan_check = app.add_subcommand("plan-check", "validate a plan without running");
    plan_check->add_option("--plan", check_plan_path, "plan file")->required();

    std::string results_path, check_name, out_dir, vmf_mode = "asymptotic";
    double gamma = 2.0;
    auto* analyze = app.add_subcommand("analyze", "run a verification check on results");
    analyze->add_option("--results", results_path, "results CSV")->required();
    analyze->add_option("--check", check_name, "v1 | v2 | maxwell | adiabatic | first-law")
        ->required();
    analyze->add_option("--out", out_dir, "report output directory (default: alongside results)");
    analyze->add_option("--gamma", gamma, "adiabatic exponent (default 2)");
    analyze->add_option("--mode", vmf_mode, "first-law VMF mode: exact | asymptotic");

    double oracle_T = 0.0;
    std::size_t oracle_d = 3;
    std::string oracle_mode = "asymptotic";
    bool oracle_json = false;
    auto* oracle = app.add_subcommand("oracle", "print analytic VMF stationary statistics");
    oracle->add_option("--T", oracle_T, "temperature")->required();
    oracle->add_option("--d", oracle_d, "dimensionality (default 3)");
    oracle->add_option("--mode", oracle_mode, "exact | asymptotic");
    oracle->add_flag("--json", oracle_json, "machine-readable output");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfigError;
    }

    try {
        if (sweep->parsed()) return cmd_sweep(plan_path);
        if (plan_check->parsed()) return cmd_plan_check(check_plan_path);
        if (analyze->parsed())
            return cmd_analyze(results_path, check_name, out_dir, gamma, vmf_mode);
        if (oracle->parsed()) {
            if (oracle_mode != "exact" && oracle_mode != "asymptotic") {
                std::cerr << "oracle: mode must be exact or asymptotic\n";
                return kExitConfigError;
            }
            return cmd_oracle(oracle_T, oracle_d, oracle_mode, oracle_json);
        }
    } catch (const sgtherm::PlanError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const sgtherm::SchemaError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const std::invalid_argument& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntimeError;
    }
    return kExitConfigError;
}
