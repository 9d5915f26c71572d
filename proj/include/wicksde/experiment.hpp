#pragma once

#include <optional>
#include <string>
#include <vector>

#include "wicksde/schemes.hpp"

namespace wicksde::expt {

// Resolved run description: problem functions, functional, grids, estimator
// mode and output routing. Built from a JSON config file; the CLI applies its
// flag overrides on top of the parsed struct.
struct ExperimentConfig {
    fn::Func1D a, sigma, f;
    std::string a_str, sigma_str, f_str;
    func::FunctionalSpec functional;
    std::string functional_name = "wick_exp";
    std::vector<int> grids;
    sol::Mode mode = sol::Mode::deterministic;
    sol::McConfig mc;
    chaos::Caps caps;
    std::string scheme_name = "wick_wp";
    std::optional<double> reference_n2mse;  // external value to print alongside
    std::string out_path;                   // empty: stdout
    std::string format = "json";            // "json" or "csv"

    static ExperimentConfig from_json_text(const std::string& text);
    static ExperimentConfig from_file(const std::string& path);

    sol::SdeProblem problem() const;
};

struct GridRow {
    int n = 0;
    double mse = 0.0;
    double rmse = 0.0;
    double n_rmse = 0.0;
    double se = 0.0;
    double dropped_mass = 0.0;
};

// Run result: command-specific scalars plus the per-grid table. Serialization
// is deterministic (stable key order, fixed float formatting, no timestamps),
// so identical configs and seeds give byte-identical reports.
struct Report {
    std::string command;
    std::string config_echo_json;  // compact echo of the resolved config
    std::vector<std::pair<std::string, std::string>> meta;  // key -> json value
    std::vector<GridRow> rows;

    std::string to_json() const;
    std::string to_csv() const;
    // Writes in the requested format to the path ("" or "-": stdout).
    void write(const std::string& path, const std::string& format) const;
};

Report run_constant(const ExperimentConfig& cfg);
Report run_optimal_mse(const ExperimentConfig& cfg);
Report run_scheme_mse(const ExperimentConfig& cfg);
Report run_counterexample(const ExperimentConfig& cfg);
Report run_convergence(const ExperimentConfig& cfg);

// Least-squares slope of log(rmse) against log(n), sign-flipped so a rate of
// r means rmse ~ n^{-r}. Requires >= 2 positive rows.
std::optional<double> fit_rate(const std::vector<GridRow>& rows);

}  // namespace wicksde::expt
