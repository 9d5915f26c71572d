#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>
#include <vector>

#include "wicksde/experiment.hpp"

namespace py = pybind11;
using namespace pybind11::literals;
using namespace wicksde;

namespace {

fn::Func1D fn_of(const char* what, const std::string& src) {
    try {
        return fn::Func1D::from_expr(expr::Expr::parse(src));
    } catch (const ConfigError& e) {
        throw ConfigError(std::string(what) + ": " + e.what());
    }
}

sol::Mode mode_of(const std::string& m) {
    if (m == "deterministic") return sol::Mode::deterministic;
    if (m == "mc") return sol::Mode::mc;
    throw ConfigError("mode must be 'deterministic' or 'mc'");
}

sol::McConfig mc_of(std::uint64_t samples, std::uint64_t seed, int streams, bool sequential) {
    if (samples < 1) throw ConfigError("samples must be >= 1");
    if (streams < 1) throw ConfigError("streams must be >= 1");
    return {samples, seed, streams, sequential};
}

sol::SdeProblem problem_of(const std::string& a, const std::string& sigma,
                           const std::string& f, const std::string& functional,
                           const std::vector<double>& coefficients, int truncation) {
    func::FunctionalSpec spec = func::FunctionalSpec::by_name(functional, truncation);
    if (spec.name == func::FunctionalSpec::Name::polynomial) {
        if (coefficients.empty())
            throw ConfigError("functional 'polynomial' needs coefficients");
        spec.monomial = coefficients;
    } else if (!coefficients.empty()) {
        throw ConfigError("coefficients only apply to the 'polynomial' functional");
    }
    return sol::SdeProblem::make(fn_of("a", a), fn_of("sigma", sigma), fn_of("f", f), spec);
}

std::string run_command(const std::string& command, const std::string& config,
                        std::string format) {
    expt::ExperimentConfig cfg = expt::ExperimentConfig::from_json_text(config);
    if (!format.empty()) {
        if (format != "json" && format != "csv")
            throw ConfigError("format must be 'json' or 'csv'");
        cfg.format = format;
    }
    expt::Report r;
    if (command == "constant") r = expt::run_constant(cfg);
    else if (command == "optimal-mse") r = expt::run_optimal_mse(cfg);
    else if (command == "scheme-mse") r = expt::run_scheme_mse(cfg);
    else if (command == "counterexample") r = expt::run_counterexample(cfg);
    else if (command == "convergence") r = expt::run_convergence(cfg);
    else throw ConfigError("unknown command '" + command + "'");
    return cfg.format == "csv" ? r.to_csv() : r.to_json();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "finite-chaos solver for linear SDEs with anticipating initial values";

    auto base = py::register_exception<Error>(m, "Error");
    py::register_exception<ConfigError>(m, "ConfigError", base);
    py::register_exception<DomainError>(m, "DomainError", base);
    py::register_exception<NumericError>(m, "NumericError", base);

    py::class_<expr::Expr>(m, "Expr", "scalar expression in the time variable s")
        .def_static("parse", [](const std::string& src) { return expr::Expr::parse(src); },
                    "src"_a)
        .def("__call__", &expr::Expr::operator(), "s"_a)
        .def("derivative", &expr::Expr::derivative)
        .def("is_constant", &expr::Expr::is_constant)
        .def("__str__", &expr::Expr::str)
        .def("__repr__", &expr::Expr::str);

    py::class_<func::WickSeries>(m, "WickSeries",
                                 "functional as a finite Hermite series at a fixed variance")
        .def_static(
            "by_name",
            [](const std::string& name, double variance, int truncation) {
                return func::FunctionalSpec::by_name(name, truncation).build(variance);
            },
            "name"_a, "variance"_a, "truncation"_a = 40,
            "catalog series: wick_exp, exp, sin, cos")
        .def_static("polynomial", &func::WickSeries::make_polynomial, "monomial"_a,
                    "variance"_a)
        .def_readonly("c", &func::WickSeries::c)
        .def_readonly("variance", &func::WickSeries::variance)
        .def("order", &func::WickSeries::order)
        .def("__call__", &func::WickSeries::eval, "y"_a)
        .def("l2_norm2", &func::WickSeries::l2_norm2)
        .def("growth_constant", &func::WickSeries::growth_constant)
        .def("derivative", &func::WickSeries::derivative)
        .def("with_variance", &func::WickSeries::with_variance, "v2"_a);

    py::class_<sol::SdeProblem>(m, "Problem",
                                "dX = a X dt + sigma X dW (Skorohod), X_0 = F(I(f)), on [0,1]")
        .def(py::init(&problem_of), "a"_a, "sigma"_a, "f"_a, "functional"_a = "wick_exp",
             "coefficients"_a = std::vector<double>{}, "truncation"_a = 40)
        .def_readonly("int_a", &sol::SdeProblem::int_a)
        .def_readonly("nf2", &sol::SdeProblem::nf2)
        .def_readonly("ns2", &sol::SdeProblem::ns2)
        .def_readonly("nfs", &sol::SdeProblem::nfs)
        .def_readonly("series", &sol::SdeProblem::F)
        .def("exact_terminal", &sol::exact_terminal, "i_f"_a, "i_sigma"_a,
             "X_1 on the path with the given integrals of f and sigma against W")
        .def("second_moment", &sol::terminal_second_moment)
        .def("optimal_constant", &sol::optimal_constant,
             "rate constant C of the conditional-expectation approximation")
        .def("closed_form_constant", &sol::closed_form_constant,
             "C in closed form; Wick-exponential functional only")
        .def(
            "optimal_mse",
            [](const sol::SdeProblem& p, int n, const std::string& mode,
               std::uint64_t samples, std::uint64_t seed, int streams, bool sequential) {
                const auto r = sol::mse_optimal(p, fn::GridSpec(n), mode_of(mode),
                                                mc_of(samples, seed, streams, sequential));
                return py::dict("mse"_a = r.mse, "se"_a = r.se);
            },
            "n"_a, "mode"_a = "deterministic", "samples"_a = std::uint64_t{200000},
            "seed"_a = std::uint64_t{1}, "streams"_a = 8, "sequential"_a = false,
            "E[(X_1 - E[X_1 | n-grid])^2]")
        .def(
            "scheme_mse",
            [](const sol::SdeProblem& p, int n, const std::string& scheme,
               const std::string& mode, int degree, double prune_threshold,
               std::uint64_t samples, std::uint64_t seed, int streams, bool sequential) {
                const auto r = sch::mse_scheme(p, fn::GridSpec(n),
                                               sch::scheme_by_name(scheme), mode_of(mode),
                                               chaos::Caps{degree, prune_threshold},
                                               mc_of(samples, seed, streams, sequential));
                return py::dict("mse"_a = r.mse, "se"_a = r.se,
                                "dropped_mass"_a = r.dropped_mass,
                                "mc_fallback"_a = r.mc_fallback);
            },
            "n"_a, "scheme"_a = "wick_wp", "mode"_a = "deterministic", "degree"_a = 12,
            "prune_threshold"_a = 1e-16, "samples"_a = std::uint64_t{200000},
            "seed"_a = std::uint64_t{1}, "streams"_a = 8, "sequential"_a = false,
            "E[(X_1 - scheme terminal)^2]; schemes: wick_wp, wick_euler, milstein")
        .def(
            "milstein_mean",
            [](const sol::SdeProblem& p, int n) {
                return sch::milstein_mean(p, fn::GridSpec(n));
            },
            "n"_a, "E[terminal] of the ordinary-product iteration (needs a=0, sigma=1)");

    m.def("hermite", &chaos::hermite_eval, "k"_a, "variance"_a, "x"_a,
          "variance-parameterized Hermite polynomial h^k_v(x)");

    m.def(
        "residual_gram",
        [](const std::string& f, const std::string& g, int n) {
            return fn::residual_gram(fn_of("f", f), fn_of("g", g), fn::GridSpec(n));
        },
        "f"_a, "g"_a, "n"_a, "<f,g> - <P_n f, P_n g> for the n-cell projection P_n");

    m.def("run", &run_command, "command"_a, "config"_a, "format"_a = "",
          "run one analysis command (constant, optimal-mse, scheme-mse, counterexample, "
          "convergence) on a JSON config string; returns the report as json or csv text");
}
