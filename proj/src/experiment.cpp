#include "wicksde/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace wicksde::expt {

using ojson = nlohmann::ordered_json;

namespace {

void check_keys(const nlohmann::json& j, const char* where,
                std::initializer_list<const char*> allowed) {
    for (const auto& item : j.items()) {
        bool ok = false;
        for (const char* k : allowed)
            if (item.key() == k) ok = true;
        if (!ok)
            throw ConfigError(std::string("config: unknown key '") + item.key() + "' in " +
                              where);
    }
}

fn::Func1D parse_fn(const char* key, const std::string& text) {
    try {
        return fn::Func1D::from_expr(expr::Expr::parse(text));
    } catch (const ConfigError& e) {
        throw ConfigError(std::string("config: problem.") + key + ": " + e.what());
    }
}

ExperimentConfig parse_config(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("config: top level must be a JSON object");
    check_keys(j, "the top level",
               {"problem", "functional", "grids", "mode", "mc", "caps", "scheme",
                "reference_n2mse", "output"});

    ExperimentConfig c;

    const auto& pj = j.at("problem");
    check_keys(pj, "problem", {"a", "sigma", "f"});
    c.a_str = pj.at("a").get<std::string>();
    c.sigma_str = pj.at("sigma").get<std::string>();
    c.f_str = pj.at("f").get<std::string>();
    c.a = parse_fn("a", c.a_str);
    c.sigma = parse_fn("sigma", c.sigma_str);
    c.f = parse_fn("f", c.f_str);

    c.functional_name = "wick_exp";
    int truncation = 40;
    if (j.contains("functional")) {
        const auto& fj = j.at("functional");
        check_keys(fj, "functional", {"name", "coefficients", "truncation"});
        c.functional_name = fj.value("name", "wick_exp");
        truncation = fj.value("truncation", 40);
        if (truncation < 1 || truncation > 160)
            throw ConfigError("config: functional.truncation must be in [1, 160]");
        c.functional = func::FunctionalSpec::by_name(c.functional_name, truncation);
        if (c.functional.name == func::FunctionalSpec::Name::polynomial) {
            if (!fj.contains("coefficients"))
                throw ConfigError("config: functional 'polynomial' needs coefficients");
            c.functional.monomial = fj.at("coefficients").get<std::vector<double>>();
            if (c.functional.monomial.empty())
                throw ConfigError("config: functional.coefficients must be non-empty");
        } else if (fj.contains("coefficients")) {
            throw ConfigError(
                "config: functional.coefficients only applies to 'polynomial'");
        }
    } else {
        c.functional = func::FunctionalSpec::by_name("wick_exp", truncation);
    }

    c.grids = j.at("grids").get<std::vector<int>>();
    if (c.grids.empty()) throw ConfigError("config: grids must be non-empty");
    for (int n : c.grids)
        if (n < 1) throw ConfigError("config: grid sizes must be >= 1");

    const std::string mode = j.value("mode", "deterministic");
    if (mode == "deterministic")
        c.mode = sol::Mode::deterministic;
    else if (mode == "mc")
        c.mode = sol::Mode::mc;
    else
        throw ConfigError("config: mode must be 'deterministic' or 'mc'");

    if (j.contains("mc")) {
        const auto& mj = j.at("mc");
        check_keys(mj, "mc", {"samples", "master_seed", "streams", "sequential"});
        c.mc.samples = mj.value("samples", std::uint64_t{200000});
        c.mc.seed = mj.value("master_seed", std::uint64_t{1});
        c.mc.streams = mj.value("streams", 8);
        c.mc.sequential = mj.value("sequential", false);
        if (c.mc.samples < 1) throw ConfigError("config: mc.samples must be >= 1");
        if (c.mc.streams < 1) throw ConfigError("config: mc.streams must be >= 1");
    }

    if (j.contains("caps")) {
        const auto& cj = j.at("caps");
        check_keys(cj, "caps", {"degree", "prune_threshold"});
        c.caps.degree = cj.value("degree", 12);
        c.caps.prune_threshold = cj.value("prune_threshold", 1e-16);
        if (c.caps.degree < 1 || c.caps.degree > 255)
            throw ConfigError("config: caps.degree must be in [1, 255]");
        if (!(c.caps.prune_threshold >= 0.0) || c.caps.prune_threshold >= 1.0)
            throw ConfigError("config: caps.prune_threshold must be in [0, 1)");
    }

    c.scheme_name = j.value("scheme", "wick_wp");
    if (c.scheme_name != "optimal") sch::scheme_by_name(c.scheme_name);

    if (j.contains("reference_n2mse"))
        c.reference_n2mse = j.at("reference_n2mse").get<double>();

    if (j.contains("output")) {
        const auto& oj = j.at("output");
        check_keys(oj, "output", {"path", "format"});
        c.out_path = oj.value("path", "");
        c.format = oj.value("format", "json");
        if (c.format != "json" && c.format != "csv")
            throw ConfigError("config: output.format must be 'json' or 'csv'");
    }
    return c;
}

ojson config_echo(const ExperimentConfig& c) {
    ojson e;
    e["problem"] = {{"a", c.a_str}, {"sigma", c.sigma_str}, {"f", c.f_str}};
    e["functional"] = {{"name", c.functional_name},
                       {"truncation", c.functional.truncation}};
    if (c.functional.name == func::FunctionalSpec::Name::polynomial)
        e["functional"]["coefficients"] = c.functional.monomial;
    e["grids"] = c.grids;
    e["mode"] = c.mode == sol::Mode::deterministic ? "deterministic" : "mc";
    if (c.mode == sol::Mode::mc)
        e["mc"] = {{"samples", c.mc.samples},
                   {"master_seed", c.mc.seed},
                   {"streams", c.mc.streams},
                   {"sequential", c.mc.sequential}};
    e["caps"] = {{"degree", c.caps.degree},
                 {"prune_threshold", c.caps.prune_threshold}};
    e["scheme"] = c.scheme_name;
    if (c.reference_n2mse) e["reference_n2mse"] = *c.reference_n2mse;
    return e;
}

Report base_report(const char* command, const ExperimentConfig& cfg) {
    Report r;
    r.command = command;
    r.config_echo_json = config_echo(cfg).dump();
    return r;
}

void add_meta(Report& r, const std::string& key, const ojson& value) {
    r.meta.emplace_back(key, value.dump());
}

GridRow make_row(int n, const sol::MseResult& res, double dropped) {
    GridRow row;
    row.n = n;
    row.mse = res.mse;
    row.rmse = std::sqrt(std::max(res.mse, 0.0));
    row.n_rmse = n * row.rmse;
    row.se = res.se;
    row.dropped_mass = dropped;
    return row;
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    try {
        return parse_config(j);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_json_text(buf.str());
}

sol::SdeProblem ExperimentConfig::problem() const {
    return sol::SdeProblem::make(a, sigma, f, functional);
}

std::string Report::to_json() const {
    ojson doc;
    doc["command"] = command;
    doc["config"] = ojson::parse(config_echo_json);
    ojson m = ojson::object();
    for (const auto& [k, v] : meta) m[k] = ojson::parse(v);
    doc["meta"] = m;
    ojson rws = ojson::array();
    for (const GridRow& row : rows)
        rws.push_back(ojson{{"n", row.n},
                            {"mse", row.mse},
                            {"rmse", row.rmse},
                            {"n_rmse", row.n_rmse},
                            {"stderr", row.se},
                            {"dropped_mass", row.dropped_mass}});
    doc["rows"] = rws;
    return doc.dump(2) + "\n";
}

std::string Report::to_csv() const {
    std::string out = "n,mse,rmse,n_rmse,stderr,dropped_mass\n";
    char line[256];
    for (const GridRow& row : rows) {
        std::snprintf(line, sizeof line, "%d,%.17g,%.17g,%.17g,%.17g,%.17g\n", row.n,
                      row.mse, row.rmse, row.n_rmse, row.se, row.dropped_mass);
        out += line;
    }
    return out;
}

void Report::write(const std::string& path, const std::string& format) const {
    const std::string text = format == "csv" ? to_csv() : to_json();
    if (path.empty() || path == "-") {
        std::fputs(text.c_str(), stdout);
        return;
    }
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open output file '" + path + "'");
    out << text;
    if (!out) throw ConfigError("failed writing output file '" + path + "'");
}

std::optional<double> fit_rate(const std::vector<GridRow>& rows) {
    std::vector<double> xs, ys;
    for (const GridRow& r : rows)
        if (r.rmse > 0.0 && std::isfinite(r.rmse)) {
            xs.push_back(std::log(static_cast<double>(r.n)));
            ys.push_back(std::log(r.rmse));
        }
    if (xs.size() < 2) return std::nullopt;
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= xs.size();
    my /= ys.size();
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxy += (xs[i] - mx) * (ys[i] - my);
        sxx += (xs[i] - mx) * (xs[i] - mx);
    }
    if (sxx == 0.0) return std::nullopt;
    return -sxy / sxx;
}

Report run_constant(const ExperimentConfig& cfg) {
    Report r = base_report("constant", cfg);
    const sol::SdeProblem p = cfg.problem();
    const double c = sol::optimal_constant(p);
    add_meta(r, "constant", c);
    add_meta(r, "constant_squared", c * c);
    if (p.F.tag == func::WickSeries::Tag::wick_exp)
        add_meta(r, "constant_closed_form", sol::closed_form_constant(p));
    if (cfg.reference_n2mse) add_meta(r, "reference_n2mse", *cfg.reference_n2mse);
    return r;
}

Report run_optimal_mse(const ExperimentConfig& cfg) {
    Report r = base_report("optimal-mse", cfg);
    const sol::SdeProblem p = cfg.problem();
    const double c = sol::optimal_constant(p);
    add_meta(r, "constant", c);
    add_meta(r, "n_rmse_limit", c);
    if (cfg.reference_n2mse) add_meta(r, "reference_n2mse", *cfg.reference_n2mse);
    for (int n : cfg.grids)
        r.rows.push_back(
            make_row(n, sol::mse_optimal(p, fn::GridSpec(n), cfg.mode, cfg.mc), 0.0));
    return r;
}

Report run_scheme_mse(const ExperimentConfig& cfg) {
    Report r = base_report("scheme-mse", cfg);
    const sch::SchemeKind kind = sch::scheme_by_name(cfg.scheme_name);
    const sol::SdeProblem p = cfg.problem();
    add_meta(r, "scheme", cfg.scheme_name);
    add_meta(r, "constant", sol::optimal_constant(p));
    if (cfg.reference_n2mse) add_meta(r, "reference_n2mse", *cfg.reference_n2mse);
    ojson fallback = ojson::array();
    for (int n : cfg.grids) {
        const sch::SchemeMse res =
            sch::mse_scheme(p, fn::GridSpec(n), kind, cfg.mode, cfg.caps, cfg.mc);
        r.rows.push_back(make_row(n, {res.mse, res.se}, res.dropped_mass));
        if (res.mc_fallback) fallback.push_back(n);
    }
    if (!fallback.empty()) add_meta(r, "mc_fallback_grids", fallback);
    return r;
}

Report run_counterexample(const ExperimentConfig& cfg) {
    Report r = base_report("counterexample", cfg);
    const sol::SdeProblem p = cfg.problem();
    if (p.F.tag != func::WickSeries::Tag::wick_exp)
        throw ConfigError(
            "counterexample: the mean comparison is defined for the wick_exp "
            "functional");

    add_meta(r, "true_mean", std::exp(p.int_a) * p.F.c[0]);
    add_meta(r, "scheme_mean_limit",
             std::exp(fn::inner(p.f, fn::Func1D::constant(1.0))));

    std::set<int> mean_grids(cfg.grids.begin(), cfg.grids.end());
    mean_grids.insert({32, 64, 128, 256});
    ojson means = ojson::array();
    for (int n : mean_grids)
        means.push_back(
            ojson{{"n", n}, {"mean", sch::milstein_mean(p, fn::GridSpec(n))}});
    add_meta(r, "scheme_means", means);

    for (int n : cfg.grids) {
        if (n > 16 && cfg.mode == sol::Mode::deterministic)
            throw ConfigError(
                "counterexample: deterministic MSE rows need n <= 16; use mc mode "
                "for larger grids");
        const sch::SchemeMse res = sch::mse_scheme(p, fn::GridSpec(n),
                                                   sch::SchemeKind::milstein, cfg.mode,
                                                   cfg.caps, cfg.mc);
        r.rows.push_back(make_row(n, {res.mse, res.se}, res.dropped_mass));
    }
    return r;
}

Report run_convergence(const ExperimentConfig& cfg) {
    Report r = base_report("convergence", cfg);
    if (cfg.grids.size() < 3)
        throw ConfigError("convergence needs at least 3 grid sizes");
    const sol::SdeProblem p = cfg.problem();
    add_meta(r, "scheme", cfg.scheme_name);
    add_meta(r, "constant", sol::optimal_constant(p));
    if (cfg.reference_n2mse) add_meta(r, "reference_n2mse", *cfg.reference_n2mse);

    if (cfg.scheme_name == "optimal") {
        for (int n : cfg.grids)
            r.rows.push_back(
                make_row(n, sol::mse_optimal(p, fn::GridSpec(n), cfg.mode, cfg.mc), 0.0));
    } else {
        const sch::SchemeKind kind = sch::scheme_by_name(cfg.scheme_name);
        for (int n : cfg.grids) {
            const sch::SchemeMse res =
                sch::mse_scheme(p, fn::GridSpec(n), kind, cfg.mode, cfg.caps, cfg.mc);
            r.rows.push_back(make_row(n, {res.mse, res.se}, res.dropped_mass));
        }
    }
    if (auto rate = fit_rate(r.rows))
        add_meta(r, "rate", *rate);
    else
        add_meta(r, "rate", nullptr);
    return r;
}

}  // namespace wicksde::expt
