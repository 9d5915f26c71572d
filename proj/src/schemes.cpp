#include "wicksde/schemes.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace wicksde::sch {

namespace {

struct CellCoeffs {
    std::vector<double> a, s;    // samples at the left endpoints
    std::vector<double> ap, sp;  // derivatives there (when requested)
};

CellCoeffs sample_cells(const sol::SdeProblem& p, fn::GridSpec grid, bool need_deriv) {
    CellCoeffs c;
    c.a.resize(grid.n);
    c.s.resize(grid.n);
    if (need_deriv) {
        c.ap.resize(grid.n);
        c.sp.resize(grid.n);
    }
    for (int k = 0; k < grid.n; ++k) {
        const double t = grid.left(k);
        c.a[k] = p.a(t);
        c.s[k] = p.sigma(t);
        if (need_deriv) {
            c.ap[k] = p.a.deriv(t);
            c.sp[k] = p.sigma.deriv(t);
        }
    }
    return c;
}

// Polynomial cd[0] + cd[1] h^1(Z_k) + cd[2] h^2(Z_k) + ... in the single grid
// variable k.
chaos::ChaosPoly cell_poly(int nvars, double var_step, int k, std::span<const double> cd) {
    chaos::ChaosPoly out(nvars, var_step);
    std::vector<int> alpha(nvars, 0);
    std::vector<chaos::ChaosPoly::Term> terms;
    for (int d = 0; d < static_cast<int>(cd.size()); ++d) {
        if (cd[d] == 0.0) continue;
        alpha[k] = d;
        terms.push_back({out.encode(alpha), cd[d]});
    }
    out.assign(std::move(terms), chaos::Caps{out.max_bits_degree(), 0.0});
    return out;
}

chaos::ChaosPoly add(const chaos::ChaosPoly& a, const chaos::ChaosPoly& b) {
    chaos::ChaosPoly out(a.nvars(), a.var_step(), a.bits_per_var());
    std::vector<chaos::ChaosPoly::Term> terms;
    terms.reserve(a.term_count() + b.term_count());
    const auto& ta = a.terms();
    const auto& tb = b.terms();
    std::size_t i = 0, j = 0;
    while (i < ta.size() || j < tb.size()) {
        if (j == tb.size() || (i < ta.size() && ta[i].key < tb[j].key)) {
            terms.push_back(ta[i++]);
        } else if (i == ta.size() || tb[j].key < ta[i].key) {
            terms.push_back(tb[j++]);
        } else {
            terms.push_back({ta[i].key, ta[i].coeff + tb[j].coeff});
            ++i;
            ++j;
        }
    }
    out.assign(std::move(terms), chaos::Caps{out.max_bits_degree(), 0.0});
    out.add_dropped(a.dropped_mass() + b.dropped_mass());
    return out;
}

void finalize(SchemeOutput& out, double dropped_tol, const char* name) {
    out.diag.dropped_mass = out.terminal.dropped_mass();
    out.diag.max_degree = out.terminal.max_degree();
    out.diag.terms = out.terminal.term_count();
    const double scale = std::max(out.terminal.norm2(), 1e-300);
    if (out.diag.dropped_mass > dropped_tol * scale) {
        char buf[160];
        std::snprintf(buf, sizeof buf,
                      "%s: truncation discarded %.3e of squared norm %.3e; "
                      "raise caps.degree or lower prune_threshold",
                      name, out.diag.dropped_mass, scale);
        throw NumericError(buf);
    }
}

}  // namespace

chaos::ChaosPoly build_initial(const sol::SdeProblem& p, fn::GridSpec grid,
                               const chaos::Caps& caps, int level_cap) {
    const fn::StrongWeights sw = fn::strong_weights(p.f, grid);
    const int cap = level_cap < 0 ? std::min(grid.n, caps.degree) : level_cap;
    return func::apply_to_chaos(p.F, sw.w, grid.delta(), caps, cap);
}

SchemeOutput wick_wp(const sol::SdeProblem& p, fn::GridSpec grid, const chaos::Caps& caps,
                     bool keep_steps, double dropped_tol) {
    const int n = grid.n;
    const double dt = grid.delta();
    const CellCoeffs cc = sample_cells(p, grid, true);

    std::vector<chaos::ChaosPoly> xs;
    xs.reserve(n + 1);
    xs.push_back(build_initial(p, grid, caps));
    for (int k = 0; k < n; ++k) {
        const double cd[4] = {
            1.0 + cc.a[k] * dt + 0.5 * (cc.ap[k] + cc.a[k] * cc.a[k]) * dt * dt,
            cc.s[k] + (cc.sp[k] + cc.a[k] * cc.s[k]) * dt,
            0.5 * cc.s[k] * cc.s[k],
            cc.s[k] * cc.s[k] * cc.s[k] / 6.0,
        };
        xs.push_back(chaos::wick_mul(xs.back(), cell_poly(n, dt, k, cd), caps));
    }

    // Correction -1/2 sum_l sigma'_l dt * x_l wick* dW_l wick* chain_l with the
    // first-order chain prod_{i>l} (1 + a_i dt + sigma_i dW_i); the chain is an
    // ordinary product of factors in disjoint variables, built backwards.
    chaos::ChaosPoly total = xs[n];
    chaos::ChaosPoly chain = chaos::ChaosPoly::constant(n, dt, 1.0);
    for (int l = n - 1; l >= 0; --l) {
        if (l < n - 1) {
            const int i = l + 1;
            const double cd[2] = {1.0 + cc.a[i] * dt, cc.s[i]};
            chain = chaos::ordinary_mul(chain, cell_poly(n, dt, i, cd), caps);
        }
        if (cc.sp[l] == 0.0) continue;
        const double lin[2] = {0.0, -0.5 * cc.sp[l] * dt};
        chaos::ChaosPoly term = chaos::wick_mul(xs[l], cell_poly(n, dt, l, lin), caps);
        total = add(total, chaos::wick_mul(term, chain, caps));
    }

    SchemeOutput out;
    out.terminal = std::move(total);
    if (keep_steps) out.steps = std::move(xs);
    finalize(out, dropped_tol, "wick_wp");
    return out;
}

SchemeOutput wick_wp_product_form(const sol::SdeProblem& p, fn::GridSpec grid,
                                  const chaos::Caps& caps, double dropped_tol) {
    const int n = grid.n;
    const double dt = grid.delta();
    const CellCoeffs cc = sample_cells(p, grid, true);

    // prefix[l] = prod_{k<l} r_k, suffix[l] = prod_{k>l} (1 + a_k dt + sigma_k dW_k);
    // all factors sit in distinct variables, so ordinary products are exact
    // tensor products.
    std::vector<chaos::ChaosPoly> prefix;
    prefix.reserve(n + 1);
    prefix.push_back(chaos::ChaosPoly::constant(n, dt, 1.0));
    for (int k = 0; k < n; ++k) {
        const double cd[4] = {
            1.0 + cc.a[k] * dt + 0.5 * (cc.ap[k] + cc.a[k] * cc.a[k]) * dt * dt,
            cc.s[k] + (cc.sp[k] + cc.a[k] * cc.s[k]) * dt,
            0.5 * cc.s[k] * cc.s[k],
            cc.s[k] * cc.s[k] * cc.s[k] / 6.0,
        };
        prefix.push_back(chaos::ordinary_mul(prefix.back(), cell_poly(n, dt, k, cd), caps));
    }

    std::vector<chaos::ChaosPoly> suffix(n);
    suffix[n - 1] = chaos::ChaosPoly::constant(n, dt, 1.0);
    for (int l = n - 2; l >= 0; --l) {
        const int i = l + 1;
        const double cd[2] = {1.0 + cc.a[i] * dt, cc.s[i]};
        suffix[l] = chaos::ordinary_mul(suffix[l + 1], cell_poly(n, dt, i, cd), caps);
    }

    chaos::ChaosPoly env = prefix[n];
    for (int l = 0; l < n; ++l) {
        if (cc.sp[l] == 0.0) continue;
        const double lin[2] = {0.0, -0.5 * cc.sp[l] * dt};
        chaos::ChaosPoly term =
            chaos::ordinary_mul(prefix[l], cell_poly(n, dt, l, lin), caps);
        env = add(env, chaos::ordinary_mul(term, suffix[l], caps));
    }

    SchemeOutput out;
    out.terminal = chaos::wick_mul(build_initial(p, grid, caps), env, caps);
    finalize(out, dropped_tol, "wick_wp_product_form");
    return out;
}

SchemeOutput wick_euler(const sol::SdeProblem& p, fn::GridSpec grid,
                        const chaos::Caps& caps, double dropped_tol) {
    const int n = grid.n;
    const double dt = grid.delta();
    const CellCoeffs cc = sample_cells(p, grid, false);

    chaos::ChaosPoly x = build_initial(p, grid, caps);
    for (int k = 0; k < n; ++k) {
        const double cd[2] = {1.0 + cc.a[k] * dt, cc.s[k]};
        x = chaos::wick_mul(x, cell_poly(n, dt, k, cd), caps);
    }

    SchemeOutput out;
    out.terminal = std::move(x);
    finalize(out, dropped_tol, "wick_euler");
    return out;
}

namespace {

void check_milstein_preconditions(const sol::SdeProblem& p) {
    for (int i = 0; i <= 64; ++i) {
        const double t = i / 64.0;
        if (std::abs(p.a(t)) > 1e-12 || std::abs(p.sigma(t) - 1.0) > 1e-12)
            throw ConfigError(
                "milstein_ordinary: the ordinary-product comparison is defined for "
                "a == 0, sigma == 1");
    }
}

}  // namespace

SchemeOutput milstein_ordinary(const sol::SdeProblem& p, fn::GridSpec grid,
                               const chaos::Caps& caps, double dropped_tol) {
    check_milstein_preconditions(p);
    const int n = grid.n;
    const double dt = grid.delta();

    chaos::ChaosPoly x = build_initial(p, grid, caps);
    for (int k = 0; k < n; ++k) {
        // 1 + dW_k + (dW_k^2 - dt)/2
        const double cd[3] = {1.0, 1.0, 0.5};
        x = chaos::ordinary_mul(x, cell_poly(n, dt, k, cd), caps);
    }

    SchemeOutput out;
    out.terminal = std::move(x);
    finalize(out, dropped_tol, "milstein_ordinary");
    return out;
}

double milstein_mean(const sol::SdeProblem& p, fn::GridSpec grid) {
    if (p.F.tag != func::WickSeries::Tag::wick_exp)
        throw ConfigError(
            "milstein_mean: closed product form is specific to the Wick-exponential "
            "initial value");
    const fn::StrongWeights sw = fn::strong_weights(p.f, grid);
    const double dt = grid.delta();
    double mean = 1.0;
    for (double w : sw.w) mean *= 1.0 + w * dt + 0.5 * w * w * dt * dt;
    return mean;
}

sol::MseResult milstein_mse_mc(const sol::SdeProblem& p, fn::GridSpec grid,
                               const sol::McConfig& mc) {
    check_milstein_preconditions(p);
    const double dt = grid.delta();
    const fn::StrongWeights sw = fn::strong_weights(p.f, grid);
    const int cap = std::min(grid.n, p.F.order());
    func::WickSeries trunc = p.F;
    if (static_cast<int>(trunc.c.size()) > cap + 1) trunc.c.resize(cap + 1);
    trunc.tag = func::WickSeries::Tag::custom;
    trunc = trunc.with_variance(sw.norm2);

    law::JointSampler sampler({p.f, p.sigma}, grid);
    const auto stats = law::mc_run(
        mc.samples, mc.streams, mc.seed, mc.sequential, 1,
        [&](law::CounterRng& rng, double* out) {
            const auto d = sampler.draw(rng);
            double in = 0.0;
            for (std::size_t k = 0; k < sw.w.size(); ++k) in += sw.w[k] * d.increments[k];
            double y = trunc.eval(in);
            for (double dw : d.increments) y *= 1.0 + dw + 0.5 * (dw * dw - dt);
            const double err = sol::exact_terminal(p, d.exact[0], d.exact[1]) - y;
            out[0] = err * err;
        });
    return {stats[0].mean, stats[0].se};
}

SchemeKind scheme_by_name(const std::string& name) {
    if (name == "wick_wp") return SchemeKind::wick_wp;
    if (name == "wick_euler") return SchemeKind::wick_euler;
    if (name == "milstein") return SchemeKind::milstein;
    throw ConfigError("unknown scheme '" + name +
                      "' (expected wick_wp, wick_euler or milstein)");
}

SchemeMse mse_scheme(const sol::SdeProblem& p, fn::GridSpec grid, SchemeKind kind,
                     sol::Mode mode, const chaos::Caps& caps, const sol::McConfig& mc) {
    SchemeMse r;

    // The ordinary-product counterexample has an exact scalar sample path, so
    // its MC route never builds a chaos polynomial (and works for any n).
    if (kind == SchemeKind::milstein) {
        if (mode == sol::Mode::deterministic) {
            try {
                const SchemeOutput so = milstein_ordinary(p, grid, caps);
                r.dropped_mass = so.diag.dropped_mass;
                const double e2 = sol::terminal_second_moment(p);
                const double cross = sol::cross_moment(p, grid, so.terminal, 12);
                r.mse = std::max(0.0, e2 - 2.0 * cross + so.terminal.norm2());
                return r;
            } catch (const NumericError& e) {
                std::fprintf(stderr, "mse_scheme: %s; falling back to Monte Carlo\n",
                             e.what());
                r.mc_fallback = true;
                r.dropped_mass = 0.0;
            }
        }
        const sol::MseResult res = milstein_mse_mc(p, grid, mc);
        r.mse = res.mse;
        r.se = res.se;
        return r;
    }

    SchemeOutput so = kind == SchemeKind::wick_wp ? wick_wp(p, grid, caps)
                                                  : wick_euler(p, grid, caps);
    r.dropped_mass = so.diag.dropped_mass;
    if (mode == sol::Mode::deterministic) {
        try {
            const double e2 = sol::terminal_second_moment(p);
            const double cross = sol::cross_moment(p, grid, so.terminal, 12);
            const double t2 = so.terminal.norm2();
            r.mse = std::max(0.0, e2 - 2.0 * cross + t2);
            return r;
        } catch (const NumericError& e) {
            std::fprintf(stderr, "mse_scheme: %s; falling back to Monte Carlo\n",
                         e.what());
            r.mc_fallback = true;
        }
    }

    law::JointSampler sampler({p.f, p.sigma}, grid);
    const int maxdeg = so.terminal.max_degree();
    const auto stats = law::mc_run(
        mc.samples, mc.streams, mc.seed, mc.sequential, 1,
        [&](law::CounterRng& rng, double* out) {
            const auto d = sampler.draw(rng);
            const double exact = sol::exact_terminal(p, d.exact[0], d.exact[1]);
            const auto table = chaos::hermite_table(d.increments, grid.delta(), maxdeg);
            const double err = exact - chaos::eval_with_table(so.terminal, table);
            out[0] = err * err;
        });
    r.mse = stats[0].mean;
    r.se = stats[0].se;
    return r;
}

double initial_value_eval(const sol::SdeProblem& p, const fn::StrongWeights& sw,
                          int level_cap, std::span<const double> increments) {
    const int cap = level_cap < 0
                        ? std::min<int>(static_cast<int>(sw.w.size()), p.F.order())
                        : level_cap;
    func::WickSeries trunc = p.F;
    if (static_cast<int>(trunc.c.size()) > cap + 1) trunc.c.resize(cap + 1);
    trunc.tag = func::WickSeries::Tag::custom;
    trunc = trunc.with_variance(sw.norm2);
    double in = 0.0;
    for (std::size_t k = 0; k < sw.w.size(); ++k) in += sw.w[k] * increments[k];
    return trunc.eval(in);
}

sol::MseResult initial_mse_mc(const sol::SdeProblem& p, fn::GridSpec grid, int level_cap,
                              const sol::McConfig& mc) {
    const fn::StrongWeights sw = fn::strong_weights(p.f, grid);
    const int cap = level_cap < 0 ? std::min(grid.n, p.F.order()) : level_cap;
    func::WickSeries trunc = p.F;
    if (static_cast<int>(trunc.c.size()) > cap + 1) trunc.c.resize(cap + 1);
    trunc.tag = func::WickSeries::Tag::custom;
    trunc = trunc.with_variance(sw.norm2);

    law::JointSampler sampler({p.f}, grid);
    const auto stats = law::mc_run(
        mc.samples, mc.streams, mc.seed, mc.sequential, 1,
        [&](law::CounterRng& rng, double* out) {
            const auto d = sampler.draw(rng);
            double in = 0.0;
            for (std::size_t k = 0; k < sw.w.size(); ++k) in += sw.w[k] * d.increments[k];
            const double err = p.F.eval(d.exact[0]) - trunc.eval(in);
            out[0] = err * err;
        });
    return {stats[0].mean, stats[0].se};
}

}  // namespace wicksde::sch
