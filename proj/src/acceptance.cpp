#include "wicksde/acceptance.hpp"

#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <functional>

#include "wicksde/schemes.hpp"

namespace wicksde::acc {

namespace {

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    return buf;
}

fn::Func1D fexpr(const char* text) {
    return fn::Func1D::from_expr(expr::Expr::parse(text));
}

sol::SdeProblem make_problem(const char* a, const char* sigma, const char* f,
                             const char* functional, int truncation = 40) {
    return sol::SdeProblem::make(fexpr(a), fexpr(sigma), fexpr(f),
                                 func::FunctionalSpec::by_name(functional, truncation));
}

// C1: the interpolation-residual covariance integrals equal delta^3/12 on the
// diagonal and vanish off it.
CriterionResult c1() {
    double worst = 0.0;
    for (int n : {1, 2, 4, 8}) {
        fn::GridSpec g(n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                const double expect = i == j ? 1.0 / (12.0 * n * n * n) : 0.0;
                worst = std::max(worst, std::abs(fn::bridge_integral(g, i, j) - expect));
            }
    }
    return {1, "interpolation residual covariance", worst <= 1e-14,
            fmt("max |integral - closed form| = %.3g (tol 1e-14)", worst)};
}

// C2: n^2 <f - Pf, g - Pg> -> <f',g'>/12 for f = s^2, g = e^s, with the
// deviation inside the total-variation envelope at every doubling step.
CriterionResult c2() {
    const fn::Func1D f = fexpr("s^2"), g = fexpr("exp(s)");
    const fn::Func1D fp = f.derivative_func(), gp = g.derivative_func();
    const double limit = fn::inner(fp, gp) / 12.0;  // = 1/6
    const auto tf = fn::tv_and_sup(fp), tg = fn::tv_and_sup(gp);
    const double envelope = (tf.tv * tg.sup + tg.tv * tf.sup) / 3.0;
    bool pass = std::abs(limit - 1.0 / 6.0) < 1e-10;
    double last_dev = 0.0;
    for (int n = 4; n <= 256; n *= 2) {
        const double r = fn::residual_gram(f, g, fn::GridSpec(n));
        last_dev = std::abs(n * static_cast<double>(n) * r - limit);
        if (last_dev > envelope / n) pass = false;
    }
    return {2, "projection residual rate", pass,
            fmt("limit %.6g, deviation at n=256 is %.3g (envelope %.3g)", limit,
                last_dev, envelope / 256.0)};
}

// Pairing-sum oracle for E[prod_i h^{a_i}(Z)], Z ~ N(0, v): every Hermite leg
// must contract with a leg of a different factor.
double pairing_expectation(std::vector<int>& legs, double v) {
    int i = -1;
    for (std::size_t t = 0; t < legs.size(); ++t)
        if (legs[t] > 0) {
            i = static_cast<int>(t);
            break;
        }
    if (i < 0) return 1.0;
    legs[i]--;
    double total = 0.0;
    for (std::size_t j = 0; j < legs.size(); ++j) {
        if (static_cast<int>(j) == i || legs[j] == 0) continue;
        legs[j]--;
        total += (legs[j] + 1) * v * pairing_expectation(legs, v);
        legs[j]++;
    }
    legs[i]++;
    return total;
}

// C3: expectations of ordinary products of Wick monomials against the
// independent pairing-sum count, 200 random cases.
CriterionResult c3() {
    law::CounterRng rng(2026, 3);
    const double v = 0.37;
    const chaos::Caps caps{32, 0.0};
    double worst = 0.0;
    for (int t = 0; t < 200; ++t) {
        const int nv = 1 + static_cast<int>(rng.uniform() * 3.0);
        const int k = 2 + static_cast<int>(rng.uniform() * 3.0);
        std::vector<std::vector<int>> alphas(k, std::vector<int>(nv));
        for (auto& a : alphas)
            for (int& d : a) d = static_cast<int>(rng.uniform() * 3.0);

        chaos::ChaosPoly prod = chaos::ChaosPoly::constant(nv, v, 1.0);
        for (const auto& a : alphas) {
            chaos::ChaosPoly mono(nv, v);
            mono.set_coeff(a, 1.0);
            prod = chaos::ordinary_mul(prod, mono, caps);
        }
        double oracle = 1.0;
        for (int var = 0; var < nv; ++var) {
            std::vector<int> legs(k);
            for (int i = 0; i < k; ++i) legs[i] = alphas[i][var];
            oracle *= pairing_expectation(legs, v);
        }
        const double dev =
            std::abs(prod.expectation() - oracle) / std::max(1.0, std::abs(oracle));
        worst = std::max(worst, dev);
    }
    return {3, "moment pairing identity", worst <= 1e-12,
            fmt("200 random products, max relative deviation %.3g (tol 1e-12)", worst)};
}

// C4: quadrature rate constant against its closed form for the Wick
// exponential, with and without drift/noise.
CriterionResult c4() {
    const char* cases[][3] = {
        {"s^2", "0", "1-s"},
        {"0", "s*(1-s)", "1-s"},
        {"s^2", "s*(1-s)", "1-s"},
    };
    double worst = 0.0;
    for (const auto& cs : cases) {
        const sol::SdeProblem p = make_problem(cs[0], cs[1], cs[2], "wick_exp");
        const double num = sol::optimal_constant(p);
        const double closed = sol::closed_form_constant(p);
        worst = std::max(worst, std::abs(num / closed - 1.0));
    }
    return {4, "rate constant closed-form agreement", worst <= 1e-8,
            fmt("3 configurations, max relative deviation %.3g (tol 1e-8)", worst)};
}

// C5: n^2 * conditional-expectation MSE increases to the squared rate
// constant; within 1% at n = 512.
CriterionResult c5() {
    const sol::SdeProblem p = make_problem("s^2", "s*(1-s)", "1-s", "wick_exp");
    const double c2 = std::pow(sol::optimal_constant(p), 2);
    double prev = -1.0, final_ratio = 0.0;
    bool monotone = true;
    for (int n : {8, 32, 128, 512}) {
        const double mse = sol::mse_optimal(p, fn::GridSpec(n), sol::Mode::deterministic).mse;
        const double a = n * static_cast<double>(n) * mse;
        if (a <= prev) monotone = false;
        prev = a;
        final_ratio = a / c2;
    }
    const bool pass = monotone && std::abs(final_ratio - 1.0) <= 0.01;
    return {5, "conditional-expectation MSE limit", pass,
            fmt("n^2 MSE / C^2 = %.6f at n=512 (tol 1%%), monotone=%d", final_ratio,
                monotone)};
}

// C6: ordinary-exponential functional: deterministic and Monte Carlo MSE agree
// within 4 standard errors, and the Richardson limit of n^2 MSE matches the
// quadrature constant within 5%. The catalogued external reference value for
// 12 * limit is printed alongside.
CriterionResult c6() {
    const sol::SdeProblem p = make_problem("s^2", "s*(1-s)", "1-s", "exp");
    const double c2 = std::pow(sol::optimal_constant(p), 2);
    sol::McConfig mc;
    mc.samples = 200000;
    mc.seed = 11;
    bool agree = true;
    double a8 = 0.0, a32 = 0.0;
    for (int n : {8, 32}) {
        const double det = sol::mse_optimal(p, fn::GridSpec(n), sol::Mode::deterministic).mse;
        const auto m = sol::mse_optimal(p, fn::GridSpec(n), sol::Mode::mc, mc);
        if (std::abs(det - m.mse) > 4.0 * m.se) agree = false;
        (n == 8 ? a8 : a32) = n * static_cast<double>(n) * det;
    }
    const double extrap = (16.0 * a32 - a8) / 15.0;
    const double reference = (std::exp(1.0 / 6.0) + std::exp(0.5)) * std::exp(8.0 / 15.0);
    const bool pass = agree && std::abs(extrap / c2 - 1.0) <= 0.05;
    return {6, "two MSE estimators agree (exp functional)", pass,
            fmt("12*C^2 = %.4f, 12*extrapolated limit = %.4f, external reference "
                "%.4f; det-vs-MC within 4 SE: %d",
                12.0 * c2, 12.0 * extrap, reference, agree)};
}

// C7: truncated-series initial value converges at rate n with the predicted
// constant e^{1/3}/12 for f(s) = s and the Wick exponential.
CriterionResult c7() {
    const sol::SdeProblem p = make_problem("0", "0", "s", "wick_exp");
    const double target = std::exp(1.0 / 3.0) / 12.0;
    sol::McConfig mc;
    mc.samples = 200000;
    mc.seed = 5;
    const double m16 = sch::initial_mse_mc(p, fn::GridSpec(16), -1, mc).mse;
    const double m64 = sch::initial_mse_mc(p, fn::GridSpec(64), -1, mc).mse;
    const double a64 = 64.0 * 64.0 * m64;
    const double ratio = m16 / m64;
    const bool pass = std::abs(a64 / target - 1.0) <= 0.10 && ratio >= 12.8 &&
                      ratio <= 19.2;
    return {7, "initial-value truncation rate", pass,
            fmt("n^2 MSE = %.5f at n=64 (target %.5f, tol 10%%), MSE ratio 16->64 = "
                "%.2f (expect ~16)",
                a64, target, ratio)};
}

// C8: step recursion and product-form assembly of the corrected scheme give
// identical coefficients when nothing is truncated.
CriterionResult c8() {
    const chaos::Caps caps{40, 0.0};
    double worst = 0.0;
    for (int n : {2, 4, 8}) {
        const sol::SdeProblem p = make_problem("s^2", "s*(1-s)", "1-s", "wick_exp");
        const fn::GridSpec g(n);
        const auto a = sch::wick_wp(p, g, caps).terminal;
        const auto b = sch::wick_wp_product_form(p, g, caps).terminal;
        const auto& ta = a.terms();
        const auto& tb = b.terms();
        std::size_t i = 0, j = 0;
        while (i < ta.size() || j < tb.size()) {
            if (j == tb.size() || (i < ta.size() && ta[i].key < tb[j].key)) {
                worst = std::max(worst, std::abs(ta[i++].coeff));
            } else if (i == ta.size() || tb[j].key < ta[i].key) {
                worst = std::max(worst, std::abs(tb[j++].coeff));
            } else {
                worst = std::max(worst, std::abs(ta[i].coeff - tb[j].coeff));
                ++i;
                ++j;
            }
        }
    }
    return {8, "scheme assembly equivalence", worst <= 1e-10,
            fmt("n in {2,4,8}, max coefficient difference %.3g (tol 1e-10)", worst)};
}

// C9: the corrected scheme tracks the optimal rate: n * rmse near the rate
// constant at n=16, halving between n=8 and n=16, and strictly better than the
// first-order iteration.
CriterionResult c9() {
    const sol::SdeProblem p = make_problem("s^2", "s*(1-s)", "1-s", "wick_exp");
    const chaos::Caps caps{8, 1e-16};
    const double c = sol::optimal_constant(p);
    double r8 = 0.0, r16 = 0.0;
    for (int n : {4, 8, 16}) {
        const double mse =
            sch::mse_scheme(p, fn::GridSpec(n), sch::SchemeKind::wick_wp,
                            sol::Mode::deterministic, caps)
                .mse;
        if (n == 8) r8 = std::sqrt(mse);
        if (n == 16) r16 = std::sqrt(mse);
    }
    const double euler16 =
        sch::mse_scheme(p, fn::GridSpec(16), sch::SchemeKind::wick_euler,
                        sol::Mode::deterministic, caps)
            .mse;
    const double nr = 16.0 * r16 / c;
    const double halving = r8 / r16;
    const bool pass = std::abs(nr - 1.0) <= 0.15 && halving >= 1.7 && halving <= 2.3 &&
                      euler16 > 1.05 * r16 * r16;
    return {9, "corrected scheme near-optimality", pass,
            fmt("16*rmse/C = %.3f (tol 15%%), rmse(8)/rmse(16) = %.2f, first-order "
                "MSE / corrected MSE at n=16 = %.2f",
                nr, halving, euler16 / (r16 * r16))};
}

// C10: ordinary-product iteration: its mean converges to e^{1/2} (not the true
// mean 1) and its MSE stays bounded away from zero.
CriterionResult c10() {
    const sol::SdeProblem p = make_problem("0", "1", "1-s", "wick_exp");
    const double mean256 = sch::milstein_mean(p, fn::GridSpec(256));
    const double wrong_limit = std::exp(0.5);
    sol::McConfig mc;
    mc.samples = 200000;
    mc.seed = 17;
    bool mse_floor = true;
    double min_mse = 1e300;
    for (int n : {4, 8, 16}) {
        const auto res = sch::milstein_mse_mc(p, fn::GridSpec(n), mc);
        min_mse = std::min(min_mse, res.mse - 4.0 * res.se);
        if (res.mse - 4.0 * res.se < 0.05) mse_floor = false;
    }
    const bool pass = std::abs(mean256 / wrong_limit - 1.0) <= 0.01 && mse_floor;
    return {10, "ordinary-product counterexample", pass,
            fmt("mean at n=256 = %.5f vs e^(1/2) = %.5f (true mean 1), min MSE over "
                "n in {4,8,16} = %.3f (floor 0.05)",
                mean256, wrong_limit, min_mse)};
}

// C11: discontinuous integrand 1_{[0,sqrt(2)/2)}: the projection residual is
// exactly theta(1-theta)/n and stays within the generic 2/n bound.
CriterionResult c11() {
    const double r = std::sqrt(2.0) / 2.0;
    const fn::Func1D f = fn::Func1D::indicator(r);
    double worst = 0.0;
    bool bound = true;
    for (int n : {3, 4, 5, 7, 8, 16, 33, 64}) {
        const double theta = n * r - std::floor(n * r);
        const double expect = theta * (1.0 - theta) / n;
        const double rg = fn::residual_gram(f, f, fn::GridSpec(n));
        worst = std::max(worst, std::abs(rg - expect));
        if (rg > 2.0 / n) bound = false;
    }
    return {11, "irregular integrand projection", worst <= 1e-12 && bound,
            fmt("max |residual - theta(1-theta)/n| = %.3g (tol 1e-12), 2/n bound "
                "held: %d",
                worst, bound)};
}

// C12: the pathwise conditional terminal (shifted-series form) equals the
// explicit chaos Wick product of the projected factors.
CriterionResult c12() {
    const chaos::Caps caps{36, 0.0};
    double worst = 0.0;
    for (int n : {3, 4}) {
        const sol::SdeProblem p = make_problem("s^2", "s*(1-s)", "1-s", "wick_exp", 18);
        const fn::GridSpec g(n);
        const sol::OptimalData od = sol::optimal_data(p, g);
        const double dt = g.delta();

        chaos::ChaosPoly a =
            func::apply_to_chaos(p.F, od.pf.values, dt, caps, p.F.order());
        chaos::ChaosPoly b =
            chaos::wick_exp(chaos::ChaosPoly::linear(od.psigma.values, dt), caps);
        chaos::ChaosPoly t = chaos::wick_mul(a, b, caps);
        t = chaos::wick_mul(
            t, chaos::ChaosPoly::constant(n, dt, std::exp(p.int_a)), caps);

        law::CounterRng rng(99, n);
        const int maxdeg = t.max_degree();
        for (int d = 0; d < 50; ++d) {
            const auto incr = law::sample_increments(g, rng);
            const auto table = chaos::hermite_table(incr, dt, maxdeg);
            const double chaos_val = chaos::eval_with_table(t, table);
            const double scalar_val = sol::optimal_terminal(p, od, incr);
            worst = std::max(worst, std::abs(chaos_val - scalar_val) /
                                        std::max(1.0, std::abs(scalar_val)));
        }
    }
    return {12, "pathwise conditional-terminal identity", worst <= 1e-10,
            fmt("n in {3,4}, 50 draws each, max relative deviation %.3g (tol 1e-10)",
                worst)};
}

}  // namespace

std::vector<CriterionResult> run_all() {
    const std::function<CriterionResult()> checks[] = {c1, c2, c3, c4, c5, c6,
                                                       c7, c8, c9, c10, c11, c12};
    std::vector<CriterionResult> out;
    int id = 1;
    for (const auto& check : checks) {
        try {
            out.push_back(check());
        } catch (const std::exception& e) {
            out.push_back({id, "criterion threw", false, std::string("exception: ") + e.what()});
        }
        out.back().id = id++;
    }
    return out;
}

int run_and_print() {
    int failures = 0;
    for (const auto& r : run_all()) {
        std::printf("[%s] C%d %s: %s\n", r.pass ? "PASS" : "FAIL", r.id, r.title.c_str(),
                    r.detail.c_str());
        if (!r.pass) ++failures;
    }
    if (failures == 0)
        std::printf("all %d criteria passed\n", 12);
    else
        std::printf("%d criteria FAILED\n", failures);
    return failures;
}

}  // namespace wicksde::acc
