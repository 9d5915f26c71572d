#include "wicksde/solution.hpp"

#include <cmath>
#include <vector>

#include "doctest.h"

using namespace wicksde;
using namespace wicksde::sol;

namespace {

fn::Func1D fx(const char* src) { return fn::Func1D::from_expr(expr::Expr::parse(src)); }

SdeProblem example_problem() {
    // a = s^2, sigma = s(1-s), f = 1-s, Wick-exponential initial functional
    return SdeProblem::make(fx("s^2"), fx("s*(1-s)"), fx("1-s"),
                            func::FunctionalSpec::by_name("wick_exp"));
}

}  // namespace

TEST_CASE("problem assembly fills the gram scalars") {
    const SdeProblem p = example_problem();
    CHECK(p.int_a == doctest::Approx(1.0 / 3).epsilon(1e-12));
    CHECK(p.nf2 == doctest::Approx(1.0 / 3).epsilon(1e-12));
    CHECK(p.ns2 == doctest::Approx(1.0 / 30).epsilon(1e-12));
    CHECK(p.nfs == doctest::Approx(1.0 / 12).epsilon(1e-12));  // <1-s, s(1-s)>
    CHECK(p.F.variance == doctest::Approx(p.nf2));
}

TEST_CASE("pairing expectation of tilted products, scalar form") {
    // wick exponentials collapse to exp of the total pairing
    const func::WickSeries we_f = func::WickSeries::make_wick_exp(0.3, 60);
    const func::WickSeries we_g = func::WickSeries::make_wick_exp(0.4, 60);
    const double v =
        moment_oracle(we_f, we_g, 0.3, 0.4, 0.1, 0.2, 0.15, 0.25);
    CHECK(v == doctest::Approx(std::exp(0.7)).epsilon(1e-9));

    // identity functional against the constant: only the shift survives
    const func::WickSeries id = func::WickSeries::make_polynomial({0.0, 1.0}, 0.3);
    const func::WickSeries one = func::WickSeries::make_polynomial({1.0}, 0.4);
    const double w = moment_oracle(id, one, 0.3, 0.4, 0.1, 0.2, 0.15, 0.25);
    CHECK(w == doctest::Approx(0.2 * std::exp(0.25)).epsilon(1e-9));
}

TEST_CASE("pairing expectation, functional form matches the scalar form") {
    const func::WickSeries A = func::WickSeries::make_exp(1.0 / 3, 40);
    const func::WickSeries B = func::WickSeries::make_sin(1.0 / 3, 40);
    const double via_funcs = moment_oracle(A, fx("s"), B, fx("1-s"), fx("s^2"),
                                           fn::Func1D::constant(0.5));
    const double via_grams = moment_oracle(A, B, 1.0 / 3, 1.0 / 3, 1.0 / 6, 0.25,
                                           1.0 / 12, 1.0 / 6);
    CHECK(via_funcs == doctest::Approx(via_grams).epsilon(1e-9));
}

TEST_CASE("pathwise terminal value, identity functional") {
    func::FunctionalSpec spec;
    spec.name = func::FunctionalSpec::Name::polynomial;
    spec.monomial = {0.0, 1.0};
    const SdeProblem p = SdeProblem::make(fn::Func1D::constant(0.0),
                                          fn::Func1D::constant(0.5),
                                          fn::Func1D::constant(1.0), spec);
    // e^{i_sigma - |sigma|^2/2} (i_f - <f,sigma>)
    CHECK(exact_terminal(p, 0.7, -0.3) ==
          doctest::Approx(0.2 * std::exp(-0.425)).epsilon(1e-12));
    CHECK(exact_terminal(p, 0.5, 0.0) ==
          doctest::Approx(0.0).scale(1.0));  // zero at i_f = <f,sigma>
}

TEST_CASE("pathwise terminal value, wick exponential closed form") {
    const SdeProblem p = example_problem();
    const double h2 = 8.0 / 15;  // |f + sigma|^2 = |1 - s^2|^2
    for (const auto [i_f, i_s] : {std::pair{0.4, -0.2}, std::pair{-1.1, 0.6},
                                  std::pair{0.0, 0.0}}) {
        const double want = std::exp(1.0 / 3) * std::exp(i_f + i_s - h2 / 2);
        CHECK(exact_terminal(p, i_f, i_s) == doctest::Approx(want).epsilon(1e-9));
    }
}

TEST_CASE("second moment of the terminal value") {
    // wick exponential: e^{2 int a} e^{|f+sigma|^2}
    CHECK(terminal_second_moment(example_problem()) ==
          doctest::Approx(std::exp(2.0 / 3) * std::exp(8.0 / 15)).epsilon(1e-9));

    // sigma = 0: reduces to e^{2 int a} |F|^2
    const SdeProblem q = SdeProblem::make(fx("s"), fn::Func1D::constant(0.0), fx("s"),
                                          func::FunctionalSpec::by_name("sin"));
    CHECK(terminal_second_moment(q) ==
          doctest::Approx(std::exp(1.0) * q.F.l2_norm2()).epsilon(1e-9));
}

TEST_CASE("rate constant against its closed form") {
    const SdeProblem p =
        SdeProblem::make(fn::Func1D::constant(0.0), fn::Func1D::constant(0.0), fx("s"),
                         func::FunctionalSpec::by_name("wick_exp"));
    const double closed = std::exp(1.0 / 6) / std::sqrt(12.0);
    CHECK(closed_form_constant(p) == doctest::Approx(closed).epsilon(1e-12));
    CHECK(optimal_constant(p) == doctest::Approx(closed).epsilon(1e-8));

    CHECK(optimal_constant(example_problem()) ==
          doctest::Approx(closed_form_constant(example_problem())).epsilon(1e-8));

    const SdeProblem q = SdeProblem::make(fn::Func1D::constant(0.0),
                                          fn::Func1D::constant(0.0), fx("s"),
                                          func::FunctionalSpec::by_name("exp"));
    CHECK_THROWS_AS(closed_form_constant(q), ConfigError);
}

TEST_CASE("projection error of the conditional expectation, closed case") {
    // wick exponential: e^{2 int a} (e^{|h|^2} - e^{|P_n h|^2}), h = f + sigma
    const SdeProblem p =
        SdeProblem::make(fn::Func1D::constant(0.0), fn::Func1D::constant(0.0), fx("s"),
                         func::FunctionalSpec::by_name("wick_exp"));
    const auto r = mse_optimal(p, fn::GridSpec(2), Mode::deterministic);
    CHECK(r.se == 0.0);
    CHECK(r.mse == doctest::Approx(std::exp(1.0 / 3) - std::exp(5.0 / 16)).epsilon(1e-9));

    // decreasing in n
    const auto r4 = mse_optimal(p, fn::GridSpec(4), Mode::deterministic);
    const auto r8 = mse_optimal(p, fn::GridSpec(8), Mode::deterministic);
    CHECK(r4.mse < r.mse);
    CHECK(r8.mse < r4.mse);
}

TEST_CASE("projection error: monte carlo agrees with the deterministic path") {
    const SdeProblem p = example_problem();
    const auto det = mse_optimal(p, fn::GridSpec(4), Mode::deterministic);
    McConfig mc;
    mc.samples = 40000;
    mc.seed = 3;
    mc.streams = 4;
    const auto est = mse_optimal(p, fn::GridSpec(4), Mode::mc, mc);
    CHECK(est.se > 0.0);
    CHECK(std::abs(est.mse - det.mse) <= 4.0 * est.se);
}

TEST_CASE("conditioned terminal value for step coefficients is exact") {
    func::FunctionalSpec spec;
    spec.name = func::FunctionalSpec::Name::polynomial;
    spec.monomial = {0.0, 1.0};
    const SdeProblem p = SdeProblem::make(fn::Func1D::constant(0.0),
                                          fn::Func1D::constant(0.5),
                                          fn::Func1D::constant(1.0), spec);
    const fn::GridSpec grid(4);
    const OptimalData od = optimal_data(p, grid);
    CHECK(od.npf2 == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(od.nps2 == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(od.npfs == doctest::Approx(0.5).epsilon(1e-12));

    law::CounterRng rng(11, 0);
    const auto incr = law::sample_increments(grid, rng);
    double i_f = 0.0;
    for (double dw : incr) i_f += dw;
    CHECK(optimal_terminal(p, od, incr) ==
          doctest::Approx(exact_terminal(p, i_f, 0.5 * i_f)).epsilon(1e-12));
}

TEST_CASE("transform of the terminal law generates the grid moments") {
    const SdeProblem p = example_problem();
    const SolutionTransform st = s_transform_solution(p, fn::GridSpec(2));
    REQUIRE(st.fcell.size() == 2);
    // cell integrals of f = 1-s on n=2
    CHECK(st.fcell[0] == doctest::Approx(3.0 / 8).epsilon(1e-12));
    CHECK(st.fcell[1] == doctest::Approx(1.0 / 8).epsilon(1e-12));
    CHECK(st.exp_int_a == doctest::Approx(std::exp(1.0 / 3)).epsilon(1e-12));

    const int zero[] = {0, 0};
    CHECK(st.index_moment(zero) == doctest::Approx(std::exp(1.0 / 3)).epsilon(1e-12));

    // G(t) = sum_alpha m(alpha) t^alpha / alpha!
    const double t[] = {0.08, -0.05};
    double acc = 0.0;
    for (int a0 = 0; a0 <= 10; ++a0) {
        for (int a1 = 0; a1 <= 10; ++a1) {
            const int alpha[] = {a0, a1};
            double fact = 1.0;
            for (int j = 2; j <= a0; ++j) fact *= j;
            for (int j = 2; j <= a1; ++j) fact *= j;
            acc += st.index_moment(alpha) * std::pow(t[0], a0) * std::pow(t[1], a1) / fact;
        }
    }
    CHECK(st.eval(t) == doctest::Approx(acc).epsilon(1e-9));
}

TEST_CASE("moments of the terminal value against grid monomials") {
    // f = 1, sigma = s, a = 0, ordinary exponential: on the one-cell grid the
    // transform data are F_1 = 1, S_1 = 1/2, c_m = e^{1/2}/m!
    const SdeProblem p =
        SdeProblem::make(fn::Func1D::constant(0.0), fx("s"), fn::Func1D::constant(1.0),
                         func::FunctionalSpec::by_name("exp"));
    const fn::GridSpec grid(1);
    const double e12 = std::exp(0.5);

    chaos::ChaosPoly one(1, 1.0);
    const int i0[] = {0};
    one.set_coeff(i0, 1.0);
    CHECK(cross_moment(p, grid, one) == doctest::Approx(e12).epsilon(1e-10));

    chaos::ChaosPoly h1(1, 1.0);
    const int i1[] = {1};
    h1.set_coeff(i1, 1.0);
    // c0 S + c1 F = e^{1/2} (1/2 + 1)
    CHECK(cross_moment(p, grid, h1) == doctest::Approx(1.5 * e12).epsilon(1e-10));

    chaos::ChaosPoly h2(1, 1.0);
    const int i2[] = {2};
    h2.set_coeff(i2, 1.0);
    // c0 S^2 + 2 c1 F S + 2 c2 F^2 = e^{1/2} (1/4 + 1 + 1)
    CHECK(cross_moment(p, grid, h2) == doctest::Approx(2.25 * e12).epsilon(1e-10));

    // linearity in the polynomial argument
    chaos::ChaosPoly combo(1, 1.0);
    combo.set_coeff(i0, 2.0);
    combo.set_coeff(i2, -0.5);
    CHECK(cross_moment(p, grid, combo) ==
          doctest::Approx(2.0 * e12 - 0.5 * 2.25 * e12).epsilon(1e-10));

    chaos::ChaosPoly deep(1, 1.0);
    const int i3[] = {3};
    deep.set_coeff(i3, 1.0);
    CHECK_THROWS_AS(cross_moment(p, grid, deep, 2), NumericError);
}

TEST_CASE("multivariate rate constant, single gaussian initial value") {
    // X_0 = I(g) with g = s: the constant reduces to a closed quadratic form
    LinWa x0;
    x0.args = {fx("s")};
    LinWa::Term t;
    t.weight = 1.0;
    t.slots = {func::WickSeries::make_polynomial({0.0, 1.0}, 1.0 / 3)};
    x0.terms = {t};

    const double es2 = std::exp(1.0 / 30);  // e^{|sigma|^2}, sigma = s(1-s)
    const double q = es2 * (1.0 + 49.0 / 432);
    const double want = std::exp(0.5) * std::sqrt(q / 12.0);
    const double got = optimal_constant_multi(x0, fx("s*(1-s)"), fx("s"));
    CHECK(got == doctest::Approx(want).epsilon(1e-7));
}

TEST_CASE("multivariate rate constant matches the scalar engine on one slot") {
    const SdeProblem p = example_problem();
    LinWa x0;
    x0.args = {fx("1-s")};
    LinWa::Term t;
    t.weight = 1.0;
    t.slots = {p.F};
    x0.terms = {t};
    const double multi = optimal_constant_multi(x0, fx("s*(1-s)"), fx("s^2"));
    CHECK(multi == doctest::Approx(optimal_constant(p)).epsilon(1e-7));
}
