#include "wicksde/func1d.hpp"

#include <cmath>

#include "doctest.h"

using namespace wicksde;
using namespace wicksde::fn;

namespace {
Func1D fx(const char* src) { return Func1D::from_expr(expr::Expr::parse(src)); }
}  // namespace

TEST_CASE("grid cells") {
    GridSpec g(4);
    CHECK(g.delta() == doctest::Approx(0.25));
    CHECK(g.cell_of(0.0) == 0);
    CHECK(g.cell_of(0.26) == 1);
    CHECK(g.cell_of(1.0) == 3);  // right endpoint folds into the last cell
    CHECK_THROWS_AS(g.cell_of(1.5), DomainError);
    CHECK_THROWS_AS(GridSpec(0), ConfigError);
}

TEST_CASE("cell averages and projection") {
    const Func1D f = fx("s^2");
    CHECK(cell_average(f, GridSpec(2), 0) == doctest::Approx(1.0 / 12).epsilon(1e-12));
    CHECK(cell_average(f, GridSpec(2), 1) == doctest::Approx(7.0 / 12).epsilon(1e-12));

    // <f, Pf> = |Pf|^2 (projection identity), for a non-polynomial too
    const Func1D g = fx("exp(s)");
    const StepFunc pg = project(g, GridSpec(3));
    CHECK(inner(g, pg) == doctest::Approx(inner(pg, pg)).epsilon(1e-13));
}

TEST_CASE("inner products") {
    CHECK(norm2(fx("1-s^2")) == doctest::Approx(8.0 / 15).epsilon(1e-12));
    CHECK(inner(fx("s"), fx("1-s")) == doctest::Approx(1.0 / 6).epsilon(1e-12));
    CHECK(norm2(Func1D::indicator(0.3)) == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(inner(Func1D::indicator(0.5, 2.0), fx("s")) ==
          doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("step functions on mismatched grids integrate on the refinement") {
    const StepFunc a(GridSpec(2), {1.0, 3.0});
    const StepFunc b(GridSpec(3), {2.0, 0.0, 1.0});
    CHECK(inner(a, b) == doctest::Approx(5.0 / 3).epsilon(1e-12));
    CHECK(inner(a, a) == doctest::Approx(5.0).epsilon(1e-14));  // same grid: exact sum
    CHECK_THROWS_AS(StepFunc(GridSpec(2), {1.0}), ConfigError);
}

TEST_CASE("projection residual covariances") {
    CHECK(residual_gram(fx("s"), fx("s"), GridSpec(2)) ==
          doctest::Approx(1.0 / 48).epsilon(1e-12));
    // theta(1-theta)/n for an indicator with cutoff at relative offset theta
    const Func1D ind = Func1D::indicator(0.625);  // theta = 0.5 inside cell 2 of n=4
    CHECK(residual_gram(ind, ind, GridSpec(4)) == doctest::Approx(0.25 / 4.0).epsilon(1e-12));

    const auto m = residual_gram_matrix({fx("s"), fx("1-s")}, GridSpec(2));
    CHECK(m[0][0] == doctest::Approx(1.0 / 48).epsilon(1e-12));
    CHECK(m[1][1] == doctest::Approx(1.0 / 48).epsilon(1e-12));
    CHECK(m[0][1] == doctest::Approx(-1.0 / 48).epsilon(1e-12));
    CHECK(m[0][1] == m[1][0]);
}

TEST_CASE("strong weights") {
    const auto sw = strong_weights(fx("s^2"), GridSpec(2));
    REQUIRE(sw.w.size() == 2);
    CHECK(sw.w[0] == doctest::Approx(0.0));
    CHECK(sw.w[1] == doctest::Approx(0.5));
    CHECK(sw.norm2 == doctest::Approx(0.125));

    // constants reproduce exactly: w_k = c, discrete norm = c^2
    const auto sc = strong_weights(Func1D::constant(1.5), GridSpec(7));
    for (double w : sc.w) CHECK(w == doctest::Approx(1.5));
    CHECK(sc.norm2 == doctest::Approx(2.25).epsilon(1e-14));
}

TEST_CASE("total variation and sup norm") {
    const auto ts = tv_and_sup(fx("s*(1-s)"), 4000);
    CHECK(ts.tv == doctest::Approx(0.5).epsilon(1e-4));
    CHECK(ts.sup == doctest::Approx(0.25).epsilon(1e-4));
    const auto tm = tv_and_sup(fx("1-2*s"));
    CHECK(tm.tv == doctest::Approx(2.0).epsilon(1e-6));
    CHECK(tm.sup == doctest::Approx(1.0).epsilon(1e-6));
    CHECK_THROWS_AS(tv_and_sup(fx("s"), 10), ConfigError);
}

TEST_CASE("interpolation-error covariance integrals") {
    // diagonal value delta^3/12; off-diagonal cells are independent
    CHECK(bridge_integral(GridSpec(1), 0, 0) == doctest::Approx(1.0 / 12).epsilon(1e-12));
    CHECK(bridge_integral(GridSpec(4), 2, 2) == doctest::Approx(1.0 / 768).epsilon(1e-12));
    CHECK(bridge_integral(GridSpec(4), 0, 3) == 0.0);
}

TEST_CASE("derivative bookkeeping") {
    const Func1D f = fx("s^3");
    CHECK(f.has_deriv());
    CHECK(f.deriv(2.0) == doctest::Approx(12.0));
    CHECK(f.derivative_func()(0.5) == doctest::Approx(0.75));

    const Func1D g = Func1D::from_callable([](double s) { return s * s; });
    CHECK(!g.has_deriv());
    CHECK_THROWS_AS(g.deriv(0.5), DomainError);
    CHECK_THROWS_AS(g.derivative_func(), DomainError);

    CHECK_THROWS_AS(Func1D::indicator(1.5), ConfigError);
}
