#include "wicksde/chaos.hpp"

#include <array>
#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"

using namespace wicksde;
using namespace wicksde::chaos;

TEST_CASE("variance-parameterized Hermite values") {
    CHECK(hermite_eval(0, 0.3, 1.7) == 1.0);
    CHECK(hermite_eval(1, 0.3, 1.7) == doctest::Approx(1.7));
    CHECK(hermite_eval(2, 0.5, 1.0) == doctest::Approx(0.5));   // x^2 - a
    CHECK(hermite_eval(3, 1.0, 2.0) == doctest::Approx(2.0));   // x^3 - 3ax
    CHECK(hermite_eval(4, 1.0, 0.0) == doctest::Approx(3.0));   // 3a^2 at x=0
    CHECK_THROWS_AS(hermite_eval(-1, 1.0, 0.0), ConfigError);
}

TEST_CASE("hermite table matches direct evaluation") {
    const std::array<double, 3> x = {-0.7, 0.1, 2.3};
    const auto table = hermite_table(x, 0.25, 6);
    REQUIRE(table.size() == 3);
    for (size_t i = 0; i < x.size(); ++i)
        for (int d = 0; d <= 6; ++d)
            CHECK(table[i][d] == doctest::Approx(hermite_eval(d, 0.25, x[i])).epsilon(1e-13));
}

TEST_CASE("wick powers of a single increment") {
    const Caps caps{15, 0.0};
    const double w[] = {1.0};
    const ChaosPoly p = wick_power_linear(w, 0.25, 2, caps);
    CHECK(p.norm2() == doctest::Approx(0.125));  // 2! * delta^2
    CHECK(p.expectation() == 0.0);
    CHECK(p.max_degree() == 2);
}

TEST_CASE("wick power: multinomial expansion agrees with the recursion") {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    const Caps caps{15, 0.0};
    for (int rep = 0; rep < 20; ++rep) {
        std::vector<double> w(3);
        for (double& v : w) v = unif(rng);
        for (int m = 0; m <= 5; ++m) {
            const ChaosPoly a = wick_power_linear(w, 1.0 / 3, m, caps);
            const ChaosPoly b = wick_power_linear_recursive(w, 1.0 / 3, m, caps);
            // the recursion may carry roundoff-sized leftovers of cancelled
            // lower-degree terms, so compare coefficients over the key union
            double diff = 0.0;
            size_t i = 0, j = 0;
            while (i < a.terms().size() || j < b.terms().size()) {
                const bool only_a = j == b.terms().size() ||
                                    (i < a.terms().size() &&
                                     a.terms()[i].key < b.terms()[j].key);
                const bool only_b = i == a.terms().size() ||
                                    (j < b.terms().size() &&
                                     b.terms()[j].key < a.terms()[i].key);
                if (only_a)
                    diff = std::max(diff, std::abs(a.terms()[i++].coeff));
                else if (only_b)
                    diff = std::max(diff, std::abs(b.terms()[j++].coeff));
                else
                    diff = std::max(diff,
                                    std::abs(a.terms()[i++].coeff - b.terms()[j++].coeff));
            }
            CHECK(diff <= 1e-12);
            // |w|^{2m} m! delta^m in chaos norm
            const double w2 = w[0] * w[0] + w[1] * w[1] + w[2] * w[2];
            double fact = 1.0;
            for (int j = 2; j <= m; ++j) fact *= j;
            CHECK(a.norm2() ==
                  doctest::Approx(fact * std::pow(w2 / 3.0, m)).epsilon(1e-10));
        }
    }
}

TEST_CASE("term listing is sorted lexicographically") {
    ChaosPoly p(2, 0.5);
    const int a1[] = {1, 0};
    const int a2[] = {0, 2};
    p.set_coeff(a1, 1.5);
    p.set_coeff(a2, -0.25);
    CHECK(p.debug_string() == "(0,2) : -0.25\n(1,0) : 1.5\n");
    CHECK(p.coeff(a2) == -0.25);
    CHECK(p.m2(p.encode(a2)) == doctest::Approx(2.0 * 0.25));  // 2! * var^2
    CHECK(p.norm2() == doctest::Approx(1.5 * 1.5 * 0.5 + 0.0625 * 0.5));
}

TEST_CASE("ordinary product reduces to wick product on disjoint variables") {
    const Caps caps{15, 0.0};
    ChaosPoly a(4, 0.25), b(4, 0.25);
    const int ia[] = {2, 1, 0, 0};
    const int ib[] = {0, 0, 1, 3};
    a.set_coeff(ia, 0.7);
    b.set_coeff(ib, -1.2);
    const ChaosPoly ow = ordinary_mul(a, b, caps);
    const ChaosPoly ww = wick_mul(a, b, caps);
    REQUIRE(ow.term_count() == 1);
    REQUIRE(ww.term_count() == 1);
    CHECK(ow.terms()[0].key == ww.terms()[0].key);
    CHECK(ow.terms()[0].coeff == doctest::Approx(-0.84));
}

TEST_CASE("ordinary product linearizes shared variables") {
    // h1 * h1 = h2 + var  (single variable)
    const Caps caps{15, 0.0};
    const double w[] = {1.0};
    const ChaosPoly z = ChaosPoly::linear(w, 0.25);
    const ChaosPoly z2 = ordinary_mul(z, z, caps);
    const int e0[] = {0};
    const int e2[] = {2};
    CHECK(z2.coeff(e2) == doctest::Approx(1.0));
    CHECK(z2.coeff(e0) == doctest::Approx(0.25));
    CHECK(expectation(z2) == doctest::Approx(0.25));  // E[Z^2] = var
}

TEST_CASE("monte carlo check of pathwise evaluation") {
    // p = 2 + Z0 Z1 in ordinary form; check mean and second moment by sampling
    const Caps caps{15, 0.0};
    ChaosPoly p(2, 0.5);
    const int e00[] = {0, 0};
    const int e11[] = {1, 1};
    p.set_coeff(e00, 2.0);
    p.set_coeff(e11, 1.0);

    std::mt19937_64 rng(7);
    std::normal_distribution<double> gauss(0.0, std::sqrt(0.5));
    const int n = 20000;
    double s1 = 0.0, s2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x[] = {gauss(rng), gauss(rng)};
        const double v = eval_at(p, x);
        s1 += v;
        s2 += v * v;
    }
    s1 /= n;
    s2 /= n;
    const double exact_mean = 2.0;
    const double exact_m2 = p.norm2() + 0.0;  // norm2 already includes the mean term
    CHECK(std::abs(s1 - exact_mean) <= 4.0 * std::sqrt(0.25 / n) + 0.01);
    CHECK(std::abs(s2 - exact_m2) <= 0.2);
}

TEST_CASE("level projection partitions the polynomial") {
    const Caps caps{15, 0.0};
    const double w[] = {0.5, -0.3, 0.2};
    ChaosPoly e = wick_exp(ChaosPoly::linear(w, 1.0 / 3), caps);
    double total = 0.0;
    for (int k = 0; k <= e.max_degree(); ++k) total += project_level(e, k).norm2();
    CHECK(total == doctest::Approx(e.norm2()).epsilon(1e-12));
    CHECK(project_level(e, 0).expectation() == doctest::Approx(1.0));
}

TEST_CASE("second-quantization scaling acts level by level") {
    const Caps caps{15, 0.0};
    const double w[] = {0.4, 0.1};
    const ChaosPoly a = wick_exp(ChaosPoly::linear(w, 0.5), caps);
    const ChaosPoly g = gamma(a, 2.0);
    for (int k = 0; k <= a.max_degree(); ++k) {
        const double na = project_level(a, k).norm2();
        const double ng = project_level(g, k).norm2();
        CHECK(ng == doctest::Approx(std::pow(4.0, k) * na).epsilon(1e-12));
    }
}

TEST_CASE("inner product respects level orthogonality") {
    const Caps caps{15, 0.0};
    const double w[] = {0.9, -0.2};
    const ChaosPoly a = wick_power_linear(w, 0.5, 2, caps);
    const ChaosPoly b = wick_power_linear(w, 0.5, 3, caps);
    CHECK(inner_product(a, b) == 0.0);  // different degrees share no keys
    CHECK(inner_product(a, a) == doctest::Approx(a.norm2()));
}

TEST_CASE("s-transform of a linear element") {
    // S of sum w_i Z_i at cell integrals g is sum w_i g_i
    const double w[] = {1.0, -2.0, 0.5};
    const ChaosPoly a = ChaosPoly::linear(w, 1.0 / 3);
    const double g[] = {0.1, 0.2, 0.4};
    CHECK(s_transform(a, g) == doctest::Approx(0.1 - 0.4 + 0.2).epsilon(1e-14));
}

TEST_CASE("variable-count limits") {
    CHECK(ChaosPoly(8, 0.125).bits_per_var() == 8);
    CHECK(ChaosPoly(9, 1.0 / 9).bits_per_var() == 4);
    CHECK(ChaosPoly(16, 1.0 / 16).bits_per_var() == 4);
    CHECK_THROWS_AS(ChaosPoly(17, 1.0 / 17), ConfigError);
    CHECK_THROWS_AS(ChaosPoly(9, 1.0 / 9, 8), ConfigError);  // 9 vars don't fit 8-bit
}
