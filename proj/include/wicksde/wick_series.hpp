#pragma once

#include <functional>
#include <string>
#include <vector>

#include "wicksde/chaos.hpp"
#include "wicksde/errors.hpp"

namespace wicksde::func {

// One-dimensional functional F represented as a finite Hermite series
// F(x) = sum_{m<=M} c_m h^m_v(x), where v is the variance of the Gaussian
// argument the coefficients were computed for. Applied to a Gaussian integral
// this is the Wick-power series sum c_m I(f)^{wick m} with v = |f|^2.
struct WickSeries {
    enum class Tag { custom, wick_exp, exponential, sine, cosine, polynomial };

    std::vector<double> c;  // c[0..M]
    double variance = 0.0;
    Tag tag = Tag::custom;

    int order() const { return static_cast<int>(c.size()) - 1; }

    // Catalog constructors; truncation picks M.
    static WickSeries make_wick_exp(double variance, int truncation = 40);
    static WickSeries make_exp(double variance, int truncation = 40);
    static WickSeries make_sin(double variance, int truncation = 40);
    static WickSeries make_cos(double variance, int truncation = 40);
    // Exact basis change of sum_j monomial[j] x^j into the Hermite system.
    static WickSeries make_polynomial(const std::vector<double>& monomial, double variance);
    // Generic scalar functions: c_m = E[F(Z) h^m_v(Z)] / (m! v^m), Z ~ N(0,v),
    // Gauss-Hermite with doubling node counts until the coefficients settle in
    // mean-square scale.
    static WickSeries from_function(const std::function<double(double)>& F, double variance,
                                    int truncation = 40);

    // Same coefficients re-based onto another argument variance (e.g. the
    // discrete |f|_n^2); the eval recursion then uses v2.
    WickSeries with_variance(double v2) const;

    // Term-shift derivative: c'_m = (m+1) c_{m+1}.
    WickSeries derivative() const;

    // sum c_m h^m_variance(y).
    double eval(double y) const;

    // E[F(I(f))^2] = sum c_m^2 m! v^m.
    double l2_norm2() const;

    // sup_m (m! |c_m|)^{1/m}; finite growth keeps the series within the
    // admissible analytic class.
    double growth_constant() const;
};

// Named functional requested by a user/config; build() instantiates the series
// at the variance of the concrete problem.
struct FunctionalSpec {
    enum class Name { wick_exp, exponential, sine, cosine, polynomial, custom };
    Name name = Name::wick_exp;
    std::vector<double> monomial;                // polynomial only
    std::function<double(double)> scalar;        // custom only
    int truncation = 40;

    static FunctionalSpec by_name(const std::string& name, int truncation = 40);
    WickSeries build(double variance) const;
};

// sum_{m<=level_cap} c_m (sum_i w_i Z_i)^{wick m}: the series applied to a
// discrete linear element, as an explicit chaos polynomial.
chaos::ChaosPoly apply_to_chaos(const WickSeries& series, std::span<const double> weights,
                                double var_step, const chaos::Caps& caps, int level_cap);

}  // namespace wicksde::func
