#include "wicksde/wick_series.hpp"

#include <algorithm>
#include <cmath>

#include "wicksde/quadrature.hpp"

namespace wicksde::func {

namespace {

double fact(int n) {
    double f = 1.0;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

void check_variance(double v) {
    if (v < 0.0 || !std::isfinite(v)) throw ConfigError("WickSeries: invalid variance");
}

void check_truncation(int M) {
    if (M < 0 || M > 160) throw ConfigError("WickSeries: truncation out of range");
}

}  // namespace

WickSeries WickSeries::make_wick_exp(double variance, int truncation) {
    check_variance(variance);
    check_truncation(truncation);
    WickSeries s;
    s.variance = variance;
    s.tag = Tag::wick_exp;
    s.c.resize(truncation + 1);
    double inv = 1.0;
    for (int m = 0; m <= truncation; ++m) {
        s.c[m] = inv;
        inv /= (m + 1);
    }
    return s;
}

WickSeries WickSeries::make_exp(double variance, int truncation) {
    WickSeries s = make_wick_exp(variance, truncation);
    s.tag = Tag::exponential;
    const double scale = std::exp(0.5 * variance);
    for (double& v : s.c) v *= scale;
    return s;
}

WickSeries WickSeries::make_sin(double variance, int truncation) {
    check_variance(variance);
    check_truncation(truncation);
    WickSeries s;
    s.variance = variance;
    s.tag = Tag::sine;
    s.c.assign(truncation + 1, 0.0);
    const double scale = std::exp(-0.5 * variance);
    double sign = 1.0;
    for (int m = 1; m <= truncation; m += 2) {
        s.c[m] = sign * scale / fact(m);
        sign = -sign;
    }
    return s;
}

WickSeries WickSeries::make_cos(double variance, int truncation) {
    check_variance(variance);
    check_truncation(truncation);
    WickSeries s;
    s.variance = variance;
    s.tag = Tag::cosine;
    s.c.assign(truncation + 1, 0.0);
    const double scale = std::exp(-0.5 * variance);
    double sign = 1.0;
    for (int m = 0; m <= truncation; m += 2) {
        s.c[m] = sign * scale / fact(m);
        sign = -sign;
    }
    return s;
}

WickSeries WickSeries::make_polynomial(const std::vector<double>& monomial, double variance) {
    check_variance(variance);
    if (monomial.empty()) throw ConfigError("WickSeries: empty polynomial");
    if (monomial.size() > 64) throw ConfigError("WickSeries: polynomial degree too large");
    WickSeries s;
    s.variance = variance;
    s.tag = Tag::polynomial;
    // Horner in the Hermite basis: multiplication by x maps
    // a_m -> contribution to m+1 plus m * v * contribution to m-1.
    std::vector<double> cur{0.0};
    for (auto it = monomial.rbegin(); it != monomial.rend(); ++it) {
        std::vector<double> next(cur.size() + 1, 0.0);
        for (size_t m = 0; m < cur.size(); ++m) {
            if (cur[m] == 0.0) continue;
            next[m + 1] += cur[m];
            if (m >= 1) next[m - 1] += static_cast<double>(m) * variance * cur[m];
        }
        next[0] += *it;
        cur = std::move(next);
    }
    while (cur.size() > 1 && cur.back() == 0.0) cur.pop_back();
    s.c = std::move(cur);
    return s;
}

WickSeries WickSeries::from_function(const std::function<double(double)>& F, double variance,
                                     int truncation) {
    check_variance(variance);
    check_truncation(truncation);
    if (!F) throw ConfigError("WickSeries: scalar function required");
    if (variance == 0.0) throw ConfigError("WickSeries: quadrature path needs variance > 0");
    const double sd = std::sqrt(variance);
    std::vector<double> prev;
    for (int nodes = 2 * truncation + 8;; nodes *= 2) {
        if (nodes > 4096) throw NumericError("WickSeries: coefficient quadrature did not settle");
        const auto& rule = quad::gauss_hermite(nodes);
        // Accumulate E[F h^m] in the orthonormal basis: every summand is
        // O(|F|), so high degrees are not drowned by the raw polynomials'
        // dynamic range. c_m is recovered by rescaling afterwards.
        std::vector<double> cur(truncation + 1, 0.0);
        for (size_t q = 0; q < rule.nodes.size(); ++q) {
            const double x = rule.nodes[q];
            const double fz = F(sd * x) * rule.weights[q];
            double pm1 = 0.0, p = 1.0;
            cur[0] += fz;
            for (int m = 1; m <= truncation; ++m) {
                const double nxt = (x * p - std::sqrt(m - 1.0) * pm1) / std::sqrt(double(m));
                pm1 = p;
                p = nxt;
                cur[m] += fz * p;
            }
        }
        if (!prev.empty()) {
            double l2 = 0.0, worst = 0.0;
            for (int m = 0; m <= truncation; ++m) {
                l2 += cur[m] * cur[m];
                worst = std::max(worst, std::abs(cur[m] - prev[m]));
            }
            if (worst <= 1e-11 * std::max(std::sqrt(l2), 1e-300)) {
                WickSeries s;
                s.variance = variance;
                s.c.resize(truncation + 1);
                for (int m = 0; m <= truncation; ++m)
                    cur[m] *= std::exp(-0.5 * (std::lgamma(m + 1.0) +
                                               m * std::log(variance)));
                s.c = std::move(cur);
                return s;
            }
        }
        prev = std::move(cur);
    }
}

WickSeries WickSeries::with_variance(double v2) const {
    check_variance(v2);
    WickSeries s = *this;
    s.variance = v2;
    return s;
}

WickSeries WickSeries::derivative() const {
    WickSeries s;
    s.variance = variance;
    if (tag == Tag::wick_exp) s.tag = Tag::wick_exp;  // fixed point of the shift
    if (c.size() <= 1) {
        s.c = {0.0};
        return s;
    }
    s.c.resize(c.size() - 1);
    for (size_t m = 0; m + 1 < c.size(); ++m) s.c[m] = (m + 1.0) * c[m + 1];
    return s;
}

double WickSeries::eval(double y) const {
    double acc = c[0];
    if (c.size() == 1) return acc;
    double hm1 = 1.0, h = y;
    for (int m = 1; m < static_cast<int>(c.size()); ++m) {
        acc += c[m] * h;
        const double nxt = y * h - m * variance * hm1;
        hm1 = h;
        h = nxt;
    }
    return acc;
}

double WickSeries::l2_norm2() const {
    double acc = 0.0, mfact_vm = 1.0;  // m! v^m
    for (size_t m = 0; m < c.size(); ++m) {
        if (m > 0) mfact_vm *= static_cast<double>(m) * variance;
        acc += c[m] * c[m] * mfact_vm;
    }
    return acc;
}

double WickSeries::growth_constant() const {
    double best = 0.0;
    for (size_t m = 1; m < c.size(); ++m) {
        if (c[m] == 0.0) continue;
        const double lg = (std::lgamma(m + 1.0) + std::log(std::abs(c[m]))) / m;
        best = std::max(best, std::exp(lg));
    }
    return best;
}

FunctionalSpec FunctionalSpec::by_name(const std::string& name, int truncation) {
    FunctionalSpec spec;
    spec.truncation = truncation;
    if (name == "wick_exp")
        spec.name = Name::wick_exp;
    else if (name == "exp")
        spec.name = Name::exponential;
    else if (name == "sin")
        spec.name = Name::sine;
    else if (name == "cos")
        spec.name = Name::cosine;
    else if (name == "polynomial")
        spec.name = Name::polynomial;
    else
        throw ConfigError("unknown functional '" + name +
                          "' (expected wick_exp, exp, sin, cos, or polynomial)");
    return spec;
}

WickSeries FunctionalSpec::build(double variance) const {
    switch (name) {
        case Name::wick_exp: return WickSeries::make_wick_exp(variance, truncation);
        case Name::exponential: return WickSeries::make_exp(variance, truncation);
        case Name::sine: return WickSeries::make_sin(variance, truncation);
        case Name::cosine: return WickSeries::make_cos(variance, truncation);
        case Name::polynomial:
            if (monomial.empty())
                throw ConfigError("polynomial functional needs coefficients");
            return WickSeries::make_polynomial(monomial, variance);
        case Name::custom:
            if (!scalar) throw ConfigError("custom functional needs a callable");
            return WickSeries::from_function(scalar, variance, truncation);
    }
    throw ConfigError("corrupt functional spec");
}

chaos::ChaosPoly apply_to_chaos(const WickSeries& series, std::span<const double> weights,
                                double var_step, const chaos::Caps& caps, int level_cap) {
    if (level_cap < 0) level_cap = caps.degree;
    level_cap = std::min({level_cap, caps.degree, series.order()});
    std::vector<chaos::ChaosPoly::Term> terms;
    chaos::ChaosPoly out(static_cast<int>(weights.size()), var_step);
    for (int m = 0; m <= level_cap; ++m) {
        if (series.c[m] == 0.0) continue;
        chaos::ChaosPoly p = chaos::wick_power_linear(weights, var_step, m, caps);
        for (const auto& t : p.terms()) terms.push_back({t.key, series.c[m] * t.coeff});
        out.add_dropped(series.c[m] * series.c[m] * p.dropped_mass());
    }
    out.assign(std::move(terms), caps);
    return out;
}

}  // namespace wicksde::func
