#include "wicksde/func1d.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "wicksde/quadrature.hpp"

namespace wicksde::fn {

int GridSpec::cell_of(double s) const {
    if (s < 0.0 || s > 1.0) throw DomainError("grid: point outside [0,1]");
    const int k = static_cast<int>(s * n);
    return std::min(k, n - 1);
}

Func1D Func1D::from_expr(const expr::Expr& e) {
    Func1D f;
    auto d = e.derivative();
    f.value_ = [e](double s) { return e(s); };
    f.deriv_ = [d](double s) { return d(s); };
    return f;
}

Func1D Func1D::from_callable(std::function<double(double)> value,
                             std::function<double(double)> deriv,
                             std::vector<double> breakpoints) {
    if (!value) throw ConfigError("Func1D: value callable required");
    Func1D f;
    f.value_ = std::move(value);
    f.deriv_ = std::move(deriv);
    f.breakpoints_ = std::move(breakpoints);
    std::sort(f.breakpoints_.begin(), f.breakpoints_.end());
    return f;
}

Func1D Func1D::constant(double c) {
    return from_callable([c](double) { return c; }, [](double) { return 0.0; });
}

Func1D Func1D::indicator(double r, double c) {
    if (r < 0.0 || r > 1.0) throw ConfigError("indicator: cutoff must lie in [0,1]");
    return from_callable([r, c](double s) { return s < r ? c : 0.0; },
                         [](double) { return 0.0; }, {r});
}

double Func1D::deriv(double s) const {
    if (!deriv_) throw DomainError("Func1D: derivative not available");
    return deriv_(s);
}

Func1D Func1D::derivative_func() const {
    if (!deriv_) throw DomainError("Func1D: derivative not available");
    Func1D f;
    f.value_ = deriv_;
    f.breakpoints_ = breakpoints_;
    return f;
}

StepFunc::StepFunc(GridSpec g, std::vector<double> v) : grid(g), values(std::move(v)) {
    if (static_cast<int>(values.size()) != grid.n)
        throw ConfigError("StepFunc: need exactly one value per cell");
}

Func1D StepFunc::as_func() const {
    auto self = std::make_shared<StepFunc>(*this);
    std::vector<double> cuts;
    for (int k = 1; k < grid.n; ++k) cuts.push_back(grid.left(k));
    return Func1D::from_callable([self](double s) { return (*self)(s); },
                                 [](double) { return 0.0; }, std::move(cuts));
}

double inner(const Func1D& f, const Func1D& g) {
    std::vector<double> cuts = f.breakpoints();
    cuts.insert(cuts.end(), g.breakpoints().begin(), g.breakpoints().end());
    return quad::integrate([&](double s) { return f(s) * g(s); }, 0.0, 1.0, 1e-12, cuts);
}

double inner(const StepFunc& f, const StepFunc& g) {
    if (!(f.grid == g.grid)) {
        // fall back to the measure-exact piecewise path
        return inner(f.as_func(), g.as_func());
    }
    double acc = 0.0;
    for (int k = 0; k < f.grid.n; ++k) acc += f.values[k] * g.values[k];
    return acc * f.grid.delta();
}

double inner(const Func1D& f, const StepFunc& g) {
    double acc = 0.0;
    for (int k = 0; k < g.grid.n; ++k)
        acc += g.values[k] * cell_average(f, g.grid, k);
    return acc * g.grid.delta();
}

double norm2(const Func1D& f) { return inner(f, f); }

double cell_average(const Func1D& f, GridSpec grid, int k) {
    if (k < 0 || k >= grid.n) throw ConfigError("cell_average: cell index out of range");
    std::vector<double> cuts;
    for (double b : f.breakpoints())
        if (b > grid.left(k) && b < grid.right(k)) cuts.push_back(b);
    const double integral =
        quad::integrate([&](double s) { return f(s); }, grid.left(k), grid.right(k), 1e-12, cuts);
    return integral * grid.n;
}

StepFunc project(const Func1D& f, GridSpec grid) {
    std::vector<double> means(grid.n);
    for (int k = 0; k < grid.n; ++k) means[k] = cell_average(f, grid, k);
    return StepFunc(grid, std::move(means));
}

double residual_gram(const Func1D& f, const Func1D& g, GridSpec grid) {
    double cross = 0.0;
    for (int k = 0; k < grid.n; ++k)
        cross += cell_average(f, grid, k) * cell_average(g, grid, k);
    return inner(f, g) - cross * grid.delta();
}

std::vector<std::vector<double>> residual_gram_matrix(const std::vector<Func1D>& fs,
                                                      GridSpec grid) {
    const size_t m = fs.size();
    std::vector<std::vector<double>> means(m, std::vector<double>(grid.n));
    for (size_t i = 0; i < m; ++i)
        for (int k = 0; k < grid.n; ++k) means[i][k] = cell_average(fs[i], grid, k);
    std::vector<std::vector<double>> out(m, std::vector<double>(m, 0.0));
    for (size_t i = 0; i < m; ++i) {
        for (size_t j = i; j < m; ++j) {
            double cross = 0.0;
            for (int k = 0; k < grid.n; ++k) cross += means[i][k] * means[j][k];
            const double v = inner(fs[i], fs[j]) - cross * grid.delta();
            out[i][j] = v;
            out[j][i] = v;
        }
    }
    return out;
}

StrongWeights strong_weights(const Func1D& f, GridSpec grid) {
    StrongWeights sw;
    sw.w.resize(grid.n);
    const double half = 0.5 * grid.delta();
    for (int k = 0; k < grid.n; ++k) {
        const double t = grid.left(k);
        sw.w[k] = f(t) + f.deriv(t) * half;
        sw.norm2 += sw.w[k] * sw.w[k];
    }
    sw.norm2 *= grid.delta();
    return sw;
}

TvSup tv_and_sup(const Func1D& f, int m) {
    if (m < 1000) throw ConfigError("tv_and_sup: need at least 1000 samples");
    TvSup r;
    double prev = f(0.0);
    r.sup = std::abs(prev);
    for (int i = 1; i <= m; ++i) {
        const double cur = f(static_cast<double>(i) / m);
        r.tv += std::abs(cur - prev);
        r.sup = std::max(r.sup, std::abs(cur));
        prev = cur;
    }
    return r;
}

double bridge_integral(GridSpec grid, int i, int j) {
    if (i < 0 || i >= grid.n || j < 0 || j >= grid.n)
        throw ConfigError("bridge_integral: cell index out of range");
    if (i != j) return 0.0;
    // On the unit cell the interpolation error is a Brownian bridge scaled by
    // sqrt(delta): covariance delta*(min(u,v)-uv). The u-integral has the
    // closed piecewise value v - v^2/2 - v/2; the outer integral is polynomial,
    // so a single Gauss-Legendre pass is exact.
    const auto inner_u = [](double v) { return (v - 0.5 * v * v) - 0.5 * v; };
    const double unit = quad::integrate_panels(inner_u, 0.0, 1.0, 1);
    const double d = grid.delta();
    return d * d * d * unit;
}

}  // namespace wicksde::fn
