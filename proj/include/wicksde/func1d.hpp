#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "wicksde/expr.hpp"

namespace wicksde::fn {

// Uniform grid 0 < 1/n < 2/n < ... < 1 on [0,1]; cell k is [k/n, (k+1)/n).
struct GridSpec {
    int n = 1;
    explicit GridSpec(int n_) : n(n_) {
        if (n_ < 1) throw ConfigError("GridSpec: n must be >= 1");
    }
    double delta() const { return 1.0 / n; }
    double left(int k) const { return static_cast<double>(k) / n; }
    double right(int k) const { return static_cast<double>(k + 1) / n; }
    // Cell containing s in [0,1]; s=1 is folded into the last cell.
    int cell_of(double s) const;
    bool operator==(const GridSpec& o) const { return n == o.n; }
};

// Deterministic real function on [0,1] with an optional derivative and a list
// of discontinuity locations (quadrature splits there, so piecewise-defined
// integrands still converge at full order).
class Func1D {
  public:
    static Func1D from_expr(const expr::Expr& e);
    static Func1D from_callable(std::function<double(double)> value,
                                std::function<double(double)> deriv = {},
                                std::vector<double> breakpoints = {});
    static Func1D constant(double c);
    // c * 1_{[0,r)}
    static Func1D indicator(double r, double c = 1.0);

    double operator()(double s) const { return value_(s); }
    double deriv(double s) const;
    bool has_deriv() const { return static_cast<bool>(deriv_); }
    const std::vector<double>& breakpoints() const { return breakpoints_; }

    // The derivative as a Func1D of its own (no second derivative available).
    Func1D derivative_func() const;

  private:
    std::function<double(double)> value_;
    std::function<double(double)> deriv_;
    std::vector<double> breakpoints_;
};

// Piecewise-constant function attached to a grid (one value per cell).
struct StepFunc {
    GridSpec grid;
    std::vector<double> values;

    StepFunc(GridSpec g, std::vector<double> v);
    double operator()(double s) const { return values[grid.cell_of(s)]; }
    Func1D as_func() const;
};

// L2([0,1]) inner products. The Func1D/Func1D form integrates adaptively to
// 1e-12 relative; forms involving StepFunc reduce to exact cell sums.
double inner(const Func1D& f, const Func1D& g);
double inner(const StepFunc& f, const StepFunc& g);
double inner(const Func1D& f, const StepFunc& g);
inline double inner(const StepFunc& f, const Func1D& g) { return inner(g, f); }
double norm2(const Func1D& f);

// Mean of f over cell k.
double cell_average(const Func1D& f, GridSpec grid, int k);

// Conditional-expectation projection: the step function of cell means.
StepFunc project(const Func1D& f, GridSpec grid);

// <f,g> - <Pf,Pg>: the covariance of the two projection residuals.
double residual_gram(const Func1D& f, const Func1D& g, GridSpec grid);

// All pairwise residual covariances for a family of functions.
std::vector<std::vector<double>> residual_gram_matrix(const std::vector<Func1D>& fs,
                                                      GridSpec grid);

// Left-endpoint/trapezoid-corrected weights w_k = f(k/n) + f'(k/n) delta/2 and
// the discrete squared norm delta * sum w_k^2.
struct StrongWeights {
    std::vector<double> w;
    double norm2 = 0.0;
};
StrongWeights strong_weights(const Func1D& f, GridSpec grid);

// Total variation and sup norm estimated from m uniform samples (m >= 1000).
struct TvSup {
    double tv = 0.0;
    double sup = 0.0;
};
TvSup tv_and_sup(const Func1D& f, int m = 2000);

// Integral over cell i x cell j of the covariance of the piecewise-linear
// interpolation error of Brownian motion. Computed from the closed bridge
// covariance delta*(min(u,v) - uv) on the rescaled cell; zero off the diagonal
// because bridge residuals of disjoint cells are independent.
double bridge_integral(GridSpec grid, int i, int j);

}  // namespace wicksde::fn
