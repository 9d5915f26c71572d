#pragma once

#include <functional>
#include <vector>

namespace wicksde::quad {

// Nodes/weights of an n-point rule. Gauss-Legendre rules live on [-1, 1] with
// weights summing to 2; Gauss-Hermite rules are for the standard normal
// expectation E[g(Z)], weights summing to 1.
struct Rule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

// Both rules are computed once per order by Golub-Welsch (symmetric
// tridiagonal eigenproblem) and cached.
const Rule& gauss_legendre(int n);
const Rule& gauss_hermite(int n);

// Integral of f over [a, b] with a fixed number of equal panels,
// 16-point Gauss-Legendre on each.
double integrate_panels(const std::function<double(double)>& f, double a, double b,
                        int panels);

// Adaptive composite rule: the panel count doubles until two successive
// levels agree to rel_tol (relative to scale of the result). Splits the domain
// at the supplied breakpoints first, so piecewise-defined integrands converge
// at full speed. Throws NumericError if the tolerance is never reached.
double integrate(const std::function<double(double)>& f, double a, double b,
                 double rel_tol = 1e-12, const std::vector<double>& breakpoints = {});

// E[g(Z1, Z2)] for standard bivariate normal with correlation built in by the
// caller: tensor Gauss-Hermite with n points per axis.
double gauss_hermite_2d(const std::function<double(double, double)>& g, int n);

}  // namespace wicksde::quad
