#pragma once

#include <cstdint>
#include <optional>
#include <span>

#include "wicksde/chaos.hpp"
#include "wicksde/func1d.hpp"
#include "wicksde/lawsim.hpp"
#include "wicksde/wick_series.hpp"

namespace wicksde::sol {

// Linear SDE with anticipating initial value: drift a(t)X_t, noise
// sigma(t) X_t against the Skorohod integral, X_0 = F(I(f)). Terminal time 1.
struct SdeProblem {
    fn::Func1D a, sigma, f;
    func::WickSeries F;  // built at variance <f,f>

    double int_a = 0.0;  // integral of a over [0,1]
    double nf2 = 0.0;    // <f,f>
    double ns2 = 0.0;    // <sigma,sigma>
    double nfs = 0.0;    // <f,sigma>

    static SdeProblem make(fn::Func1D a, fn::Func1D sigma, fn::Func1D f,
                           const func::FunctionalSpec& functional);
};

// X_1 = e^{int a} exp(I(sigma) - |sigma|^2/2) sum_m c_m h^m_{|f|^2}(I(f) - <f,sigma>):
// the translation form of F(I(f)) wick* exp-tilde, evaluated pathwise.
double exact_terminal(const SdeProblem& p, double i_f, double i_sigma);

// Grid-conditioned data: projections, their exact Gram scalars, and the series
// re-based onto the discrete variance.
struct OptimalData {
    fn::GridSpec grid;
    fn::StepFunc pf, psigma;
    double npf2 = 0.0;   // |P_n f|^2
    double nps2 = 0.0;   // |P_n sigma|^2
    double npfs = 0.0;   // <P_n f, P_n sigma>
    func::WickSeries Fd; // coefficients of F at variance |P_n f|^2
};
OptimalData optimal_data(const SdeProblem& p, fn::GridSpec grid);

// Conditional expectation of X_1 given the increments, evaluated pathwise:
// same shape as exact_terminal with every continuum object projected.
double optimal_terminal(const SdeProblem& p, const OptimalData& od,
                        std::span<const double> increments);

// E[(A(I(f)) wick* e^{wick I(u)}) (B(I(g)) wick* e^{wick I(v)})] via the
// Cameron-Martin reduction to a tilted two-dimensional Gaussian expectation
// e^{<u,v>} E[A(Z1 + <f,v>) B(Z2 + <g,u>)], (Z1,Z2) centered with the (f,g)
// Gram. Tensor Gauss-Hermite, node count doubled until `tol` relative
// agreement. The scalar form takes the six Gram numbers directly.
double moment_oracle(const func::WickSeries& A, const func::WickSeries& B, double vf,
                     double vg, double cfg, double fv, double gu, double uv,
                     double tol = 1e-10);
double moment_oracle(const func::WickSeries& A, const fn::Func1D& f,
                     const func::WickSeries& B, const fn::Func1D& g, const fn::Func1D& u,
                     const fn::Func1D& v, double tol = 1e-10);

// E[X_1^2] = e^{2 int a} E[(F wick* e)(F wick* e)].
double terminal_second_moment(const SdeProblem& p);

// Approximation-rate constant of the conditional-expectation scheme:
// C = e^{int a}/sqrt(12) * ( int_0^1 E[((f'(s) F' + sigma'(s) F)(I(f))
//     wick* e^{wick I(sigma)})^2] ds )^{1/2}, assembled from three moment-oracle
// values and the quadratic form in f', sigma'.
double optimal_constant(const SdeProblem& p);

// Closed form |f'+sigma'| exp(|f+sigma|^2/2 + int a)/sqrt(12); only valid when
// F is the Wick exponential (checked).
double closed_form_constant(const SdeProblem& p);

enum class Mode { deterministic, mc };
struct McConfig {
    std::uint64_t samples = 200000;
    std::uint64_t seed = 1;
    int streams = 8;
    bool sequential = false;
};
struct MseResult {
    double mse = 0.0;
    double se = 0.0;  // 0 in deterministic mode
};

// E[(X_1 - E[X_1 | grid])^2], deterministically through the moment oracle with
// mixed exact/projected Grams, or by joint-law Monte Carlo.
MseResult mse_optimal(const SdeProblem& p, fn::GridSpec grid, Mode mode,
                      const McConfig& mc = {});

// S-transform of X_1 restricted to grid step functions: as a function of the
// cell amplitudes t, G(t) = (sum_m c_m (sum_i t_i F_i)^m) e^{sum_i t_i S_i}
// e^{int a} with F_i, S_i the cell integrals of f, sigma. index_moment
// extracts E[X_1 M_alpha] = alpha! [t^alpha] G.
struct SolutionTransform {
    std::vector<double> fcell, scell;
    func::WickSeries F;
    double exp_int_a = 1.0;

    double eval(std::span<const double> t) const;
    double index_moment(std::span<const int> alpha) const;
};
SolutionTransform s_transform_solution(const SdeProblem& p, fn::GridSpec grid);

// E[X_1 * A] for a chaos polynomial A on the same grid, by coefficient
// extraction from the S-transform. Throws NumericError when deg A exceeds
// degree_limit (symbolic extraction cost guard).
double cross_moment(const SdeProblem& p, fn::GridSpec grid, const chaos::ChaosPoly& A,
                    int degree_limit = 10);

// Linear combinations of Wick products of Hermite series in several Gaussian
// integrals: X_0 = sum_t weight_t * wick-prod_j series_{t,j}(I(arg_j)).
struct LinWa {
    std::vector<fn::Func1D> args;
    struct Term {
        double weight = 1.0;
        std::vector<func::WickSeries> slots;  // one per arg
    };
    std::vector<Term> terms;
};

// Multivariate version of optimal_constant: weight functions are sigma' for
// X_0 itself and f_k' for each slot derivative; cross moments are computed in
// an orthonormalized feature chaos (Gram eigendecomposition, unit-variance
// coordinates, same algebra kernels).
double optimal_constant_multi(const LinWa& x0, const fn::Func1D& sigma, const fn::Func1D& a,
                              const chaos::Caps& caps = {40, 1e-24});

}  // namespace wicksde::sol
