#pragma once

#include "wicksde/solution.hpp"

namespace wicksde::sch {

struct SchemeDiag {
    double dropped_mass = 0.0;
    int max_degree = 0;
    std::size_t terms = 0;
};

struct SchemeOutput {
    chaos::ChaosPoly terminal;
    std::vector<chaos::ChaosPoly> steps;  // x_0..x_n when requested
    SchemeDiag diag;
};

// Discrete initial value: the functional series applied to the strengthened
// linear element sum_k (f(k/n)+f'(k/n) delta/2) dW_k, truncated at
// min(n, caps.degree) by default.
chaos::ChaosPoly build_initial(const sol::SdeProblem& p, fn::GridSpec grid,
                               const chaos::Caps& caps, int level_cap = -1);

// One-step weak-3 propagator with Wick increments plus the sigma' correction
// sum; the workhorse scheme. keep_steps retains x_0..x_n in the output.
SchemeOutput wick_wp(const sol::SdeProblem& p, fn::GridSpec grid, const chaos::Caps& caps,
                     bool keep_steps = false, double dropped_tol = 1e-8);

// Same object assembled as x_0 wick* (prefix/suffix product form); must agree
// with wick_wp coefficient-by-coefficient.
SchemeOutput wick_wp_product_form(const sol::SdeProblem& p, fn::GridSpec grid,
                                  const chaos::Caps& caps, double dropped_tol = 1e-8);

// First-order Wick-Euler iteration (convergent, not rate-optimal).
SchemeOutput wick_euler(const sol::SdeProblem& p, fn::GridSpec grid,
                        const chaos::Caps& caps, double dropped_tol = 1e-8);

// Classical Milstein iteration with ordinary products; requires a == 0 and
// sigma == 1 (checked). Diverges from the true solution - kept as the
// counterexample object.
SchemeOutput milstein_ordinary(const sol::SdeProblem& p, fn::GridSpec grid,
                               const chaos::Caps& caps, double dropped_tol = 1e-8);

// E[terminal] of the counterexample in closed per-cell product form
// prod_k (1 + w_k delta + w_k^2 delta^2/2); usable at any n.
double milstein_mean(const sol::SdeProblem& p, fn::GridSpec grid);

// Monte Carlo E[(X_1 - milstein terminal)^2] via the exact scalar iteration
// y <- y * (1 + dW + (dW^2 - delta)/2); pathwise ordinary products need no
// chaos truncation, so this scales to any n.
sol::MseResult milstein_mse_mc(const sol::SdeProblem& p, fn::GridSpec grid,
                               const sol::McConfig& mc);

enum class SchemeKind { wick_wp, wick_euler, milstein };
SchemeKind scheme_by_name(const std::string& name);

struct SchemeMse {
    double mse = 0.0;
    double se = 0.0;
    double dropped_mass = 0.0;
    bool mc_fallback = false;  // deterministic extraction hit its degree guard
};

// E[(X_1 - scheme terminal)^2]: deterministic via the S-transform cross moment
// (falling back to MC with a warning when the degree guard trips), or MC with
// pathwise chaos evaluation.
SchemeMse mse_scheme(const sol::SdeProblem& p, fn::GridSpec grid, SchemeKind kind,
                     sol::Mode mode, const chaos::Caps& caps,
                     const sol::McConfig& mc = {});

// Pathwise truncated-series initial value F~(I_n(f)) and its Monte Carlo
// mean-square distance to F(I(f)); scales to large n (no explicit chaos).
double initial_value_eval(const sol::SdeProblem& p, const fn::StrongWeights& sw,
                          int level_cap, std::span<const double> increments);
sol::MseResult initial_mse_mc(const sol::SdeProblem& p, fn::GridSpec grid, int level_cap,
                              const sol::McConfig& mc);

}  // namespace wicksde::sch
