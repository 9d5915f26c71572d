#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "wicksde/errors.hpp"

namespace wicksde::chaos {

// Truncation policy for algebra operations: total degree cap plus relative
// magnitude pruning. Everything removed is tallied in the polynomial's
// dropped_mass (an upper bound on the removed L2 mass, since contributions
// that might have cancelled are counted at full size).
struct Caps {
    int degree = 12;
    double prune_threshold = 1e-16;  // relative to the polynomial's squared norm
};

// Polynomial in the Wick monomials M_alpha = prod_i h^{alpha_i}(Z_i), where the
// Z_i are independent centered Gaussians of common variance var_step (the grid
// increments, var_step = 1/n) and h^k is the variance-parameterized Hermite
// polynomial. E[M_alpha^2] = prod_i alpha_i! * var_step^{|alpha|}.
//
// Multi-indices are packed into a 64-bit key, variable 0 in the highest field,
// so ascending key order is lexicographic order. Two layouts are supported:
// 4 bits/variable (up to 16 variables, degree <= 15) for grid polynomials and
// 8 bits/variable (up to 8 variables, degree <= 255) for the orthonormal
// feature space used by the multivariate constant engine.
class ChaosPoly {
  public:
    struct Term {
        std::uint64_t key;
        double coeff;
    };

    ChaosPoly() = default;
    ChaosPoly(int nvars, double var_step, int bits_per_var = 0);  // 0: pick smallest fit

    static ChaosPoly constant(int nvars, double var_step, double c, int bits_per_var = 0);
    // sum_i weights[i] * Z_i
    static ChaosPoly linear(std::span<const double> weights, double var_step,
                            int bits_per_var = 0);

    int nvars() const { return nvars_; }
    double var_step() const { return var_step_; }
    int bits_per_var() const { return bits_; }
    const std::vector<Term>& terms() const { return terms_; }
    double dropped_mass() const { return dropped_mass_; }
    std::size_t term_count() const { return terms_.size(); }
    int max_degree() const;
    int max_bits_degree() const { return (1 << bits_) - 1; }

    // Multi-index helpers.
    std::uint64_t encode(std::span<const int> alpha) const;
    std::vector<int> decode(std::uint64_t key) const;
    int key_degree(std::uint64_t key) const;
    double m2(std::uint64_t key) const;  // E[M_alpha^2]

    double coeff(std::span<const int> alpha) const;
    void set_coeff(std::span<const int> alpha, double c);
    void add_dropped(double mass) { dropped_mass_ += mass; }

    double norm2() const;       // E[poly^2]
    double expectation() const; // coefficient of the empty index

    // Sorted listing "(a0,a1,...) : coeff" for golden tests and debugging.
    std::string debug_string() const;

    // Internal: replaces terms with a sorted, magnitude-pruned list.
    void assign(std::vector<Term> terms, const Caps& caps);

  private:
    int nvars_ = 0;
    int bits_ = 4;
    double var_step_ = 1.0;
    std::vector<Term> terms_;  // sorted by key, no duplicates
    double dropped_mass_ = 0.0;
};

// Wick product: multi-index addition (degree adds, no contractions).
ChaosPoly wick_mul(const ChaosPoly& a, const ChaosPoly& b, const Caps& caps);

// Ordinary (pointwise) product via per-variable Hermite linearization
// h^a h^b = sum_r C(a,r) C(b,r) r! var^r h^{a+b-2r}.
ChaosPoly ordinary_mul(const ChaosPoly& a, const ChaosPoly& b, const Caps& caps);

// m-th Wick power of the linear element sum_i w_i Z_i. Both routes are exposed
// so they can check each other: direct multinomial expansion, and the Hermite
// three-term recursion driven by ordinary_mul.
ChaosPoly wick_power_linear(std::span<const double> weights, double var_step, int m,
                            const Caps& caps, int bits_per_var = 0);
ChaosPoly wick_power_linear_recursive(std::span<const double> weights, double var_step,
                                      int m, const Caps& caps, int bits_per_var = 0);

// sum_{m<=cap} a^{wick m}/m!. Warns (returns flag via pointer) when E[a] != 0,
// since the exponential then mixes scales.
ChaosPoly wick_exp(const ChaosPoly& a, const Caps& caps, bool* nonzero_mean = nullptr);

// Pathwise evaluation at concrete coordinate values (e.g. sampled increments).
double eval_at(const ChaosPoly& a, std::span<const double> x);

double expectation(const ChaosPoly& a);
double inner_product(const ChaosPoly& a, const ChaosPoly& b);

// Chaos-level projection (terms of total degree exactly k).
ChaosPoly project_level(const ChaosPoly& a, int k);

// Second-quantization scaling: coefficient of degree-k terms multiplied by r^k.
ChaosPoly gamma(const ChaosPoly& a, double r);

// S-transform at the step function with cell integrals g: sum_alpha c_alpha
// prod_i g_i^{alpha_i}.
double s_transform(const ChaosPoly& a, std::span<const double> cell_integrals);

// Variance-parameterized Hermite polynomial h^k_alpha(x):
// h^0 = 1, h^1 = x, h^{m+1} = x h^m - m alpha h^{m-1}.
double hermite_eval(int k, double alpha, double x);

// Table H[i][d] = h^d_var(x[i]) for d <= maxdeg; the fast path for repeated
// pathwise evaluation.
std::vector<std::vector<double>> hermite_table(std::span<const double> x, double var,
                                               int maxdeg);
double eval_with_table(const ChaosPoly& a,
                       const std::vector<std::vector<double>>& table);

}  // namespace wicksde::chaos
