#include "wicksde/solution.hpp"

#include <Eigen/Dense>

#include <cmath>

#include "wicksde/quadrature.hpp"

namespace wicksde::sol {

namespace {

double binom(int n, int k) {
    double acc = 1.0;
    for (int i = 0; i < k; ++i) acc = acc * (n - i) / (i + 1);
    return acc;
}

double fact(int n) {
    double f = 1.0;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

}  // namespace

SdeProblem SdeProblem::make(fn::Func1D a, fn::Func1D sigma, fn::Func1D f,
                            const func::FunctionalSpec& functional) {
    SdeProblem p{std::move(a), std::move(sigma), std::move(f),
                 func::WickSeries{}};
    p.int_a = quad::integrate([&](double s) { return p.a(s); }, 0.0, 1.0, 1e-12,
                              p.a.breakpoints());
    p.nf2 = fn::norm2(p.f);
    p.ns2 = fn::norm2(p.sigma);
    p.nfs = fn::inner(p.f, p.sigma);
    p.F = functional.build(p.nf2);
    return p;
}

double exact_terminal(const SdeProblem& p, double i_f, double i_sigma) {
    const double tilt = std::exp(i_sigma - 0.5 * p.ns2);
    return std::exp(p.int_a) * tilt * p.F.eval(i_f - p.nfs);
}

OptimalData optimal_data(const SdeProblem& p, fn::GridSpec grid) {
    OptimalData od{grid, fn::project(p.f, grid), fn::project(p.sigma, grid),
                   0.0, 0.0, 0.0, func::WickSeries{}};
    od.npf2 = fn::inner(od.pf, od.pf);
    od.nps2 = fn::inner(od.psigma, od.psigma);
    od.npfs = fn::inner(od.pf, od.psigma);
    od.Fd = p.F.with_variance(od.npf2);
    return od;
}

double optimal_terminal(const SdeProblem& p, const OptimalData& od,
                        std::span<const double> increments) {
    const double i_f = law::conditional_integral(od.pf, increments);
    const double i_s = law::conditional_integral(od.psigma, increments);
    const double tilt = std::exp(i_s - 0.5 * od.nps2);
    return std::exp(p.int_a) * tilt * od.Fd.eval(i_f - od.npfs);
}

double moment_oracle(const func::WickSeries& A, const func::WickSeries& B, double vf,
                     double vg, double cfg, double fv, double gu, double uv, double tol) {
    if (vf < 0.0 || vg < 0.0) throw ConfigError("moment_oracle: negative variance");
    // Cholesky of the symmetrized, clamped 2x2 Gram.
    const double l11 = std::sqrt(std::max(vf, 0.0));
    const double l21 = l11 > 0.0 ? cfg / l11 : 0.0;
    const double l22 = std::sqrt(std::max(vg - l21 * l21, 0.0));

    const auto kernel = [&](double x1, double x2) {
        return A.eval(l11 * x1 + fv) * B.eval(l21 * x1 + l22 * x2 + gu);
    };
    const int start = 16;
    double prev = quad::gauss_hermite_2d(kernel, start);
    for (int n = 2 * start; n <= 1024; n *= 2) {
        const double cur = quad::gauss_hermite_2d(kernel, n);
        const double scale = std::max({std::abs(cur), std::abs(prev), 1e-300});
        if (std::abs(cur - prev) <= tol * scale) return std::exp(uv) * cur;
        prev = cur;
    }
    throw NumericError("moment_oracle: Gauss-Hermite did not settle");
}

double moment_oracle(const func::WickSeries& A, const fn::Func1D& f,
                     const func::WickSeries& B, const fn::Func1D& g, const fn::Func1D& u,
                     const fn::Func1D& v, double tol) {
    return moment_oracle(A, B, fn::norm2(f), fn::norm2(g), fn::inner(f, g),
                         fn::inner(f, v), fn::inner(g, u), fn::inner(u, v), tol);
}

double terminal_second_moment(const SdeProblem& p) {
    return std::exp(2.0 * p.int_a) *
           moment_oracle(p.F, p.F, p.nf2, p.nf2, p.nf2, p.nfs, p.nfs, p.ns2);
}

double optimal_constant(const SdeProblem& p) {
    const func::WickSeries Fp = p.F.derivative();
    const double m11 = moment_oracle(Fp, Fp, p.nf2, p.nf2, p.nf2, p.nfs, p.nfs, p.ns2);
    const double m12 = moment_oracle(Fp, p.F, p.nf2, p.nf2, p.nf2, p.nfs, p.nfs, p.ns2);
    const double m22 = moment_oracle(p.F, p.F, p.nf2, p.nf2, p.nf2, p.nfs, p.nfs, p.ns2);

    const fn::Func1D fp = p.f.derivative_func();
    const fn::Func1D sp = p.sigma.derivative_func();
    const double wff = fn::inner(fp, fp);
    const double wfs = fn::inner(fp, sp);
    const double wss = fn::inner(sp, sp);

    const double q = wff * m11 + 2.0 * wfs * m12 + wss * m22;
    if (q < -1e-12) throw NumericError("optimal_constant: negative quadratic form");
    return std::exp(p.int_a) / std::sqrt(12.0) * std::sqrt(std::max(q, 0.0));
}

double closed_form_constant(const SdeProblem& p) {
    if (p.F.tag != func::WickSeries::Tag::wick_exp)
        throw ConfigError("closed_form_constant: only valid for the Wick exponential");
    const fn::Func1D fp = p.f.derivative_func();
    const fn::Func1D sp = p.sigma.derivative_func();
    const double dsum2 =
        fn::inner(fp, fp) + 2.0 * fn::inner(fp, sp) + fn::inner(sp, sp);
    const double sum2 = p.nf2 + 2.0 * p.nfs + p.ns2;
    return std::sqrt(dsum2) * std::exp(0.5 * sum2 + p.int_a) / std::sqrt(12.0);
}

MseResult mse_optimal(const SdeProblem& p, fn::GridSpec grid, Mode mode,
                      const McConfig& mc) {
    if (mode == Mode::deterministic) {
        const OptimalData od = optimal_data(p, grid);
        // Mixed Grams use the projection identities <f, P f> = |P f|^2 and
        // <f, P sigma> = <P f, P sigma>, exact in cell-sum arithmetic.
        const double e2 =
            moment_oracle(p.F, p.F, p.nf2, p.nf2, p.nf2, p.nfs, p.nfs, p.ns2);
        const double cross = moment_oracle(p.F, od.Fd, p.nf2, od.npf2, od.npf2, od.npfs,
                                           od.npfs, od.nps2);
        const double o2 = moment_oracle(od.Fd, od.Fd, od.npf2, od.npf2, od.npf2,
                                        od.npfs, od.npfs, od.nps2);
        MseResult r;
        r.mse = std::exp(2.0 * p.int_a) * std::max(0.0, e2 - 2.0 * cross + o2);
        return r;
    }
    const OptimalData od = optimal_data(p, grid);
    law::JointSampler sampler({p.f, p.sigma}, grid);
    auto stats = law::mc_run(
        mc.samples, mc.streams, mc.seed, mc.sequential, 1,
        [&](law::CounterRng& rng, double* out) {
            const auto d = sampler.draw(rng);
            const double err =
                exact_terminal(p, d.exact[0], d.exact[1]) - optimal_terminal(p, od, d.increments);
            out[0] = err * err;
        });
    return MseResult{stats[0].mean, stats[0].se};
}

double SolutionTransform::eval(std::span<const double> t) const {
    if (t.size() != fcell.size()) throw ConfigError("SolutionTransform: length mismatch");
    double ft = 0.0, st = 0.0;
    for (size_t i = 0; i < t.size(); ++i) {
        ft += fcell[i] * t[i];
        st += scell[i] * t[i];
    }
    double poly = 0.0, power = 1.0;
    for (size_t m = 0; m < F.c.size(); ++m) {
        poly += F.c[m] * power;
        power *= ft;
    }
    return poly * std::exp(st) * exp_int_a;
}

double SolutionTransform::index_moment(std::span<const int> alpha) const {
    if (alpha.size() != fcell.size()) throw ConfigError("SolutionTransform: length mismatch");
    std::vector<int> support;
    int total = 0;
    for (size_t i = 0; i < alpha.size(); ++i) {
        if (alpha[i] < 0) throw ConfigError("SolutionTransform: negative index");
        if (alpha[i] > 0) support.push_back(static_cast<int>(i));
        total += alpha[i];
    }
    // sum over beta <= alpha of c_{|beta|} |beta|! prod_i C(alpha_i, beta_i)
    // F_i^{beta_i} S_i^{alpha_i - beta_i}
    double acc = 0.0;
    const int maxm = F.order();
    const auto rec = [&](auto&& self, size_t si, int bsum, double prod) -> void {
        if (si == support.size()) {
            if (bsum <= maxm && F.c[bsum] != 0.0) acc += F.c[bsum] * fact(bsum) * prod;
            return;
        }
        const int i = support[si];
        const int ai = alpha[i];
        double fpow = 1.0;
        for (int b = 0; b <= ai && bsum + b <= std::min(maxm, total); ++b) {
            double spow = 1.0;
            for (int r = 0; r < ai - b; ++r) spow *= scell[i];
            self(self, si + 1, bsum + b, prod * binom(ai, b) * fpow * spow);
            fpow *= fcell[i];
        }
    };
    rec(rec, 0, 0, 1.0);
    return acc * exp_int_a;
}

SolutionTransform s_transform_solution(const SdeProblem& p, fn::GridSpec grid) {
    SolutionTransform st;
    st.F = p.F;
    st.exp_int_a = std::exp(p.int_a);
    st.fcell.resize(grid.n);
    st.scell.resize(grid.n);
    const double d = grid.delta();
    for (int k = 0; k < grid.n; ++k) {
        st.fcell[k] = d * fn::cell_average(p.f, grid, k);
        st.scell[k] = d * fn::cell_average(p.sigma, grid, k);
    }
    return st;
}

double cross_moment(const SdeProblem& p, fn::GridSpec grid, const chaos::ChaosPoly& A,
                    int degree_limit) {
    if (A.nvars() != grid.n) throw ConfigError("cross_moment: polynomial grid mismatch");
    const SolutionTransform st = s_transform_solution(p, grid);
    double acc = 0.0;
    for (const auto& t : A.terms()) {
        if (A.key_degree(t.key) > degree_limit)
            throw NumericError("cross_moment: polynomial degree exceeds extraction limit");
        const auto alpha = A.decode(t.key);
        acc += t.coeff * st.index_moment(alpha);
    }
    return acc;
}

// ---- multivariate constant --------------------------------------------------

namespace {

// Orthonormal coordinates for a family of functions: Gram eigendecomposition,
// rows of sqrt(Lambda) V^T with near-null directions dropped.
struct FeatureCoords {
    std::vector<std::vector<double>> coords;  // per function, length rank
    int rank = 0;
};

FeatureCoords feature_coords(const std::vector<fn::Func1D>& funcs) {
    const int m = static_cast<int>(funcs.size());
    Eigen::MatrixXd G(m, m);
    for (int i = 0; i < m; ++i)
        for (int j = i; j < m; ++j) {
            G(i, j) = fn::inner(funcs[i], funcs[j]);
            G(j, i) = G(i, j);
        }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G);
    if (es.info() != Eigen::Success)
        throw NumericError("optimal_constant_multi: Gram eigensolve failed");
    const double scale = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
    FeatureCoords fc;
    std::vector<int> keep;
    for (int i = 0; i < m; ++i)
        if (es.eigenvalues()(i) > 1e-14 * scale) keep.push_back(i);
    fc.rank = static_cast<int>(keep.size());
    if (fc.rank > 8)
        throw ConfigError("optimal_constant_multi: more than 8 independent directions");
    fc.coords.assign(m, std::vector<double>(fc.rank, 0.0));
    for (int j = 0; j < m; ++j)
        for (int r = 0; r < fc.rank; ++r)
            fc.coords[j][r] =
                std::sqrt(es.eigenvalues()(keep[r])) * es.eigenvectors()(j, keep[r]);
    return fc;
}

chaos::ChaosPoly series_feature_chaos(const func::WickSeries& s,
                                      const std::vector<double>& coords, int rank,
                                      const chaos::Caps& caps) {
    std::vector<double> w = coords;
    w.resize(rank);
    return func::apply_to_chaos(s, w, 1.0, caps, caps.degree);
}

}  // namespace

double optimal_constant_multi(const LinWa& x0, const fn::Func1D& sigma, const fn::Func1D& a,
                              const chaos::Caps& caps) {
    const int K = static_cast<int>(x0.args.size());
    if (K == 0) throw ConfigError("optimal_constant_multi: empty argument list");
    for (const auto& t : x0.terms)
        if (static_cast<int>(t.slots.size()) != K)
            throw ConfigError("optimal_constant_multi: slot/argument count mismatch");

    std::vector<fn::Func1D> funcs = x0.args;
    funcs.push_back(sigma);
    const FeatureCoords fc = feature_coords(funcs);
    const int r = fc.rank;

    // Components: index 0 is X_0 (weight sigma'), 1..K the slot derivatives
    // (weight f_k').
    const auto build_component = [&](int comp) {
        chaos::ChaosPoly acc(r, 1.0, 8);
        for (const auto& term : x0.terms) {
            chaos::ChaosPoly prod = chaos::ChaosPoly::constant(r, 1.0, term.weight, 8);
            for (int j = 0; j < K; ++j) {
                const func::WickSeries s =
                    (comp == j + 1) ? term.slots[j].derivative() : term.slots[j];
                prod = chaos::wick_mul(prod, series_feature_chaos(s, fc.coords[j], r, caps),
                                       caps);
            }
            std::vector<chaos::ChaosPoly::Term> merged(acc.terms().begin(),
                                                       acc.terms().end());
            for (const auto& t : prod.terms()) merged.push_back(t);
            chaos::ChaosPoly next(r, 1.0, 8);
            next.add_dropped(acc.dropped_mass() + prod.dropped_mass());
            next.assign(std::move(merged), caps);
            acc = std::move(next);
        }
        return acc;
    };

    std::vector<double> wsig(fc.coords[K].begin(), fc.coords[K].end());
    const chaos::ChaosPoly tilt =
        chaos::wick_exp(chaos::ChaosPoly::linear(wsig, 1.0, 8), caps);

    std::vector<chaos::ChaosPoly> tilted;
    for (int pcomp = 0; pcomp <= K; ++pcomp)
        tilted.push_back(chaos::wick_mul(build_component(pcomp), tilt, caps));

    // Weight functions: w_0 = sigma', w_k = f_k'.
    std::vector<fn::Func1D> wfun;
    wfun.push_back(sigma.derivative_func());
    for (const auto& f : x0.args) wfun.push_back(f.derivative_func());

    double q = 0.0;
    for (int pcomp = 0; pcomp <= K; ++pcomp)
        for (int qcomp = 0; qcomp <= K; ++qcomp)
            q += fn::inner(wfun[pcomp], wfun[qcomp]) *
                 chaos::inner_product(tilted[pcomp], tilted[qcomp]);
    if (q < -1e-10) throw NumericError("optimal_constant_multi: negative quadratic form");

    const double int_a =
        quad::integrate([&](double s) { return a(s); }, 0.0, 1.0, 1e-12, a.breakpoints());
    return std::exp(int_a) / std::sqrt(12.0) * std::sqrt(std::max(q, 0.0));
}

}  // namespace wicksde::sol
