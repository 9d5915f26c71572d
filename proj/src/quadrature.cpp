#include "wicksde/quadrature.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

#include "wicksde/errors.hpp"

namespace wicksde::quad {

namespace {

// Golub-Welsch nodes: eigenvalues of the Jacobi matrix of the orthogonal
// polynomial recurrence. Weights via the Christoffel sum mu0 / sum_k p_k(x)^2
// rather than the squared first eigenvector component: the eigenvector form is
// only absolutely accurate, so for large Hermite rules the far-tail weights
// (truly ~e^{-x^2/2}) come back as pure noise and wreck fast-growing
// integrands. The sum form is relatively accurate at every node and
// underflows cleanly; nodes whose weight underflows to zero are dropped.
Rule golub_welsch(int n, const std::function<double(int)>& offdiag, double mu0) {
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
    for (int k = 1; k < n; ++k) {
        const double b = offdiag(k);
        J(k, k - 1) = b;
        J(k - 1, k) = b;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw NumericError("quadrature: eigensolve failed");
    Rule r;
    r.nodes.reserve(n);
    r.weights.reserve(n);
    for (int i = 0; i < n; ++i) {
        const double x = es.eigenvalues()(i);
        double pm1 = 0.0, p = 1.0, sum = 1.0;
        for (int k = 1; k < n && sum < 1e300; ++k) {
            const double bprev = k == 1 ? 0.0 : offdiag(k - 1);
            const double next = (x * p - bprev * pm1) / offdiag(k);
            pm1 = p;
            p = next;
            sum += p * p;
        }
        const double w = sum < 1e300 ? mu0 / sum : 0.0;
        if (w > 0.0) {
            r.nodes.push_back(x);
            r.weights.push_back(w);
        }
    }
    if (r.nodes.empty()) throw NumericError("quadrature: all weights underflowed");
    return r;
}

const Rule& cached(std::map<int, Rule>& cache, std::mutex& mu, int n,
                   const std::function<Rule(int)>& make) {
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, make(n)).first;
    return it->second;
}

}  // namespace

const Rule& gauss_legendre(int n) {
    if (n < 1) throw ConfigError("gauss_legendre: order must be positive");
    static std::map<int, Rule> cache;
    static std::mutex mu;
    return cached(cache, mu, n, [](int m) {
        return golub_welsch(
            m, [](int k) { return k / std::sqrt(4.0 * k * k - 1.0); }, 2.0);
    });
}

const Rule& gauss_hermite(int n) {
    if (n < 1) throw ConfigError("gauss_hermite: order must be positive");
    static std::map<int, Rule> cache;
    static std::mutex mu;
    return cached(cache, mu, n, [](int m) {
        return golub_welsch(
            m, [](int k) { return std::sqrt(static_cast<double>(k)); }, 1.0);
    });
}

namespace {

struct PanelSums {
    double integral = 0.0;
    double absolute = 0.0;  // integral of |f|, the scale for the stop rule
};

PanelSums integrate_panels_abs(const std::function<double(double)>& f, double a, double b,
                               int panels) {
    const Rule& gl = gauss_legendre(16);
    const double h = (b - a) / panels;
    PanelSums s;
    for (int p = 0; p < panels; ++p) {
        const double mid = a + (p + 0.5) * h;
        double acc = 0.0, abs_acc = 0.0;
        for (size_t i = 0; i < gl.nodes.size(); ++i) {
            const double v = f(mid + 0.5 * h * gl.nodes[i]);
            acc += gl.weights[i] * v;
            abs_acc += gl.weights[i] * std::abs(v);
        }
        s.integral += 0.5 * h * acc;
        s.absolute += 0.5 * h * abs_acc;
    }
    return s;
}

}  // namespace

double integrate_panels(const std::function<double(double)>& f, double a, double b,
                        int panels) {
    return integrate_panels_abs(f, a, b, panels).integral;
}

double integrate(const std::function<double(double)>& f, double a, double b,
                 double rel_tol, const std::vector<double>& breakpoints) {
    if (!(b > a)) {
        if (b == a) return 0.0;
        throw DomainError("integrate: empty interval");
    }
    std::vector<double> cuts{a, b};
    for (double c : breakpoints)
        if (c > a && c < b) cuts.push_back(c);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    double total = 0.0;
    for (size_t seg = 0; seg + 1 < cuts.size(); ++seg) {
        const double lo = cuts[seg], hi = cuts[seg + 1];
        double prev = integrate_panels(f, lo, hi, 1);
        bool ok = false;
        for (int panels = 2; panels <= (1 << 15); panels *= 2) {
            const PanelSums cur = integrate_panels_abs(f, lo, hi, panels);
            // scale by the integral of |f|: a cancelling integrand cannot be
            // resolved more finely than roundoff on its absolute mass
            if (std::abs(cur.integral - prev) <= rel_tol * cur.absolute + 1e-300) {
                prev = cur.integral;
                ok = true;
                break;
            }
            prev = cur.integral;
        }
        if (!ok) throw NumericError("integrate: composite rule did not converge");
        total += prev;
    }
    return total;
}

double gauss_hermite_2d(const std::function<double(double, double)>& g, int n) {
    const Rule& gh = gauss_hermite(n);
    const size_t m = gh.nodes.size();  // tail nodes may have been dropped
    double acc = 0.0;
    for (size_t i = 0; i < m; ++i)
        for (size_t j = 0; j < m; ++j)
            acc += gh.weights[i] * gh.weights[j] * g(gh.nodes[i], gh.nodes[j]);
    return acc;
}

}  // namespace wicksde::quad
