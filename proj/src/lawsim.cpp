#include "wicksde/lawsim.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <thread>

namespace wicksde::law {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

}  // namespace

CounterRng::CounterRng(std::uint64_t master_seed, std::uint64_t stream_id)
    : key_(splitmix64(splitmix64(master_seed) ^ (stream_id * 0xD2B74407B1CE6E93ull))) {}

double CounterRng::uniform() {
    const std::uint64_t bits = splitmix64(key_ ^ counter_++);
    // top 53 bits -> (0,1)
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

double CounterRng::normal() {
    if (have_spare_) {
        have_spare_ = false;
        return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
}

std::vector<double> sample_increments(fn::GridSpec grid, CounterRng& rng) {
    std::vector<double> w(grid.n);
    const double sd = std::sqrt(grid.delta());
    for (double& v : w) v = sd * rng.normal();
    return w;
}

double conditional_integral(const fn::StepFunc& projection, std::span<const double> incr) {
    if (incr.size() != projection.values.size())
        throw ConfigError("conditional_integral: increment count mismatch");
    double acc = 0.0;
    for (size_t k = 0; k < incr.size(); ++k) acc += projection.values[k] * incr[k];
    return acc;
}

JointSampler::JointSampler(std::vector<fn::Func1D> funcs, fn::GridSpec grid) : grid_(grid) {
    if (funcs.empty()) throw ConfigError("JointSampler: need at least one integrand");
    const int m = static_cast<int>(funcs.size());
    for (const auto& f : funcs) projections_.push_back(fn::project(f, grid));

    const auto gram = fn::residual_gram_matrix(funcs, grid);
    Eigen::MatrixXd G(m, m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) G(i, j) = 0.5 * (gram[i][j] + gram[j][i]);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G);
    if (es.info() != Eigen::Success)
        throw NumericError("JointSampler: residual covariance eigensolve failed");
    const double scale = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
    for (int i = 0; i < m; ++i) {
        double lam = es.eigenvalues()(i);
        if (lam < -1e-13 * scale)
            throw NumericError("JointSampler: residual covariance is indefinite");
        if (lam < 0.0) {
            lam = 0.0;
            clamped_ = true;
        }
        if (lam > 0.0) {
            std::vector<double> col(m);
            const double sd = std::sqrt(lam);
            for (int r = 0; r < m; ++r) col[r] = sd * es.eigenvectors()(r, i);
            factor_.push_back(std::move(col));
        }
    }
    rank_ = static_cast<int>(factor_.size());
}

JointSampler::Draw JointSampler::draw(CounterRng& rng) const {
    Draw d;
    d.increments = sample_increments(grid_, rng);
    const size_t m = projections_.size();
    d.conditional.resize(m);
    d.exact.resize(m);
    for (size_t j = 0; j < m; ++j)
        d.conditional[j] = conditional_integral(projections_[j], d.increments);
    d.exact = d.conditional;
    for (const auto& col : factor_) {
        const double xi = rng.normal();
        for (size_t j = 0; j < m; ++j) d.exact[j] += col[j] * xi;
    }
    return d;
}

std::vector<McMoments> mc_run(std::uint64_t samples, int streams, std::uint64_t seed,
                              bool sequential, int dim,
                              const std::function<void(CounterRng&, double*)>& fn) {
    if (samples == 0) throw ConfigError("mc_run: need at least one sample");
    if (streams < 1) throw ConfigError("mc_run: need at least one stream");
    if (static_cast<std::uint64_t>(streams) > samples) streams = static_cast<int>(samples);

    struct Partial {
        std::vector<double> sum, sumsq;
        std::uint64_t count = 0;
    };
    std::vector<Partial> partials(streams);
    const auto run_stream = [&](int s) {
        const std::uint64_t lo = samples * s / streams;
        const std::uint64_t hi = samples * (s + 1) / streams;
        CounterRng rng(seed, static_cast<std::uint64_t>(s));
        Partial p;
        p.sum.assign(dim, 0.0);
        p.sumsq.assign(dim, 0.0);
        std::vector<double> out(dim);
        for (std::uint64_t i = lo; i < hi; ++i) {
            fn(rng, out.data());
            for (int d = 0; d < dim; ++d) {
                p.sum[d] += out[d];
                p.sumsq[d] += out[d] * out[d];
            }
            ++p.count;
        }
        partials[s] = std::move(p);
    };

    if (sequential || streams == 1) {
        for (int s = 0; s < streams; ++s) run_stream(s);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(streams);
        for (int s = 0; s < streams; ++s) pool.emplace_back(run_stream, s);
        for (auto& t : pool) t.join();
    }

    std::vector<McMoments> out(dim);
    std::vector<double> sum(dim, 0.0), sumsq(dim, 0.0);
    std::uint64_t count = 0;
    for (const auto& p : partials) {  // fixed stream order: deterministic reduce
        for (int d = 0; d < dim; ++d) {
            sum[d] += p.sum[d];
            sumsq[d] += p.sumsq[d];
        }
        count += p.count;
    }
    for (int d = 0; d < dim; ++d) {
        const double mean = sum[d] / count;
        const double var = std::max(0.0, sumsq[d] / count - mean * mean);
        out[d].mean = mean;
        out[d].se = count > 1 ? std::sqrt(var / (count - 1.0)) : 0.0;
    }
    return out;
}

}  // namespace wicksde::law
