#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "wicksde/func1d.hpp"

namespace wicksde::law {

// Counter-based stream: value i of stream s under master seed k is a pure
// function of (k, s, i), so streams are splittable and every draw is
// bit-reproducible on any platform. splitmix64 mixing, Box-Muller normals.
class CounterRng {
  public:
    CounterRng(std::uint64_t master_seed, std::uint64_t stream_id);
    double uniform();  // (0,1)
    double normal();   // standard normal

  private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

// n independent N(0, delta) grid increments.
std::vector<double> sample_increments(fn::GridSpec grid, CounterRng& rng);

// sum_k cell_average_k * w_k: the conditional expectation of the integral
// given the increments.
double conditional_integral(const fn::StepFunc& projection, std::span<const double> incr);

// Draws grid increments together with the exact Gaussian integrals of a family
// of integrands. The conditional parts are linear in the increments; the
// residuals are centered Gaussian with the residual covariance matrix,
// factored once by eigendecomposition. Eigenvalues in [-1e-13 * scale, 0) are
// clamped to zero (flag raised); anything more negative is an error.
class JointSampler {
  public:
    JointSampler(std::vector<fn::Func1D> funcs, fn::GridSpec grid);

    struct Draw {
        std::vector<double> increments;
        std::vector<double> exact;        // I(f_j)
        std::vector<double> conditional;  // E[I(f_j) | increments]
    };
    Draw draw(CounterRng& rng) const;

    const std::vector<fn::StepFunc>& projections() const { return projections_; }
    bool clamped() const { return clamped_; }
    int residual_rank() const { return rank_; }

  private:
    fn::GridSpec grid_;
    std::vector<fn::StepFunc> projections_;
    std::vector<std::vector<double>> factor_;  // residual = factor * xi, rank_ columns
    int rank_ = 0;
    bool clamped_ = false;
};

// Monte Carlo aggregation: N samples partitioned over `streams` counter-based
// streams; fn fills `dim` statistics per sample. Partials are reduced in
// stream order, so parallel and sequential runs agree byte for byte;
// `sequential` merely forces single-threaded execution.
struct McMoments {
    double mean = 0.0;
    double se = 0.0;  // standard error of the mean
};
std::vector<McMoments> mc_run(std::uint64_t samples, int streams, std::uint64_t seed,
                              bool sequential, int dim,
                              const std::function<void(CounterRng&, double*)>& fn);

}  // namespace wicksde::law
