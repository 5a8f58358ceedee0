#pragma once

#include <functional>

#include "expdiff/linalg.hpp"
#include "expdiff/rng.hpp"

// Adaptive random-walk Metropolis reference sampler with split-Rhat
// convergence diagnostics. Fills the ground-truth role of the benchmark.

namespace expdiff {

struct McmcConfig {
    int chains = 4;
    long iters = 200000;
    long burn_in = 50000;
    double target_accept = 0.234;
    std::uint64_t seed = 0;

    void validate() const;
};

using LogTargetFn = std::function<double(const Vec&)>;

struct McmcResult {
    Mat samples;            // post burn-in draws, chains concatenated
    Vec rhat;               // split-Rhat per dimension
    Vec accept_rate;        // per chain, post burn-in
    Vec proposal_scale;     // per chain, frozen after burn-in
};

// Gaussian proposals, scale adapted toward target_accept during burn-in and
// frozen after; chains start at the origin. Throws NumericalError when the
// start stalls (all proposals rejected for 10*d consecutive initial steps).
McmcResult rwm_sample(const LogTargetFn& log_target, std::size_t d,
                      const McmcConfig& cfg);

}  // namespace expdiff
