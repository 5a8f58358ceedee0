#pragma once

#include "expdiff/linalg.hpp"
#include "expdiff/rng.hpp"

// Zero-mean Gaussian-process prior on a 1-D grid with an RBF kernel,
// k(s, s') = variance * exp(-(s - s')^2 / (2 lengthscale^2)).

namespace expdiff {

struct RbfKernelParams {
    double variance = 1.0;
    double lengthscale = 0.1;
};

struct GpFactor {
    Vec points;     // grid locations, length d
    Mat chol;       // lower-triangular factor of K + jitter*I
    double jitter = 0.0;  // jitter actually applied

    std::size_t dim() const { return points.size(); }
};

// d equally spaced points on [0, 1] (single point at 0 when d == 1).
Vec grid_points(std::size_t d);

Mat build_covariance(const Vec& points, const RbfKernelParams& params);

// Cholesky with jitter escalation 1e-10 * 10^k, k <= 6; throws
// NumericalError when all levels fail.
GpFactor cholesky_with_jitter(const Mat& K, const Vec& points);

// Convenience: covariance + factorization on the default grid.
GpFactor make_gp_prior(std::size_t d, const RbfKernelParams& params);

// x0 = chol * z with z standard normal.
Vec gp_sample(const GpFactor& factor, Rng& rng);

// Exact multivariate normal log pdf using the factor.
double gp_log_density(const GpFactor& factor, const Vec& x0);

// Solve (L L^T) x = b in place using the factor.
void gp_solve(const GpFactor& factor, Vec& b);

}  // namespace expdiff
