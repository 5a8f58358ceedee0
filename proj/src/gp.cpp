#include "expdiff/gp.hpp"

#include <cmath>

#include "expdiff/errors.hpp"

namespace expdiff {

namespace {
constexpr double kLog2Pi = 1.8378770664093454836;

// Plain lower-triangular Cholesky; returns false on a nonpositive pivot.
bool cholesky(const Mat& A, Mat& L) {
    const std::size_t n = A.rows;
    L = Mat(n, n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double s = A(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= L(i, k) * L(j, k);
            if (i == j) {
                if (!(s > 0.0)) return false;
                L(i, j) = std::sqrt(s);
            } else {
                L(i, j) = s / L(j, j);
            }
        }
    }
    return true;
}
}  // namespace

Vec grid_points(std::size_t d) {
    Vec pts(d, 0.0);
    if (d > 1)
        for (std::size_t i = 0; i < d; ++i)
            pts[i] = static_cast<double>(i) / static_cast<double>(d - 1);
    return pts;
}

Mat build_covariance(const Vec& points, const RbfKernelParams& params) {
    if (!(params.variance > 0) || !(params.lengthscale > 0))
        throw ConfigError("RBF kernel parameters must be strictly positive");
    const std::size_t d = points.size();
    Mat K(d, d);
    const double inv2l2 = 1.0 / (2.0 * params.lengthscale * params.lengthscale);
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            const double diff = points[i] - points[j];
            const double v = params.variance * std::exp(-diff * diff * inv2l2);
            K(i, j) = v;
            K(j, i) = v;
        }
    }
    return K;
}

GpFactor cholesky_with_jitter(const Mat& K, const Vec& points) {
    if (K.rows != K.cols || K.rows != points.size())
        throw ConfigError("covariance shape mismatch");
    GpFactor f;
    f.points = points;
    Mat trial = K;
    double jitter = 0.0;
    for (int k = 0; k <= 6; ++k) {
        if (k > 0) {
            jitter = 1e-10 * std::pow(10.0, k - 1);
            trial = K;
            for (std::size_t i = 0; i < K.rows; ++i) trial(i, i) += jitter;
        }
        if (cholesky(trial, f.chol)) {
            f.jitter = jitter;
            return f;
        }
    }
    throw NumericalError("cholesky failed after max jitter escalation");
}

GpFactor make_gp_prior(std::size_t d, const RbfKernelParams& params) {
    const Vec pts = grid_points(d);
    return cholesky_with_jitter(build_covariance(pts, params), pts);
}

Vec gp_sample(const GpFactor& factor, Rng& rng) {
    const std::size_t d = factor.dim();
    Vec z = rng.normal_vec(d);
    Vec x(d, 0.0);
    for (std::size_t i = 0; i < d; ++i) {
        double s = 0.0;
        for (std::size_t k = 0; k <= i; ++k) s += factor.chol(i, k) * z[k];
        x[i] = s;
    }
    return x;
}

void gp_solve(const GpFactor& factor, Vec& b) {
    const std::size_t d = factor.dim();
    // Forward substitution L y = b.
    for (std::size_t i = 0; i < d; ++i) {
        double s = b[i];
        for (std::size_t k = 0; k < i; ++k) s -= factor.chol(i, k) * b[k];
        b[i] = s / factor.chol(i, i);
    }
    // Back substitution L^T x = y.
    for (std::size_t ii = d; ii-- > 0;) {
        double s = b[ii];
        for (std::size_t k = ii + 1; k < d; ++k) s -= factor.chol(k, ii) * b[k];
        b[ii] = s / factor.chol(ii, ii);
    }
}

double gp_log_density(const GpFactor& factor, const Vec& x0) {
    const std::size_t d = factor.dim();
    if (x0.size() != d) throw ConfigError("gp_log_density dimension mismatch");
    // Solve L y = x0; then x0^T K^{-1} x0 = ||y||^2.
    Vec y = x0;
    double logdet = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
        double s = y[i];
        for (std::size_t k = 0; k < i; ++k) s -= factor.chol(i, k) * y[k];
        y[i] = s / factor.chol(i, i);
        logdet += std::log(factor.chol(i, i));
    }
    const double quad = kernels::sumsq(y.data(), d);
    return -0.5 * static_cast<double>(d) * kLog2Pi - logdet - 0.5 * quad;
}

}  // namespace expdiff
