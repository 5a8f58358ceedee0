#include "expdiff/special.hpp"

#include <cmath>
#include <string>

#include "expdiff/errors.hpp"

namespace expdiff {

namespace {

constexpr double kHalfLog2Pi = 0.91893853320467274178;  // log(2*pi)/2

// Lanczos coefficients for g = 7, n = 9 (Godfrey's set).
constexpr double kLanczos[9] = {
    0.99999999999980993,    676.5203681218851,     -1259.1392167224028,
    771.32342877765313,     -176.61502916214059,   12.507343278686905,
    -0.13857109526572012,   9.9843695780195716e-6, 1.5056327351493116e-7,
};

double lanczos_core(double x) {
    // Valid for x >= 0.5.
    const double z = x - 1.0;
    double a = kLanczos[0];
    for (int i = 1; i < 9; ++i) a += kLanczos[i] / (z + i);
    const double t = z + 7.5;
    return kHalfLog2Pi + (z + 0.5) * std::log(t) - t + std::log(a);
}

}  // namespace

double lgamma_pos(double x) {
    if (!(x > 0.0))
        throw DomainError("lgamma: argument must be positive, got " +
                          std::to_string(x));
    if (x < 0.5) {
        // Reflection; sin(pi*x) > 0 on (0, 0.5).
        return std::log(M_PI / std::sin(M_PI * x)) - lanczos_core(1.0 - x);
    }
    return lanczos_core(x);
}

double digamma_pos(double x) {
    if (!(x > 0.0))
        throw DomainError("digamma: argument must be positive, got " +
                          std::to_string(x));
    double acc = 0.0;
    while (x < 10.0) {
        acc -= 1.0 / x;
        x += 1.0;
    }
    const double inv = 1.0 / x;
    const double inv2 = inv * inv;
    // Asymptotic series with Bernoulli coefficients through x^-12.
    double series = -0.5 * inv;
    series -= inv2 * (1.0 / 12.0 -
                      inv2 * (1.0 / 120.0 -
                              inv2 * (1.0 / 252.0 -
                                      inv2 * (1.0 / 240.0 -
                                              inv2 * (1.0 / 132.0 -
                                                      inv2 * (691.0 / 32760.0))))));
    return acc + std::log(x) + series;
}

double softplus(double x) {
    if (x > 30.0) return x;
    if (x < -30.0) return std::exp(x);
    return std::log1p(std::exp(x));
}

double logistic(double x) {
    if (x >= 0.0) {
        const double e = std::exp(-x);
        return 1.0 / (1.0 + e);
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

}  // namespace expdiff
