#pragma once

#include <string>
#include <utility>

#include "expdiff/expfam.hpp"

// Deterministic link functions g mapping parameters theta to latent
// coordinates x0 (theta = g^{-1}(x0)). Each is continuously differentiable,
// one-to-one, with nonvanishing derivative on its parameter space.

namespace expdiff {

enum class LinkKind {
    identity,
    exp_link,          // theta = exp(x + shift)
    inv_exp,           // theta = 1 / exp(x)
    scaled_sigmoid,    // theta = sigmoid(s * x)
    shifted_inv_exp,   // theta = 1 / (exp(x) - log(xm)), Pareto shape
    scaled_gamma_shape // theta = a / exp(x), Gamma rate
};

struct LinkSpec {
    LinkKind kind = LinkKind::identity;
    double scale = 1.0;  // s for scaled_sigmoid
    double shift = 0.0;  // additive shift inside exp_link
    double a = 1.0;      // scaled_gamma_shape
    double xm = 1.0;     // shifted_inv_exp offset is log(xm)

    // Grammar: identity | exp | exp{shift=<f>} | inv_exp | sigmoid{s=<f>}
    //          | gamma{a=<f>} | pareto{xm=<f>}
    static LinkSpec parse(const std::string& text);
    std::string str() const;

    bool monotone_increasing() const {
        return kind == LinkKind::identity || kind == LinkKind::exp_link ||
               kind == LinkKind::scaled_sigmoid;
    }
};

// theta = g^{-1}(x); throws DomainError for the Pareto variant when
// exp(x) <= log(xm).
double inv_link_scalar(const LinkSpec& l, double x);
// x = g(theta); throws DomainError when theta is outside the link's range.
double link_scalar(const LinkSpec& l, double theta);
// d theta / d x at x.
double inv_link_deriv(const LinkSpec& l, double x);

Vec inv_link(const LinkSpec& l, const Vec& x);
Vec link(const LinkSpec& l, const Vec& theta);

// The Table A1 row for the family; sigmoid families take a configurable
// scale s (default 1).
LinkSpec default_link(const LikelihoodFamily& f, double sigmoid_scale = 1.0);

// Conjugate-prior sufficient statistics of theta = g^{-1}(x0), per dimension:
// first = eta(theta_j), second = -A_y(eta(theta_j)).
std::pair<Vec, Vec> t_theta(const LikelihoodFamily& f, const LinkSpec& l,
                            const Vec& x0);

}  // namespace expdiff
