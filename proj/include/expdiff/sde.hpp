#pragma once

#include "expdiff/linalg.hpp"
#include "expdiff/rng.hpp"

// VP-SDE with linear noise schedule beta(t) = beta0 + t (beta1 - beta0).
// Forward kernel: x_t | x_0 ~ N(sqrt(alpha_t) x_0, v_t I) with
// alpha_t = exp(-(t beta0 + (beta1 - beta0) t^2 / 2)), v_t = 1 - alpha_t.

namespace expdiff {

struct DiffusionSchedule {
    double beta0 = 0.001;
    double beta1 = 20.0;
    double eps = 1e-3;  // lower time cutoff

    void validate() const;
    double beta(double t) const { return beta0 + t * (beta1 - beta0); }
};

double alpha(const DiffusionSchedule& s, double t);
double v(const DiffusionSchedule& s, double t);

// x_t = sqrt(alpha_t) x0 + sqrt(v_t) z.
Vec sample_forward(const DiffusionSchedule& s, const Vec& x0, double t, Rng& rng);
// Same draw but also returns the noise z used (denoising target).
Vec sample_forward(const DiffusionSchedule& s, const Vec& x0, double t, Rng& rng,
                   Vec& z_out);

// grad_{x_t} log p(x_t | x0) = -(x_t - sqrt(alpha_t) x0) / v_t.
Vec cond_score_target(const DiffusionSchedule& s, const Vec& x0, const Vec& xt,
                      double t);

// lambda(t) = 1 / E||cond score||^2 per coordinate = v_t.
double dsm_weight(const DiffusionSchedule& s, double t);

}  // namespace expdiff
