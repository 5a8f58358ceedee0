#include "expdiff/sde.hpp"

#include <cmath>
#include <string>

#include "expdiff/errors.hpp"

namespace expdiff {

void DiffusionSchedule::validate() const {
    if (!(beta0 > 0) || !(beta1 > beta0))
        throw ConfigError("schedule requires 0 < beta0 < beta1");
    if (!(eps > 0) || !(eps < 1))
        throw ConfigError("schedule requires 0 < eps < 1");
}

namespace {
void check_t(double t) {
    if (!(t >= 0.0 && t <= 1.0))
        throw DomainError("diffusion time t = " + std::to_string(t) +
                          " outside [0, 1]");
}
}  // namespace

double alpha(const DiffusionSchedule& s, double t) {
    check_t(t);
    return std::exp(-(t * s.beta0 + (s.beta1 - s.beta0) * t * t / 2.0));
}

double v(const DiffusionSchedule& s, double t) { return 1.0 - alpha(s, t); }

Vec sample_forward(const DiffusionSchedule& s, const Vec& x0, double t,
                   Rng& rng) {
    Vec z;
    return sample_forward(s, x0, t, rng, z);
}

Vec sample_forward(const DiffusionSchedule& s, const Vec& x0, double t,
                   Rng& rng, Vec& z_out) {
    const double sa = std::sqrt(alpha(s, t));
    const double sv = std::sqrt(v(s, t));
    z_out = rng.normal_vec(x0.size());
    Vec xt(x0.size());
    for (std::size_t i = 0; i < x0.size(); ++i)
        xt[i] = sa * x0[i] + sv * z_out[i];
    return xt;
}

Vec cond_score_target(const DiffusionSchedule& s, const Vec& x0, const Vec& xt,
                      double t) {
    const double a = alpha(s, t);
    const double vt = 1.0 - a;
    if (!(vt > 0.0))
        throw DomainError("conditional score undefined at t = " +
                          std::to_string(t) + " (v_t = 0)");
    const double sa = std::sqrt(a);
    Vec out(x0.size());
    for (std::size_t i = 0; i < x0.size(); ++i)
        out[i] = -(xt[i] - sa * x0[i]) / vt;
    return out;
}

double dsm_weight(const DiffusionSchedule& s, double t) { return v(s, t); }

}  // namespace expdiff
