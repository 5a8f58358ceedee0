#include "expdiff/guidance.hpp"

#include <algorithm>
#include <cmath>

#include "expdiff/errors.hpp"

namespace expdiff {

namespace {

void check_inputs(const GuidanceContext& ctx, const Vec& xt, double t) {
    if (xt.size() != ctx.dim())
        throw ConfigError("guidance: x_t dimension mismatch");
    if (!(t >= ctx.sched.eps && t <= 1.0))
        throw DomainError("guidance: t outside [eps, 1]");
}

bool dim_active(const SuffStatsAgg& agg, std::size_t j) {
    return agg.count[j] != 0.0 || agg.t_sum[j] != 0.0;
}

}  // namespace

Vec prior_score(const GuidanceContext& ctx, const Vec& xt, double t) {
    check_inputs(ctx, xt, t);
    if (!ctx.score_net) throw ConfigError("guidance: score network not set");
    DenseNetwork::Workspace ws;
    const Vec& eps_hat = ctx.score_net->forward(xt, t, ws);
    const double sv = std::sqrt(v(ctx.sched, t));
    Vec s(eps_hat.size());
    for (std::size_t j = 0; j < s.size(); ++j) s[j] = -eps_hat[j] / sv;
    return s;
}

double evidence_log_density(const GuidanceContext& ctx, const Vec& xt, double t) {
    check_inputs(ctx, xt, t);
    if (!ctx.inference_net)
        throw ConfigError("guidance: inference network not set");
    const std::size_t d = ctx.dim();
    DenseNetwork::Workspace ws;
    const Vec& out = ctx.inference_net->forward(xt, t, ws);
    double acc = ctx.agg.log_h;
    for (std::size_t j = 0; j < d; ++j) {
        if (!dim_active(ctx.agg, j)) continue;
        const ZetaAndJacobian zj = ctx.domain_map.map(out[j], out[d + j]);
        acc += prior_log_partition(ctx.family, zj.nu + ctx.agg.t_sum[j],
                                   zj.tau + ctx.agg.count[j]) -
               prior_log_partition(ctx.family, zj.nu, zj.tau);
    }
    return acc;
}

Vec evidence_score(const GuidanceContext& ctx, const Vec& xt, double t) {
    check_inputs(ctx, xt, t);
    if (!ctx.inference_net)
        throw ConfigError("guidance: inference network not set");
    const std::size_t d = ctx.dim();
    DenseNetwork::Workspace ws;
    const Vec& out = ctx.inference_net->forward(xt, t, ws);
    Vec cot(2 * d, 0.0);
    for (std::size_t j = 0; j < d; ++j) {
        if (!dim_active(ctx.agg, j)) continue;
        const ZetaAndJacobian zj = ctx.domain_map.map(out[j], out[d + j]);
        const AThetaGrad g_post = prior_log_partition_grad(
            ctx.family, zj.nu + ctx.agg.t_sum[j], zj.tau + ctx.agg.count[j]);
        const AThetaGrad g_prior =
            prior_log_partition_grad(ctx.family, zj.nu, zj.tau);
        const double dnu = g_post.d_nu - g_prior.d_nu;
        const double dtau = g_post.d_tau - g_prior.d_tau;
        cot[j] = dnu * zj.j[0][0] + dtau * zj.j[1][0];
        cot[d + j] = dnu * zj.j[0][1] + dtau * zj.j[1][1];
    }
    Vec gx;
    ctx.inference_net->backward(ws, cot, nullptr, &gx);
    return gx;
}

Vec posterior_score(const GuidanceContext& ctx, const Vec& xt, double t) {
    Vec s = prior_score(ctx, xt, t);
    Vec g = evidence_score(ctx, xt, t);
    if (ctx.clip_total) {
        for (std::size_t j = 0; j < s.size(); ++j)
            s[j] = std::clamp(s[j] + g[j], -ctx.clip, ctx.clip);
    } else {
        for (std::size_t j = 0; j < s.size(); ++j)
            s[j] += std::clamp(g[j], -ctx.clip, ctx.clip);
    }
    return s;
}

Vec tweedie_x0hat(const DiffusionSchedule& sched, const Vec& xt, double t,
                  const Vec& score) {
    const double a = alpha(sched, t);
    const double sa = std::sqrt(a);
    Vec x0(xt.size());
    for (std::size_t j = 0; j < xt.size(); ++j)
        x0[j] = (xt[j] + (1.0 - a) * score[j]) / sa;
    return x0;
}

Vec dps_score(const GuidanceContext& ctx, const Vec& xt, double t,
              DpsVariant variant, const DpsParams& params) {
    check_inputs(ctx, xt, t);
    if (!ctx.score_net) throw ConfigError("dps: score network not set");
    if (!ctx.obs) throw ConfigError("dps: raw observations not attached");
    const std::size_t d = ctx.dim();
    const ObservationSet& obs = *ctx.obs;

    DenseNetwork::Workspace ws;
    const Vec& eps_hat = ctx.score_net->forward(xt, t, ws);
    const double vt = v(ctx.sched, t);
    const double sv = std::sqrt(vt);
    Vec score(d);
    for (std::size_t j = 0; j < d; ++j) score[j] = -eps_hat[j] / sv;

    const Vec x0_hat = tweedie_x0hat(ctx.sched, xt, t, score);
    Vec theta_hat(d), dtheta(d);
    for (std::size_t j = 0; j < d; ++j) {
        theta_hat[j] = inv_link_scalar(ctx.link, x0_hat[j]);
        dtheta[j] = inv_link_deriv(ctx.link, x0_hat[j]);
    }

    // Residual accumulation over observed cells; w_j = sum_i Lambda_ij r_ij.
    Vec w(d, 0.0);
    double resid_sq = 0.0;
    for (std::size_t i = 0; i < obs.n_samples(); ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            if (!obs.observed(i, j)) continue;
            double y = obs.values(i, j);
            if (variant == DpsVariant::poisson_shot) {
                if (y == 0.0) {
                    if (params.zero_offset > 0.0)
                        y = params.zero_offset;
                    else
                        throw DomainError(
                            "poisson_shot: zero count without a configured "
                            "zero-count offset");
                }
            }
            const double r = y - theta_hat[j];
            resid_sq += r * r;
            const double lambda =
                variant == DpsVariant::poisson_shot ? 1.0 / (2.0 * y) : 1.0;
            w[j] += lambda * r;
        }
    }

    double rho;
    if (variant == DpsVariant::normal) {
        rho = 1.0 / ctx.family.sigma2;
    } else {
        const double denom = std::sqrt(resid_sq);
        rho = denom > 0.0 ? params.rho_prime / denom : 0.0;
    }

    // grad_{x0_hat} of sum_i ||r_i||^2_Lambda is -2 * dtheta .* w; pull it
    // back through x0_hat(x_t) with one VJP through the score network.
    Vec u(d);
    for (std::size_t j = 0; j < d; ++j) u[j] = -2.0 * dtheta[j] * w[j];
    // J^T u = (u + v_t * (ds/dx)^T u) / sqrt(alpha); ds/dx = -(deps/dx)/sv.
    Vec gx;
    ctx.score_net->backward(ws, u, nullptr, &gx);
    const double sa = std::sqrt(alpha(ctx.sched, t));
    Vec result(d);
    for (std::size_t j = 0; j < d; ++j) {
        const double jt_u = (u[j] - vt * gx[j] / sv) / sa;
        result[j] = score[j] - rho * jt_u;
    }
    return result;
}

}  // namespace expdiff
