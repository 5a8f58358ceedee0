#pragma once

#include "expdiff/domain_map.hpp"
#include "expdiff/link.hpp"
#include "expdiff/net.hpp"
#include "expdiff/sde.hpp"

// The evidence-trick likelihood log-density
//   log h + A_theta(T + nu(x_t), tau(x_t) + m) - A_theta(nu(x_t), tau(x_t)),
// its gradient with respect to x_t (the likelihood score), the composed
// posterior score, and the DPS baselines.

namespace expdiff {

struct GuidanceContext {
    LikelihoodFamily family;
    LinkSpec link;
    SuffStatsAgg agg;
    const DenseNetwork* inference_net = nullptr;  // output 2d
    DomainMap domain_map{LikelihoodFamily{}};
    const DenseNetwork* score_net = nullptr;  // output d
    DiffusionSchedule sched;
    double clip = 10.0;       // componentwise bound on the guidance term
    bool clip_total = false;  // exact-paper mode: clip prior + guidance
    const ObservationSet* obs = nullptr;  // raw observations, used by DPS only

    std::size_t dim() const { return agg.dim(); }
};

// Prior score from the noise-prediction network: -eps_hat(x_t, t)/sqrt(v_t).
Vec prior_score(const GuidanceContext& ctx, const Vec& xt, double t);

double evidence_log_density(const GuidanceContext& ctx, const Vec& xt, double t);

// Exact gradient of evidence_log_density with respect to x_t, propagated
// through the inference network, the domain map, and the A_theta partials.
Vec evidence_score(const GuidanceContext& ctx, const Vec& xt, double t);

// prior score + clamped likelihood score (clamping applies to the summed
// guidance term when clip_total is set).
Vec posterior_score(const GuidanceContext& ctx, const Vec& xt, double t);

// x0_hat = (x_t + (1 - alpha_t) * score) / sqrt(alpha_t).
Vec tweedie_x0hat(const DiffusionSchedule& sched, const Vec& xt, double t,
                  const Vec& score);

enum class DpsVariant { normal, poisson_ls, poisson_shot };

struct DpsParams {
    double rho_prime = 0.3;   // Poisson step-size hyperparameter
    double zero_offset = 0.0; // replaces zero counts when > 0 (paper: 0.01)
};

// Baseline guidance: prior score minus the variant's weighted residual-norm
// gradient at the Tweedie estimate, with the Jacobian of x0_hat handled by a
// vector-Jacobian product through the score network.
Vec dps_score(const GuidanceContext& ctx, const Vec& xt, double t,
              DpsVariant variant, const DpsParams& params = {});

}  // namespace expdiff
