#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "expdiff/linalg.hpp"
#include "expdiff/rng.hpp"

// One-parameter exponential-family observation models, their natural
// conjugate priors, and the closed-form marginal likelihood (evidence).
//
// Per dimension the likelihood is h_y(y) exp(eta(theta) T_y(y) - A_y(theta))
// and the conjugate prior is h_th(theta) exp(nu eta - tau A_y - A_th(nu,tau)),
// so the evidence of an aggregated dataset is
//   log h + A_th(nu + sum T, tau + m) - A_th(nu, tau).

namespace expdiff {

class Rng;

enum class FamilyKind {
    normal_fixed_var,
    lognormal_fixed_var,
    poisson,
    exponential,
    gamma_fixed_shape,
    pareto_fixed_scale,
    binomial,
    negbinomial,
    geometric,
    normal_fixed_mean,
    lognormal_fixed_mean,
    weibull_fixed_shape,
};

// Which conjugate prior the family pairs with.
enum class ConjugateKind { normal, gamma, beta, inverse_gamma };

struct LikelihoodFamily {
    FamilyKind kind = FamilyKind::poisson;
    double sigma2 = 1.0;  // normal/lognormal fixed-variance
    double a = 1.0;       // gamma fixed shape
    double xm = 1.0;      // pareto fixed scale
    int n = 1;            // binomial trials
    int r = 1;            // negative binomial successes
    double mu = 0.0;      // normal/lognormal fixed mean
    double k = 1.0;       // weibull fixed shape

    // Parse strings like "poisson", "binomial{n=10}"; throws ConfigError.
    static LikelihoodFamily parse(const std::string& text);
    std::string str() const;

    ConjugateKind conjugate() const;
    // Exposure is defined only for Poisson (Cox use case).
    bool supports_exposure() const { return kind == FamilyKind::poisson; }
    // Validates the fixed hyperparameters; throws ConfigError.
    void validate() const;
};

std::vector<FamilyKind> all_family_kinds();

struct ConjugateHyperparams {
    Vec nu;
    Vec tau;
};

struct ObservationSet {
    Mat values;                 // N x d
    std::vector<std::uint8_t> mask;  // N x d, 1 = observed
    Vec exposure;               // length d, all 1 unless Poisson exposure
    LikelihoodFamily family;

    std::size_t n_samples() const { return values.rows; }
    std::size_t dim() const { return values.cols; }
    bool observed(std::size_t i, std::size_t j) const {
        return mask[i * values.cols + j] != 0;
    }
    // Checks invariants (support of observed cells, exposure rules);
    // throws DomainError/ConfigError.
    void validate() const;
};

// Aggregated sufficient statistics; the per-dimension count generalizes the
// paper's scalar N to masks and Poisson exposure.
struct SuffStatsAgg {
    Vec t_sum;   // sum of T_y over observed cells, per dimension
    Vec count;   // effective observation count m_j
    double log_h = 0.0;  // sum of log h_y over observed cells (incl. exposure)

    std::size_t dim() const { return t_sum.size(); }
};

// ---- Scalar per-family pieces ------------------------------------------

bool value_in_support(const LikelihoodFamily& f, double y);
// Throws DomainError naming family and value.
void check_support(const LikelihoodFamily& f, double y);

double suff_stat(const LikelihoodFamily& f, double y);

// log h_y(y); for Poisson with exposure c the per-cell value gains y*log(c).
double log_base_measure(const LikelihoodFamily& f, double y, double exposure = 1.0);

bool theta_in_domain(const LikelihoodFamily& f, double theta);
double natural_param(const LikelihoodFamily& f, double theta);
// A_y evaluated at eta(theta), expressed as a function of theta.
double lik_log_partition(const LikelihoodFamily& f, double theta);

// log p(y | theta) for a single observation (exposure for Poisson only).
double log_lik_scalar(const LikelihoodFamily& f, double y, double theta,
                      double exposure = 1.0);

// ---- Conjugate prior ----------------------------------------------------

bool zeta_in_domain(const LikelihoodFamily& f, double nu, double tau);
// Per-dimension A_theta; throws DomainError carrying the violated inequality.
double prior_log_partition(const LikelihoodFamily& f, double nu, double tau);

struct AThetaGrad {
    double d_nu = 0.0;
    double d_tau = 0.0;
};
// Analytic partial derivatives of A_theta (digamma terms hand-derived).
AThetaGrad prior_log_partition_grad(const LikelihoodFamily& f, double nu,
                                    double tau);

// log q(theta | nu, tau), the conjugate prior density at theta.
double log_prior_density(const LikelihoodFamily& f, double theta, double nu,
                         double tau);

// Classical parameterization, e.g. Gamma(alpha, beta) or Normal(mu0, var0).
// first/second are (alpha, beta) for gamma/beta/inverse-gamma conjugates and
// (mu0, var0) for the normal conjugate.
std::pair<double, double> zeta_to_classical(const LikelihoodFamily& f,
                                            double nu, double tau);
std::pair<double, double> classical_to_zeta(const LikelihoodFamily& f,
                                            double p1, double p2);

// ---- Aggregation and evidence -------------------------------------------

SuffStatsAgg aggregate(const ObservationSet& obs);

// Closed-form log marginal likelihood, additive across dimensions.
double log_evidence(const LikelihoodFamily& f, const SuffStatsAgg& agg,
                    const ConjugateHyperparams& zeta);

ConjugateHyperparams posterior_update(const ConjugateHyperparams& zeta,
                                      const SuffStatsAgg& agg);

// log p(y | theta) of the whole aggregated dataset.
double log_likelihood(const LikelihoodFamily& f, const SuffStatsAgg& agg,
                      const Vec& theta);

// ---- Simulation ----------------------------------------------------------

// Draw one observation given theta (exposure only for Poisson).
double sample_observation(const LikelihoodFamily& f, double theta, Rng& rng,
                          double exposure = 1.0);

}  // namespace expdiff
