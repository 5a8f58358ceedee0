#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "expdiff/errors.hpp"
#include "expdiff/expfam.hpp"
#include "support/quadrature.hpp"
#include "support/test_util.hpp"

using namespace expdiff;
using testsupport::FamilyCase;
using testsupport::random_family_case;
using testsupport::to_observation_set;

namespace {
LikelihoodFamily fam(FamilyKind k) {
    LikelihoodFamily f;
    f.kind = k;
    return f;
}
}  // namespace

TEST_CASE("sufficient statistics per the family rows") {
    CHECK(suff_stat(fam(FamilyKind::poisson), 3) == doctest::Approx(3.0));
    LikelihoodFamily pareto = fam(FamilyKind::pareto_fixed_scale);
    pareto.xm = 1.0;
    CHECK(suff_stat(pareto, 1.0) == doctest::Approx(0.0));
    LikelihoodFamily nfm = fam(FamilyKind::normal_fixed_mean);
    nfm.mu = 2.0;
    CHECK(suff_stat(nfm, 1.0) == doctest::Approx(1.5));
}

TEST_CASE("log base measure per the family rows") {
    CHECK(log_base_measure(fam(FamilyKind::poisson), 0) == doctest::Approx(0.0));
    CHECK(log_base_measure(fam(FamilyKind::poisson), 3) ==
          doctest::Approx(-std::log(6.0)));
    CHECK(log_base_measure(fam(FamilyKind::exponential), 5) ==
          doctest::Approx(0.0));
}

TEST_CASE("natural parameter and likelihood log-partition") {
    CHECK(natural_param(fam(FamilyKind::poisson), 1.0) == doctest::Approx(0.0));
    CHECK(lik_log_partition(fam(FamilyKind::poisson), 1.0) ==
          doctest::Approx(1.0));
    LikelihoodFamily binom = fam(FamilyKind::binomial);
    binom.n = 10;
    CHECK(natural_param(binom, 0.5) == doctest::Approx(0.0));
    CHECK(lik_log_partition(binom, 0.5) ==
          doctest::Approx(10.0 * std::log(2.0)));
    CHECK(natural_param(fam(FamilyKind::exponential), 2.0) ==
          doctest::Approx(-2.0));
    CHECK(lik_log_partition(fam(FamilyKind::exponential), 2.0) ==
          doctest::Approx(-std::log(2.0)));
}

TEST_CASE("out-of-support and out-of-domain raise DomainError") {
    CHECK_THROWS_AS(suff_stat(fam(FamilyKind::poisson), 1.5), DomainError);
    CHECK_THROWS_AS(suff_stat(fam(FamilyKind::poisson), -1), DomainError);
    LikelihoodFamily binom = fam(FamilyKind::binomial);
    binom.n = 3;
    CHECK_THROWS_AS(suff_stat(binom, 4), DomainError);
    CHECK_THROWS_AS(natural_param(fam(FamilyKind::poisson), -0.1), DomainError);
    CHECK_THROWS_AS(natural_param(binom, 1.0), DomainError);
    CHECK_THROWS_AS(prior_log_partition(fam(FamilyKind::poisson), -1.0, 1.0),
                    DomainError);
    // Integrality tolerance: 3 + 1e-10 rounds, 3.1 does not.
    CHECK(suff_stat(fam(FamilyKind::poisson), 3 + 1e-10) == doctest::Approx(3));
}

TEST_CASE("prior log partition pinned values") {
    CHECK(prior_log_partition(fam(FamilyKind::poisson), 0, 1) ==
          doctest::Approx(0.0));
    // log Gamma(2) - 2 log 2.
    CHECK(prior_log_partition(fam(FamilyKind::poisson), 1, 2) ==
          doctest::Approx(-2.0 * std::log(2.0)));
    LikelihoodFamily binom = fam(FamilyKind::binomial);
    binom.n = 4;
    CHECK(prior_log_partition(binom, 0, 0) == doctest::Approx(0.0));
}

TEST_CASE("aggregate basics") {
    ObservationSet obs;
    obs.family = fam(FamilyKind::poisson);
    obs.values = Mat(2, 1);
    obs.values(0, 0) = 1;
    obs.values(1, 0) = 2;
    obs.mask = {1, 1};
    obs.exposure = {1.0};
    SuffStatsAgg agg = aggregate(obs);
    CHECK(agg.t_sum[0] == doctest::Approx(3.0));
    CHECK(agg.count[0] == doctest::Approx(2.0));

    obs.mask = {0, 0};
    agg = aggregate(obs);
    CHECK(agg.t_sum[0] == 0.0);
    CHECK(agg.count[0] == 0.0);
    CHECK(agg.log_h == 0.0);

    // Poisson exposure: count picks up the exposure weight, y=0 keeps log_h=0.
    obs.values = Mat(1, 1, 0.0);
    obs.mask = {1};
    obs.exposure = {2.0};
    agg = aggregate(obs);
    CHECK(agg.count[0] == doctest::Approx(2.0));
    CHECK(agg.log_h == doctest::Approx(0.0));
}

TEST_CASE("non-unit exposure rejected outside poisson") {
    ObservationSet obs;
    obs.family = fam(FamilyKind::exponential);
    obs.values = Mat(1, 1, 1.0);
    obs.mask = {1};
    obs.exposure = {2.0};
    CHECK_THROWS_AS(aggregate(obs), DomainError);
}

TEST_CASE("log evidence pinned examples") {
    // poisson, y=0, zeta=(0,1): integral of e^-theta * e^-theta = 1/2.
    {
        ObservationSet obs;
        obs.family = fam(FamilyKind::poisson);
        obs.values = Mat(1, 1, 0.0);
        obs.mask = {1};
        obs.exposure = {1.0};
        ConjugateHyperparams zeta{{0.0}, {1.0}};
        CHECK(log_evidence(obs.family, aggregate(obs), zeta) ==
              doctest::Approx(std::log(0.5)).epsilon(1e-12));
    }
    // poisson, y=3, zeta=(2,1): negative-binomial NB(r=3, p=1/2) pmf at 3.
    {
        ObservationSet obs;
        obs.family = fam(FamilyKind::poisson);
        obs.values = Mat(1, 1, 3.0);
        obs.mask = {1};
        obs.exposure = {1.0};
        ConjugateHyperparams zeta{{2.0}, {1.0}};
        CHECK(log_evidence(obs.family, aggregate(obs), zeta) ==
              doctest::Approx(std::log(10.0 / 64.0)).epsilon(1e-12));
    }
    // Empty aggregate: A_theta terms cancel.
    {
        SuffStatsAgg agg;
        agg.t_sum = {0.0};
        agg.count = {0.0};
        ConjugateHyperparams zeta{{0.5}, {1.5}};
        CHECK(log_evidence(fam(FamilyKind::poisson), agg, zeta) ==
              doctest::Approx(0.0));
    }
}

TEST_CASE("posterior update rule") {
    SuffStatsAgg agg;
    agg.t_sum = {3.0};
    agg.count = {1.0};
    ConjugateHyperparams zeta{{0.0}, {1.0}};
    auto post = posterior_update(zeta, agg);
    CHECK(post.nu[0] == doctest::Approx(3.0));
    CHECK(post.tau[0] == doctest::Approx(2.0));

    // Binomial worked example from the update rule.
    LikelihoodFamily binom = fam(FamilyKind::binomial);
    binom.n = 10;
    ObservationSet obs;
    obs.family = binom;
    obs.values = Mat(1, 1, 4.0);
    obs.mask = {1};
    obs.exposure = {1.0};
    auto agg2 = aggregate(obs);
    ConjugateHyperparams z2{{1.0}, {0.5}};
    auto post2 = posterior_update(z2, agg2);
    CHECK(post2.nu[0] == doctest::Approx(5.0));
    CHECK(post2.tau[0] == doctest::Approx(1.5));
}

TEST_CASE("classical mapping pinned rows and round trip") {
    auto [nu_p, tau_p] = classical_to_zeta(fam(FamilyKind::poisson), 1.0, 1.0);
    CHECK(nu_p == doctest::Approx(0.0));
    CHECK(tau_p == doctest::Approx(1.0));
    auto [nu_e, tau_e] = classical_to_zeta(fam(FamilyKind::exponential), 2.0, 3.0);
    CHECK(nu_e == doctest::Approx(3.0));
    CHECK(tau_e == doctest::Approx(1.0));

    std::mt19937_64 gen(11);
    for (FamilyKind kind : all_family_kinds()) {
        for (int rep = 0; rep < 20; ++rep) {
            const FamilyCase c = random_family_case(kind, gen);
            auto [p1, p2] = zeta_to_classical(c.family, c.nu, c.tau);
            auto [nu2, tau2] = classical_to_zeta(c.family, p1, p2);
            CHECK(nu2 == doctest::Approx(c.nu).epsilon(1e-12));
            CHECK(tau2 == doctest::Approx(c.tau).epsilon(1e-12));
        }
    }
}

TEST_CASE("Bayes identity: lik * prior = evidence * posterior in log space") {
    std::mt19937_64 gen(13);
    for (FamilyKind kind : all_family_kinds()) {
        LikelihoodFamily probe;
        probe.kind = kind;
        for (int rep = 0; rep < 50; ++rep) {
            const FamilyCase c = random_family_case(
                kind, gen, /*with_exposure=*/kind == FamilyKind::poisson);
            const ObservationSet obs = to_observation_set(c);
            const SuffStatsAgg agg = aggregate(obs);
            ConjugateHyperparams zeta{{c.nu}, {c.tau}};
            const auto post = posterior_update(zeta, agg);
            double loglik = 0.0;
            for (double y : c.ys)
                loglik += log_lik_scalar(c.family, y, c.theta, c.exposure);
            const double lhs =
                loglik + log_prior_density(c.family, c.theta, c.nu, c.tau);
            const double rhs =
                log_evidence(c.family, agg, zeta) +
                log_prior_density(c.family, c.theta, post.nu[0], post.tau[0]);
            CHECK(lhs == doctest::Approx(rhs).epsilon(1e-9));
        }
    }
}

TEST_CASE("evidence matches the quadrature oracle (spot sample)") {
    // Full 50-case-per-family sweep runs in the acceptance suite; this keeps
    // a fast cross-section in the unit tests.
    std::mt19937_64 gen(17);
    for (FamilyKind kind : all_family_kinds()) {
        for (int rep = 0; rep < 4; ++rep) {
            const FamilyCase c = random_family_case(
                kind, gen, /*with_exposure=*/kind == FamilyKind::poisson);
            const ObservationSet obs = to_observation_set(c);
            ConjugateHyperparams zeta{{c.nu}, {c.tau}};
            const double closed = log_evidence(c.family, aggregate(obs), zeta);
            const double oracle = testsupport::quadrature_log_evidence(
                c.family, c.ys, c.exposure, c.nu, c.tau);
            const double tol =
                (kind == FamilyKind::pareto_fixed_scale ||
                 kind == FamilyKind::weibull_fixed_shape)
                    ? 1e-5
                    : 1e-6;
            CHECK(std::abs(closed - oracle) < tol);
        }
    }
}

TEST_CASE("aggregate is permutation invariant and additive") {
    std::mt19937_64 gen(23);
    const FamilyCase c = random_family_case(FamilyKind::poisson, gen);
    ObservationSet obs = to_observation_set(c);
    SuffStatsAgg base = aggregate(obs);

    // Permute rows.
    ObservationSet perm = obs;
    for (std::size_t i = 0; i < obs.n_samples(); ++i)
        perm.values(i, 0) = obs.values(obs.n_samples() - 1 - i, 0);
    SuffStatsAgg p = aggregate(perm);
    CHECK(p.t_sum[0] == doctest::Approx(base.t_sum[0]));
    CHECK(p.count[0] == doctest::Approx(base.count[0]));
    CHECK(p.log_h == doctest::Approx(base.log_h));

    // Concatenation adds componentwise.
    ObservationSet two = obs;
    two.values = Mat(2 * obs.n_samples(), 1);
    two.mask.assign(2 * obs.n_samples(), 1);
    for (std::size_t i = 0; i < obs.n_samples(); ++i) {
        two.values(i, 0) = obs.values(i, 0);
        two.values(obs.n_samples() + i, 0) = obs.values(i, 0);
    }
    SuffStatsAgg dbl = aggregate(two);
    CHECK(dbl.t_sum[0] == doctest::Approx(2 * base.t_sum[0]));
    CHECK(dbl.count[0] == doctest::Approx(2 * base.count[0]));
    CHECK(dbl.log_h == doctest::Approx(2 * base.log_h));
}

TEST_CASE("A_theta analytic gradients match finite differences") {
    std::mt19937_64 gen(29);
    for (FamilyKind kind : all_family_kinds()) {
        for (int rep = 0; rep < 10; ++rep) {
            const FamilyCase c = random_family_case(kind, gen);
            const AThetaGrad g = prior_log_partition_grad(c.family, c.nu, c.tau);
            const double fd_nu = testsupport::central_diff(
                [&](double nu) { return prior_log_partition(c.family, nu, c.tau); },
                c.nu);
            const double fd_tau = testsupport::central_diff(
                [&](double tau) { return prior_log_partition(c.family, c.nu, tau); },
                c.tau);
            CHECK(g.d_nu == doctest::Approx(fd_nu).epsilon(1e-5));
            CHECK(g.d_tau == doctest::Approx(fd_tau).epsilon(1e-5));
        }
    }
}

TEST_CASE("observation simulation matches family moments") {
    // Normal with theta = 0: observation mean of 1e5 draws within 0.02.
    LikelihoodFamily f = fam(FamilyKind::normal_fixed_var);
    f.sigma2 = 1.0;
    Rng rng(99);
    double mean = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) mean += sample_observation(f, 0.0, rng);
    mean /= n;
    CHECK(std::abs(mean) < 0.02);

    // Poisson with exposure: mean tracks theta * c.
    LikelihoodFamily p = fam(FamilyKind::poisson);
    double pmean = 0.0;
    for (int i = 0; i < n; ++i) pmean += sample_observation(p, 1.5, rng, 2.0);
    pmean /= n;
    CHECK(pmean == doctest::Approx(3.0).epsilon(0.02));
}

TEST_CASE("family parsing round trip and validation") {
    auto f = LikelihoodFamily::parse("binomial{n=10}");
    CHECK(f.kind == FamilyKind::binomial);
    CHECK(f.n == 10);
    CHECK(LikelihoodFamily::parse(f.str()).n == 10);
    CHECK_THROWS_AS(LikelihoodFamily::parse("gaussian"), ConfigError);
    CHECK_THROWS_AS(LikelihoodFamily::parse("poisson{n=2}"), ConfigError);
    CHECK_THROWS_AS(LikelihoodFamily::parse("binomial{n=0}"), ConfigError);
    CHECK_THROWS_AS(LikelihoodFamily::parse("gamma_fixed_shape{a=-1}"),
                    ConfigError);
}
