#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "expdiff/errors.hpp"
#include "expdiff/expfam.hpp"
#include "expdiff/gp.hpp"
#include "expdiff/mcmc.hpp"

using namespace expdiff;

TEST_CASE("standard normal target: moments and diagnostics") {
    auto log_target = [](const Vec& x) {
        double acc = 0.0;
        for (double v : x) acc -= 0.5 * v * v;
        return acc;
    };
    McmcConfig cfg;
    cfg.chains = 4;
    cfg.iters = 30000;
    cfg.burn_in = 5000;
    cfg.seed = 3;
    const McmcResult res = rwm_sample(log_target, 2, cfg);
    for (std::size_t j = 0; j < 2; ++j) {
        Vec col(res.samples.rows);
        for (std::size_t i = 0; i < res.samples.rows; ++i)
            col[i] = res.samples(i, j);
        double mean = 0.0;
        for (double v : col) mean += v;
        mean /= col.size();
        double var = 0.0;
        for (double v : col) var += (v - mean) * (v - mean);
        var /= col.size();
        CHECK(std::abs(mean) < 0.05);
        CHECK(std::abs(var - 1.0) < 0.1);
        CHECK(res.rhat[j] < 1.05);
    }
    // Adaptation pulls the acceptance rate toward the target.
    for (double ar : res.accept_rate) {
        CHECK(ar > 0.1);
        CHECK(ar < 0.45);
    }
}

TEST_CASE("conjugate gaussian posterior matches analytic moments") {
    // Prior N(0, k), one observation y ~ N(x, sigma2): posterior
    // N(y*k/(k+sigma2), k*sigma2/(k+sigma2)).
    const double k = 2.0, sigma2 = 0.5, y = 1.2;
    auto log_target = [&](const Vec& x) {
        return -0.5 * x[0] * x[0] / k -
               0.5 * (y - x[0]) * (y - x[0]) / sigma2;
    };
    McmcConfig cfg;
    cfg.chains = 4;
    cfg.iters = 40000;
    cfg.burn_in = 5000;
    cfg.seed = 9;
    const McmcResult res = rwm_sample(log_target, 1, cfg);
    double mean = 0.0;
    for (std::size_t i = 0; i < res.samples.rows; ++i)
        mean += res.samples(i, 0);
    mean /= res.samples.rows;
    double var = 0.0;
    for (std::size_t i = 0; i < res.samples.rows; ++i)
        var += (res.samples(i, 0) - mean) * (res.samples(i, 0) - mean);
    var /= res.samples.rows;
    const double post_mean = y * k / (k + sigma2);
    const double post_var = k * sigma2 / (k + sigma2);
    CHECK(mean == doctest::Approx(post_mean).epsilon(0.03));
    CHECK(var == doctest::Approx(post_var).epsilon(0.08));
    CHECK(res.rhat[0] < 1.05);
}

TEST_CASE("domain-violating proposals are rejected, not fatal") {
    // Target defined only for x > -1 via the expfam domain guard.
    LikelihoodFamily f;
    f.kind = FamilyKind::poisson;
    auto log_target = [&](const Vec& x) {
        const double theta = x[0] + 1.0;
        if (!(theta > 0)) throw DomainError("theta <= 0");
        return std::log(theta) - theta;  // Gamma(2,1) in theta
    };
    McmcConfig cfg;
    cfg.chains = 2;
    cfg.iters = 20000;
    cfg.burn_in = 4000;
    cfg.seed = 1;
    const McmcResult res = rwm_sample(log_target, 1, cfg);
    // Gamma(2,1) has mean 2 => x mean ~ 1.
    double mean = 0.0;
    for (std::size_t i = 0; i < res.samples.rows; ++i)
        mean += res.samples(i, 0);
    mean /= res.samples.rows;
    CHECK(mean == doctest::Approx(1.0).epsilon(0.1));
}

TEST_CASE("config validation and stall detection") {
    McmcConfig bad;
    bad.burn_in = bad.iters;
    CHECK_THROWS_AS(bad.validate(), ConfigError);

    // A target that rejects everything away from the origin stalls.
    auto spike = [](const Vec& x) -> double {
        for (double v : x)
            if (v != 0.0) return -INFINITY;
        return 0.0;
    };
    McmcConfig cfg;
    cfg.chains = 1;
    cfg.iters = 1000;
    cfg.burn_in = 100;
    cfg.seed = 2;
    CHECK_THROWS_AS(rwm_sample(spike, 2, cfg), NumericalError);
}
