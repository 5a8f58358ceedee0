#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>

#include "expdiff/errors.hpp"
#include "expdiff/metrics.hpp"

using namespace expdiff;

TEST_CASE("wasserstein1 pinned cases") {
    const Vec a{1.0, 2.0, 3.0};
    CHECK(wasserstein1(a, a) == doctest::Approx(0.0));
    CHECK(wasserstein1(Vec(100, 0.0), Vec(50, 1.0)) == doctest::Approx(1.0));

    // N(0,1) vs N(1,1): W1 equals the mean shift.
    std::mt19937_64 gen(3);
    std::normal_distribution<double> nd;
    Vec x(100000), y(100000);
    for (std::size_t i = 0; i < x.size(); ++i) {
        x[i] = nd(gen);
        y[i] = nd(gen) + 1.0;
    }
    CHECK(wasserstein1(x, y) == doctest::Approx(1.0).epsilon(0.02));
    CHECK_THROWS_AS(wasserstein1({}, a), ConfigError);
}

TEST_CASE("coverage pinned cases") {
    const Vec truth{0.0, 1.0, 2.0};
    CHECK(coverage(truth, Vec{-1e30, -1e30, -1e30}, Vec{1e30, 1e30, 1e30}) ==
          doctest::Approx(1.0));
    CHECK(coverage(truth, Vec{5, 5, 5}, Vec{6, 6, 6}) == doctest::Approx(0.0));
    CHECK(coverage(truth, Vec{-1, 5, 1.5}, Vec{1, 6, 2.5}) ==
          doctest::Approx(2.0 / 3.0));
    CHECK_THROWS_AS(coverage(truth, Vec{1, 0, 0}, Vec{0, 1, 1}), ConfigError);
}

TEST_CASE("nominal coverage of gaussian intervals") {
    // d=100 independent N(mu_j, 1) "posteriors" with exact 95% intervals
    // must cover at the nominal rate.
    std::mt19937_64 gen(5);
    std::normal_distribution<double> nd;
    const std::size_t d = 100;
    Vec truth(d), lo(d), hi(d);
    for (std::size_t j = 0; j < d; ++j) {
        const double mu = nd(gen);  // posterior mean around the truth
        truth[j] = mu + nd(gen);    // truth ~ N(mu, 1)
        lo[j] = mu - 1.959963985;
        hi[j] = mu + 1.959963985;
    }
    const double c = coverage(truth, lo, hi);
    CHECK(c >= 0.90);
    CHECK(c <= 0.99);
}

TEST_CASE("quantile interpolation") {
    CHECK(quantile({1, 2, 3, 4}, 0.5) == doctest::Approx(2.5));
    CHECK(quantile({5}, 0.9) == doctest::Approx(5.0));
    CHECK(quantile({3, 1, 2}, 0.0) == doctest::Approx(1.0));
    CHECK(quantile({3, 1, 2}, 1.0) == doctest::Approx(3.0));
}

TEST_CASE("metrics are invariant to sample order") {
    SampleSet a;
    a.link = LinkSpec::parse("exp");
    a.x0 = Mat(5, 1);
    for (int i = 0; i < 5; ++i) a.x0(i, 0) = i * 0.5 - 1.0;
    SampleSet b = a;
    for (int i = 0; i < 5; ++i) b.x0(i, 0) = a.x0(4 - i, 0);
    Mat mcmc(4, 1);
    for (int i = 0; i < 4; ++i) mcmc(i, 0) = 0.3 * i;
    const Vec truth_x0{0.2}, truth_theta{std::exp(0.2)};
    const MetricsReport ma = compute_metrics(a, mcmc, truth_x0, truth_theta);
    const MetricsReport mb = compute_metrics(b, mcmc, truth_x0, truth_theta);
    CHECK(ma.method_x0[0].median == mb.method_x0[0].median);
    CHECK(ma.wasserstein[0] == mb.wasserstein[0]);
    CHECK(ma.ci_coverage == mb.ci_coverage);
}

TEST_CASE("csv and svg writers") {
    SampleSet set;
    set.link = LinkSpec::parse("identity");
    set.x0 = Mat(50, 3);
    std::mt19937_64 gen(7);
    std::normal_distribution<double> nd;
    for (auto& v : set.x0.data) v = nd(gen);
    Mat mcmc(40, 3);
    for (auto& v : mcmc.data) v = nd(gen);
    const Vec tx{0.0, 0.1, -0.2}, tt{0.0, 0.1, -0.2};
    const MetricsReport m = compute_metrics(set, mcmc, tx, tt);

    write_metrics_csv(m, "test_metrics.csv");
    std::ifstream in("test_metrics.csv");
    std::string header;
    std::getline(in, header);
    CHECK(header.find("x0_median") != std::string::npos);

    write_report_svg(m, "test_report.svg");
    std::ifstream svg("test_report.svg");
    std::string all((std::istreambuf_iterator<char>(svg)),
                    std::istreambuf_iterator<char>());
    CHECK(all.find("<svg") != std::string::npos);
    CHECK(all.find("</svg>") != std::string::npos);
    CHECK(all.find("http://") == all.find("http://www.w3.org/2000/svg"));
    std::remove("test_metrics.csv");
    std::remove("test_report.svg");

    // Empty metrics refuse to write files.
    MetricsReport empty;
    CHECK_THROWS_AS(write_metrics_csv(empty, "x.csv"), ConfigError);
    CHECK_THROWS_AS(write_report_svg(empty, "x.svg"), ConfigError);
}
