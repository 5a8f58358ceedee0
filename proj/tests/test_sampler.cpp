#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>

#include "expdiff/errors.hpp"
#include "expdiff/sampler.hpp"
#include "expdiff/train.hpp"

using namespace expdiff;

namespace {

ScoreFn standard_normal_score() {
    return [](const Vec& x, double) {
        Vec s(x.size());
        for (std::size_t j = 0; j < x.size(); ++j) s[j] = -x[j];
        return s;
    };
}

}  // namespace

TEST_CASE("pc sampler preserves the standard normal (reduced-n smoke)") {
    // The full 5000-sample check at 1000 steps runs in the acceptance suite.
    DiffusionSchedule sched;
    SamplerConfig cfg;
    cfg.steps = 500;
    cfg.snr = 0.1;
    cfg.n_samples = 800;
    cfg.seed = 99;
    const std::size_t d = 2;
    const SampleSet set = sample_with_score(standard_normal_score(), sched, cfg,
                                            d, LinkSpec::parse("identity"));
    const std::size_t n = set.size();
    for (std::size_t j = 0; j < d; ++j) {
        double mean = 0.0, var = 0.0;
        for (std::size_t i = 0; i < n; ++i) mean += set.x0(i, j);
        mean /= n;
        for (std::size_t i = 0; i < n; ++i)
            var += (set.x0(i, j) - mean) * (set.x0(i, j) - mean);
        var /= n;
        CHECK(std::abs(mean) < 0.12);       // ~3.4 SE at n=800
        CHECK(std::abs(var - 1.0) < 0.17);  // ~3.4 SE for the variance
    }
}

TEST_CASE("deterministic replay: same seed, identical sample") {
    DiffusionSchedule sched;
    SamplerConfig cfg;
    cfg.steps = 100;
    Rng a(123), b(123);
    const Vec xa = pc_sample(standard_normal_score(), sched, cfg, 3, a);
    const Vec xb = pc_sample(standard_normal_score(), sched, cfg, 3, b);
    CHECK(xa == xb);
}

TEST_CASE("non-finite states raise NumericalError with position info") {
    DiffusionSchedule sched;
    SamplerConfig cfg;
    cfg.steps = 10;
    auto bad_score = [](const Vec& x, double) {
        return Vec(x.size(), std::nan(""));
    };
    Rng rng(1);
    CHECK_THROWS_AS(pc_sample(bad_score, sched, cfg, 2, rng), NumericalError);
}

TEST_CASE("n_samples = 0 gives an empty set without error") {
    DiffusionSchedule sched;
    SamplerConfig cfg;
    cfg.steps = 10;
    cfg.n_samples = 0;
    const SampleSet set = sample_with_score(standard_normal_score(), sched, cfg,
                                            2, LinkSpec::parse("identity"));
    CHECK(set.size() == 0);
}

TEST_CASE("worker-count independence of the fan-out") {
    DiffusionSchedule sched;
    SamplerConfig cfg;
    cfg.steps = 50;
    cfg.n_samples = 12;
    cfg.seed = 77;
    const LinkSpec link = LinkSpec::parse("identity");

    setenv("EXPDIFF_THREADS", "1", 1);
    const SampleSet one =
        sample_with_score(standard_normal_score(), sched, cfg, 3, link);
    setenv("EXPDIFF_THREADS", "8", 1);
    const SampleSet eight =
        sample_with_score(standard_normal_score(), sched, cfg, 3, link);
    unsetenv("EXPDIFF_THREADS");
    CHECK(one.x0.data == eight.x0.data);
}

TEST_CASE("theta view respects link monotonicity on quantiles") {
    DiffusionSchedule sched;
    SamplerConfig cfg;
    cfg.steps = 50;
    cfg.n_samples = 64;
    cfg.seed = 5;
    const LinkSpec link = LinkSpec::parse("exp");  // monotone increasing
    const SampleSet set =
        sample_with_score(standard_normal_score(), sched, cfg, 2, link);
    const Mat theta = set.theta();
    for (std::size_t j = 0; j < 2; ++j) {
        Vec x0col(set.size()), thcol(set.size());
        for (std::size_t i = 0; i < set.size(); ++i) {
            x0col[i] = set.x0(i, j);
            thcol[i] = theta(i, j);
        }
        std::sort(x0col.begin(), x0col.end());
        std::sort(thcol.begin(), thcol.end());
        for (std::size_t i = 0; i < set.size(); ++i)
            CHECK(thcol[i] ==
                  doctest::Approx(inv_link_scalar(link, x0col[i])).epsilon(1e-12));
    }
}

TEST_CASE("zero-observation posterior sampling is indistinguishable from "
          "prior sampling (energy distance, alpha = 0.01)") {
    // Same score network on both sides; the guidance term is identically
    // zero for an all-masked observation set. A briefly trained net keeps
    // the sampling law well behaved.
    const std::size_t d = 4;
    DiffusionSchedule sched0;
    TrainConfig tc;
    tc.steps = 400;
    tc.batch_size = 32;
    tc.lr = 2e-3;
    tc.seed = 12;
    tc.log_every = 100;
    tc.hidden = {16, 16};
    tc.time_embed_len = 8;
    const PriorSource gp_prior(make_gp_prior(d, {1.0, 0.1}));
    DenseNetwork score_net = train_score(tc, gp_prior, sched0).net;
    NetConfig ic;
    ic.input_dim = d;
    ic.time_embed_len = 8;
    ic.hidden = {16, 16};
    ic.output_dim = 2 * d;
    DenseNetwork infer_net(ic);
    Rng init_rng(12);
    infer_net.init(init_rng);

    LikelihoodFamily f;
    f.kind = FamilyKind::poisson;
    ObservationSet empty;
    empty.family = f;
    empty.values = Mat(1, d, 0.0);
    empty.mask.assign(d, 0);
    empty.exposure.assign(d, 1.0);
    DiffusionSchedule sched;
    GuidanceContext ctx{f,       LinkSpec::parse("exp"),
                        aggregate(empty), &infer_net, DomainMap(f),
                        &score_net, sched, 10.0, false, &empty};

    SamplerConfig cfg;
    cfg.steps = 120;
    cfg.n_samples = 120;
    cfg.seed = 21;
    const SampleSet post = sample_posterior(ctx, cfg);
    SamplerConfig cfg2 = cfg;
    cfg2.seed = 22;  // independent draws from the same law
    auto prior_fn = [&](const Vec& x, double t) {
        return prior_score(ctx, x, t);
    };
    const SampleSet prior =
        sample_with_score(prior_fn, sched, cfg2, d, LinkSpec::parse("exp"));

    // Energy statistic with a permutation test.
    const std::size_t n = post.size(), m = prior.size();
    Mat all(n + m, d);
    for (std::size_t i = 0; i < n; ++i)
        std::copy(post.x0.row(i), post.x0.row(i) + d, all.row(i));
    for (std::size_t i = 0; i < m; ++i)
        std::copy(prior.x0.row(i), prior.x0.row(i) + d, all.row(n + i));
    auto dist = [&](std::size_t a, std::size_t b) {
        double acc = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            const double diff = all(a, j) - all(b, j);
            acc += diff * diff;
        }
        return std::sqrt(acc);
    };
    auto energy = [&](const std::vector<std::size_t>& idx) {
        double ab = 0.0, aa = 0.0, bb = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < m; ++j) ab += dist(idx[i], idx[n + j]);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) aa += dist(idx[i], idx[j]);
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < m; ++j)
                bb += dist(idx[n + i], idx[n + j]);
        return 2.0 * ab / (n * m) - aa / (double(n) * n) - bb / (double(m) * m);
    };
    std::vector<std::size_t> idx(n + m);
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    const double observed = energy(idx);
    Rng perm_rng(99);
    int geq = 0;
    const int kPerms = 199;
    for (int p = 0; p < kPerms; ++p) {
        for (std::size_t i = idx.size(); i-- > 1;)
            std::swap(idx[i], idx[perm_rng.uniform_index(i + 1)]);
        if (energy(idx) >= observed) ++geq;
    }
    const double pvalue = (geq + 1.0) / (kPerms + 1.0);
    CHECK(pvalue > 0.01);
}

TEST_CASE("more than 1% failed samples fails the run") {
    DiffusionSchedule sched;
    SamplerConfig cfg;
    cfg.steps = 10;
    cfg.n_samples = 10;
    auto nan_score = [](const Vec& x, double) {
        return Vec(x.size(), std::nan(""));
    };
    CHECK_THROWS_AS(sample_with_score(nan_score, sched, cfg, 2,
                                      LinkSpec::parse("identity")),
                    NumericalError);
}
