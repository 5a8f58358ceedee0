#include "expdiff/sampler.hpp"

#include <atomic>
#include <cmath>

#include "expdiff/errors.hpp"
#include "expdiff/util.hpp"

namespace expdiff {

void SamplerConfig::validate() const {
    if (steps < 2) throw ConfigError("sampler: steps must be >= 2");
    if (!(snr > 0)) throw ConfigError("sampler: snr must be > 0");
    if (n_samples < 0) throw ConfigError("sampler: n_samples must be >= 0");
    if (correctors_per_step < 0)
        throw ConfigError("sampler: correctors_per_step must be >= 0");
}

namespace {

constexpr int kPilotSize = 32;

bool all_finite(const Vec& x) {
    for (double v : x)
        if (!std::isfinite(v)) return false;
    return true;
}

void predictor_step(const DiffusionSchedule& sched, double t, double dt,
                    const Vec& s, Vec& x, const Vec& z) {
    const double beta = sched.beta(t);
    const double noise = std::sqrt(beta * dt);
    for (std::size_t j = 0; j < x.size(); ++j)
        x[j] += beta * (0.5 * x[j] + s[j]) * dt + noise * z[j];
}

}  // namespace

Vec corrector_schedule(const ScoreFn& score_fn, const DiffusionSchedule& sched,
                       const SamplerConfig& cfg, std::size_t d,
                       std::uint64_t seed) {
    cfg.validate();
    sched.validate();
    Vec etas(static_cast<std::size_t>(cfg.steps) * cfg.correctors_per_step, 0.0);
    if (cfg.correctors_per_step == 0) return etas;

    Rng rng(seed);
    std::vector<Vec> xs(kPilotSize);
    std::vector<std::uint8_t> alive(kPilotSize, 1);
    for (auto& x : xs) x = rng.normal_vec(d);
    const double dt = (1.0 - sched.eps) / static_cast<double>(cfg.steps);
    Vec z(d);
    std::vector<Vec> zs(kPilotSize, Vec(d));
    std::size_t idx = 0;
    for (long k = 0; k < cfg.steps; ++k) {
        const double t = 1.0 - static_cast<double>(k) * dt;
        for (int i = 0; i < kPilotSize; ++i) {
            rng.fill_normal(z.data(), d);
            if (!alive[i]) continue;
            const Vec s = score_fn(xs[i], t);
            predictor_step(sched, t, dt, s, xs[i], z);
            if (!all_finite(xs[i])) alive[i] = 0;
        }
        const double tc = std::max(1.0 - static_cast<double>(k + 1) * dt,
                                   sched.eps);
        for (int c = 0; c < cfg.correctors_per_step; ++c) {
            double mean_sn = 0.0, mean_zn = 0.0;
            int n_alive = 0;
            std::vector<Vec> ss(kPilotSize);
            for (int i = 0; i < kPilotSize; ++i) {
                rng.fill_normal(zs[i].data(), d);
                if (!alive[i]) continue;
                ss[i] = score_fn(xs[i], tc);
                mean_zn += std::sqrt(kernels::sumsq(zs[i].data(), d));
                mean_sn += std::sqrt(kernels::sumsq(ss[i].data(), d));
                ++n_alive;
            }
            if (n_alive == 0)
                throw NumericalError(
                    "corrector_schedule: pilot ensemble diverged at t = " +
                    std::to_string(tc));
            mean_sn /= n_alive;
            mean_zn /= n_alive;
            const double eta =
                mean_sn > 0.0
                    ? 2.0 * (cfg.snr * mean_zn / mean_sn) *
                          (cfg.snr * mean_zn / mean_sn)
                    : 0.0;
            etas[idx++] = eta;
            const double step_noise = std::sqrt(2.0 * eta);
            for (int i = 0; i < kPilotSize; ++i) {
                if (!alive[i]) continue;
                for (std::size_t j = 0; j < d; ++j)
                    xs[i][j] += eta * ss[i][j] + step_noise * zs[i][j];
                if (!all_finite(xs[i])) alive[i] = 0;
            }
        }
    }
    return etas;
}

Vec pc_sample(const ScoreFn& score_fn, const DiffusionSchedule& sched,
              const SamplerConfig& cfg, std::size_t d, Rng& rng,
              const Vec* etas) {
    cfg.validate();
    sched.validate();
    Vec own_etas;
    if (!etas && cfg.correctors_per_step > 0) {
        own_etas = corrector_schedule(score_fn, sched, cfg, d, rng.raw()());
        etas = &own_etas;
    }

    Vec x = rng.normal_vec(d);
    const double dt = (1.0 - sched.eps) / static_cast<double>(cfg.steps);
    Vec z(d);
    std::size_t idx = 0;
    for (long k = 0; k < cfg.steps; ++k) {
        const double t = 1.0 - static_cast<double>(k) * dt;

        // Euler-Maruyama step of the reverse SDE, t -> t - dt.
        const Vec s = score_fn(x, t);
        rng.fill_normal(z.data(), d);
        predictor_step(sched, t, dt, s, x, z);

        // Annealed Langevin correctors at the new noise level.
        const double tc = std::max(1.0 - static_cast<double>(k + 1) * dt,
                                   sched.eps);
        for (int c = 0; c < cfg.correctors_per_step; ++c) {
            const double eta = (*etas)[idx++];
            const Vec g = score_fn(x, tc);
            rng.fill_normal(z.data(), d);
            const double step_noise = std::sqrt(2.0 * eta);
            for (std::size_t j = 0; j < d; ++j)
                x[j] += eta * g[j] + step_noise * z[j];
        }

        if (!all_finite(x))
            throw NumericalError("pc_sample: non-finite state at t = " +
                                 std::to_string(tc) + " (step " +
                                 std::to_string(k) + ")");
    }
    return x;
}

Mat SampleSet::theta() const {
    Mat th(x0.rows, x0.cols);
    for (std::size_t i = 0; i < x0.rows; ++i)
        for (std::size_t j = 0; j < x0.cols; ++j)
            th(i, j) = inv_link_scalar(link, x0(i, j));
    return th;
}

namespace {

// Stream ids for derived seeds: samples use their index, the pilot uses a
// reserved high stream.
constexpr std::uint64_t kPilotStream = 0x70696C6F74ULL;  // "pilot"

SampleSet fan_out(const ScoreFn& score_fn, const DiffusionSchedule& sched,
                  const SamplerConfig& cfg, std::size_t d, const LinkSpec& link) {
    cfg.validate();
    const long n = cfg.n_samples;
    SampleSet set;
    set.link = link;
    set.requested = n;
    if (n == 0) {
        set.x0 = Mat(0, d);
        return set;
    }
    const Vec etas = corrector_schedule(score_fn, sched, cfg, d,
                                        derive_seed(cfg.seed, kPilotStream));
    Mat draws(static_cast<std::size_t>(n), d);
    std::vector<std::uint8_t> ok(static_cast<std::size_t>(n), 0);
    std::atomic<long> dropped{0};

    parallel_for(static_cast<std::size_t>(n), [&](std::size_t i) {
        Rng rng(derive_seed(cfg.seed, i));
        try {
            const Vec x = pc_sample(score_fn, sched, cfg, d, rng, &etas);
            std::copy(x.begin(), x.end(), draws.row(i));
            ok[i] = 1;
        } catch (const NumericalError&) {
            dropped.fetch_add(1);
        }
    });

    set.dropped = dropped.load();
    const long kept = n - set.dropped;
    if (set.dropped * 100 > n)
        throw NumericalError("sample_posterior: " + std::to_string(set.dropped) +
                             " of " + std::to_string(n) +
                             " samples were non-finite (> 1%)");
    set.x0 = Mat(static_cast<std::size_t>(kept), d);
    std::size_t w = 0;
    for (std::size_t i = 0; i < static_cast<std::size_t>(n); ++i) {
        if (!ok[i]) continue;
        std::copy(draws.row(i), draws.row(i) + d, set.x0.row(w));
        ++w;
    }
    return set;
}

}  // namespace

SampleSet sample_posterior(const GuidanceContext& ctx, const SamplerConfig& cfg) {
    auto score = [&ctx](const Vec& x, double t) {
        return posterior_score(ctx, x, t);
    };
    SampleSet set = fan_out(score, ctx.sched, cfg, ctx.dim(), ctx.link);
    set.provenance = "seed=" + std::to_string(cfg.seed);
    return set;
}

SampleSet sample_with_score(const ScoreFn& score_fn,
                            const DiffusionSchedule& sched,
                            const SamplerConfig& cfg, std::size_t d,
                            const LinkSpec& link) {
    SampleSet set = fan_out(score_fn, sched, cfg, d, link);
    set.provenance = "seed=" + std::to_string(cfg.seed);
    return set;
}

}  // namespace expdiff
