#include "expdiff/mcmc.hpp"

#include <cmath>

#include "expdiff/errors.hpp"
#include "expdiff/util.hpp"

namespace expdiff {

void McmcConfig::validate() const {
    if (chains < 1) throw ConfigError("mcmc: chains must be >= 1");
    if (iters < 2) throw ConfigError("mcmc: iters must be >= 2");
    if (burn_in < 0 || burn_in >= iters)
        throw ConfigError("mcmc: burn_in must be in [0, iters)");
    if (!(target_accept > 0 && target_accept < 1))
        throw ConfigError("mcmc: target_accept must be in (0, 1)");
}

namespace {

// Streaming mean/variance per split half, for split-Rhat without storing
// every draw.
struct Welford {
    long n = 0;
    double mean = 0.0;
    double m2 = 0.0;
    void add(double x) {
        ++n;
        const double d1 = x - mean;
        mean += d1 / static_cast<double>(n);
        m2 += d1 * (x - mean);
    }
    double var() const { return n > 1 ? m2 / static_cast<double>(n - 1) : 0.0; }
};

struct ChainOut {
    Mat kept;            // thinned post burn-in draws
    double accept_rate = 0.0;
    double scale = 0.0;
    std::vector<Welford> half1, half2;  // per dimension
};

constexpr std::size_t kMaxStoredRows = 80000;  // across all chains

}  // namespace

McmcResult rwm_sample(const LogTargetFn& log_target, std::size_t d,
                      const McmcConfig& cfg) {
    cfg.validate();
    const long post = cfg.iters - cfg.burn_in;
    const long thin =
        std::max<long>(1, (post * cfg.chains) /
                              static_cast<long>(kMaxStoredRows));
    const long kept_per_chain = post / thin;

    std::vector<ChainOut> outs(cfg.chains);
    parallel_for(static_cast<std::size_t>(cfg.chains), [&](std::size_t c) {
        Rng rng(derive_seed(cfg.seed, 1000 + c));
        ChainOut& out = outs[c];
        out.kept = Mat(static_cast<std::size_t>(kept_per_chain), d);
        out.half1.assign(d, {});
        out.half2.assign(d, {});

        Vec x(d, 0.0);
        double logp = log_target(x);
        if (!std::isfinite(logp))
            throw DomainError("rwm: log target not finite at the origin");

        double log_scale = std::log(2.38 / std::sqrt(static_cast<double>(d)));
        Vec prop(d);
        long accepted_post = 0;
        long consecutive_rejects = 0;
        bool ever_accepted = false;
        const long stall_limit = 10 * static_cast<long>(d);
        long stored = 0;
        const long half_point = cfg.burn_in + post / 2;

        for (long k = 1; k <= cfg.iters; ++k) {
            const double scale = std::exp(log_scale);
            for (std::size_t j = 0; j < d; ++j)
                prop[j] = x[j] + scale * rng.normal();
            double logp_prop;
            try {
                logp_prop = log_target(prop);
            } catch (const DomainError&) {
                logp_prop = -INFINITY;  // out-of-domain proposals are rejected
            }
            const double log_ratio = logp_prop - logp;
            const double accept_prob =
                log_ratio >= 0.0 ? 1.0 : std::exp(log_ratio);
            const bool accept =
                std::isfinite(logp_prop) && std::log(rng.u01_open()) < log_ratio;
            if (accept) {
                x = prop;
                logp = logp_prop;
                ever_accepted = true;
                consecutive_rejects = 0;
            } else if (!ever_accepted) {
                if (++consecutive_rejects >= stall_limit)
                    throw NumericalError(
                        "rwm: all proposals rejected for 10*d consecutive "
                        "steps at start");
            }
            if (k <= cfg.burn_in) {
                // Robbins-Monro step toward the target acceptance rate.
                const double gamma =
                    1.0 / std::pow(static_cast<double>(k), 0.6);
                log_scale += gamma * (accept_prob - cfg.target_accept);
            } else {
                if (accept) ++accepted_post;
                auto& halves = k <= half_point ? out.half1 : out.half2;
                for (std::size_t j = 0; j < d; ++j) halves[j].add(x[j]);
                const long idx = k - cfg.burn_in - 1;
                if (idx % thin == 0 && stored < kept_per_chain) {
                    std::copy(x.begin(), x.end(), out.kept.row(stored));
                    ++stored;
                }
            }
        }
        out.accept_rate =
            static_cast<double>(accepted_post) / static_cast<double>(post);
        out.scale = std::exp(log_scale);
    });

    McmcResult res;
    res.samples = Mat(static_cast<std::size_t>(kept_per_chain) * cfg.chains, d);
    res.accept_rate.resize(cfg.chains);
    res.proposal_scale.resize(cfg.chains);
    std::size_t row = 0;
    for (int c = 0; c < cfg.chains; ++c) {
        const ChainOut& out = outs[c];
        for (std::size_t i = 0; i < out.kept.rows; ++i, ++row)
            std::copy(out.kept.row(i), out.kept.row(i) + d, res.samples.row(row));
        res.accept_rate[c] = out.accept_rate;
        res.proposal_scale[c] = out.scale;
    }

    // Split-Rhat over 2*chains half-sequences.
    res.rhat.assign(d, 1.0);
    const long n_half = post / 2;
    if (n_half > 1) {
        const int m = 2 * cfg.chains;
        for (std::size_t j = 0; j < d; ++j) {
            double mean_of_means = 0.0, w = 0.0;
            std::vector<double> means;
            means.reserve(m);
            for (const auto& out : outs) {
                means.push_back(out.half1[j].mean);
                means.push_back(out.half2[j].mean);
                w += out.half1[j].var() + out.half2[j].var();
            }
            w /= m;
            for (double mu : means) mean_of_means += mu;
            mean_of_means /= m;
            double b = 0.0;
            for (double mu : means)
                b += (mu - mean_of_means) * (mu - mean_of_means);
            b *= static_cast<double>(n_half) / (m - 1);
            const double var_hat =
                (static_cast<double>(n_half - 1) / n_half) * w + b / n_half;
            res.rhat[j] = std::sqrt(var_hat / (w + 1e-300));
        }
    }
    return res;
}

}  // namespace expdiff
