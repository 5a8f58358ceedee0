#include "expdiff/bench.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "expdiff/data_io.hpp"
#include "expdiff/errors.hpp"
#include "expdiff/gp.hpp"
#include "expdiff/guidance.hpp"
#include "expdiff/mcmc.hpp"
#include "expdiff/util.hpp"

namespace expdiff {

using json = nlohmann::json;
namespace fs = std::filesystem;

RunPaths RunPaths::in_dir(const std::string& dir) {
    RunPaths p;
    p.obs = dir + "/obs.csv";
    p.truth = dir + "/truth.csv";
    p.score_wts = dir + "/score.wts";
    p.infer_wts = dir + "/infer.wts";
    p.score_log = dir + "/train_score_log.csv";
    p.infer_log = dir + "/train_inference_log.csv";
    p.samples = dir + "/samples.csv";
    p.mcmc = dir + "/mcmc.csv";
    p.dps_samples = dir + "/dps_samples.csv";
    p.metrics = dir + "/metrics.csv";
    p.report_svg = dir + "/report.svg";
    p.meta = dir + "/run_meta.json";
    return p;
}

namespace {

void update_meta(const std::string& path, const std::string& key,
                 const json& value) {
    json meta = json::object();
    if (fs::exists(path)) {
        std::ifstream in(path);
        try {
            in >> meta;
        } catch (const json::exception&) {
            meta = json::object();
        }
    }
    meta[key] = value;
    std::ofstream out(path);
    if (!out) throw IoError("cannot write run metadata: " + path);
    out << meta.dump(2) << '\n';
}

void ensure_out_dir(const RunConfig& cfg) {
    std::error_code ec;
    fs::create_directories(cfg.out_dir, ec);
    if (ec) throw IoError("cannot create out_dir: " + cfg.out_dir);
}

GpFactor gp_for(const RunConfig& cfg) {
    return make_gp_prior(cfg.d, {cfg.gp.variance, cfg.gp.lengthscale});
}

std::string net_meta(const RunConfig& cfg, const char* role,
                     std::uint64_t seed) {
    json j;
    j["role"] = role;
    j["config_hash"] = cfg.config_hash;
    j["seed"] = seed;
    return j.dump();
}

// Writes an Mat of x0 draws in the samples CSV format.
void write_x0_csv(const Mat& x0, const LinkSpec& link, const std::string& path) {
    SampleSet set;
    set.x0 = x0;
    set.link = link;
    write_samples_csv(set, path);
}

}  // namespace

GenResult gen_synthetic(const RunConfig& cfg, Rng& rng) {
    const GpFactor gp = gp_for(cfg);
    GenResult out;
    out.x0_true = gp_sample(gp, rng);
    out.theta_true = inv_link(cfg.link, out.x0_true);
    out.obs.family = cfg.family;
    out.obs.values = Mat(cfg.n_obs, cfg.d);
    out.obs.mask.assign(cfg.n_obs * cfg.d, 1);
    out.obs.exposure.assign(cfg.d, cfg.exposure);
    for (std::size_t i = 0; i < cfg.n_obs; ++i)
        for (std::size_t j = 0; j < cfg.d; ++j)
            out.obs.values(i, j) = sample_observation(
                cfg.family, out.theta_true[j], rng, cfg.exposure);
    out.obs.validate();
    return out;
}

void stage_gen(const RunConfig& cfg) {
    ensure_out_dir(cfg);
    const RunPaths paths = RunPaths::in_dir(cfg.out_dir);
    const std::uint64_t seed = derive_seed(cfg.seed, 1);
    Rng rng(seed);
    const GenResult gen = gen_synthetic(cfg, rng);
    write_observations_csv(gen.obs, paths.obs);
    write_truth_csv(gen.x0_true, gen.theta_true, paths.truth);
    const GpFactor gp = gp_for(cfg);
    update_meta(paths.meta, "gen",
                {{"seed", seed},
                 {"config_hash", cfg.config_hash},
                 {"gp_jitter", gp.jitter}});
}

void stage_train_score(const RunConfig& cfg) {
    ensure_out_dir(cfg);
    const RunPaths paths = RunPaths::in_dir(cfg.out_dir);
    TrainConfig tc = cfg.train_score_cfg;
    tc.seed = derive_seed(cfg.seed, 2);
    const PriorSource prior(gp_for(cfg));
    const TrainResult r = train_score(tc, prior, cfg.sde, paths.score_wts);
    save_network(r.net, paths.score_wts, net_meta(cfg, "score", tc.seed));
    write_train_log(r.log, paths.score_log);
    update_meta(paths.meta, "train_score",
                {{"seed", tc.seed},
                 {"steps", tc.steps},
                 {"final_loss", r.log.empty() ? 0.0 : r.log.back().loss}});
}

void stage_train_inference(const RunConfig& cfg) {
    ensure_out_dir(cfg);
    const RunPaths paths = RunPaths::in_dir(cfg.out_dir);
    TrainConfig tc = cfg.train_inference_cfg;
    tc.seed = derive_seed(cfg.seed, 3);
    const PriorSource prior(gp_for(cfg));
    const InferenceTrainResult r =
        train_inference(tc, prior, cfg.family, cfg.link, cfg.sde, paths.infer_wts);
    save_network(r.net, paths.infer_wts, net_meta(cfg, "inference", tc.seed));
    write_train_log(r.log, paths.infer_log);
    update_meta(paths.meta, "train_inference",
                {{"seed", tc.seed},
                 {"steps", tc.steps},
                 {"final_loss", r.log.empty() ? 0.0 : r.log.back().loss}});
}

namespace {

GuidanceContext make_context(const RunConfig& cfg, const ObservationSet& obs,
                             const DenseNetwork& score_net,
                             const DenseNetwork& infer_net) {
    GuidanceContext ctx{cfg.family,
                        cfg.link,
                        aggregate(obs),
                        &infer_net,
                        DomainMap(cfg.family),
                        &score_net,
                        cfg.sde,
                        cfg.clip,
                        cfg.clip_total,
                        &obs};
    if (score_net.config().output_dim != cfg.d ||
        infer_net.config().output_dim != 2 * cfg.d)
        throw ConfigError("trained network dimensions do not match config.d");
    return ctx;
}

}  // namespace

void stage_sample_posterior(const RunConfig& cfg, const std::string& out_csv) {
    ensure_out_dir(cfg);
    const RunPaths paths = RunPaths::in_dir(cfg.out_dir);
    const ObservationSet obs =
        read_observations_csv(paths.obs, cfg.family, cfg.d);
    const DenseNetwork score_net = load_network(paths.score_wts);
    const DenseNetwork infer_net = load_network(paths.infer_wts);
    const GuidanceContext ctx = make_context(cfg, obs, score_net, infer_net);

    SamplerConfig sc = cfg.sampler;
    sc.seed = derive_seed(cfg.seed, 4);
    SampleSet set = sample_posterior(ctx, sc);
    set.provenance = "config_hash=" + cfg.config_hash +
                     " seed=" + std::to_string(sc.seed);
    write_samples_csv(set, out_csv.empty() ? paths.samples : out_csv);
    update_meta(paths.meta, "sample_posterior",
                {{"seed", sc.seed},
                 {"requested", set.requested},
                 {"dropped", set.dropped},
                 {"clip_mode", cfg.clip_total ? "total" : "guidance-only"},
                 {"kernel_isa", kernels::isa_name(kernels::active_isa())}});

    if (cfg.dps.enabled) {
        DpsVariant variant = DpsVariant::normal;
        if (cfg.dps.variant == "poisson_ls") variant = DpsVariant::poisson_ls;
        if (cfg.dps.variant == "poisson_shot") variant = DpsVariant::poisson_shot;
        DpsParams params{cfg.dps.rho_prime, cfg.dps.zero_offset};
        auto dps_fn = [&](const Vec& x, double t) {
            return dps_score(ctx, x, t, variant, params);
        };
        SamplerConfig dps_sc = sc;
        dps_sc.seed = derive_seed(cfg.seed, 5);
        json dps_meta = {{"variant", cfg.dps.variant}, {"seed", dps_sc.seed}};
        try {
            const SampleSet dps_set = sample_with_score(
                dps_fn, cfg.sde, dps_sc, cfg.d, cfg.link);
            write_samples_csv(dps_set, paths.dps_samples);
            dps_meta["requested"] = dps_set.requested;
            dps_meta["dropped"] = dps_set.dropped;
        } catch (const NumericalError& e) {
            // The paper reports Poisson-DPS failures at low rates; record,
            // do not abort the pipeline.
            dps_meta["failed"] = e.what();
        }
        update_meta(paths.meta, "dps", dps_meta);
    }
}

void stage_mcmc(const RunConfig& cfg, const std::string& out_csv) {
    ensure_out_dir(cfg);
    const RunPaths paths = RunPaths::in_dir(cfg.out_dir);
    const ObservationSet obs =
        read_observations_csv(paths.obs, cfg.family, cfg.d);
    const SuffStatsAgg agg = aggregate(obs);
    const GpFactor gp = gp_for(cfg);

    auto log_target = [&](const Vec& x0) {
        const Vec theta = inv_link(cfg.link, x0);
        return gp_log_density(gp, x0) + log_likelihood(cfg.family, agg, theta);
    };
    McmcConfig mc = cfg.mcmc;
    mc.seed = derive_seed(cfg.seed, 6);
    const McmcResult res = rwm_sample(log_target, cfg.d, mc);
    write_x0_csv(res.samples, cfg.link, out_csv.empty() ? paths.mcmc : out_csv);
    update_meta(paths.meta, "mcmc",
                {{"seed", mc.seed},
                 {"rhat", res.rhat},
                 {"accept_rate", res.accept_rate},
                 {"proposal_scale", res.proposal_scale}});
}

MetricsReport stage_report(const RunConfig& cfg) {
    const RunPaths paths = RunPaths::in_dir(cfg.out_dir);
    SampleSet set;
    set.x0 = read_samples_csv(paths.samples);
    set.link = cfg.link;
    set.requested = static_cast<long>(set.x0.rows);
    if (fs::exists(paths.meta)) {
        std::ifstream in(paths.meta);
        json meta;
        try {
            in >> meta;
            if (meta.contains("sample_posterior")) {
                set.requested = meta["sample_posterior"]["requested"];
                set.dropped = meta["sample_posterior"]["dropped"];
            }
        } catch (const json::exception&) {
        }
    }
    Mat mcmc_x0;
    if (fs::exists(paths.mcmc)) mcmc_x0 = read_samples_csv(paths.mcmc);
    Vec truth_x0, truth_theta;
    read_truth_csv(paths.truth, truth_x0, truth_theta);
    const MetricsReport m = compute_metrics(set, mcmc_x0, truth_x0, truth_theta);
    write_metrics_csv(m, paths.metrics);
    write_report_svg(m, paths.report_svg);
    return m;
}

MetricsReport run_benchmark(const RunConfig& cfg, bool retrain) {
    ensure_out_dir(cfg);
    const RunPaths paths = RunPaths::in_dir(cfg.out_dir);
    const char* stage = "gen";
    try {
        using clock = std::chrono::steady_clock;
        json timings = json::object();
        auto timed = [&](const char* name, auto&& fn) {
            stage = name;
            const auto start = clock::now();
            fn();
            timings[name] =
                std::chrono::duration<double>(clock::now() - start).count();
        };
        timed("gen", [&] { stage_gen(cfg); });
        timed("train_score", [&] {
            if (retrain || !fs::exists(paths.score_wts)) stage_train_score(cfg);
        });
        timed("train_inference", [&] {
            if (retrain || !fs::exists(paths.infer_wts))
                stage_train_inference(cfg);
        });
        timed("sample_posterior", [&] { stage_sample_posterior(cfg, ""); });
        timed("mcmc", [&] { stage_mcmc(cfg, ""); });
        MetricsReport report;
        timed("report", [&] { report = stage_report(cfg); });
        update_meta(paths.meta, "timings_seconds", timings);
        return report;
    } catch (const std::exception& e) {
        const std::string msg = "benchmark stage '" + std::string(stage) +
                                "' failed (artifacts preserved in " +
                                cfg.out_dir + "): " + e.what();
        if (dynamic_cast<const ConfigError*>(&e)) throw ConfigError(msg);
        if (dynamic_cast<const IoError*>(&e)) throw IoError(msg);
        if (dynamic_cast<const DomainError*>(&e)) throw DomainError(msg);
        throw NumericalError(msg);
    }
}

}  // namespace expdiff
