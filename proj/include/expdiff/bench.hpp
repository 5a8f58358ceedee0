#pragma once

#include <string>

#include "expdiff/config.hpp"
#include "expdiff/metrics.hpp"

// The benchmark harness: synthetic data generation, the gen -> train ->
// sample -> mcmc -> metrics pipeline, and artifact paths inside a run
// directory.

namespace expdiff {

struct RunPaths {
    std::string obs, truth, score_wts, infer_wts, score_log, infer_log,
        samples, mcmc, dps_samples, metrics, report_svg, meta;
    static RunPaths in_dir(const std::string& dir);
};

struct GenResult {
    Vec x0_true;
    Vec theta_true;
    ObservationSet obs;
};

// Draws x0 from the GP prior, maps through the inverse link, simulates
// n_obs observations per dimension.
GenResult gen_synthetic(const RunConfig& cfg, Rng& rng);

// Individual pipeline stages, shared between the CLI subcommands and
// run_benchmark. Each writes its artifacts into cfg.out_dir.
void stage_gen(const RunConfig& cfg);
void stage_train_score(const RunConfig& cfg);
void stage_train_inference(const RunConfig& cfg);
void stage_sample_posterior(const RunConfig& cfg, const std::string& out_csv);
void stage_mcmc(const RunConfig& cfg, const std::string& out_csv);
MetricsReport stage_report(const RunConfig& cfg);

// Full pipeline; stages are skipped when their outputs already exist unless
// `retrain` forces the training stages. Any stage failure aborts with the
// stage name; artifacts written so far are preserved.
MetricsReport run_benchmark(const RunConfig& cfg, bool retrain);

}  // namespace expdiff
