#pragma once

#include <string>

#include "expdiff/expfam.hpp"
#include "expdiff/link.hpp"
#include "expdiff/mcmc.hpp"
#include "expdiff/sampler.hpp"
#include "expdiff/sde.hpp"
#include "expdiff/train.hpp"

// Run configuration, read from strict JSON: unknown keys are rejected at
// every level. `expdiff --print-schema` emits the schema document.

namespace expdiff {

struct GpConfig {
    double variance = 1.0;
    double lengthscale = 0.1;
};

struct DpsConfig {
    bool enabled = false;
    std::string variant = "normal";  // normal | poisson_ls | poisson_shot
    double rho_prime = 0.3;
    double zero_offset = 0.01;
};

struct RunConfig {
    LikelihoodFamily family;
    LinkSpec link;          // defaults to default_link(family)
    std::size_t d = 30;
    std::size_t n_obs = 1;
    double exposure = 1.0;  // Poisson only
    GpConfig gp;
    DiffusionSchedule sde;
    TrainConfig train_score_cfg;      // lr default 1e-4
    TrainConfig train_inference_cfg;  // lr default 1e-3
    SamplerConfig sampler;
    McmcConfig mcmc;
    DpsConfig dps;
    double clip = 10.0;
    bool clip_total = false;
    std::uint64_t seed = 0;
    std::string out_dir = ".";

    // Hash of the canonicalized JSON, recorded in artifacts for replay.
    std::string config_hash;

    static RunConfig from_json_text(const std::string& text);
    static RunConfig from_file(const std::string& path);
    std::string to_json_text() const;
};

std::string config_schema_json();

}  // namespace expdiff
