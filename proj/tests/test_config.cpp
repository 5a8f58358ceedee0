#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <nlohmann/json.hpp>

#include "expdiff/config.hpp"
#include "expdiff/errors.hpp"

using namespace expdiff;

TEST_CASE("minimal config fills defaults") {
    const RunConfig cfg =
        RunConfig::from_json_text(R"({"family":"poisson","d":4})");
    CHECK(cfg.family.kind == FamilyKind::poisson);
    CHECK(cfg.link.kind == LinkKind::exp_link);  // family default
    CHECK(cfg.d == 4);
    CHECK(cfg.sde.beta1 == doctest::Approx(20.0));
    CHECK(cfg.sampler.steps == 1000);
    CHECK(cfg.sampler.snr == doctest::Approx(0.1));
    CHECK(cfg.mcmc.chains == 4);
    CHECK(cfg.train_score_cfg.lr == doctest::Approx(1e-4));
    CHECK(cfg.train_inference_cfg.lr == doctest::Approx(1e-3));
    CHECK_FALSE(cfg.config_hash.empty());
}

TEST_CASE("unknown keys are rejected at every level") {
    CHECK_THROWS_AS(RunConfig::from_json_text(
                        R"({"family":"poisson","d":4,"typo_key":1})"),
                    ConfigError);
    CHECK_THROWS_AS(RunConfig::from_json_text(
                        R"({"family":"poisson","d":4,"gp":{"bad":1}})"),
                    ConfigError);
    CHECK_THROWS_AS(RunConfig::from_json_text(
                        R"({"family":"poisson","d":4,"sampler":{"nope":2}})"),
                    ConfigError);
}

TEST_CASE("invalid values are rejected with ConfigError") {
    CHECK_THROWS_AS(RunConfig::from_json_text(R"({"family":"poisson"})"),
                    ConfigError);  // missing d
    CHECK_THROWS_AS(RunConfig::from_json_text(R"({"family":"nope","d":2})"),
                    ConfigError);
    CHECK_THROWS_AS(
        RunConfig::from_json_text(
            R"({"family":"poisson","d":2,"sde":{"beta0":-1}})"),
        ConfigError);
    CHECK_THROWS_AS(
        RunConfig::from_json_text(
            R"({"family":"exponential","d":2,"exposure":2.0})"),
        ConfigError);
    CHECK_THROWS_AS(RunConfig::from_json_text("not json at all"), ConfigError);
}

TEST_CASE("explicit link and exposure parse") {
    const RunConfig cfg = RunConfig::from_json_text(
        R"({"family":"poisson","d":2,"link":"exp{shift=5}","exposure":2.5})");
    CHECK(cfg.link.kind == LinkKind::exp_link);
    CHECK(cfg.link.shift == doctest::Approx(5.0));
    CHECK(cfg.exposure == doctest::Approx(2.5));
}

TEST_CASE("round trip through to_json_text") {
    const RunConfig a = RunConfig::from_json_text(
        R"({"family":"binomial{n=7}","d":3,"seed":42,
            "sampler":{"steps":128,"n_samples":9}})");
    const RunConfig b = RunConfig::from_json_text(a.to_json_text());
    CHECK(b.family.n == 7);
    CHECK(b.sampler.steps == 128);
    CHECK(b.sampler.n_samples == 9);
    CHECK(b.seed == 42);
    CHECK(a.config_hash == b.config_hash);
}

TEST_CASE("schema document is valid JSON and strict") {
    const auto schema = nlohmann::json::parse(config_schema_json());
    CHECK(schema["additionalProperties"] == false);
    CHECK(schema["properties"].contains("family"));
    CHECK(schema["properties"].contains("mcmc"));
}
