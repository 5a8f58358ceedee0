#include "expdiff/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "expdiff/errors.hpp"
#include "expdiff/util.hpp"

namespace expdiff {

using json = nlohmann::json;

namespace {

// Wraps a JSON object and tracks which keys were consumed; leftovers are a
// config error.
class StrictObject {
public:
    StrictObject(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object())
            throw ConfigError(path_ + ": expected a JSON object");
    }

    bool has(const char* key) {
        seen_.insert(key);
        return j_.contains(key);
    }

    template <typename T>
    T get(const char* key, const T& fallback) {
        seen_.insert(key);
        if (!j_.contains(key)) return fallback;
        try {
            return j_.at(key).get<T>();
        } catch (const json::exception&) {
            throw ConfigError(path_ + "." + key + ": wrong type");
        }
    }

    template <typename T>
    T require(const char* key) {
        seen_.insert(key);
        if (!j_.contains(key))
            throw ConfigError(path_ + ": missing required key '" + key + "'");
        try {
            return j_.at(key).get<T>();
        } catch (const json::exception&) {
            throw ConfigError(path_ + "." + key + ": wrong type");
        }
    }

    const json* child(const char* key) {
        seen_.insert(key);
        return j_.contains(key) ? &j_.at(key) : nullptr;
    }

    void finish() {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!seen_.count(it.key()))
                throw ConfigError(path_ + ": unknown key '" + it.key() + "'");
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

TrainConfig parse_train(const json* j, const std::string& path, double lr_default,
                        std::uint64_t seed) {
    TrainConfig t;
    t.lr = lr_default;
    t.seed = seed;
    if (j) {
        StrictObject o(*j, path);
        t.steps = o.get<long>("steps", t.steps);
        t.batch_size = o.get<std::size_t>("batch_size", t.batch_size);
        t.lr = o.get<double>("lr", t.lr);
        t.log_every = o.get<long>("log_every", t.log_every);
        t.time_embed_len = o.get<std::size_t>("time_embed_len", t.time_embed_len);
        t.hidden = o.get<std::vector<std::size_t>>("hidden", t.hidden);
        o.finish();
    }
    t.validate();
    return t;
}

}  // namespace

RunConfig RunConfig::from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    RunConfig cfg;
    StrictObject o(j, "config");
    cfg.family = LikelihoodFamily::parse(o.require<std::string>("family"));
    if (o.has("link"))
        cfg.link = LinkSpec::parse(o.get<std::string>("link", ""));
    else
        cfg.link = default_link(cfg.family);
    cfg.d = o.require<std::size_t>("d");
    if (cfg.d == 0) throw ConfigError("config.d must be >= 1");
    cfg.n_obs = o.get<std::size_t>("n_obs", 1);
    cfg.exposure = o.get<double>("exposure", 1.0);
    if (cfg.exposure != 1.0 && !cfg.family.supports_exposure())
        throw ConfigError("config.exposure: only poisson supports exposure");
    cfg.seed = o.get<std::uint64_t>("seed", 0);
    cfg.out_dir = o.get<std::string>("out_dir", ".");
    cfg.clip = o.get<double>("clip", 10.0);
    if (!(cfg.clip > 0)) throw ConfigError("config.clip must be > 0");
    cfg.clip_total = o.get<bool>("clip_total", false);

    if (const json* g = o.child("gp")) {
        StrictObject og(*g, "config.gp");
        cfg.gp.variance = og.get<double>("variance", cfg.gp.variance);
        cfg.gp.lengthscale = og.get<double>("lengthscale", cfg.gp.lengthscale);
        og.finish();
        if (!(cfg.gp.variance > 0) || !(cfg.gp.lengthscale > 0))
            throw ConfigError("config.gp: parameters must be > 0");
    }
    if (const json* s = o.child("sde")) {
        StrictObject os(*s, "config.sde");
        cfg.sde.beta0 = os.get<double>("beta0", cfg.sde.beta0);
        cfg.sde.beta1 = os.get<double>("beta1", cfg.sde.beta1);
        cfg.sde.eps = os.get<double>("eps", cfg.sde.eps);
        os.finish();
    }
    cfg.sde.validate();
    cfg.train_score_cfg =
        parse_train(o.child("train_score"), "config.train_score", 1e-4, cfg.seed);
    cfg.train_inference_cfg = parse_train(o.child("train_inference"),
                                          "config.train_inference", 1e-3,
                                          derive_seed(cfg.seed, 7));
    if (const json* s = o.child("sampler")) {
        StrictObject os(*s, "config.sampler");
        cfg.sampler.steps = os.get<long>("steps", cfg.sampler.steps);
        cfg.sampler.snr = os.get<double>("snr", cfg.sampler.snr);
        cfg.sampler.n_samples = os.get<long>("n_samples", cfg.sampler.n_samples);
        cfg.sampler.correctors_per_step =
            os.get<int>("correctors_per_step", cfg.sampler.correctors_per_step);
        os.finish();
    }
    cfg.sampler.seed = derive_seed(cfg.seed, 11);
    cfg.sampler.validate();
    if (const json* m = o.child("mcmc")) {
        StrictObject om(*m, "config.mcmc");
        cfg.mcmc.chains = om.get<int>("chains", cfg.mcmc.chains);
        cfg.mcmc.iters = om.get<long>("iters", cfg.mcmc.iters);
        cfg.mcmc.burn_in = om.get<long>("burn_in", cfg.mcmc.burn_in);
        cfg.mcmc.target_accept =
            om.get<double>("target_accept", cfg.mcmc.target_accept);
        om.finish();
    }
    cfg.mcmc.seed = derive_seed(cfg.seed, 13);
    cfg.mcmc.validate();
    if (const json* dj = o.child("dps")) {
        StrictObject od(*dj, "config.dps");
        cfg.dps.enabled = od.get<bool>("enabled", false);
        cfg.dps.variant = od.get<std::string>("variant", cfg.dps.variant);
        cfg.dps.rho_prime = od.get<double>("rho_prime", cfg.dps.rho_prime);
        cfg.dps.zero_offset = od.get<double>("zero_offset", cfg.dps.zero_offset);
        od.finish();
        if (cfg.dps.variant != "normal" && cfg.dps.variant != "poisson_ls" &&
            cfg.dps.variant != "poisson_shot")
            throw ConfigError("config.dps.variant: unknown variant '" +
                              cfg.dps.variant + "'");
    }
    o.finish();
    cfg.config_hash = fnv1a_hex(cfg.to_json_text());
    return cfg;
}

RunConfig RunConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json_text(ss.str());
}

std::string RunConfig::to_json_text() const {
    json j;
    j["family"] = family.str();
    j["link"] = link.str();
    j["d"] = d;
    j["n_obs"] = n_obs;
    j["exposure"] = exposure;
    j["seed"] = seed;
    j["out_dir"] = out_dir;
    j["clip"] = clip;
    j["clip_total"] = clip_total;
    j["gp"] = {{"variance", gp.variance}, {"lengthscale", gp.lengthscale}};
    j["sde"] = {{"beta0", sde.beta0}, {"beta1", sde.beta1}, {"eps", sde.eps}};
    j["train_score"] = {{"steps", train_score_cfg.steps},
                        {"batch_size", train_score_cfg.batch_size},
                        {"lr", train_score_cfg.lr},
                        {"log_every", train_score_cfg.log_every},
                        {"time_embed_len", train_score_cfg.time_embed_len},
                        {"hidden", train_score_cfg.hidden}};
    j["train_inference"] = {{"steps", train_inference_cfg.steps},
                            {"batch_size", train_inference_cfg.batch_size},
                            {"lr", train_inference_cfg.lr},
                            {"log_every", train_inference_cfg.log_every},
                            {"time_embed_len", train_inference_cfg.time_embed_len},
                            {"hidden", train_inference_cfg.hidden}};
    j["sampler"] = {{"steps", sampler.steps},
                    {"snr", sampler.snr},
                    {"n_samples", sampler.n_samples},
                    {"correctors_per_step", sampler.correctors_per_step}};
    j["mcmc"] = {{"chains", mcmc.chains},
                 {"iters", mcmc.iters},
                 {"burn_in", mcmc.burn_in},
                 {"target_accept", mcmc.target_accept}};
    j["dps"] = {{"enabled", dps.enabled},
                {"variant", dps.variant},
                {"rho_prime", dps.rho_prime},
                {"zero_offset", dps.zero_offset}};
    return j.dump(2);
}

std::string config_schema_json() {
    json num_pos = {{"type", "number"}, {"exclusiveMinimum", 0}};
    json schema = {
        {"$schema", "http://json-schema.org/draft-07/schema#"},
        {"title", "expdiff run configuration"},
        {"type", "object"},
        {"additionalProperties", false},
        {"required", {"family", "d"}},
        {"properties",
         {{"family",
           {{"type", "string"},
            {"description",
             "likelihood family, e.g. poisson, binomial{n=10}, "
             "normal_fixed_var{sigma2=1}"}}},
          {"link",
           {{"type", "string"},
            {"description",
             "identity | exp | exp{shift=f} | inv_exp | sigmoid{s=f} | "
             "gamma{a=f} | pareto{xm=f}; defaults to the family's row"}}},
          {"d", {{"type", "integer"}, {"minimum", 1}}},
          {"n_obs", {{"type", "integer"}, {"minimum", 1}, {"default", 1}}},
          {"exposure", num_pos},
          {"seed", {{"type", "integer"}, {"minimum", 0}}},
          {"out_dir", {{"type", "string"}}},
          {"clip", num_pos},
          {"clip_total", {{"type", "boolean"}}},
          {"gp",
           {{"type", "object"},
            {"additionalProperties", false},
            {"properties",
             {{"variance", num_pos}, {"lengthscale", num_pos}}}}},
          {"sde",
           {{"type", "object"},
            {"additionalProperties", false},
            {"properties",
             {{"beta0", num_pos}, {"beta1", num_pos}, {"eps", num_pos}}}}},
          {"train_score",
           {{"type", "object"},
            {"additionalProperties", false},
            {"properties",
             {{"steps", {{"type", "integer"}, {"minimum", 1}}},
              {"batch_size", {{"type", "integer"}, {"minimum", 1}}},
              {"lr", num_pos},
              {"log_every", {{"type", "integer"}, {"minimum", 1}}},
              {"time_embed_len", {{"type", "integer"}, {"minimum", 2}}},
              {"hidden", {{"type", "array"}, {"items", {{"type", "integer"}}}}}}}}},
          {"train_inference",
           {{"type", "object"},
            {"additionalProperties", false},
            {"properties",
             {{"steps", {{"type", "integer"}, {"minimum", 1}}},
              {"batch_size", {{"type", "integer"}, {"minimum", 1}}},
              {"lr", num_pos},
              {"log_every", {{"type", "integer"}, {"minimum", 1}}},
              {"time_embed_len", {{"type", "integer"}, {"minimum", 2}}},
              {"hidden", {{"type", "array"}, {"items", {{"type", "integer"}}}}}}}}},
          {"sampler",
           {{"type", "object"},
            {"additionalProperties", false},
            {"properties",
             {{"steps", {{"type", "integer"}, {"minimum", 2}}},
              {"snr", num_pos},
              {"n_samples", {{"type", "integer"}, {"minimum", 0}}},
              {"correctors_per_step", {{"type", "integer"}, {"minimum", 0}}}}}}},
          {"mcmc",
           {{"type", "object"},
            {"additionalProperties", false},
            {"properties",
             {{"chains", {{"type", "integer"}, {"minimum", 1}}},
              {"iters", {{"type", "integer"}, {"minimum", 2}}},
              {"burn_in", {{"type", "integer"}, {"minimum", 0}}},
              {"target_accept",
               {{"type", "number"}, {"exclusiveMinimum", 0},
                {"exclusiveMaximum", 1}}}}}}},
          {"dps",
           {{"type", "object"},
            {"additionalProperties", false},
            {"properties",
             {{"enabled", {{"type", "boolean"}}},
              {"variant",
               {{"enum", {"normal", "poisson_ls", "poisson_shot"}}}},
              {"rho_prime", num_pos},
              {"zero_offset", {{"type", "number"}, {"minimum", 0}}}}}}}}}};
    return schema.dump(2);
}

}  // namespace expdiff
