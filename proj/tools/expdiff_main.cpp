// expdiff command-line interface.
//
// Subcommands: gen-data, train-score, train-inference, sample-posterior,
// mcmc, benchmark, report. Exit codes: 0 success, 2 config error,
// 3 numerical failure, 4 I/O.

#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "expdiff/bench.hpp"
#include "expdiff/config.hpp"
#include "expdiff/errors.hpp"
#include "expdiff/util.hpp"

namespace {

using namespace expdiff;

int dispatch(const std::string& cmd, const std::string& config_path,
             const std::string& out, bool retrain) {
    RunConfig cfg = RunConfig::from_file(config_path);
    const RunPaths paths = RunPaths::in_dir(cfg.out_dir);
    if (cmd == "gen-data") {
        stage_gen(cfg);
        std::printf("wrote %s and %s\n", paths.obs.c_str(), paths.truth.c_str());
    } else if (cmd == "train-score") {
        stage_train_score(cfg);
        std::printf("wrote %s\n", paths.score_wts.c_str());
    } else if (cmd == "train-inference") {
        stage_train_inference(cfg);
        std::printf("wrote %s\n", paths.infer_wts.c_str());
    } else if (cmd == "sample-posterior") {
        stage_sample_posterior(cfg, out);
        std::printf("wrote %s\n",
                    out.empty() ? paths.samples.c_str() : out.c_str());
    } else if (cmd == "mcmc") {
        stage_mcmc(cfg, out);
        std::printf("wrote %s\n", out.empty() ? paths.mcmc.c_str() : out.c_str());
    } else if (cmd == "benchmark") {
        const MetricsReport m = run_benchmark(cfg, retrain);
        std::printf("benchmark done: coverage=%.3f median_mae=%.4f drop=%.4f\n",
                    m.ci_coverage, m.median_mae, m.drop_rate);
    } else if (cmd == "report") {
        const MetricsReport m = stage_report(cfg);
        std::printf("report written: coverage=%.3f median_mae=%.4f\n",
                    m.ci_coverage, m.median_mae);
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Posterior sampling for exponential-family inverse problems "
                 "with score-based diffusion priors"};
    app.require_subcommand(0, 1);

    bool print_schema = false;
    app.add_flag("--print-schema", print_schema,
                 "print the JSON config schema and exit");

    struct Sub {
        CLI::App* cmd = nullptr;
        std::string config;
        std::string out;
        bool retrain = false;
    };
    std::vector<std::pair<std::string, Sub*>> subs;
    auto add_sub = [&](const char* name, const char* desc, bool has_out,
                       bool has_retrain) {
        auto* s = new Sub;
        s->cmd = app.add_subcommand(name, desc);
        s->cmd->add_option("--config", s->config, "run configuration (JSON)")
            ->required();
        if (has_out)
            s->cmd->add_option("--out", s->out, "output CSV path override");
        if (has_retrain)
            s->cmd->add_flag("--train", s->retrain,
                             "retrain networks even if weight files exist");
        subs.emplace_back(name, s);
    };
    add_sub("gen-data", "generate synthetic observations and truth", false, false);
    add_sub("train-score", "train the prior score network", false, false);
    add_sub("train-inference", "train the inference network", false, false);
    add_sub("sample-posterior", "draw posterior samples", true, false);
    add_sub("mcmc", "run the random-walk Metropolis reference", true, false);
    add_sub("benchmark", "run the full pipeline", false, true);
    add_sub("report", "recompute metrics and the SVG report", false, false);

    CLI11_PARSE(app, argc, argv);

    if (print_schema) {
        std::printf("%s\n", expdiff::config_schema_json().c_str());
        return expdiff::kExitOk;
    }

    try {
        for (auto& [name, sub] : subs)
            if (sub->cmd->parsed())
                return dispatch(name, sub->config, sub->out, sub->retrain);
        std::fprintf(stderr, "no subcommand given; see --help\n");
        return expdiff::kExitConfig;
    } catch (const expdiff::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return expdiff::kExitConfig;
    } catch (const expdiff::IoError& e) {
        std::fprintf(stderr, "i/o error: %s\n", e.what());
        return expdiff::kExitIo;
    } catch (const expdiff::DomainError& e) {
        std::fprintf(stderr, "domain error: %s\n", e.what());
        return expdiff::kExitNumerical;
    } catch (const expdiff::NumericalError& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return expdiff::kExitNumerical;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return expdiff::kExitNumerical;
    }
}
