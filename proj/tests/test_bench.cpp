#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "expdiff/bench.hpp"
#include "expdiff/data_io.hpp"
#include "expdiff/errors.hpp"

using namespace expdiff;
namespace fs = std::filesystem;

namespace {

// Tiny configuration: exercises orchestration, not statistical quality.
RunConfig tiny_config(const std::string& out_dir) {
    return RunConfig::from_json_text(R"({
        "family": "poisson",
        "d": 3,
        "n_obs": 2,
        "seed": 31,
        "out_dir": ")" + out_dir + R"(",
        "train_score": {"steps": 60, "batch_size": 16, "log_every": 20,
                         "hidden": [16, 16], "time_embed_len": 4},
        "train_inference": {"steps": 60, "batch_size": 16, "log_every": 20,
                             "hidden": [16, 16], "time_embed_len": 4},
        "sampler": {"steps": 60, "n_samples": 24},
        "mcmc": {"chains": 2, "iters": 4000, "burn_in": 1000}
    })");
}

struct TempDir {
    std::string path;
    explicit TempDir(std::string p) : path(std::move(p)) {
        fs::remove_all(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    return std::string((std::istreambuf_iterator<char>(in)),
                       std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("gen_synthetic simulates through the link") {
    RunConfig cfg = RunConfig::from_json_text(
        R"({"family":"normal_fixed_var{sigma2=1}","d":2,"n_obs":2000,"seed":9})");
    Rng rng(1);
    const GenResult gen = gen_synthetic(cfg, rng);
    CHECK(gen.x0_true.size() == 2);
    // theta = x0 under the identity link; observation mean tracks theta.
    for (std::size_t j = 0; j < 2; ++j) {
        CHECK(gen.theta_true[j] == doctest::Approx(gen.x0_true[j]));
        double mean = 0.0;
        for (std::size_t i = 0; i < cfg.n_obs; ++i) mean += gen.obs.values(i, j);
        mean /= cfg.n_obs;
        CHECK(mean == doctest::Approx(gen.theta_true[j]).epsilon(0.25).scale(1.0));
    }
}

TEST_CASE("high-rate poisson generation via the shifted exp link") {
    RunConfig cfg = RunConfig::from_json_text(
        R"({"family":"poisson","link":"exp{shift=5}","d":2,"n_obs":50,"seed":4})");
    Rng rng(2);
    const GenResult gen = gen_synthetic(cfg, rng);
    for (std::size_t j = 0; j < 2; ++j) {
        CHECK(gen.theta_true[j] ==
              doctest::Approx(std::exp(5.0 + gen.x0_true[j])));
        double mean = 0.0;
        for (std::size_t i = 0; i < cfg.n_obs; ++i) mean += gen.obs.values(i, j);
        mean /= cfg.n_obs;
        // high-rate Poisson concentrates near theta
        CHECK(std::abs(mean - gen.theta_true[j]) <
              5.0 * std::sqrt(gen.theta_true[j] / cfg.n_obs) + 1.0);
    }
}

TEST_CASE("stage_gen is seed deterministic") {
    TempDir dir_a("bench_test_run_a"), dir_b("bench_test_run_b");
    RunConfig a = tiny_config(dir_a.path);
    RunConfig b = tiny_config(dir_b.path);
    stage_gen(a);
    stage_gen(b);
    CHECK(slurp(dir_a.path + "/obs.csv") == slurp(dir_b.path + "/obs.csv"));
    CHECK(slurp(dir_a.path + "/truth.csv") == slurp(dir_b.path + "/truth.csv"));
}

TEST_CASE("tiny end-to-end benchmark produces well-formed artifacts") {
    TempDir dir("bench_test_run_e2e");
    RunConfig cfg = tiny_config(dir.path);
    const MetricsReport m = run_benchmark(cfg, /*retrain=*/true);
    CHECK(m.dim() == 3);
    CHECK(m.ci_coverage >= 0.0);
    CHECK(m.ci_coverage <= 1.0);
    for (double w : m.wasserstein) CHECK(w >= 0.0);

    const RunPaths paths = RunPaths::in_dir(dir.path);
    for (const std::string& p :
         {paths.obs, paths.truth, paths.score_wts, paths.infer_wts,
          paths.samples, paths.mcmc, paths.metrics, paths.report_svg,
          paths.meta})
        CHECK(fs::exists(p));

    // SVG is a self-contained XML document.
    const std::string svg = slurp(paths.report_svg);
    CHECK(svg.rfind("<?xml", 0) == 0);
    CHECK(svg.find("</svg>") != std::string::npos);

    // Re-running without retrain reuses the weight files.
    const auto mtime = fs::last_write_time(paths.score_wts);
    run_benchmark(cfg, /*retrain=*/false);
    CHECK(fs::last_write_time(paths.score_wts) == mtime);

    // The report stage can be recomputed standalone from artifacts.
    const MetricsReport again = stage_report(cfg);
    CHECK(again.method_x0[0].median ==
          doctest::Approx(m.method_x0[0].median));
}

TEST_CASE("benchmark pipeline is bit-deterministic across worker counts") {
    TempDir dir_a("bench_det_a"), dir_b("bench_det_b");
    RunConfig a = tiny_config(dir_a.path);
    RunConfig b = tiny_config(dir_b.path);
    setenv("EXPDIFF_THREADS", "1", 1);
    run_benchmark(a, true);
    setenv("EXPDIFF_THREADS", "7", 1);
    run_benchmark(b, true);
    unsetenv("EXPDIFF_THREADS");
    CHECK(slurp(dir_a.path + "/samples.csv") == slurp(dir_b.path + "/samples.csv"));
    CHECK(slurp(dir_a.path + "/mcmc.csv") == slurp(dir_b.path + "/mcmc.csv"));
    CHECK(slurp(dir_a.path + "/obs.csv") == slurp(dir_b.path + "/obs.csv"));
}
