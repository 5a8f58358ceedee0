// Exercises the installed CLI binary end to end: exit codes, subcommands,
// file outputs. Driven through std::system against the sibling executable.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

namespace fs = std::filesystem;

namespace {

std::string cli_path() {
    // tests/ and tools/ are sibling build directories.
    return (fs::path(EXPDIFF_CLI_PATH)).string();
}

int run(const std::string& args) {
    const std::string cmd = cli_path() + " " + args + " > cli_out.txt 2>&1";
    const int rc = std::system(cmd.c_str());
    return WEXITSTATUS(rc);
}

void write_config(const std::string& path, const std::string& out_dir) {
    std::ofstream out(path);
    out << R"({
        "family": "poisson",
        "d": 2,
        "n_obs": 1,
        "seed": 7,
        "out_dir": ")" << out_dir << R"(",
        "train_score": {"steps": 40, "batch_size": 8, "log_every": 20,
                         "hidden": [8], "time_embed_len": 4},
        "train_inference": {"steps": 40, "batch_size": 8, "log_every": 20,
                             "hidden": [8], "time_embed_len": 4},
        "sampler": {"steps": 40, "n_samples": 6},
        "mcmc": {"chains": 2, "iters": 2000, "burn_in": 500}
    })";
}

}  // namespace

TEST_CASE("print-schema exits 0 and emits JSON") {
    CHECK(run("--print-schema") == 0);
    std::ifstream in("cli_out.txt");
    std::string text((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    CHECK(text.find("\"additionalProperties\"") != std::string::npos);
}

TEST_CASE("config errors exit 2, io errors exit 4") {
    CHECK(run("gen-data --config no_such_config.json") == 4);
    std::ofstream("cli_bad.json") << R"({"family":"poisson"})";  // missing d
    CHECK(run("gen-data --config cli_bad.json") == 2);
    std::ofstream("cli_bad2.json") << R"({"family":"poisson","d":2,"x":1})";
    CHECK(run("gen-data --config cli_bad2.json") == 2);
    fs::remove("cli_bad.json");
    fs::remove("cli_bad2.json");
}

TEST_CASE("pipeline subcommands chain through a run directory") {
    fs::remove_all("cli_run");
    write_config("cli_cfg.json", "cli_run");
    CHECK(run("gen-data --config cli_cfg.json") == 0);
    CHECK(fs::exists("cli_run/obs.csv"));
    CHECK(run("train-score --config cli_cfg.json") == 0);
    CHECK(run("train-inference --config cli_cfg.json") == 0);
    CHECK(run("sample-posterior --config cli_cfg.json") == 0);
    CHECK(fs::exists("cli_run/samples.csv"));
    CHECK(run("mcmc --config cli_cfg.json --out cli_run/custom_mcmc.csv") == 0);
    CHECK(fs::exists("cli_run/custom_mcmc.csv"));
    CHECK(run("mcmc --config cli_cfg.json") == 0);
    CHECK(run("report --config cli_cfg.json") == 0);
    CHECK(fs::exists("cli_run/metrics.csv"));
    CHECK(fs::exists("cli_run/report.svg"));
    fs::remove_all("cli_run");
    fs::remove("cli_cfg.json");
    fs::remove("cli_out.txt");
}

TEST_CASE("sample-posterior without trained weights exits 4") {
    fs::remove_all("cli_run2");
    write_config("cli_cfg2.json", "cli_run2");
    CHECK(run("gen-data --config cli_cfg2.json") == 0);
    CHECK(run("sample-posterior --config cli_cfg2.json") == 4);
    fs::remove_all("cli_run2");
    fs::remove("cli_cfg2.json");
    fs::remove("cli_out.txt");
}
