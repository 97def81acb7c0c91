#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "baas/errors.hpp"
#include "baas/run_config.hpp"
#include "cli.hpp"
#include "doctest.h"

using namespace baas;

namespace fs = std::filesystem;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string operator/(const std::string& f) const { return (path / f).string(); }
};

void write_file(const std::string& path, const std::string& text) {
    std::ofstream(path) << text;
}

}  // namespace

TEST_CASE("config rejects unknown keys and bad values") {
    CHECK_NOTHROW(run_config_from_json(Json::object()));
    CHECK_THROWS_AS(run_config_from_json(Json{{"bogus", 1}}), ValidationError);
    CHECK_THROWS_AS(run_config_from_json(Json{{"sim", {{"endorse", 2.0}}}}), ValidationError);
    CHECK_THROWS_AS(run_config_from_json(Json{{"sim", {{"endorse_ms", -1.0}}}}), ValidationError);
    CHECK_THROWS_AS(run_config_from_json(Json{{"forest", {{"success", {{"n_estimators", 0}}}}}}), ValidationError);
    const auto c = run_config_from_json(Json{{"seed", 7}, {"plan", {{"request_rate", 300.0}}}});
    CHECK(c.seed == 7);
    CHECK(c.plan.request_rate == 300.0);
}

TEST_CASE("config JSON round trip") {
    RunConfig c;
    c.seed = 9;
    c.grid.rates = {100.0, 200.0};
    c.plan.min_throughput_tps = 123.0;
    const auto back = run_config_from_json(run_config_to_json(c));
    CHECK(back.seed == 9);
    CHECK(back.grid == c.grid);
    CHECK(back.sim == c.sim);
    CHECK(back.plan.min_throughput_tps == 123.0);
}

TEST_CASE("config file comes from the flag, then the environment") {
    TempDir dir("baas_cli_cfg");
    write_file(dir / "a.json", R"({"seed": 5})");
    write_file(dir / "b.json", R"({"seed": 6})");
    write_file(dir / "broken.json", "{\"seed\": ");
    ::setenv(kConfigEnvVar, (dir / "b.json").c_str(), 1);
    CHECK(load_run_config(std::nullopt).seed == 6);
    CHECK(load_run_config(fs::path(dir / "a.json")).seed == 5);
    ::unsetenv(kConfigEnvVar);
    CHECK(load_run_config(std::nullopt).seed == 42);
    CHECK_THROWS_AS(load_run_config(fs::path(dir / "broken.json")), IoError);
    CHECK_THROWS_AS(load_run_config(fs::path(dir / "none.json")), IoError);
}

TEST_CASE("usage errors exit 1, I/O errors exit 2") {
    auto r = run({});
    CHECK(r.code == 1);
    r = run({"frobnicate"});
    CHECK(r.code == 1);
    r = run({"simulate", "--np", "x", "--nc", "1", "--rate", "100"});
    CHECK(r.code == 1);
    CHECK(r.err.find("--np") != std::string::npos);
    r = run({"simulate", "--np", "20", "--nc", "2", "--rate", "100"});
    CHECK(r.code == 1);
    CHECK(r.err.find("core") != std::string::npos);
    r = run({"train", "--data", "/nonexistent/d.csv"});
    CHECK(r.code == 2);
    CHECK(r.err.find("/nonexistent/d.csv") != std::string::npos);
    r = run({"--config", "/nonexistent/c.json", "simulate", "--np", "1", "--nc", "1", "--rate", "100"});
    CHECK(r.code == 2);
}

TEST_CASE("every command documents its flags") {
    for (const char* cmd : {"calibrate", "dataset", "simulate", "train", "gridsearch", "eval", "crossval", "plan", "curve"}) {
        const auto r = run({cmd, "--help"});
        CHECK(r.code == 0);
        CHECK(r.out.find("Options:") != std::string::npos);
    }
    const auto plan = run({"plan", "--help"});
    CHECK(plan.out.find("(tps)") != std::string::npos);
    CHECK(plan.out.find("(percent)") != std::string::npos);
}

TEST_CASE("flags override the config file") {
    TempDir dir("baas_cli_prec");
    write_file(dir / "c.json", R"({"seed": 5, "sim": {"total_txs": 300}})");
    auto r = run({"--config", dir / "c.json", "simulate", "--np", "1", "--nc", "1", "--rate", "100"});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("seed=5, txs=300") != std::string::npos);
    r = run({"--config", dir / "c.json", "--seed", "8", "simulate", "--np", "1", "--nc", "1", "--rate", "100", "--txs",
             "200"});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("seed=8, txs=200") != std::string::npos);
}

TEST_CASE("end-to-end pipeline on a small grid") {
    TempDir dir("baas_cli_e2e");
    const auto data = dir / "d.csv";
    auto r = run({"--seed", "42", "--threads", "2", "dataset", "--out", data, "--txs", "1000", "--peers", "1:4",
                  "--rates", "250:650:100"});
    REQUIRE(r.code == 0);
    const auto first = slurp(data);
    r = run({"--seed", "42", "--threads", "1", "dataset", "--out", dir / "d2.csv", "--txs", "1000", "--peers", "1:4",
             "--rates", "250:650:100"});
    REQUIRE(r.code == 0);
    CHECK(first == slurp(dir / "d2.csv"));

    r = run({"train", "--data", data, "--out-success", dir / "s.json", "--out-throughput", dir / "t.json"});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("holdout SMAPE") != std::string::npos);

    r = run({"curve", "--throughput-model", dir / "t.json", "--nc", "4", "--np", "4", "--rates", "250:650:50", "--out",
             dir / "c.csv"});
    REQUIRE(r.code == 0);
    const auto curve = slurp(dir / "c.csv");
    CHECK(std::count(curve.begin(), curve.end(), '\n') == 10);
    CHECK(r.out.find("peak:") != std::string::npos);

    r = run({"plan", "--success-model", dir / "s.json", "--throughput-model", dir / "t.json", "--rate", "300",
             "--np-list", "1:4", "--nc-list", "1:5", "--out", dir / "g.csv"});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("feasible:") != std::string::npos);
    CHECK(slurp(dir / "g.csv").rfind("n_c,n_p,pred_success,pred_throughput,feasible\n", 0) == 0);

    r = run({"plan", "--success-model", dir / "s.json", "--throughput-model", dir / "t.json", "--np-list", "1:12"});
    CHECK(r.code == 1);
    CHECK(r.err.find("--extrapolate") != std::string::npos);

    r = run({"eval", "--data", data, "--out", dir / "cmp.csv", "--success-model", dir / "s.json"});
    REQUIRE(r.code == 0);
    const auto cmp = slurp(dir / "cmp.csv");
    CHECK(cmp.rfind("algorithm,label,smape_percent\n", 0) == 0);
    CHECK(std::count(cmp.begin(), cmp.end(), '\n') == 9);

    r = run({"crossval", "--data", data, "--k", "3", "--out", dir / "cv.csv"});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("3-fold mean SMAPE") != std::string::npos);

    r = run({"gridsearch", "--data", data, "--label", "throughput_tps", "--n-estimators", "2,3", "--max-depth", "4",
             "--min-samples-split", "2", "--min-samples-leaf", "1", "--out", dir / "gs.csv"});
    REQUIRE(r.code == 0);
    const auto gs = slurp(dir / "gs.csv");
    CHECK(std::count(gs.begin(), gs.end(), '\n') == 3);
}

TEST_CASE("calibrate writes loadable simulator params") {
    TempDir dir("baas_cli_cal");
    auto r = run({"calibrate", "--out", dir / "p.json"});
    REQUIRE(r.code == 0);
    r = run({"--sim-params", dir / "p.json", "simulate", "--np", "4", "--nc", "4", "--rate", "50", "--txs", "500"});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("success_rate: 100.000") != std::string::npos);
}
