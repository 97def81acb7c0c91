#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "baas/datagen.hpp"
#include "baas/errors.hpp"
#include "baas/hashing.hpp"
#include "doctest.h"

using namespace baas;
using namespace baas::data;

namespace fs = std::filesystem;

TEST_CASE("paper grid has 61 admissible pairs and 244 configurations") {
    const auto grid = build_grid(GridSpec{});
    CHECK(grid.size() == 244);
    std::set<std::pair<int, int>> pairs;
    for (const auto& c : grid) {
        CHECK(c.num_peers * c.cpu_quota_per_peer + 2 <= 24);
        pairs.emplace(c.num_peers, c.cpu_quota_per_peer);
    }
    CHECK(pairs.size() == 61);
}

TEST_CASE("quota range per peer count follows the core budget") {
    CHECK(max_quota_for(5, 24, 2) == 4);
    CHECK(max_quota_for(1, 24, 2) == 22);
    CHECK(max_quota_for(10, 24, 2) == 2);
    CHECK(max_quota_for(1, 24, 2, 8) == 8);
    GridSpec g;
    g.peer_min = g.peer_max = 5;
    g.rates = {300.0};
    const auto grid = build_grid(g);
    REQUIRE(grid.size() == 4);
    for (int q = 1; q <= 4; ++q) CHECK(grid[static_cast<std::size_t>(q - 1)].cpu_quota_per_peer == q);
}

TEST_CASE("grid rejects empty inputs") {
    GridSpec g;
    g.rates.clear();
    CHECK_THROWS_AS(build_grid(g), ValidationError);
    g = {};
    g.peer_min = 30;
    g.peer_max = 30;
    CHECK_THROWS_AS(build_grid(g), ValidationError);
    CHECK_THROWS_AS(collect_dataset(build_grid(GridSpec{}), sim::SimParams{}, 0, 1), ValidationError);
}

TEST_CASE("record seeds are distinct across configs and repetitions") {
    std::set<std::uint64_t> seen;
    for (std::size_t c = 0; c < 50; ++c)
        for (int r = 0; r < 3; ++r) seen.insert(record_seed(42, c, r));
    CHECK(seen.size() == 150);
    CHECK(record_seed(42, 3, 1) == derive_seed(42, 3, 1));
}

TEST_CASE("dataset collection is independent of thread count") {
    GridSpec g;
    g.peer_max = 3;
    g.rates = {300.0, 500.0};
    sim::SimParams p;
    p.total_txs = 500;
    const auto grid = build_grid(g);
    const auto a = collect_dataset(grid, p, 2, 9, 1);
    const auto b = collect_dataset(grid, p, 2, 9, 4);
    CHECK(a == b);
    CHECK(a.size() == grid.size() * 2);
    // Config-major order: repetitions of one config are adjacent.
    CHECK(a.records[0].config == a.records[1].config);
}

TEST_CASE("CSV round trip is lossless") {
    Dataset ds;
    ds.records.push_back({{1, 2, 250.0}, 100.0, 249.87654321012345, 123});
    ds.records.push_back({{10, 2, 0.1}, 0.1 + 0.2, 1e-7, 18446744073709551615ULL});
    std::stringstream ss;
    write_csv(ds, ss);
    CHECK(ss.str().rfind(std::string(kCsvHeader) + "\n", 0) == 0);
    const auto back = read_csv(ss);
    CHECK(back.records == ds.records);
}

TEST_CASE("CSV columns may appear in any order") {
    std::istringstream in("seed,throughput_tps,success_rate,tx_request_rate,cpu_quota_per_peer,num_peers\n"
                          "5,100.5,99,300,2,3\n");
    const auto ds = read_csv(in);
    REQUIRE(ds.size() == 1);
    CHECK(ds.records[0].config == sim::ScalingConfig{3, 2, 300.0});
    CHECK(ds.records[0].seed == 5);
}

TEST_CASE("malformed CSV names the offending line and column") {
    auto error_of = [](const std::string& text) {
        std::istringstream in(text);
        try {
            read_csv(in, "t.csv");
        } catch (const IoError& e) {
            return std::string(e.what());
        }
        return std::string("no error");
    };
    const std::string h = std::string(kCsvHeader) + "\n";
    CHECK(error_of("") .find("empty") != std::string::npos);
    CHECK(error_of("num_peers,bogus\n").find("unknown header column 'bogus'") != std::string::npos);
    CHECK(error_of("num_peers,cpu_quota_per_peer,tx_request_rate,success_rate,throughput_tps\n")
              .find("missing column 'seed'") != std::string::npos);
    const auto bad = error_of(h + "1,1,250,100,250,1\n1,x,250,100,250,1\n");
    CHECK(bad.find("line 3") != std::string::npos);
    CHECK(bad.find("cpu_quota_per_peer") != std::string::npos);
    CHECK(error_of(h + "1,1,250,100,250\n").find("expected 6 fields") != std::string::npos);
    CHECK(error_of(h + "1,1,250,101,250,1\n").find("success_rate") != std::string::npos);
}

TEST_CASE("file round trip keeps provenance in a sidecar") {
    const auto dir = fs::temp_directory_path() / "baas_datagen_test";
    fs::create_directories(dir);
    const auto path = dir / "d.csv";
    GridSpec g;
    g.peer_max = 2;
    g.rates = {300.0};
    sim::SimParams p;
    p.total_txs = 200;
    auto ds = collect_dataset(build_grid(g), p, 1, 3);
    ds.provenance->grid = g;
    write_csv(ds, path);
    CHECK(fs::exists(meta_path(path)));
    const auto back = read_csv(path);
    CHECK(back == ds);
    CHECK(back.provenance->fingerprint() == ds.provenance->fingerprint());
    CHECK(ds.provenance->fingerprint().size() == 16);
    CHECK_THROWS_AS(read_csv(dir / "missing.csv"), IoError);
    fs::remove_all(dir);
}

TEST_CASE("fingerprint changes with simulator parameters") {
    Provenance a, b;
    b.params.order_ms = 4.1;
    CHECK(a.fingerprint() != b.fingerprint());
    CHECK(a.fingerprint() == Provenance{}.fingerprint());
}
