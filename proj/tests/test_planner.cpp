#include <random>
#include <sstream>

#include "baas/errors.hpp"
#include "baas/planner.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace baas;
using namespace baas::plan;

namespace {

ml::Model constant(double v, ml::Label label, std::string fp = {}) {
    ml::ForestModel f;
    f.trees.assign(1, ml::RegressionTree({ml::TreeNode{-1, 0.0, -1, -1, v, 1}}));
    return ml::Model{f, label, std::move(fp)};
}

FeasibilityGrid hand_grid(const std::vector<std::pair<int, int>>& feasible) {
    FeasibilityGrid g;
    for (int p = 1; p <= 6; ++p) g.n_p.push_back(p);
    for (int c = 1; c <= 6; ++c) g.n_c.push_back(c);
    for (int p : g.n_p)
        for (int c : g.n_c) {
            GridCell cell;
            cell.n_c = c;
            cell.n_p = p;
            cell.feasible = std::find(feasible.begin(), feasible.end(), std::pair{c, p}) != feasible.end();
            g.cells.push_back(cell);
        }
    return g;
}

}  // namespace

TEST_CASE("hand-built grid picks four cores and three peers") {
    const auto r = optimal_config(hand_grid({{4, 3}, {3, 5}, {5, 5}}), 1.0, 1.0);
    REQUIRE(r.chosen);
    CHECK(r.chosen->n_c == 4);
    CHECK(r.chosen->n_p == 3);
    CHECK(r.cost == 7.0);
}

TEST_CASE("ties prefer fewer peers, then fewer cores") {
    const auto r = optimal_config(hand_grid({{2, 3}, {3, 2}, {1, 4}}), 1.0, 1.0);
    REQUIRE(r.chosen);
    CHECK(r.chosen->n_c == 3);
    CHECK(r.chosen->n_p == 2);
    CHECK_FALSE(optimal_config(hand_grid({}), 1.0, 1.0).chosen);
    CHECK_THROWS_AS(optimal_config(hand_grid({}), 0.0, 1.0), ValidationError);
}

TEST_CASE("optimal_config matches brute force and is invariant to weight scaling") {
    std::mt19937_64 rng(1234);
    std::uniform_real_distribution<double> w(0.1, 5.0), k(0.01, 100.0);
    for (int i = 0; i < 300; ++i) {
        std::vector<std::pair<int, int>> feas;
        for (int c = 1; c <= 6; ++c)
            for (int p = 1; p <= 6; ++p)
                if (std::bernoulli_distribution(0.3)(rng)) feas.emplace_back(c, p);
        const auto g = hand_grid(feas);
        const bool integral = i % 2 == 0;  // integer weights exercise the tie rules
        const double wc = integral ? std::uniform_int_distribution<int>(1, 3)(rng) : w(rng);
        const double wp = integral ? std::uniform_int_distribution<int>(1, 3)(rng) : w(rng);
        const auto got = optimal_config(g, wc, wp);
        const auto want = oracle::best_plan(g, wc, wp);
        REQUIRE(got.chosen.has_value() == want.pair.has_value());
        if (!got.chosen) continue;
        CHECK(std::pair{got.chosen->n_c, got.chosen->n_p} == *want.pair);
        const double s = integral ? 4.0 : k(rng);
        const auto scaled = optimal_config(g, s * wc, s * wp);
        CHECK(std::pair{scaled.chosen->n_c, scaled.chosen->n_p} == *want.pair);
    }
}

TEST_CASE("constant stub models") {
    PlanQuery q;
    const auto all = feasibility_grid(constant(100, ml::Label::success_rate), constant(1000, ml::Label::throughput_tps), q);
    CHECK(all.cells.size() == 61);
    for (const auto& c : all.cells) CHECK(c.feasible);
    const auto r = optimal_config(all, 1.0, 1.0);
    REQUIRE(r.chosen);
    CHECK(r.chosen->n_c == 1);
    CHECK(r.chosen->n_p == 1);

    const auto none = feasibility_grid(constant(0, ml::Label::success_rate), constant(1000, ml::Label::throughput_tps), q);
    for (const auto& c : none.cells) CHECK_FALSE(c.feasible);
}

TEST_CASE("feasibility thresholds and slack") {
    PlanQuery q;
    q.n_c = {1};
    q.n_p = {1};
    auto g = feasibility_grid(constant(99.6, ml::Label::success_rate), constant(450, ml::Label::throughput_tps), q);
    CHECK(g.cells.at(0).feasible);
    g = feasibility_grid(constant(99.4, ml::Label::success_rate), constant(450, ml::Label::throughput_tps), q);
    CHECK_FALSE(g.cells.at(0).success_ok);
    g = feasibility_grid(constant(100, ml::Label::success_rate), constant(449.9, ml::Label::throughput_tps), q);
    CHECK_FALSE(g.cells.at(0).throughput_ok);
    q.min_throughput_tps = 400.0;
    g = feasibility_grid(constant(100, ml::Label::success_rate), constant(449.9, ml::Label::throughput_tps), q);
    CHECK(g.cells.at(0).feasible);
}

TEST_CASE("pairs outside the core budget are skipped") {
    PlanQuery q;
    q.n_c = {4, 5};
    q.n_p = {4, 5};
    const auto pairs = candidate_pairs(q);
    CHECK(pairs == std::vector<std::pair<int, int>>{{4, 4}, {5, 4}, {4, 5}});
    const auto g = feasibility_grid(constant(100, ml::Label::success_rate), constant(1000, ml::Label::throughput_tps), q);
    const auto art = render_ascii(g);
    CHECK(art.find('.') != std::string::npos);
}

TEST_CASE("model mismatches are rejected") {
    PlanQuery q;
    CHECK_THROWS_AS(feasibility_grid(constant(1, ml::Label::throughput_tps), constant(1, ml::Label::throughput_tps), q),
                    ValidationError);
    CHECK_THROWS_AS(feasibility_grid(constant(1, ml::Label::success_rate, "aa"),
                                     constant(1, ml::Label::throughput_tps, "bb"), q),
                    ValidationError);
    q.w_c = -1;
    CHECK_THROWS_AS(validate(q), ValidationError);
}

TEST_CASE("throughput curve") {
    const auto flat = throughput_curve(constant(300, ml::Label::throughput_tps), 4, 4, parse_rates("250:650:50"));
    CHECK(flat.points.size() == 9);
    CHECK(flat.peak_rate == 250.0);
    CHECK(flat.peak_tps == 300.0);
    std::ostringstream os;
    write_curve_csv(flat, os);
    CHECK(os.str().rfind("rate,predicted_tps\n250,300\n", 0) == 0);
    CHECK(parse_rates("300,400,500") == std::vector<double>{300, 400, 500});
    CHECK_THROWS_AS(parse_rates("1:2"), ValidationError);
    CHECK_THROWS_AS(parse_rates("abc"), ValidationError);
    CHECK_THROWS_AS(parse_rates("-5"), ValidationError);
}

TEST_CASE("simulator-backed checks") {
    sim::SimParams p;
    p.total_txs = 2000;
    PlanQuery q;
    q.request_rate = 200.0;
    GridCell cell;
    cell.n_c = 2;
    cell.n_p = 2;
    cell.pred_success = 100.0;
    cell.pred_throughput = 200.0;
    const auto v = validate_plan(cell, q, p, {1, 2});
    CHECK(v.runs.size() == 2);
    CHECK(v.meets_requirements);
    CHECK(v.measured_success == 100.0);

    // A curve predictor equal to the measured mean gives zero error.
    const auto measured = sim::simulate_record({3, 3, 300.0}, p, 5).throughput_tps;
    const auto check = validate_curve(constant(measured, ml::Label::throughput_tps), 3, 3, {300.0}, p, {5});
    CHECK(check.mean_abs_error_pct == doctest::Approx(0.0));
}
