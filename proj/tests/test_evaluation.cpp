#include <algorithm>
#include <random>
#include <set>
#include <sstream>

#include "baas/errors.hpp"
#include "baas/evaluation.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace baas;
using namespace baas::eval;

namespace {

data::Dataset synthetic(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> peers(1, 10), quota(1, 2);
    std::uniform_real_distribution<double> rate(200.0, 600.0), noise(-1.0, 1.0);
    data::Dataset ds;
    for (std::size_t i = 0; i < n; ++i) {
        sim::ScalingConfig c{peers(rng), quota(rng), std::round(rate(rng))};
        const double cap = 150.0 * c.cpu_quota_per_peer + 40.0 * c.num_peers;
        const double tps = std::min(c.tx_request_rate, cap) + noise(rng);
        ds.records.push_back({c, std::min(100.0, 100.0 * cap / c.tx_request_rate), tps, i});
    }
    return ds;
}

}  // namespace

TEST_CASE("smape hand values") {
    const std::vector<double> a{100}, p{110};
    CHECK(smape(a, p) == doctest::Approx(100.0 * 10.0 / 105.0).epsilon(1e-12));
    CHECK(smape(std::vector<double>{0}, std::vector<double>{5}) == doctest::Approx(200.0));
    CHECK(smape(std::vector<double>{0, 0}, std::vector<double>{0, 0}) == 0.0);
    CHECK_THROWS_AS(smape(std::vector<double>{1}, std::vector<double>{1, 2}), ValidationError);
    CHECK_THROWS_AS(smape(std::vector<double>{}, std::vector<double>{}), ValidationError);
}

TEST_CASE("smape properties on random vectors") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-500.0, 500.0), k(0.01, 100.0);
    for (int i = 0; i < 200; ++i) {
        const auto n = std::uniform_int_distribution<std::size_t>(1, 20)(rng);
        std::vector<double> a(n), p(n), ka(n), kp(n);
        for (std::size_t j = 0; j < n; ++j) {
            a[j] = u(rng);
            p[j] = u(rng);
        }
        const double s = k(rng);
        for (std::size_t j = 0; j < n; ++j) {
            ka[j] = s * a[j];
            kp[j] = s * p[j];
        }
        const double v = smape(a, p);
        CHECK(v == doctest::Approx(oracle::smape(a, p)).epsilon(1e-12));
        CHECK(v == doctest::Approx(smape(p, a)).epsilon(1e-12));
        CHECK(v == doctest::Approx(smape(ka, kp)).epsilon(1e-9));
        CHECK(smape(a, a) == 0.0);
        CHECK(v >= 0.0);
        CHECK(v <= 200.0);
    }
}

TEST_CASE("train/test split sizes and determinism") {
    const auto ds = synthetic(10, 1);
    const auto s = split_train_test(ds, 0.8, 3);
    CHECK(s.train.size() == 8);
    CHECK(s.test.size() == 2);
    const auto again = split_train_test(ds, 0.8, 3);
    CHECK(again.train == s.train);
    const auto big = synthetic(200, 2);
    CHECK_FALSE(split_train_test(big, 0.8, 3).test == split_train_test(big, 0.8, 4).test);
    CHECK_THROWS_AS(split_train_test(ds, 1.0, 1), ValidationError);
    CHECK_THROWS_AS(split_train_test(ds, 0.0, 1), ValidationError);
}

TEST_CASE("k-fold assignment partitions the records") {
    const auto folds = kfold_assignment(593, 10, 42);
    REQUIRE(folds.size() == 10);
    std::multiset<std::size_t> sizes;
    std::set<std::size_t> all;
    for (const auto& f : folds) {
        sizes.insert(f.size());
        all.insert(f.begin(), f.end());
    }
    CHECK(sizes.count(59) == 7);
    CHECK(sizes.count(60) == 3);
    CHECK(all.size() == 593);
    CHECK(*all.rbegin() == 592);
    CHECK_THROWS_AS(kfold_assignment(5, 6, 1), ValidationError);
    CHECK_THROWS_AS(kfold_assignment(5, 1, 1), ValidationError);
}

TEST_CASE("leave-one-out on training-identical queries is exact") {
    // Duplicate every record so each held-out point still has its twin in training.
    auto ds = synthetic(15, 8);
    const auto copy = ds.records;
    ds.records.insert(ds.records.end(), copy.begin(), copy.end());
    ml::ForestHyperparams hp{1, 30, 2, 1};
    ModelRecipe memorise = [hp](const data::Dataset& train, ml::Label label) {
        return ml::Model{ml::fit_forest(ml::to_samples(train, label), hp, 1, {false, 1}), label, {}};
    };
    const auto e = kfold_cv(ds, memorise, ml::Label::throughput_tps, static_cast<int>(ds.size()), 3);
    CHECK(e.smape == doctest::Approx(0.0));
    CHECK(e.fold_scores.size() == ds.size());
}

TEST_CASE("k-fold result does not depend on thread count") {
    const auto ds = synthetic(120, 9);
    const auto r = forest_recipe({5, 8, 2, 1}, 4);
    const auto a = kfold_cv(ds, r, ml::Label::success_rate, 5, 11, 1);
    const auto b = kfold_cv(ds, r, ml::Label::success_rate, 5, 11, 3);
    CHECK(a.fold_scores == b.fold_scores);
}

TEST_CASE("grid search over a single point returns it") {
    const auto ds = synthetic(100, 4);
    const HyperparamSpace one{{3}, {4}, {2}, {1}};
    const auto r = grid_search(ds, ml::Label::throughput_tps, one, 7);
    CHECK(r.best == ml::ForestHyperparams{3, 4, 2, 1});
    REQUIRE(r.table.size() == 1);
    CHECK(r.best_score == r.table[0].second);
    CHECK_THROWS_AS(grid_search(ds, ml::Label::throughput_tps, HyperparamSpace{}, 7), ValidationError);
}

TEST_CASE("grid search table is lexicographic and best is its first minimum") {
    const auto ds = synthetic(120, 6);
    const HyperparamSpace space{{3, 1}, {1, 4}, {2}, {1, 2}};
    const auto r = grid_search(ds, ml::Label::throughput_tps, space, 7, 2);
    REQUIRE(r.table.size() == 8);
    CHECK(std::is_sorted(r.table.begin(), r.table.end(), [](auto& a, auto& b) { return a.first < b.first; }));
    auto first_min = r.table.begin();
    for (auto it = r.table.begin(); it != r.table.end(); ++it) {
        if (it->second < first_min->second) first_min = it;
    }
    CHECK(r.best == first_min->first);
}

TEST_CASE("report writers") {
    EvalReport rep{"kfold:2", 1, {{"random_forest", ml::Label::success_rate, 1.5, {1.0, 2.0}}}};
    std::ostringstream folds, flat;
    write_folds_csv(rep, folds);
    write_report_csv(rep, flat);
    CHECK(folds.str() ==
          "algorithm,label,fold,smape_percent\nrandom_forest,success_rate,0,1\n"
          "random_forest,success_rate,1,2\nrandom_forest,success_rate,mean,1.5\n");
    CHECK(flat.str() == "algorithm,label,smape_percent\nrandom_forest,success_rate,1.5\n");
}
