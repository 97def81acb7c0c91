#include "baas/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

#include "baas/errors.hpp"
#include "baas/hashing.hpp"
#include "baas/parallel.hpp"

namespace baas::eval {

double smape(std::span<const double> actual, std::span<const double> predicted) {
    require(actual.size() == predicted.size(), "smape: length mismatch");
    require(!actual.empty(), "smape: empty input");
    double sum = 0.0;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        const double denom = std::abs(actual[i]) + std::abs(predicted[i]);
        if (denom == 0.0) continue;
        sum += 2.0 * std::abs(predicted[i] - actual[i]) / denom;
    }
    return 100.0 * sum / static_cast<double>(actual.size());
}

namespace {

std::vector<std::size_t> shuffled_indices(std::size_t n, std::uint64_t seed) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::mt19937_64 rng(mix64(seed));
    std::shuffle(idx.begin(), idx.end(), rng);
    return idx;
}

data::Dataset subset(const data::Dataset& ds, std::span<const std::size_t> idx) {
    data::Dataset out;
    out.provenance = ds.provenance;
    out.records.reserve(idx.size());
    for (std::size_t i : idx) out.records.push_back(ds.records[i]);
    return out;
}

std::string fingerprint_of(const data::Dataset& ds) {
    return ds.provenance ? ds.provenance->fingerprint() : std::string{};
}

}  // namespace

TrainTest split_train_test(const data::Dataset& ds, double train_fraction, std::uint64_t seed) {
    require(train_fraction > 0.0 && train_fraction < 1.0, "train_fraction must lie in (0,1)");
    require(ds.size() >= 2, "split needs at least two records");
    const auto idx = shuffled_indices(ds.size(), seed);
    auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(ds.size())));
    n_train = std::clamp<std::size_t>(n_train, 1, ds.size() - 1);
    std::span<const std::size_t> all(idx);
    return {subset(ds, all.first(n_train)), subset(ds, all.subspan(n_train))};
}

ModelRecipe forest_recipe(ml::ForestHyperparams hp, std::uint64_t seed, unsigned threads) {
    return [hp, seed, threads](const data::Dataset& train, ml::Label label) {
        const auto samples = ml::to_samples(train, label);
        return ml::Model{ml::fit_forest(samples, hp, seed, {true, threads}), label, fingerprint_of(train)};
    };
}

ModelRecipe selected_forest_recipe(std::uint64_t seed, unsigned threads) {
    return [seed, threads](const data::Dataset& train, ml::Label label) {
        const auto hp = label == ml::Label::success_rate ? ml::kSuccessSelected : ml::kThroughputSelected;
        return forest_recipe(hp, seed, threads)(train, label);
    };
}

ModelRecipe linear_recipe() {
    return [](const data::Dataset& train, ml::Label label) {
        return ml::Model{ml::fit_linear(ml::to_samples(train, label)), label, fingerprint_of(train)};
    };
}

ModelRecipe polynomial_recipe() {
    return [](const data::Dataset& train, ml::Label label) {
        return ml::Model{ml::fit_polynomial(ml::to_samples(train, label)), label, fingerprint_of(train)};
    };
}

ModelRecipe gbm_recipe(GbmSettings s) {
    return [s](const data::Dataset& train, ml::Label label) {
        return ml::Model{ml::fit_gbm(ml::to_samples(train, label), s.n_stages, s.learning_rate, s.tree), label,
                         fingerprint_of(train)};
    };
}

double score(const ml::Model& model, const data::Dataset& test, ml::Label label) {
    std::vector<double> actual, predicted;
    actual.reserve(test.size());
    predicted.reserve(test.size());
    for (const auto& r : test.records) {
        actual.push_back(ml::label_of(r, label));
        predicted.push_back(ml::predict(model, ml::features_of(r.config)));
    }
    return smape(actual, predicted);
}

EvalReport holdout_eval(const data::Dataset& ds, const std::vector<std::pair<std::string, ModelRecipe>>& algorithms,
                        const std::vector<ml::Label>& labels, double train_fraction, std::uint64_t seed) {
    const auto split = split_train_test(ds, train_fraction, seed);
    EvalReport report;
    std::ostringstream desc;
    desc << "holdout:" << train_fraction;
    report.split = desc.str();
    report.seed = seed;
    for (const auto& [name, recipe] : algorithms) {
        for (auto label : labels) {
            const auto model = recipe(split.train, label);
            report.entries.push_back({name, label, score(model, split.test, label), {}});
        }
    }
    return report;
}

std::vector<std::vector<std::size_t>> kfold_assignment(std::size_t n, int k, std::uint64_t seed) {
    require(k >= 2, "K must be >= 2");
    require(n >= static_cast<std::size_t>(k), "K must not exceed the number of records");
    const auto idx = shuffled_indices(n, seed);
    const auto kk = static_cast<std::size_t>(k);
    std::vector<std::vector<std::size_t>> folds(kk);
    std::size_t pos = 0;
    for (std::size_t f = 0; f < kk; ++f) {
        const std::size_t size = n / kk + (f < n % kk ? 1 : 0);
        folds[f].assign(idx.begin() + static_cast<std::ptrdiff_t>(pos),
                        idx.begin() + static_cast<std::ptrdiff_t>(pos + size));
        pos += size;
    }
    return folds;
}

EvalEntry kfold_cv(const data::Dataset& ds, const ModelRecipe& recipe, ml::Label label, int k, std::uint64_t seed,
                   unsigned threads, const std::string& algorithm) {
    const auto folds = kfold_assignment(ds.size(), k, seed);
    EvalEntry entry{algorithm, label, 0.0, std::vector<double>(folds.size(), 0.0)};
    parallel_for(folds.size(), threads, [&](std::size_t f) {
        std::vector<char> held(ds.size(), 0);
        for (std::size_t i : folds[f]) held[i] = 1;
        std::vector<std::size_t> train_idx;
        for (std::size_t i = 0; i < ds.size(); ++i) {
            if (!held[i]) train_idx.push_back(i);
        }
        const auto model = recipe(subset(ds, train_idx), label);
        entry.fold_scores[f] = score(model, subset(ds, folds[f]), label);
    });
    entry.smape = std::accumulate(entry.fold_scores.begin(), entry.fold_scores.end(), 0.0) /
                  static_cast<double>(entry.fold_scores.size());
    return entry;
}

HyperparamSpace default_hyperparam_space() {
    return {{1, 3, 5, 10, 19, 30, 50}, {1, 3, 5, 8, 16, 24, 30}, {2, 4, 8, 16, 32, 64, 100}, {1, 2, 4, 8, 16, 32, 50}};
}

GridSearchResult grid_search(const data::Dataset& ds, ml::Label label, const HyperparamSpace& space,
                             std::uint64_t seed, unsigned threads) {
    require(space.size() > 0, "grid search space is empty");
    auto sorted = [](std::vector<int> v) {
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
        return v;
    };
    const auto ne = sorted(space.n_estimators), md = sorted(space.max_depth), ms = sorted(space.min_samples_split),
               ml_ = sorted(space.min_samples_leaf);

    GridSearchResult result;
    for (int a : ne)
        for (int b : md)
            for (int c : ms)
                for (int d : ml_) {
                    ml::ForestHyperparams hp{a, b, c, d};
                    ml::validate(hp);
                    result.table.emplace_back(hp, 0.0);
                }

    const auto split = split_train_test(ds, 0.8, seed);
    const auto train = ml::to_samples(split.train, label);
    parallel_for(result.table.size(), threads, [&](std::size_t i) {
        const ml::Model model{ml::fit_forest(train, result.table[i].first, seed), label, {}};
        result.table[i].second = score(model, split.test, label);
    });

    std::size_t best = 0;
    for (std::size_t i = 1; i < result.table.size(); ++i) {
        if (result.table[i].second < result.table[best].second) best = i;
    }
    result.best = result.table[best].first;
    result.best_score = result.table[best].second;
    return result;
}

std::vector<ComparisonRow> compare_algorithms(const data::Dataset& ds, std::uint64_t seed, unsigned threads) {
    const std::vector<std::pair<std::string, ModelRecipe>> algorithms{
        {"linear", linear_recipe()},
        {"polynomial", polynomial_recipe()},
        {"gradient_boosting", gbm_recipe()},
        {"random_forest", selected_forest_recipe(seed, threads)},
    };
    const auto report =
        holdout_eval(ds, algorithms, {ml::Label::success_rate, ml::Label::throughput_tps}, 0.8, seed);
    std::vector<ComparisonRow> rows;
    for (const auto& e : report.entries) rows.push_back({e.algorithm, e.label, e.smape});
    return rows;
}

void write_comparison_csv(const std::vector<ComparisonRow>& rows, std::ostream& out) {
    out << "algorithm,label,smape_percent\n";
    for (const auto& r : rows) out << r.algorithm << ',' << ml::to_string(r.label) << ',' << data::format_double(r.smape) << '\n';
}

void write_report_csv(const EvalReport& report, std::ostream& out) {
    out << "algorithm,label,smape_percent\n";
    for (const auto& e : report.entries) {
        out << e.algorithm << ',' << ml::to_string(e.label) << ',' << data::format_double(e.smape) << '\n';
    }
}

void write_folds_csv(const EvalReport& report, std::ostream& out) {
    out << "algorithm,label,fold,smape_percent\n";
    for (const auto& e : report.entries) {
        for (std::size_t f = 0; f < e.fold_scores.size(); ++f) {
            out << e.algorithm << ',' << ml::to_string(e.label) << ',' << f << ','
                << data::format_double(e.fold_scores[f]) << '\n';
        }
        out << e.algorithm << ',' << ml::to_string(e.label) << ",mean," << data::format_double(e.smape) << '\n';
    }
}

void write_report_text(const EvalReport& report, std::ostream& out) {
    out << "split " << report.split << ", seed " << report.seed << '\n';
    char line[160];
    for (const auto& e : report.entries) {
        std::snprintf(line, sizeof line, "  %-18s %-15s SMAPE %8.3f%%", e.algorithm.c_str(),
                      ml::to_string(e.label).c_str(), e.smape);
        out << line;
        if (!e.fold_scores.empty()) {
            const auto [lo, hi] = std::minmax_element(e.fold_scores.begin(), e.fold_scores.end());
            std::snprintf(line, sizeof line, "  (%zu folds, min %.3f, max %.3f)", e.fold_scores.size(), *lo, *hi);
            out << line;
        }
        out << '\n';
    }
}

void write_grid_search_csv(const GridSearchResult& result, std::ostream& out) {
    out << "n_estimators,max_depth,min_samples_split,min_samples_leaf,smape_percent\n";
    for (const auto& [hp, s] : result.table) {
        out << hp.n_estimators << ',' << hp.max_depth << ',' << hp.min_samples_split << ',' << hp.min_samples_leaf
            << ',' << data::format_double(s) << '\n';
    }
}

}  // namespace baas::eval
