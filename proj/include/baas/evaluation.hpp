#pragma once

// Scoring and model selection: SMAPE, holdout split, K-fold cross
// validation, hyperparameter grid search, algorithm comparison.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "baas/datagen.hpp"
#include "baas/mlcore.hpp"

namespace baas::eval {

/// Symmetric MAPE in percent: (100/n) * sum |p - a| / ((|a| + |p|) / 2).
/// Terms where |a| + |p| == 0 contribute 0. Range [0, 200].
double smape(std::span<const double> actual, std::span<const double> predicted);

struct TrainTest {
    data::Dataset train;
    data::Dataset test;
};

/// Seeded shuffle, then the first round(fraction * n) records train.
TrainTest split_train_test(const data::Dataset& ds, double train_fraction, std::uint64_t seed);

/// Builds a model from a training set for one label.
using ModelRecipe = std::function<ml::Model(const data::Dataset& train, ml::Label label)>;

ModelRecipe forest_recipe(ml::ForestHyperparams hp, std::uint64_t seed, unsigned threads = 1);
/// Table-selected hyperparameters: (5,5,4,2) for success, (19,16,2,2) for throughput.
ModelRecipe selected_forest_recipe(std::uint64_t seed, unsigned threads = 1);
ModelRecipe linear_recipe();
ModelRecipe polynomial_recipe();

struct GbmSettings {
    int n_stages = 100;
    double learning_rate = 0.1;
    ml::TreeParams tree{3, 2, 1};
};
ModelRecipe gbm_recipe(GbmSettings settings = {});

double score(const ml::Model& model, const data::Dataset& test, ml::Label label);

struct EvalEntry {
    std::string algorithm;
    ml::Label label = ml::Label::throughput_tps;
    double smape = 0.0;
    std::vector<double> fold_scores;  // empty for holdout evaluation
};

struct EvalReport {
    std::string split;  // "holdout:<fraction>" or "kfold:<K>"
    std::uint64_t seed = 0;
    std::vector<EvalEntry> entries;
};

EvalReport holdout_eval(const data::Dataset& ds, const std::vector<std::pair<std::string, ModelRecipe>>& algorithms,
                        const std::vector<ml::Label>& labels, double train_fraction, std::uint64_t seed);

/// Fold membership after a seeded shuffle: the first n % K folds hold
/// floor(n/K) + 1 records, the rest floor(n/K).
std::vector<std::vector<std::size_t>> kfold_assignment(std::size_t n, int k, std::uint64_t seed);

EvalEntry kfold_cv(const data::Dataset& ds, const ModelRecipe& recipe, ml::Label label, int k,
                   std::uint64_t seed, unsigned threads = 1, const std::string& algorithm = "forest");

struct HyperparamSpace {
    std::vector<int> n_estimators;
    std::vector<int> max_depth;
    std::vector<int> min_samples_split;
    std::vector<int> min_samples_leaf;

    std::size_t size() const {
        return n_estimators.size() * max_depth.size() * min_samples_split.size() * min_samples_leaf.size();
    }
};

/// Stepped grid over the search boundaries; contains both selected tuples.
HyperparamSpace default_hyperparam_space();

struct GridSearchResult {
    ml::ForestHyperparams best;
    double best_score = 0.0;
    std::vector<std::pair<ml::ForestHyperparams, double>> table;  // lexicographic hyperparameter order
};

/// Trains a forest per grid point on the 80% split and scores it on the 20%
/// split. Ties resolve to the lexicographically smallest hyperparameters.
GridSearchResult grid_search(const data::Dataset& ds, ml::Label label, const HyperparamSpace& space,
                             std::uint64_t seed, unsigned threads = 1);

struct ComparisonRow {
    std::string algorithm;
    ml::Label label;
    double smape;
};

/// Linear, polynomial, gradient boosting and random forest on one 80/20 split.
std::vector<ComparisonRow> compare_algorithms(const data::Dataset& ds, std::uint64_t seed, unsigned threads = 1);

void write_comparison_csv(const std::vector<ComparisonRow>& rows, std::ostream& out);
void write_report_csv(const EvalReport& report, std::ostream& out);
/// algorithm,label,fold,smape_percent with a trailing "mean" row per entry.
void write_folds_csv(const EvalReport& report, std::ostream& out);
void write_report_text(const EvalReport& report, std::ostream& out);
void write_grid_search_csv(const GridSearchResult& result, std::ostream& out);

}  // namespace baas::eval
