#pragma once

// Regression learners over the three scaling features: CART trees, bagged
// random forests, squared-loss gradient boosting, and least-squares baselines.

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "baas/datagen.hpp"

namespace baas::ml {

inline constexpr std::size_t kNumFeatures = 3;
using Features = std::array<double, kNumFeatures>;

enum class Label { success_rate, throughput_tps };

std::string to_string(Label label);
Label label_from_string(const std::string& name);

struct Sample {
    Features x{};
    double y = 0.0;

    friend bool operator==(const Sample&, const Sample&) = default;
};

Features features_of(const sim::ScalingConfig& c);
double label_of(const sim::PerfRecord& r, Label label);
std::vector<Sample> to_samples(const data::Dataset& ds, Label label);
std::vector<Sample> to_samples(std::span<const sim::PerfRecord> records, Label label);

// ---------------------------------------------------------------------------
// CART

struct Split {
    int feature = 0;
    double threshold = 0.0;
    double sse_reduction = 0.0;
};

/// Exhaustive search over midpoints between consecutive distinct feature
/// values. Ties go to the lower feature index, then the lower threshold.
/// Candidates leaving fewer than `min_leaf` samples on either side are
/// skipped. Returns nullopt when targets are constant or nothing is
/// admissible. Requires at least two samples.
std::optional<Split> best_split(std::span<const Sample> samples, int min_leaf = 1);

/// Growth limits for one tree. Unlike ForestHyperparams these are not tied to
/// the grid-search boundaries; max_depth = 0 forces a single leaf.
struct TreeParams {
    int max_depth = 30;
    int min_samples_split = 2;
    int min_samples_leaf = 1;
};

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;  // mean target of the training samples reaching this node
    int n_samples = 0;

    bool is_leaf() const { return feature < 0; }
    friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

class RegressionTree {
public:
    RegressionTree() = default;
    explicit RegressionTree(std::vector<TreeNode> nodes);

    double predict(const Features& x) const { return nodes_[leaf_index(x)].value; }
    std::size_t leaf_index(const Features& x) const;
    int depth() const;
    const std::vector<TreeNode>& nodes() const { return nodes_; }
    const TreeNode& root() const { return nodes_.front(); }

    friend bool operator==(const RegressionTree&, const RegressionTree&) = default;

private:
    std::vector<TreeNode> nodes_;  // nodes_[0] is the root
};

RegressionTree fit_tree(std::span<const Sample> train, const TreeParams& params);

// ---------------------------------------------------------------------------
// Models

struct ForestHyperparams {
    int n_estimators = 10;
    int max_depth = 16;
    int min_samples_split = 2;
    int min_samples_leaf = 1;

    TreeParams tree() const { return {max_depth, min_samples_split, min_samples_leaf}; }
    friend bool operator==(const ForestHyperparams&, const ForestHyperparams&) = default;
    friend auto operator<=>(const ForestHyperparams&, const ForestHyperparams&) = default;
};

/// Checks the grid-search boundaries: n_estimators in [1,50], max_depth in
/// [1,30], min_samples_split in [2,100], min_samples_leaf in [1,50].
void validate(const ForestHyperparams& hp);

inline constexpr ForestHyperparams kSuccessSelected{5, 5, 4, 2};
inline constexpr ForestHyperparams kThroughputSelected{19, 16, 2, 2};

struct ForestModel {
    std::vector<RegressionTree> trees;
    ForestHyperparams hyperparams;
    std::uint64_t seed = 0;
    bool bootstrap = true;

    friend bool operator==(const ForestModel&, const ForestModel&) = default;
};

struct LinearModel {
    double intercept = 0.0;
    std::array<double, kNumFeatures> coefficients{};

    friend bool operator==(const LinearModel&, const LinearModel&) = default;
};

inline constexpr std::size_t kPolyTerms = 9;

/// Degree-2 expansion with interactions:
/// x1, x2, x3, x1^2, x2^2, x3^2, x1*x2, x1*x3, x2*x3.
std::array<double, kPolyTerms> poly_expand(const Features& x);

struct PolynomialModel {
    double intercept = 0.0;
    std::array<double, kPolyTerms> coefficients{};

    friend bool operator==(const PolynomialModel&, const PolynomialModel&) = default;
};

struct BoostedModel {
    double initial_prediction = 0.0;
    double learning_rate = 0.1;
    TreeParams tree_params;
    std::vector<RegressionTree> trees;  // one per stage

    std::size_t n_stages() const { return trees.size(); }
    friend bool operator==(const BoostedModel&, const BoostedModel&) = default;
};

using ModelBody = std::variant<ForestModel, LinearModel, PolynomialModel, BoostedModel>;

struct Model {
    ModelBody body;
    Label label = Label::throughput_tps;
    std::string training_fingerprint;  // provenance hash of the training data, may be empty

    std::string kind() const;
};

struct ForestOptions {
    bool bootstrap = true;  // false only for memorisation tests
    unsigned threads = 1;
};

/// Trees are grown on bootstrap resamples (size n, with replacement) of the
/// canonically sorted training set, so input order does not matter.
ForestModel fit_forest(std::span<const Sample> train, const ForestHyperparams& hp, std::uint64_t seed,
                       const ForestOptions& options = {});

/// Least squares via normal equations on standardised columns; a ridge term
/// of 1e-8 is added when the system is singular.
LinearModel fit_linear(std::span<const Sample> train);
PolynomialModel fit_polynomial(std::span<const Sample> train);

BoostedModel fit_gbm(std::span<const Sample> train, int n_stages, double learning_rate,
                     const TreeParams& tree_params);

double predict(const ForestModel& m, const Features& x);
double predict(const LinearModel& m, const Features& x);
double predict(const PolynomialModel& m, const Features& x);
double predict(const BoostedModel& m, const Features& x);
/// Throws ValidationError on non-finite features.
double predict(const Model& m, const Features& x);

// ---------------------------------------------------------------------------
// Persistence

inline constexpr const char* kModelFormat = "baas-model";
inline constexpr int kModelFormatVersion = 1;
inline constexpr const char* kLibraryVersion = "1.0.0";

std::string serialize_model(const Model& m);
Model deserialize_model(const std::string& text, const std::string& source_name = "<string>");
void save_model(const Model& m, const std::filesystem::path& path);
Model load_model(const std::filesystem::path& path);

/// Returns a warning when the model's training fingerprint differs from the
/// dataset's provenance; nullopt when they match or either side is unknown.
std::optional<std::string> fingerprint_warning(const Model& m, const data::Dataset& ds);

}  // namespace baas::ml
