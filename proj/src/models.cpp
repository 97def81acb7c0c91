#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "baas/errors.hpp"
#include "baas/hashing.hpp"
#include "baas/mlcore.hpp"
#include "baas/parallel.hpp"

namespace baas::ml {

void validate(const ForestHyperparams& hp) {
    require(hp.n_estimators >= 1 && hp.n_estimators <= 50, "n_estimators must lie in [1,50]");
    require(hp.max_depth >= 1 && hp.max_depth <= 30, "max_depth must lie in [1,30]");
    require(hp.min_samples_split >= 2 && hp.min_samples_split <= 100, "min_samples_split must lie in [2,100]");
    require(hp.min_samples_leaf >= 1 && hp.min_samples_leaf <= 50, "min_samples_leaf must lie in [1,50]");
}

std::string Model::kind() const {
    switch (body.index()) {
        case 0: return "forest";
        case 1: return "linear";
        case 2: return "polynomial";
        default: return "gbm";
    }
}

// ---------------------------------------------------------------------------
// Random forest

ForestModel fit_forest(std::span<const Sample> train, const ForestHyperparams& hp, std::uint64_t seed,
                       const ForestOptions& options) {
    require(!train.empty(), "fit_forest: empty training set");
    validate(hp);

    std::vector<Sample> sorted(train.begin(), train.end());
    std::sort(sorted.begin(), sorted.end(), [](const Sample& a, const Sample& b) {
        if (a.x != b.x) return a.x < b.x;
        return a.y < b.y;
    });

    ForestModel model;
    model.hyperparams = hp;
    model.seed = seed;
    model.bootstrap = options.bootstrap;
    model.trees.resize(static_cast<std::size_t>(hp.n_estimators));
    const TreeParams tp = hp.tree();
    parallel_for(model.trees.size(), options.threads, [&](std::size_t t) {
        if (!options.bootstrap) {
            model.trees[t] = fit_tree(sorted, tp);
            return;
        }
        std::mt19937_64 rng(derive_seed(seed, t));
        std::uniform_int_distribution<std::size_t> pick(0, sorted.size() - 1);
        std::vector<Sample> resample;
        resample.reserve(sorted.size());
        for (std::size_t i = 0; i < sorted.size(); ++i) resample.push_back(sorted[pick(rng)]);
        model.trees[t] = fit_tree(resample, tp);
    });
    return model;
}

double predict(const ForestModel& m, const Features& x) {
    double sum = 0.0;
    for (const auto& t : m.trees) sum += t.predict(x);
    return sum / static_cast<double>(m.trees.size());
}

// ---------------------------------------------------------------------------
// Least squares

namespace {

template <std::size_t P>
struct LeastSquares {
    double intercept;
    std::array<double, P> coefficients;
};

// Centre and scale every column, solve the normal equations, map back.
template <std::size_t P>
LeastSquares<P> solve_least_squares(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
    const Eigen::Index n = x.rows();
    Eigen::VectorXd mean = x.colwise().mean();
    Eigen::MatrixXd z = x.rowwise() - mean.transpose();
    Eigen::VectorXd scale(static_cast<Eigen::Index>(P));
    for (Eigen::Index j = 0; j < z.cols(); ++j) {
        const double s = std::sqrt(z.col(j).squaredNorm() / static_cast<double>(n));
        scale(j) = s > 0.0 ? s : 1.0;
        z.col(j) /= scale(j);
    }
    const double y_mean = y.mean();
    const Eigen::VectorXd yc = y.array() - y_mean;

    Eigen::MatrixXd a = z.transpose() * z;
    const Eigen::VectorXd b = z.transpose() * yc;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(a);
    const double diag = std::max(1.0, a.diagonal().maxCoeff());
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive() || ldlt.rcond() < 1e-12) {
        a.diagonal().array() += 1e-8 * diag;
        ldlt.compute(a);
        if (ldlt.info() != Eigen::Success) throw ValidationError("least squares: rank-deficient system");
    }
    const Eigen::VectorXd beta = ldlt.solve(b);
    if (!beta.allFinite()) throw ValidationError("least squares: rank-deficient system");

    LeastSquares<P> out{};
    out.intercept = y_mean;
    for (std::size_t j = 0; j < P; ++j) {
        const auto jj = static_cast<Eigen::Index>(j);
        out.coefficients[j] = beta(jj) / scale(jj);
        out.intercept -= out.coefficients[j] * mean(jj);
    }
    return out;
}

void check_finite(std::span<const Sample> train, const char* who) {
    for (const auto& s : train) {
        require(std::isfinite(s.y) && std::all_of(s.x.begin(), s.x.end(), [](double v) { return std::isfinite(v); }),
                std::string(who) + ": non-finite training value");
    }
}

}  // namespace

std::array<double, kPolyTerms> poly_expand(const Features& x) {
    return {x[0],        x[1],        x[2],        x[0] * x[0], x[1] * x[1],
            x[2] * x[2], x[0] * x[1], x[0] * x[2], x[1] * x[2]};
}

LinearModel fit_linear(std::span<const Sample> train) {
    require(!train.empty(), "fit_linear: empty training set");
    check_finite(train, "fit_linear");
    const auto n = static_cast<Eigen::Index>(train.size());
    Eigen::MatrixXd x(n, static_cast<Eigen::Index>(kNumFeatures));
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& s = train[static_cast<std::size_t>(i)];
        for (std::size_t j = 0; j < kNumFeatures; ++j) x(i, static_cast<Eigen::Index>(j)) = s.x[j];
        y(i) = s.y;
    }
    const auto ls = solve_least_squares<kNumFeatures>(x, y);
    return {ls.intercept, ls.coefficients};
}

PolynomialModel fit_polynomial(std::span<const Sample> train) {
    require(!train.empty(), "fit_polynomial: empty training set");
    check_finite(train, "fit_polynomial");
    const auto n = static_cast<Eigen::Index>(train.size());
    Eigen::MatrixXd x(n, static_cast<Eigen::Index>(kPolyTerms));
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& s = train[static_cast<std::size_t>(i)];
        const auto row = poly_expand(s.x);
        for (std::size_t j = 0; j < kPolyTerms; ++j) x(i, static_cast<Eigen::Index>(j)) = row[j];
        y(i) = s.y;
    }
    const auto ls = solve_least_squares<kPolyTerms>(x, y);
    return {ls.intercept, ls.coefficients};
}

double predict(const LinearModel& m, const Features& x) {
    double v = m.intercept;
    for (std::size_t j = 0; j < kNumFeatures; ++j) v += m.coefficients[j] * x[j];
    return v;
}

double predict(const PolynomialModel& m, const Features& x) {
    const auto row = poly_expand(x);
    double v = m.intercept;
    for (std::size_t j = 0; j < kPolyTerms; ++j) v += m.coefficients[j] * row[j];
    return v;
}

// ---------------------------------------------------------------------------
// Gradient boosting, squared loss

BoostedModel fit_gbm(std::span<const Sample> train, int n_stages, double learning_rate,
                     const TreeParams& tree_params) {
    require(!train.empty(), "fit_gbm: empty training set");
    require(n_stages >= 0, "fit_gbm: n_stages must be >= 0");
    require(learning_rate > 0.0 && learning_rate <= 1.0, "fit_gbm: learning_rate must lie in (0,1]");
    check_finite(train, "fit_gbm");

    BoostedModel m;
    m.learning_rate = learning_rate;
    m.tree_params = tree_params;
    double sum = 0.0;
    for (const auto& s : train) sum += s.y;
    m.initial_prediction = sum / static_cast<double>(train.size());

    std::vector<double> current(train.size(), m.initial_prediction);
    std::vector<Sample> residuals(train.begin(), train.end());
    for (int stage = 0; stage < n_stages; ++stage) {
        for (std::size_t i = 0; i < train.size(); ++i) residuals[i].y = train[i].y - current[i];
        RegressionTree tree = fit_tree(residuals, tree_params);
        for (std::size_t i = 0; i < train.size(); ++i) current[i] += learning_rate * tree.predict(train[i].x);
        m.trees.push_back(std::move(tree));
    }
    return m;
}

double predict(const BoostedModel& m, const Features& x) {
    double v = m.initial_prediction;
    for (const auto& t : m.trees) v += m.learning_rate * t.predict(x);
    return v;
}

// ---------------------------------------------------------------------------

double predict(const Model& m, const Features& x) {
    for (double v : x) require(std::isfinite(v), "predict: non-finite feature value");
    return std::visit([&](const auto& body) { return predict(body, x); }, m.body);
}

}  // namespace baas::ml
