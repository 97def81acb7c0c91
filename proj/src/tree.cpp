#include <algorithm>
#include <cmath>
#include <numeric>

#include "baas/errors.hpp"
#include "baas/mlcore.hpp"

namespace baas::ml {

std::string to_string(Label label) {
    return label == Label::success_rate ? "success_rate" : "throughput_tps";
}

Label label_from_string(const std::string& name) {
    if (name == "success_rate" || name == "success") return Label::success_rate;
    if (name == "throughput_tps" || name == "throughput") return Label::throughput_tps;
    throw ValidationError("unknown label '" + name + "' (expected success_rate or throughput_tps)");
}

Features features_of(const sim::ScalingConfig& c) {
    return {static_cast<double>(c.num_peers), static_cast<double>(c.cpu_quota_per_peer), c.tx_request_rate};
}

double label_of(const sim::PerfRecord& r, Label label) {
    return label == Label::success_rate ? r.success_rate : r.throughput_tps;
}

std::vector<Sample> to_samples(std::span<const sim::PerfRecord> records, Label label) {
    std::vector<Sample> out;
    out.reserve(records.size());
    for (const auto& r : records) out.push_back({features_of(r.config), label_of(r, label)});
    return out;
}

std::vector<Sample> to_samples(const data::Dataset& ds, Label label) { return to_samples(ds.records, label); }

// ---------------------------------------------------------------------------

std::optional<Split> best_split(std::span<const Sample> samples, int min_leaf) {
    const std::size_t n = samples.size();
    require(n >= 2, "best_split needs at least two samples");
    min_leaf = std::max(min_leaf, 1);
    if (n < 2 * static_cast<std::size_t>(min_leaf)) return std::nullopt;

    const double first = samples.front().y;
    if (std::all_of(samples.begin(), samples.end(), [&](const Sample& s) { return s.y == first; })) {
        return std::nullopt;
    }

    // Targets are centred before accumulating to limit cancellation.
    double mean = 0.0;
    for (const auto& s : samples) mean += s.y;
    mean /= static_cast<double>(n);
    double total_sse = 0.0;
    for (const auto& s : samples) total_sse += (s.y - mean) * (s.y - mean);
    const double tol = 1e-10 * total_sse;

    std::optional<Split> best;
    double best_sse = 0.0;
    std::vector<std::size_t> order(n);
    for (std::size_t f = 0; f < kNumFeatures; ++f) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return samples[a].x[f] < samples[b].x[f]; });
        double sum_all = 0.0, sq_all = 0.0;
        for (const auto& s : samples) {
            const double c = s.y - mean;
            sum_all += c;
            sq_all += c * c;
        }
        double sum_l = 0.0, sq_l = 0.0;
        for (std::size_t k = 1; k < n; ++k) {
            const double c = samples[order[k - 1]].y - mean;
            sum_l += c;
            sq_l += c * c;
            const double lo = samples[order[k - 1]].x[f];
            const double hi = samples[order[k]].x[f];
            if (!(lo < hi)) continue;
            if (k < static_cast<std::size_t>(min_leaf) || n - k < static_cast<std::size_t>(min_leaf)) continue;
            const auto nl = static_cast<double>(k);
            const auto nr = static_cast<double>(n - k);
            const double sum_r = sum_all - sum_l;
            const double sq_r = sq_all - sq_l;
            const double sse = std::max(0.0, sq_l - sum_l * sum_l / nl) + std::max(0.0, sq_r - sum_r * sum_r / nr);
            if (!best || sse < best_sse - tol) {
                double thr = (lo + hi) / 2.0;
                if (!(thr < hi)) thr = lo;
                best = Split{static_cast<int>(f), thr, 0.0};
                best_sse = sse;
            }
        }
    }
    if (best) best->sse_reduction = std::max(0.0, total_sse - best_sse);
    return best;
}

// ---------------------------------------------------------------------------

RegressionTree::RegressionTree(std::vector<TreeNode> nodes) : nodes_(std::move(nodes)) {
    require(!nodes_.empty(), "a tree needs at least one node");
    for (const auto& nd : nodes_) {
        if (nd.is_leaf()) continue;
        require(nd.feature < static_cast<int>(kNumFeatures), "tree node feature index out of range");
        require(nd.left > 0 && nd.right > 0 && nd.left < static_cast<int>(nodes_.size()) &&
                    nd.right < static_cast<int>(nodes_.size()),
                "tree node child index out of range");
    }
}

std::size_t RegressionTree::leaf_index(const Features& x) const {
    std::size_t i = 0;
    while (!nodes_[i].is_leaf()) {
        const TreeNode& nd = nodes_[i];
        i = static_cast<std::size_t>(x[static_cast<std::size_t>(nd.feature)] <= nd.threshold ? nd.left : nd.right);
    }
    return i;
}

int RegressionTree::depth() const {
    std::vector<int> d(nodes_.size(), 0);
    int deepest = 0;
    // Children always come after their parent in the node array.
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        deepest = std::max(deepest, d[i]);
        if (!nodes_[i].is_leaf()) {
            d[static_cast<std::size_t>(nodes_[i].left)] = d[i] + 1;
            d[static_cast<std::size_t>(nodes_[i].right)] = d[i] + 1;
        }
    }
    return deepest;
}

namespace {

class TreeBuilder {
public:
    explicit TreeBuilder(const TreeParams& p) : params_(p) {}

    std::vector<TreeNode> build(std::vector<Sample> samples) {
        grow(std::move(samples), 0);
        return std::move(nodes_);
    }

private:
    int grow(std::vector<Sample> samples, int depth) {
        const int index = static_cast<int>(nodes_.size());
        double sum = 0.0;
        for (const auto& s : samples) sum += s.y;
        TreeNode node;
        node.value = sum / static_cast<double>(samples.size());
        node.n_samples = static_cast<int>(samples.size());
        nodes_.push_back(node);

        if (depth >= params_.max_depth || node.n_samples < params_.min_samples_split || node.n_samples < 2) {
            return index;
        }
        const auto split = best_split(samples, params_.min_samples_leaf);
        if (!split) return index;

        const auto f = static_cast<std::size_t>(split->feature);
        std::vector<Sample> left, right;
        for (auto& s : samples) (s.x[f] <= split->threshold ? left : right).push_back(s);
        samples.clear();
        samples.shrink_to_fit();

        const int l = grow(std::move(left), depth + 1);
        const int r = grow(std::move(right), depth + 1);
        TreeNode& me = nodes_[static_cast<std::size_t>(index)];
        me.feature = split->feature;
        me.threshold = split->threshold;
        me.left = l;
        me.right = r;
        return index;
    }

    TreeParams params_;
    std::vector<TreeNode> nodes_;
};

}  // namespace

RegressionTree fit_tree(std::span<const Sample> train, const TreeParams& params) {
    require(!train.empty(), "fit_tree: empty training set");
    require(params.max_depth >= 0, "fit_tree: max_depth must be >= 0");
    require(params.min_samples_split >= 2, "fit_tree: min_samples_split must be >= 2");
    require(params.min_samples_leaf >= 1, "fit_tree: min_samples_leaf must be >= 1");
    for (const auto& s : train) {
        require(std::isfinite(s.y) && std::all_of(s.x.begin(), s.x.end(), [](double v) { return std::isfinite(v); }),
                "fit_tree: non-finite training value");
    }
    TreeBuilder builder(params);
    return RegressionTree(builder.build(std::vector<Sample>(train.begin(), train.end())));
}

}  // namespace baas::ml
