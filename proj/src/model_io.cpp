#include <fstream>
#include <sstream>

#include "baas/errors.hpp"
#include "baas/json_io.hpp"
#include "baas/mlcore.hpp"

namespace baas::ml {

namespace {

Json node_to_json(const RegressionTree& tree, std::size_t i) {
    const TreeNode& nd = tree.nodes()[i];
    if (nd.is_leaf()) return Json{{"value", nd.value}, {"n_samples", nd.n_samples}};
    return Json{{"feature", nd.feature},
                {"threshold", nd.threshold},
                {"value", nd.value},
                {"n_samples", nd.n_samples},
                {"left", node_to_json(tree, static_cast<std::size_t>(nd.left))},
                {"right", node_to_json(tree, static_cast<std::size_t>(nd.right))}};
}

int node_from_json(const Json& j, std::vector<TreeNode>& nodes, int depth) {
    if (depth > 64) throw IoError("tree nesting too deep");
    const int index = static_cast<int>(nodes.size());
    TreeNode nd;
    nd.value = j.at("value").get<double>();
    nd.n_samples = j.at("n_samples").get<int>();
    nodes.push_back(nd);
    if (j.contains("feature")) {
        const int f = j.at("feature").get<int>();
        const double thr = j.at("threshold").get<double>();
        const int l = node_from_json(j.at("left"), nodes, depth + 1);
        const int r = node_from_json(j.at("right"), nodes, depth + 1);
        TreeNode& me = nodes[static_cast<std::size_t>(index)];
        me.feature = f;
        me.threshold = thr;
        me.left = l;
        me.right = r;
    }
    return index;
}

Json trees_to_json(const std::vector<RegressionTree>& trees) {
    Json arr = Json::array();
    for (const auto& t : trees) arr.push_back(node_to_json(t, 0));
    return arr;
}

std::vector<RegressionTree> trees_from_json(const Json& arr) {
    std::vector<RegressionTree> trees;
    for (const auto& j : arr) {
        std::vector<TreeNode> nodes;
        node_from_json(j, nodes, 0);
        trees.emplace_back(std::move(nodes));
    }
    return trees;
}

Json tree_params_to_json(const TreeParams& p) {
    return Json{{"max_depth", p.max_depth},
                {"min_samples_split", p.min_samples_split},
                {"min_samples_leaf", p.min_samples_leaf}};
}

TreeParams tree_params_from_json(const Json& j) {
    return {j.at("max_depth").get<int>(), j.at("min_samples_split").get<int>(), j.at("min_samples_leaf").get<int>()};
}

template <std::size_t N>
std::array<double, N> fixed_array(const Json& j) {
    auto v = j.get<std::vector<double>>();
    if (v.size() != N) throw IoError("coefficient array has " + std::to_string(v.size()) + " entries, expected " + std::to_string(N));
    std::array<double, N> out{};
    std::copy(v.begin(), v.end(), out.begin());
    return out;
}

struct BodyWriter {
    Json& j;
    void operator()(const ForestModel& m) const {
        j["hyperparams"] = Json{{"n_estimators", m.hyperparams.n_estimators},
                                {"max_depth", m.hyperparams.max_depth},
                                {"min_samples_split", m.hyperparams.min_samples_split},
                                {"min_samples_leaf", m.hyperparams.min_samples_leaf}};
        j["seed"] = m.seed;
        j["bootstrap"] = m.bootstrap;
        j["trees"] = trees_to_json(m.trees);
    }
    void operator()(const LinearModel& m) const {
        j["intercept"] = m.intercept;
        j["coefficients"] = m.coefficients;
    }
    void operator()(const PolynomialModel& m) const {
        j["degree"] = 2;
        j["intercept"] = m.intercept;
        j["coefficients"] = m.coefficients;
    }
    void operator()(const BoostedModel& m) const {
        j["initial_prediction"] = m.initial_prediction;
        j["learning_rate"] = m.learning_rate;
        j["hyperparams"] = tree_params_to_json(m.tree_params);
        j["n_stages"] = m.n_stages();
        j["trees"] = trees_to_json(m.trees);
    }
};

}  // namespace

std::string serialize_model(const Model& m) {
    Json j{{"format", kModelFormat},
           {"format_version", kModelFormatVersion},
           {"library_version", kLibraryVersion},
           {"kind", m.kind()},
           {"label", to_string(m.label)},
           {"features", data::feature_names()},
           {"training_fingerprint", m.training_fingerprint}};
    std::visit(BodyWriter{j}, m.body);
    return j.dump(1);
}

Model deserialize_model(const std::string& text, const std::string& source_name) {
    Json j;
    try {
        j = Json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw IoError(source_name + ": model parse error: " + e.what());
    }
    try {
        if (!j.is_object() || j.value("format", std::string{}) != kModelFormat) {
            throw IoError(source_name + ": not a model file (format tag missing)");
        }
        const int version = j.at("format_version").get<int>();
        if (version != kModelFormatVersion) {
            throw IoError(source_name + ": unsupported model format version " + std::to_string(version));
        }
        if (j.at("features").get<std::vector<std::string>>() != data::feature_names()) {
            throw IoError(source_name + ": model feature schema does not match");
        }
        Model m;
        m.label = label_from_string(j.at("label").get<std::string>());
        m.training_fingerprint = j.value("training_fingerprint", std::string{});
        const auto kind = j.at("kind").get<std::string>();
        if (kind == "forest") {
            ForestModel f;
            const Json& hp = j.at("hyperparams");
            f.hyperparams = {hp.at("n_estimators").get<int>(), hp.at("max_depth").get<int>(),
                             hp.at("min_samples_split").get<int>(), hp.at("min_samples_leaf").get<int>()};
            f.seed = j.at("seed").get<std::uint64_t>();
            f.bootstrap = j.at("bootstrap").get<bool>();
            f.trees = trees_from_json(j.at("trees"));
            if (f.trees.empty()) throw IoError(source_name + ": forest has no trees");
            m.body = std::move(f);
        } else if (kind == "linear") {
            m.body = LinearModel{j.at("intercept").get<double>(), fixed_array<kNumFeatures>(j.at("coefficients"))};
        } else if (kind == "polynomial") {
            if (j.at("degree").get<int>() != 2) throw IoError(source_name + ": only degree-2 polynomials are supported");
            m.body = PolynomialModel{j.at("intercept").get<double>(), fixed_array<kPolyTerms>(j.at("coefficients"))};
        } else if (kind == "gbm") {
            BoostedModel b;
            b.initial_prediction = j.at("initial_prediction").get<double>();
            b.learning_rate = j.at("learning_rate").get<double>();
            b.tree_params = tree_params_from_json(j.at("hyperparams"));
            b.trees = trees_from_json(j.at("trees"));
            if (b.trees.size() != j.at("n_stages").get<std::size_t>()) {
                throw IoError(source_name + ": n_stages does not match the stored trees");
            }
            m.body = std::move(b);
        } else {
            throw IoError(source_name + ": unknown model kind '" + kind + "'");
        }
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw IoError(source_name + ": malformed model: " + e.what());
    } catch (const ValidationError& e) {
        throw IoError(source_name + ": malformed model: " + e.what());
    }
}

void save_model(const Model& m, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out << serialize_model(m) << '\n';
    if (!out) throw IoError("write failed: '" + path.string() + "'");
}

Model load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open model '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return deserialize_model(ss.str(), path.string());
}

std::optional<std::string> fingerprint_warning(const Model& m, const data::Dataset& ds) {
    if (m.training_fingerprint.empty() || !ds.provenance) return std::nullopt;
    const auto fp = ds.provenance->fingerprint();
    if (fp == m.training_fingerprint) return std::nullopt;
    return "model was trained on data with fingerprint " + m.training_fingerprint +
           " but the dataset's provenance fingerprint is " + fp;
}

}  // namespace baas::ml
