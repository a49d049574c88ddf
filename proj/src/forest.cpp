// SPDX-License-Identifier: Apache-2.0
#include "wildfire/forest.hpp"

#include "wildfire/error.hpp"

#include <cmath>
#include <string>

namespace wildfire::forest {

namespace {

cart::FeatureSampling sampling_for(MaxFeatures mode) {
    switch (mode) {
        case MaxFeatures::Sqrt: return {cart::FeatureSubsample::Sqrt, 1.0};
        case MaxFeatures::Log2: return {cart::FeatureSubsample::Log2, 1.0};
        case MaxFeatures::All: return {cart::FeatureSubsample::All, 1.0};
    }
    return {};
}

const char* max_features_name(MaxFeatures mode) {
    switch (mode) {
        case MaxFeatures::Sqrt: return "sqrt";
        case MaxFeatures::Log2: return "log2";
        case MaxFeatures::All: return "all";
    }
    return "all";
}

MaxFeatures parse_max_features(const nlohmann::json& value) {
    if (value.is_null()) return MaxFeatures::All;
    const auto text = value.get<std::string>();
    if (text == "sqrt") return MaxFeatures::Sqrt;
    if (text == "log2") return MaxFeatures::Log2;
    if (text == "all" || text == "None" || text == "none") return MaxFeatures::All;
    fail_config("InvalidParameter", "max_features must be sqrt, log2 or all, got " + text);
}

std::vector<double> tree_importance(const cart::RegressionTree& tree) {
    std::vector<double> out(tree.n_features(), 0.0);
    const auto& nodes = tree.nodes();
    if (nodes.empty()) return out;
    const double total = nodes.front().n_samples;
    for (const auto& node : nodes) {
        if (!node.is_leaf()) out[static_cast<std::size_t>(node.feature)] += node.n_samples / total * node.gain;
    }
    return out;
}

}  // namespace

ForestModel fit_forest(const Matrix& x, std::span<const double> y, std::span<const std::size_t> rows,
                       const ForestParams& params, std::size_t threads) {
    if (rows.empty()) fail_data("EmptyDataset", "no training rows for the forest");
    if (params.n_estimators < 1) fail_config("InvalidParameter", "n_estimators must be >= 1");
    if (y.size() != x.rows()) fail_data("LengthMismatch", "target length differs from matrix rows");

    std::vector<std::uint32_t> base(rows.begin(), rows.end());
    const cart::PresortedColumns presorted = cart::presort(x, base);
    const cart::Targets targets{y, {}};
    cart::TreeParams tree_params;
    tree_params.max_depth = params.max_depth;
    tree_params.min_samples_split = static_cast<std::size_t>(std::max(2, params.min_samples_split));
    tree_params.min_samples_leaf = static_cast<std::size_t>(std::max(1, params.min_samples_leaf));
    tree_params.features = sampling_for(params.max_features);

    ForestModel model;
    model.params = params;
    const auto n_trees = static_cast<std::size_t>(params.n_estimators);
    model.trees.resize(n_trees);
    model.tree_seeds.resize(n_trees);
    for (std::size_t t = 0; t < n_trees; ++t) model.tree_seeds[t] = derive_seed(params.seed, t);

    parallel_for(n_trees, threads, [&](std::size_t t) {
        Rng rng(model.tree_seeds[t]);
        std::vector<std::uint32_t> sample;
        if (params.bootstrap) {
            sample.resize(base.size());
            std::uniform_int_distribution<std::size_t> draw(0, base.size() - 1);
            for (auto& s : sample) s = base[draw(rng)];
        } else {
            sample = base;
        }
        model.trees[t] = cart::fit_tree(x, targets, sample, tree_params, cart::SplitCriterion::variance(), rng, {},
                                        &presorted);
    });
    model.importances = impurity_importance(model);
    return model;
}

double predict_forest(const ForestModel& model, std::span<const double> row) {
    if (model.trees.empty()) fail_internal("EmptyModel", "forest has no trees");
    double sum = 0;
    for (const auto& tree : model.trees) sum += tree.predict(row);
    return sum / static_cast<double>(model.trees.size());
}

std::vector<double> predict_forest(const ForestModel& model, const Matrix& x) {
    std::vector<double> out(x.rows());
    for (std::size_t r = 0; r < x.rows(); ++r) out[r] = predict_forest(model, x.row(r));
    return out;
}

std::vector<double> impurity_importance(const ForestModel& model) {
    if (model.trees.empty()) return {};
    std::vector<double> total(model.trees.front().n_features(), 0.0);
    for (const auto& tree : model.trees) {
        const auto per_tree = tree_importance(tree);
        for (std::size_t f = 0; f < total.size(); ++f) total[f] += per_tree[f];
    }
    double sum = 0;
    for (auto& v : total) {
        v /= static_cast<double>(model.trees.size());
        sum += v;
    }
    if (sum > 0) {
        for (auto& v : total) v /= sum;
    }
    return total;
}

nlohmann::json to_json(const ForestParams& p) {
    return {{"n_estimators", p.n_estimators},
            {"max_depth", p.max_depth ? nlohmann::json(*p.max_depth) : nlohmann::json(nullptr)},
            {"min_samples_split", p.min_samples_split},
            {"min_samples_leaf", p.min_samples_leaf},
            {"max_features", max_features_name(p.max_features)},
            {"bootstrap", p.bootstrap},
            {"seed", p.seed}};
}

ForestParams forest_params_from_json(const nlohmann::json& doc, ForestParams p) try {
    for (const auto& [key, value] : doc.items()) {
        if (key == "n_estimators") p.n_estimators = value.get<int>();
        else if (key == "max_depth") p.max_depth = value.is_null() ? std::nullopt : std::optional<int>(value.get<int>());
        else if (key == "min_samples_split") p.min_samples_split = value.get<int>();
        else if (key == "min_samples_leaf") p.min_samples_leaf = value.get<int>();
        else if (key == "max_features") p.max_features = parse_max_features(value);
        else if (key == "bootstrap") p.bootstrap = value.get<bool>();
        else if (key == "seed") p.seed = value.get<std::uint64_t>();
        else fail_config("UnknownParameter", "random forest has no parameter " + key);
    }
    if (p.n_estimators < 1) fail_config("InvalidParameter", "n_estimators must be >= 1");
    if (p.max_depth && *p.max_depth < 0) fail_config("InvalidParameter", "max_depth must be >= 0");
    if (p.min_samples_split < 2) fail_config("InvalidParameter", "min_samples_split must be >= 2");
    if (p.min_samples_leaf < 1) fail_config("InvalidParameter", "min_samples_leaf must be >= 1");
    return p;
} catch (const nlohmann::json::exception& e) {
    fail_config("InvalidParameter", e.what());
}

nlohmann::json to_json(const ForestModel& model) {
    nlohmann::json trees = nlohmann::json::array();
    for (const auto& t : model.trees) trees.push_back(cart::to_json(t));
    return {{"params", to_json(model.params)},
            {"tree_seeds", model.tree_seeds},
            {"importances", model.importances},
            {"trees", std::move(trees)}};
}

ForestModel forest_from_json(const nlohmann::json& doc) try {
    ForestModel model;
    model.params = forest_params_from_json(doc.at("params"));
    model.tree_seeds = doc.at("tree_seeds").get<std::vector<std::uint64_t>>();
    model.importances = doc.at("importances").get<std::vector<double>>();
    for (const auto& t : doc.at("trees")) model.trees.push_back(cart::tree_from_json(t));
    if (model.trees.size() != static_cast<std::size_t>(model.params.n_estimators)) {
        fail_data("MalformedArtifact", "forest tree count differs from n_estimators");
    }
    return model;
} catch (const nlohmann::json::exception& e) {
    fail_data("MalformedArtifact", e.what());
}

}  // namespace wildfire::forest
