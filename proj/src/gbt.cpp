// SPDX-License-Identifier: Apache-2.0
#include "wildfire/gbt.hpp"

#include "wildfire/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace wildfire::gbt {

namespace {

double rmse_on(std::span<const double> pred, std::span<const double> y, std::span<const std::size_t> rows) {
    double ss = 0;
    for (auto r : rows) ss += (pred[r] - y[r]) * (pred[r] - y[r]);
    return std::sqrt(ss / static_cast<double>(rows.size()));
}

void validate(const GbtParams& p) {
    if (p.n_estimators < 0) fail_config("InvalidParameter", "n_estimators must be >= 0");
    if (!(p.learning_rate >= 0)) fail_config("InvalidParameter", "learning_rate must be >= 0");
    if (!(p.subsample > 0 && p.subsample <= 1)) fail_config("InvalidParameter", "subsample must be in (0, 1]");
    if (!(p.colsample_bytree > 0 && p.colsample_bytree <= 1)) {
        fail_config("InvalidParameter", "colsample_bytree must be in (0, 1]");
    }
    if (!(p.gamma >= 0)) fail_config("InvalidParameter", "gamma must be >= 0");
    if (!(p.lambda >= 0)) fail_config("InvalidParameter", "lambda must be >= 0");
    if (p.early_stopping_rounds && *p.early_stopping_rounds < 1) {
        fail_config("InvalidParameter", "early_stopping_rounds must be >= 1");
    }
}

}  // namespace

GbtModel fit_gbt(const Matrix& x, std::span<const double> y, std::span<const std::size_t> train_rows,
                 const GbtParams& params, std::span<const std::size_t> validation_rows) {
    validate(params);
    if (train_rows.empty()) fail_data("EmptyDataset", "no training rows for boosting");
    if (y.size() != x.rows()) fail_data("LengthMismatch", "target length differs from matrix rows");
    if (params.early_stopping_rounds && validation_rows.empty()) {
        fail_data("MissingValidation", "early stopping needs validation rows");
    }

    GbtModel model;
    model.params = params;
    model.learning_rate = params.learning_rate;
    model.n_features = x.cols();
    double sum = 0;
    for (auto r : train_rows) sum += y[r];
    model.base_score = sum / static_cast<double>(train_rows.size());

    std::vector<std::uint32_t> base(train_rows.begin(), train_rows.end());
    const cart::PresortedColumns presorted = cart::presort(x, base);

    std::vector<double> pred(x.rows(), model.base_score);
    std::vector<double> grad(x.rows(), 0.0), hess(x.rows(), 1.0);
    const cart::Targets targets{grad, hess};
    const auto criterion = cart::SplitCriterion::newton(params.lambda, params.gamma);
    cart::TreeParams tree_params;
    if (params.max_depth >= 0) tree_params.max_depth = params.max_depth;
    tree_params.min_samples_split = 2;
    tree_params.min_samples_leaf = 1;

    const std::size_t n_rows = base.size();
    const std::size_t n_sub = std::clamp<std::size_t>(
        static_cast<std::size_t>(std::llround(params.subsample * static_cast<double>(n_rows))), 1, n_rows);
    const std::size_t n_cols = x.cols();
    const std::size_t n_colsub = std::clamp<std::size_t>(
        static_cast<std::size_t>(std::floor(params.colsample_bytree * static_cast<double>(n_cols))), 1, n_cols);

    Rng rng(params.seed);
    std::vector<std::uint32_t> row_pool = base;
    std::vector<std::size_t> col_pool(n_cols);

    const bool track_validation = !validation_rows.empty();
    double best_rmse = track_validation ? rmse_on(pred, y, validation_rows) : 0.0;
    std::size_t best_count = 0;

    for (int round = 0; round < params.n_estimators; ++round) {
        for (auto r : base) grad[r] = pred[r] - y[r];

        std::vector<std::uint32_t> sample;
        if (n_sub < n_rows) {
            for (std::size_t i = 0; i < n_sub; ++i) {
                std::uniform_int_distribution<std::size_t> pick(i, n_rows - 1);
                std::swap(row_pool[i], row_pool[pick(rng)]);
            }
            sample.assign(row_pool.begin(), row_pool.begin() + static_cast<std::ptrdiff_t>(n_sub));
        } else {
            sample = base;
        }

        std::iota(col_pool.begin(), col_pool.end(), std::size_t{0});
        for (std::size_t i = 0; i < n_colsub && n_colsub < n_cols; ++i) {
            std::uniform_int_distribution<std::size_t> pick(i, n_cols - 1);
            std::swap(col_pool[i], col_pool[pick(rng)]);
        }
        std::vector<std::size_t> columns(col_pool.begin(), col_pool.begin() + static_cast<std::ptrdiff_t>(n_colsub));
        std::sort(columns.begin(), columns.end());

        auto tree = cart::fit_tree(x, targets, sample, tree_params, criterion, rng, columns, &presorted);
        for (auto r : base) pred[r] += params.learning_rate * tree.predict(x.row(r));
        for (auto r : validation_rows) pred[r] += params.learning_rate * tree.predict(x.row(r));
        model.trees.push_back(std::move(tree));
        model.column_masks.push_back(std::move(columns));

        if (track_validation) {
            const double rmse = rmse_on(pred, y, validation_rows);
            model.validation_rmse.push_back(rmse);
            if (rmse < best_rmse) {
                best_rmse = rmse;
                best_count = model.trees.size();
            } else if (params.early_stopping_rounds &&
                       model.trees.size() - best_count >= static_cast<std::size_t>(*params.early_stopping_rounds)) {
                break;
            }
        }
    }

    if (params.early_stopping_rounds) {
        model.trees.resize(best_count);
        model.column_masks.resize(best_count);
    }
    model.importances = gain_importance(model);
    return model;
}

double predict_gbt(const GbtModel& model, std::span<const double> row) {
    if (row.size() != model.n_features) {
        fail_data("WidthMismatch", "row has " + std::to_string(row.size()) + " values, model expects " +
                                       std::to_string(model.n_features));
    }
    double sum = 0;
    for (const auto& tree : model.trees) sum += tree.predict(row);
    return model.base_score + model.learning_rate * sum;
}

std::vector<double> predict_gbt(const GbtModel& model, const Matrix& x) {
    std::vector<double> out(x.rows());
    for (std::size_t r = 0; r < x.rows(); ++r) out[r] = predict_gbt(model, x.row(r));
    return out;
}

std::vector<double> gain_importance(const GbtModel& model) {
    std::vector<double> total(model.n_features, 0.0);
    for (const auto& tree : model.trees) {
        for (const auto& node : tree.nodes()) {
            if (!node.is_leaf()) total[static_cast<std::size_t>(node.feature)] += node.gain;
        }
    }
    double sum = std::accumulate(total.begin(), total.end(), 0.0);
    if (sum > 0) {
        for (auto& v : total) v /= sum;
    }
    return total;
}

nlohmann::json to_json(const GbtParams& p) {
    return {{"n_estimators", p.n_estimators},
            {"learning_rate", p.learning_rate},
            {"max_depth", p.max_depth},
            {"subsample", p.subsample},
            {"colsample_bytree", p.colsample_bytree},
            {"gamma", p.gamma},
            {"lambda", p.lambda},
            {"early_stopping_rounds",
             p.early_stopping_rounds ? nlohmann::json(*p.early_stopping_rounds) : nlohmann::json(nullptr)},
            {"seed", p.seed}};
}

GbtParams gbt_params_from_json(const nlohmann::json& doc, GbtParams p) try {
    for (const auto& [key, value] : doc.items()) {
        if (key == "n_estimators") p.n_estimators = value.get<int>();
        else if (key == "learning_rate") p.learning_rate = value.get<double>();
        else if (key == "max_depth") p.max_depth = value.is_null() ? -1 : value.get<int>();
        else if (key == "subsample") p.subsample = value.get<double>();
        else if (key == "colsample_bytree") p.colsample_bytree = value.get<double>();
        else if (key == "gamma") p.gamma = value.get<double>();
        else if (key == "lambda") p.lambda = value.get<double>();
        else if (key == "early_stopping_rounds") {
            p.early_stopping_rounds = value.is_null() ? std::nullopt : std::optional<int>(value.get<int>());
        } else if (key == "seed") p.seed = value.get<std::uint64_t>();
        else fail_config("UnknownParameter", "boosted trees have no parameter " + key);
    }
    validate(p);
    return p;
} catch (const nlohmann::json::exception& e) {
    fail_config("InvalidParameter", e.what());
}

nlohmann::json to_json(const GbtModel& model) {
    nlohmann::json trees = nlohmann::json::array();
    for (const auto& t : model.trees) trees.push_back(cart::to_json(t));
    return {{"params", to_json(model.params)},
            {"base_score", model.base_score},
            {"learning_rate", model.learning_rate},
            {"n_features", model.n_features},
            {"column_masks", model.column_masks},
            {"importances", model.importances},
            {"validation_rmse", model.validation_rmse},
            {"trees", std::move(trees)}};
}

GbtModel gbt_from_json(const nlohmann::json& doc) try {
    GbtModel model;
    model.params = gbt_params_from_json(doc.at("params"));
    model.base_score = doc.at("base_score").get<double>();
    model.learning_rate = doc.at("learning_rate").get<double>();
    model.n_features = doc.at("n_features").get<std::size_t>();
    model.column_masks = doc.at("column_masks").get<std::vector<std::vector<std::size_t>>>();
    model.importances = doc.at("importances").get<std::vector<double>>();
    model.validation_rmse = doc.at("validation_rmse").get<std::vector<double>>();
    for (const auto& t : doc.at("trees")) model.trees.push_back(cart::tree_from_json(t));
    return model;
} catch (const nlohmann::json::exception& e) {
    fail_data("MalformedArtifact", e.what());
}

}  // namespace wildfire::gbt
