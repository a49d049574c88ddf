// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "wildfire/cart.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace wildfire::gbt {

struct GbtParams {
    int n_estimators = 500;
    double learning_rate = 0.01;
    int max_depth = 4;  // negative means unlimited
    double subsample = 0.6;
    double colsample_bytree = 0.8;
    double gamma = 0.4;
    double lambda = 1.0;
    std::optional<int> early_stopping_rounds;
    std::uint64_t seed = 42;

    bool operator==(const GbtParams&) const = default;
};

struct GbtModel {
    double base_score = 0;  // training-target mean, log-days space
    double learning_rate = 0;
    std::size_t n_features = 0;
    std::vector<cart::RegressionTree> trees;
    std::vector<std::vector<std::size_t>> column_masks;  // per kept round
    std::vector<double> importances;
    std::vector<double> validation_rmse;  // per round, when validation was supplied
    GbtParams params;
};

/// Second-order boosting on squared error (g = prediction − y, h = 1). Each
/// round draws a row subset without replacement and a per-tree column subset.
/// With early stopping, the model is truncated to the prefix with the lowest
/// validation RMSE. Throws EmptyDataset or MissingValidation.
GbtModel fit_gbt(const Matrix& x, std::span<const double> y, std::span<const std::size_t> train_rows,
                 const GbtParams& params, std::span<const std::size_t> validation_rows = {});

/// base_score + learning_rate × Σ tree outputs. Throws WidthMismatch.
double predict_gbt(const GbtModel& model, std::span<const double> row);
std::vector<double> predict_gbt(const GbtModel& model, const Matrix& x);

/// Total split gain per feature over the kept trees, normalized to sum 1.
std::vector<double> gain_importance(const GbtModel& model);

nlohmann::json to_json(const GbtParams& params);
GbtParams gbt_params_from_json(const nlohmann::json& doc, GbtParams base = {});
nlohmann::json to_json(const GbtModel& model);
GbtModel gbt_from_json(const nlohmann::json& doc);

}  // namespace wildfire::gbt
