// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "wildfire/cart.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace wildfire::forest {

enum class MaxFeatures { Sqrt, Log2, All };

struct ForestParams {
    int n_estimators = 350;
    std::optional<int> max_depth = 10;
    int min_samples_split = 2;
    int min_samples_leaf = 1;
    MaxFeatures max_features = MaxFeatures::Sqrt;
    bool bootstrap = true;
    std::uint64_t seed = 42;

    bool operator==(const ForestParams&) const = default;
};

struct ForestModel {
    std::vector<cart::RegressionTree> trees;
    ForestParams params;
    std::vector<std::uint64_t> tree_seeds;
    std::vector<double> importances;
};

/// Bagged variance trees. Tree t draws its bootstrap sample and per-node
/// feature subsets from derive_seed(seed, t), so the model does not depend on
/// how trees are scheduled across `threads`. Throws EmptyDataset.
ForestModel fit_forest(const Matrix& x, std::span<const double> y, std::span<const std::size_t> rows,
                       const ForestParams& params, std::size_t threads = 1);

/// Mean of the per-tree predictions (log-days space). Throws WidthMismatch.
double predict_forest(const ForestModel& model, std::span<const double> row);
std::vector<double> predict_forest(const ForestModel& model, const Matrix& x);

/// Per tree, each split adds (n_node / n_root) * variance gain to its feature;
/// tree vectors are averaged and normalized to sum 1 (all zeros if nothing
/// was ever split).
std::vector<double> impurity_importance(const ForestModel& model);

nlohmann::json to_json(const ForestParams& params);
ForestParams forest_params_from_json(const nlohmann::json& doc, ForestParams base = {});
nlohmann::json to_json(const ForestModel& model);
ForestModel forest_from_json(const nlohmann::json& doc);

}  // namespace wildfire::forest
