// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "wildfire/features.hpp"

#include <json.hpp>

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace wildfire::eval {

/// exp(x) - 1, clamped below at 0.
double inverse_transform(double pred_log) noexcept;
std::vector<double> inverse_transform(std::span<const double> pred_log);

struct MetricSet {
    double mae_days = 0;
    double rmse_days = 0;
    double r2_days = 0;  // NaN when the truth is constant
    bool r2_defined = true;
};

/// Day-unit MAE, RMSE and out-of-sample R² (SS_tot about the mean of
/// `true_days`). Throws LengthMismatch for unequal lengths or fewer than two
/// values.
MetricSet compute_metrics(std::span<const double> true_days, std::span<const double> pred_days);

struct CvPlan {
    std::vector<std::vector<std::size_t>> folds;  // positions 0..n-1
    std::uint64_t seed = 0;
};

/// Seeded shuffle, then contiguous chunks; the first n % k folds get the
/// extra row. Throws TooFewRows when n < k or k < 2.
CvPlan kfold_indices(std::size_t n_rows, std::size_t k = 5, std::uint64_t seed = 42);

enum class ModelKind { RandomForest, Gbt, Lstm };
std::string_view model_kind_name(ModelKind kind) noexcept;  // "rf", "gbt", "lstm"
/// Throws UnknownModel.
ModelKind parse_model_kind(std::string_view name);

/// Parameter name with its candidate values, in enumeration order: the
/// first key varies slowest.
using ParamGrid = std::vector<std::pair<std::string, std::vector<nlohmann::json>>>;

/// Orders the keys of a JSON object by the model's parameter order. Throws
/// UnknownParameter, EmptyGrid.
ParamGrid make_grid(ModelKind kind, const nlohmann::json& object);
nlohmann::json grid_to_json(const ParamGrid& grid);
/// Every combination as a JSON object, in enumeration order.
std::vector<nlohmann::json> expand_grid(const ParamGrid& grid);

/// Scores one fit: params, training rows and held-out rows as dataset row ids.
using FoldEvaluator =
    std::function<double(const nlohmann::json& params, std::span<const std::size_t> train, std::span<const std::size_t> holdout)>;

struct GridResult {
    std::vector<nlohmann::json> combinations;
    std::vector<std::vector<double>> fold_scores;  // [combination][fold]
    std::vector<double> mean_scores;
    std::size_t best = 0;
    std::size_t fold_fits = 0;
};

/// `plan` folds index into `rows`. Every (combination, fold) pair is an
/// independent task; the table is assembled by index, so the result does not
/// depend on `threads`. Lowest mean wins, first combination on ties.
GridResult grid_search(const ParamGrid& grid, std::span<const std::size_t> rows, const CvPlan& plan,
                       const FoldEvaluator& evaluate, std::size_t threads = 1);

/// RMSE in log space on the held-out fold. Forest and boosting only; each
/// combination overrides `base_params`. Boosting runs without early
/// stopping inside cross-validation. Throws UnsupportedModel for Lstm.
GridResult grid_search(ModelKind kind, const ParamGrid& grid, const Matrix& x, std::span<const double> y,
                       std::span<const std::size_t> rows, const CvPlan& plan, const nlohmann::json& base_params,
                       std::size_t threads = 1);

nlohmann::json to_json(const GridResult& result);

double rmse(std::span<const double> truth, std::span<const double> pred);

struct ResidualBin {
    std::string label;
    double lower = 0;
    double upper = 0;  // +inf for the last bin
    std::size_t count = 0;
    double mae = 0;
    double mean_signed_error = 0;  // pred - true; positive means overestimate
};

/// Bins [0,10), [10,40), [40,inf) by true duration. Empty bins report zeros.
/// Throws LengthMismatch.
std::vector<ResidualBin> residual_analysis(std::span<const double> true_days, std::span<const double> pred_days);

nlohmann::json to_json(const MetricSet& metrics);
MetricSet metrics_from_json(const nlohmann::json& doc);

}  // namespace wildfire::eval
