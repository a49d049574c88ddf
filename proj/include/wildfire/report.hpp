// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "wildfire/eval.hpp"

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace wildfire {

struct ModelReport {
    eval::ModelKind kind = eval::ModelKind::Gbt;
    eval::MetricSet metrics;
    std::vector<eval::ResidualBin> bins;
    std::vector<std::string> feature_names;
    std::vector<double> importances;  // empty when the model has none
    std::vector<double> true_days;
    std::vector<double> pred_days;
};

struct EvalReport {
    std::vector<ModelReport> models;
    std::vector<double> log_acres;  // test rows
    std::vector<double> days;
};

/// Builds a model entry from test truth and predictions (day units).
ModelReport make_model_report(eval::ModelKind kind, std::vector<double> true_days, std::vector<double> pred_days,
                              std::vector<std::string> feature_names, std::vector<double> importances);

std::string metrics_csv(const EvalReport& report);
std::string residual_bins_csv(const EvalReport& report);
/// Population standard deviation of the predictions and of the truth, per model.
std::string prediction_spread_csv(const EvalReport& report);
/// Sorted by decreasing importance, column order on ties.
std::string importance_csv(const ModelReport& model);

/// Standalone SVG scatter plot, one <circle> per point.
std::string scatter_svg(std::string_view title, std::string_view x_label, std::string_view y_label,
                        std::span<const double> x, std::span<const double> y);
/// Horizontal bar chart, one <rect class="bar"> per value.
std::string bar_svg(std::string_view title, std::span<const std::string> labels, std::span<const double> values);

/// Every report file keyed by its name within the report directory.
std::map<std::string, std::string> render_report(const EvalReport& report);

/// Writes all files into a sibling temporary directory, then swaps it into
/// place. Throws EmptyTestSet (data) before touching the disk and IoError on
/// filesystem failure.
void emit_report(const EvalReport& report, const std::filesystem::path& directory);

nlohmann::json to_json(const EvalReport& report);

}  // namespace wildfire
