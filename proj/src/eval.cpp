// SPDX-License-Identifier: Apache-2.0
#include "wildfire/eval.hpp"

#include "wildfire/error.hpp"
#include "wildfire/forest.hpp"
#include "wildfire/gbt.hpp"
#include "wildfire/util.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <limits>
#include <numeric>

namespace wildfire::eval {

namespace {

constexpr std::array<const char*, 6> kForestOrder{"n_estimators",     "max_depth",    "min_samples_split",
                                                  "min_samples_leaf", "max_features", "bootstrap"};
constexpr std::array<const char*, 8> kGbtOrder{"n_estimators",     "learning_rate", "max_depth", "subsample",
                                               "colsample_bytree", "gamma",         "lambda",    "early_stopping_rounds"};

template <std::size_t N>
std::vector<std::string> as_strings(const std::array<const char*, N>& names) {
    return {names.begin(), names.end()};
}

std::vector<std::string> parameter_order(ModelKind kind) {
    switch (kind) {
        case ModelKind::RandomForest: return as_strings(kForestOrder);
        case ModelKind::Gbt: return as_strings(kGbtOrder);
        case ModelKind::Lstm: return {"units", "dropout", "learning_rate", "epochs", "batch_size", "patience"};
    }
    return {};
}

}  // namespace

double inverse_transform(double pred_log) noexcept {
    const double days = std::expm1(pred_log);
    return days > 0 ? days : 0.0;
}

std::vector<double> inverse_transform(std::span<const double> pred_log) {
    std::vector<double> out(pred_log.size());
    std::transform(pred_log.begin(), pred_log.end(), out.begin(), [](double v) { return inverse_transform(v); });
    return out;
}

MetricSet compute_metrics(std::span<const double> true_days, std::span<const double> pred_days) {
    if (true_days.size() != pred_days.size()) {
        fail_data("LengthMismatch", std::to_string(true_days.size()) + " true values vs " +
                                        std::to_string(pred_days.size()) + " predictions");
    }
    if (true_days.size() < 2) fail_data("LengthMismatch", "need at least two values");
    const auto n = static_cast<double>(true_days.size());
    double abs_sum = 0, sq_sum = 0, mean = 0;
    for (std::size_t i = 0; i < true_days.size(); ++i) {
        const double e = pred_days[i] - true_days[i];
        abs_sum += std::abs(e);
        sq_sum += e * e;
        mean += true_days[i];
    }
    mean /= n;
    double ss_tot = 0;
    for (double t : true_days) ss_tot += (t - mean) * (t - mean);

    MetricSet m;
    m.mae_days = abs_sum / n;
    m.rmse_days = std::sqrt(sq_sum / n);
    if (ss_tot > 0) {
        m.r2_days = 1.0 - sq_sum / ss_tot;
    } else {
        m.r2_days = std::numeric_limits<double>::quiet_NaN();
        m.r2_defined = false;
    }
    return m;
}

CvPlan kfold_indices(std::size_t n_rows, std::size_t k, std::uint64_t seed) {
    if (k < 2 || n_rows < k) {
        fail_data("TooFewRows", std::to_string(n_rows) + " rows cannot form " + std::to_string(k) + " folds");
    }
    std::vector<std::size_t> order(n_rows);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(seed);
    std::shuffle(order.begin(), order.end(), rng);

    CvPlan plan;
    plan.seed = seed;
    const std::size_t base = n_rows / k, extra = n_rows % k;
    std::size_t pos = 0;
    for (std::size_t f = 0; f < k; ++f) {
        const std::size_t size = base + (f < extra ? 1 : 0);
        std::vector<std::size_t> fold(order.begin() + static_cast<std::ptrdiff_t>(pos),
                                      order.begin() + static_cast<std::ptrdiff_t>(pos + size));
        std::sort(fold.begin(), fold.end());
        plan.folds.push_back(std::move(fold));
        pos += size;
    }
    return plan;
}

std::string_view model_kind_name(ModelKind kind) noexcept {
    switch (kind) {
        case ModelKind::RandomForest: return "rf";
        case ModelKind::Gbt: return "gbt";
        case ModelKind::Lstm: return "lstm";
    }
    return "unknown";
}

ModelKind parse_model_kind(std::string_view name) {
    const std::string lower = [&] {
        std::string s(name);
        std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
        return s;
    }();
    if (lower == "rf" || lower == "forest" || lower == "random_forest") return ModelKind::RandomForest;
    if (lower == "gbt" || lower == "xgboost" || lower == "boosting") return ModelKind::Gbt;
    if (lower == "lstm") return ModelKind::Lstm;
    fail_config("UnknownModel", "no model named '" + std::string(name) + "' (expected rf, gbt or lstm)");
}

ParamGrid make_grid(ModelKind kind, const nlohmann::json& object) {
    if (!object.is_object() || object.empty()) fail_config("EmptyGrid", "grid must be a non-empty object");
    const auto order = parameter_order(kind);
    for (const auto& [key, values] : object.items()) {
        if (std::find(order.begin(), order.end(), key) == order.end()) {
            fail_config("UnknownParameter", std::string(model_kind_name(kind)) + " has no parameter " + key);
        }
        if (!values.is_array() || values.empty()) fail_config("EmptyGrid", "grid entry " + key + " needs values");
    }
    ParamGrid grid;
    for (const auto& key : order) {
        if (!object.contains(key)) continue;
        const auto& values = object.at(key);
        grid.emplace_back(key, std::vector<nlohmann::json>(values.begin(), values.end()));
    }
    return grid;
}

nlohmann::json grid_to_json(const ParamGrid& grid) {
    nlohmann::ordered_json out = nlohmann::ordered_json::object();
    for (const auto& [key, values] : grid) out[key] = values;
    return nlohmann::json::parse(out.dump());
}

std::vector<nlohmann::json> expand_grid(const ParamGrid& grid) {
    if (grid.empty()) fail_config("EmptyGrid", "grid has no parameters");
    std::size_t total = 1;
    for (const auto& [key, values] : grid) {
        if (values.empty()) fail_config("EmptyGrid", "grid entry " + key + " needs values");
        total *= values.size();
    }
    std::vector<nlohmann::json> out;
    out.reserve(total);
    std::vector<std::size_t> digit(grid.size(), 0);
    for (std::size_t c = 0; c < total; ++c) {
        nlohmann::json combo = nlohmann::json::object();
        for (std::size_t p = 0; p < grid.size(); ++p) combo[grid[p].first] = grid[p].second[digit[p]];
        out.push_back(std::move(combo));
        for (std::size_t p = grid.size(); p-- > 0;) {
            if (++digit[p] < grid[p].second.size()) break;
            digit[p] = 0;
        }
    }
    return out;
}

GridResult grid_search(const ParamGrid& grid, std::span<const std::size_t> rows, const CvPlan& plan,
                       const FoldEvaluator& evaluate, std::size_t threads) {
    GridResult result;
    result.combinations = expand_grid(grid);
    const std::size_t k = plan.folds.size();
    if (k < 2) fail_data("TooFewRows", "cross-validation needs at least two folds");
    for (const auto& fold : plan.folds) {
        for (auto pos : fold) {
            if (pos >= rows.size()) fail_internal("FoldOutOfRange", "fold position beyond the row list");
        }
    }

    std::vector<std::vector<std::size_t>> train_sets(k), holdout_sets(k);
    for (std::size_t f = 0; f < k; ++f) {
        for (std::size_t g = 0; g < k; ++g) {
            auto& target = g == f ? holdout_sets[f] : train_sets[f];
            for (auto pos : plan.folds[g]) target.push_back(rows[pos]);
        }
        std::sort(train_sets[f].begin(), train_sets[f].end());
    }

    const std::size_t n_combos = result.combinations.size();
    result.fold_scores.assign(n_combos, std::vector<double>(k, 0.0));
    parallel_for(n_combos * k, threads, [&](std::size_t task) {
        const std::size_t c = task / k, f = task % k;
        result.fold_scores[c][f] = evaluate(result.combinations[c], train_sets[f], holdout_sets[f]);
    });
    result.fold_fits = n_combos * k;

    double best = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < n_combos; ++c) {
        const auto& scores = result.fold_scores[c];
        const double mean = std::accumulate(scores.begin(), scores.end(), 0.0) / static_cast<double>(k);
        result.mean_scores.push_back(mean);
        if (mean < best) {
            best = mean;
            result.best = c;
        }
    }
    return result;
}

double rmse(std::span<const double> truth, std::span<const double> pred) {
    if (truth.size() != pred.size() || truth.empty()) fail_data("LengthMismatch", "rmse needs equal non-empty inputs");
    double ss = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) ss += (pred[i] - truth[i]) * (pred[i] - truth[i]);
    return std::sqrt(ss / static_cast<double>(truth.size()));
}

GridResult grid_search(ModelKind kind, const ParamGrid& grid, const Matrix& x, std::span<const double> y,
                       std::span<const std::size_t> rows, const CvPlan& plan, const nlohmann::json& base_params,
                       std::size_t threads) {
    auto holdout_rmse = [&](std::span<const std::size_t> holdout, auto&& predict) {
        std::vector<double> truth, pred;
        for (auto r : holdout) {
            truth.push_back(y[r]);
            pred.push_back(predict(x.row(r)));
        }
        return rmse(truth, pred);
    };

    switch (kind) {
        case ModelKind::RandomForest: {
            const auto base = forest::forest_params_from_json(base_params);
            for (const auto& combo : expand_grid(grid)) forest::forest_params_from_json(combo, base);
            return grid_search(grid, rows, plan, [&](const nlohmann::json& combo, auto train, auto holdout) {
                const auto params = forest::forest_params_from_json(combo, base);
                const auto model = forest::fit_forest(x, y, train, params, 1);
                return holdout_rmse(holdout, [&](auto row) { return forest::predict_forest(model, row); });
            }, threads);
        }
        case ModelKind::Gbt: {
            auto base = gbt::gbt_params_from_json(base_params);
            base.early_stopping_rounds.reset();
            for (const auto& combo : expand_grid(grid)) gbt::gbt_params_from_json(combo, base);
            return grid_search(grid, rows, plan, [&](const nlohmann::json& combo, auto train, auto holdout) {
                auto params = gbt::gbt_params_from_json(combo, base);
                params.early_stopping_rounds.reset();
                const auto model = gbt::fit_gbt(x, y, train, params);
                return holdout_rmse(holdout, [&](auto row) { return gbt::predict_gbt(model, row); });
            }, threads);
        }
        case ModelKind::Lstm: break;
    }
    fail_config("UnsupportedModel", "grid search covers rf and gbt; the LSTM uses random search");
}

nlohmann::json to_json(const GridResult& result) {
    nlohmann::json table = nlohmann::json::array();
    for (std::size_t c = 0; c < result.combinations.size(); ++c) {
        table.push_back({{"params", result.combinations[c]},
                         {"fold_scores", result.fold_scores[c]},
                         {"mean_score", result.mean_scores[c]}});
    }
    return {{"best_index", result.best},
            {"best_params", result.combinations.empty() ? nlohmann::json(nullptr) : result.combinations[result.best]},
            {"fold_fits", result.fold_fits},
            {"scores", std::move(table)}};
}

std::vector<ResidualBin> residual_analysis(std::span<const double> true_days, std::span<const double> pred_days) {
    if (true_days.size() != pred_days.size()) fail_data("LengthMismatch", "residual analysis needs equal lengths");
    constexpr double kInf = std::numeric_limits<double>::infinity();
    std::vector<ResidualBin> bins{{"0-10", 0, 10, 0, 0, 0}, {"10-40", 10, 40, 0, 0, 0}, {"40+", 40, kInf, 0, 0, 0}};
    for (std::size_t i = 0; i < true_days.size(); ++i) {
        const double t = true_days[i];
        auto& bin = t < 10 ? bins[0] : t < 40 ? bins[1] : bins[2];
        const double e = pred_days[i] - t;
        ++bin.count;
        bin.mae += std::abs(e);
        bin.mean_signed_error += e;
    }
    for (auto& bin : bins) {
        if (bin.count == 0) continue;
        bin.mae /= static_cast<double>(bin.count);
        bin.mean_signed_error /= static_cast<double>(bin.count);
    }
    return bins;
}

nlohmann::json to_json(const MetricSet& m) {
    return {{"mae_days", m.mae_days},
            {"rmse_days", m.rmse_days},
            {"r2_days", m.r2_defined ? nlohmann::json(m.r2_days) : nlohmann::json(nullptr)},
            {"r2_defined", m.r2_defined}};
}

MetricSet metrics_from_json(const nlohmann::json& doc) {
    MetricSet m;
    m.mae_days = doc.at("mae_days").get<double>();
    m.rmse_days = doc.at("rmse_days").get<double>();
    m.r2_defined = doc.at("r2_defined").get<bool>();
    m.r2_days = m.r2_defined ? doc.at("r2_days").get<double>() : std::numeric_limits<double>::quiet_NaN();
    return m;
}

}  // namespace wildfire::eval
