// SPDX-License-Identifier: Apache-2.0
#include "wildfire/report.hpp"

#include "wildfire/csv.hpp"
#include "wildfire/error.hpp"
#include "wildfire/util.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <system_error>

namespace wildfire {

namespace {

constexpr double kWidth = 640, kHeight = 420;
constexpr double kLeft = 70, kRight = 20, kTop = 40, kBottom = 50;

std::string xml_escape(std::string_view text) {
    std::string out;
    for (char c : text) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string fixed(double v) { return format_fixed(v, 4); }
std::string px(double v) { return format_fixed(v, 2); }

std::pair<double, double> padded_range(std::span<const double> values) {
    if (values.empty()) return {0, 1};
    auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    double a = *lo, b = *hi;
    if (a == b) {
        a -= 1;
        b += 1;
    }
    const double pad = 0.03 * (b - a);
    return {a - pad, b + pad};
}

std::string svg_open(std::string_view title) {
    std::ostringstream out;
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
        << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n"
        << "<rect x=\"0\" y=\"0\" width=\"" << kWidth << "\" height=\"" << kHeight << "\" fill=\"white\"/>\n"
        << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">" << xml_escape(title)
        << "</text>\n";
    return out.str();
}

std::string model_label(eval::ModelKind kind) {
    switch (kind) {
        case eval::ModelKind::RandomForest: return "Random Forest";
        case eval::ModelKind::Gbt: return "Gradient Boosting";
        case eval::ModelKind::Lstm: return "LSTM";
    }
    return "";
}

std::string name(eval::ModelKind kind) { return std::string(eval::model_kind_name(kind)); }

double population_std(std::span<const double> values) {
    if (values.empty()) return 0.0;
    double mean = 0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    double ss = 0;
    for (double v : values) ss += (v - mean) * (v - mean);
    return std::sqrt(ss / static_cast<double>(values.size()));
}

}  // namespace

ModelReport make_model_report(eval::ModelKind kind, std::vector<double> true_days, std::vector<double> pred_days,
                              std::vector<std::string> feature_names, std::vector<double> importances) {
    ModelReport m;
    m.kind = kind;
    m.metrics = eval::compute_metrics(true_days, pred_days);
    m.bins = eval::residual_analysis(true_days, pred_days);
    m.feature_names = std::move(feature_names);
    m.importances = std::move(importances);
    m.true_days = std::move(true_days);
    m.pred_days = std::move(pred_days);
    return m;
}

std::string metrics_csv(const EvalReport& report) {
    std::string out = csv::join_row({"model", "mae_days", "rmse_days", "r2_days"});
    for (const auto& m : report.models) {
        out += csv::join_row({name(m.kind), fixed(m.metrics.mae_days), fixed(m.metrics.rmse_days),
                              m.metrics.r2_defined ? fixed(m.metrics.r2_days) : "NA"});
    }
    return out;
}

std::string residual_bins_csv(const EvalReport& report) {
    std::string out = csv::join_row({"model", "bin", "lower_days", "upper_days", "count", "mae_days", "mean_signed_error"});
    for (const auto& m : report.models) {
        for (const auto& b : m.bins) {
            out += csv::join_row({name(m.kind), b.label, format_double(b.lower),
                                  std::isinf(b.upper) ? "inf" : format_double(b.upper), std::to_string(b.count),
                                  fixed(b.mae), fixed(b.mean_signed_error)});
        }
    }
    return out;
}

std::string prediction_spread_csv(const EvalReport& report) {
    std::string out = csv::join_row({"model", "pred_std_days", "true_std_days"});
    for (const auto& m : report.models) {
        out += csv::join_row({name(m.kind), fixed(population_std(m.pred_days)), fixed(population_std(m.true_days))});
    }
    return out;
}

std::string importance_csv(const ModelReport& model) {
    std::vector<std::size_t> order(model.importances.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return model.importances[a] > model.importances[b]; });
    std::string out = csv::join_row({"rank", "feature", "importance"});
    for (std::size_t i = 0; i < order.size(); ++i) {
        const auto f = order[i];
        out += csv::join_row({std::to_string(i + 1), f < model.feature_names.size() ? model.feature_names[f] : std::to_string(f),
                              fixed(model.importances[f])});
    }
    return out;
}

std::string scatter_svg(std::string_view title, std::string_view x_label, std::string_view y_label,
                        std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) fail_internal("LengthMismatch", "scatter needs equal x and y lengths");
    const auto [x0, x1] = padded_range(x);
    const auto [y0, y1] = padded_range(y);
    const double plot_w = kWidth - kLeft - kRight, plot_h = kHeight - kTop - kBottom;
    auto sx = [&](double v) { return kLeft + (v - x0) / (x1 - x0) * plot_w; };
    auto sy = [&](double v) { return kTop + plot_h - (v - y0) / (y1 - y0) * plot_h; };

    std::ostringstream out;
    out << svg_open(title);
    out << "<g class=\"axes\" stroke=\"black\">\n"
        << "<line x1=\"" << kLeft << "\" y1=\"" << kTop + plot_h << "\" x2=\"" << kLeft + plot_w << "\" y2=\""
        << kTop + plot_h << "\"/>\n"
        << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\"" << kTop + plot_h << "\"/>\n"
        << "</g>\n";
    out << "<text x=\"" << kLeft << "\" y=\"" << kHeight - 30 << "\" font-size=\"10\">" << fixed(x0) << "</text>\n"
        << "<text x=\"" << kLeft + plot_w << "\" y=\"" << kHeight - 30 << "\" font-size=\"10\" text-anchor=\"end\">"
        << fixed(x1) << "</text>\n"
        << "<text x=\"" << kLeft - 4 << "\" y=\"" << kTop + plot_h << "\" font-size=\"10\" text-anchor=\"end\">"
        << fixed(y0) << "</text>\n"
        << "<text x=\"" << kLeft - 4 << "\" y=\"" << kTop + 10 << "\" font-size=\"10\" text-anchor=\"end\">" << fixed(y1)
        << "</text>\n"
        << "<text x=\"" << kLeft + plot_w / 2 << "\" y=\"" << kHeight - 10 << "\" text-anchor=\"middle\" font-size=\"12\">"
        << xml_escape(x_label) << "</text>\n"
        << "<text x=\"16\" y=\"" << kTop + plot_h / 2 << "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 16 "
        << kTop + plot_h / 2 << ")\">" << xml_escape(y_label) << "</text>\n";
    out << "<g class=\"points\" fill=\"steelblue\" fill-opacity=\"0.5\">\n";
    for (std::size_t i = 0; i < x.size(); ++i) {
        out << "<circle cx=\"" << px(sx(x[i])) << "\" cy=\"" << px(sy(y[i])) << "\" r=\"2\"/>\n";
    }
    out << "</g>\n</svg>\n";
    return out.str();
}

std::string bar_svg(std::string_view title, std::span<const std::string> labels, std::span<const double> values) {
    if (labels.size() != values.size()) fail_internal("LengthMismatch", "bar chart needs one label per value");
    const double plot_w = kWidth - 170 - kRight;
    const double row_h = values.empty() ? 0 : (kHeight - kTop - 20) / static_cast<double>(values.size());
    const double top = values.empty() ? 1.0 : std::max(*std::max_element(values.begin(), values.end()), 1e-12);

    std::ostringstream out;
    out << svg_open(title);
    out << "<g class=\"bars\" fill=\"darkorange\">\n";
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double y = kTop + static_cast<double>(i) * row_h;
        const double w = std::max(0.0, values[i]) / top * plot_w;
        out << "<text x=\"164\" y=\"" << px(y + row_h * 0.7) << "\" font-size=\"11\" text-anchor=\"end\" fill=\"black\">"
            << xml_escape(labels[i]) << "</text>\n"
            << "<rect class=\"bar\" x=\"170\" y=\"" << px(y + row_h * 0.15) << "\" width=\"" << px(w) << "\" height=\""
            << px(row_h * 0.7) << "\"/>\n";
    }
    out << "</g>\n</svg>\n";
    return out.str();
}

std::map<std::string, std::string> render_report(const EvalReport& report) {
    std::map<std::string, std::string> files;
    files["metrics.csv"] = metrics_csv(report);
    files["residual_bins.csv"] = residual_bins_csv(report);
    files["prediction_spread.csv"] = prediction_spread_csv(report);

    std::string size_points = csv::join_row({"log_acres", "containment_days"});
    for (std::size_t i = 0; i < report.log_acres.size(); ++i) {
        size_points += csv::join_row({format_double(report.log_acres[i]), format_double(report.days[i])});
    }
    files["points_size_vs_days.csv"] = std::move(size_points);
    files["size_vs_days.svg"] =
        scatter_svg("Log fire size vs containment duration", "log(1 + GIS acres)", "containment days", report.log_acres,
                    report.days);

    for (const auto& m : report.models) {
        const auto key = name(m.kind);
        std::string points = csv::join_row({"true_days", "pred_days", "error_days"});
        std::vector<double> errors;
        for (std::size_t i = 0; i < m.true_days.size(); ++i) {
            errors.push_back(m.pred_days[i] - m.true_days[i]);
            points += csv::join_row(
                {format_double(m.true_days[i]), format_double(m.pred_days[i]), format_double(errors.back())});
        }
        files["points_error_" + key + ".csv"] = std::move(points);
        files["error_" + key + ".svg"] = scatter_svg("Prediction error: " + model_label(m.kind), "true duration (days)",
                                                     "predicted - true (days)", m.true_days, errors);
        if (!m.importances.empty()) {
            files["importance_" + key + ".csv"] = importance_csv(m);
            files["importance_" + key + ".svg"] =
                bar_svg("Feature importance: " + model_label(m.kind), m.feature_names, m.importances);
        }
    }
    return files;
}

void emit_report(const EvalReport& report, const std::filesystem::path& directory) {
    namespace fs = std::filesystem;
    if (report.models.empty()) fail_data("EmptyTestSet", "no evaluated models to report");
    for (const auto& m : report.models) {
        if (m.true_days.empty()) fail_data("EmptyTestSet", "model " + name(m.kind) + " has no test predictions");
    }
    const auto files = render_report(report);

    const fs::path temp = directory.parent_path() / (directory.filename().string() + ".tmp");
    std::error_code ec;
    fs::remove_all(temp, ec);
    if (!fs::create_directories(temp, ec) && ec) fail_io("IoError", "cannot create " + temp.string() + ": " + ec.message());
    try {
        for (const auto& [file, contents] : files) write_file_atomic(temp / file, contents);
    } catch (...) {
        fs::remove_all(temp, ec);
        throw;
    }
    fs::remove_all(directory, ec);
    if (ec) fail_io("IoError", "cannot replace " + directory.string() + ": " + ec.message());
    fs::rename(temp, directory, ec);
    if (ec) fail_io("IoError", "cannot move report into " + directory.string() + ": " + ec.message());
}

nlohmann::json to_json(const EvalReport& report) {
    nlohmann::json models = nlohmann::json::array();
    for (const auto& m : report.models) {
        nlohmann::json bins = nlohmann::json::array();
        for (const auto& b : m.bins) {
            bins.push_back({{"bin", b.label},
                            {"count", b.count},
                            {"mae_days", b.mae},
                            {"mean_signed_error", b.mean_signed_error}});
        }
        nlohmann::json importance = nlohmann::json::object();
        for (std::size_t f = 0; f < m.importances.size() && f < m.feature_names.size(); ++f) {
            importance[m.feature_names[f]] = m.importances[f];
        }
        models.push_back({{"model", name(m.kind)},
                          {"metrics", eval::to_json(m.metrics)},
                          {"residual_bins", std::move(bins)},
                          {"importance", std::move(importance)},
                          {"pred_std_days", population_std(m.pred_days)},
                          {"test_rows", m.true_days.size()}});
    }
    return {{"models", std::move(models)}};
}

}  // namespace wildfire
