// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "support.hpp"
#include "wildfire/csv.hpp"
#include "wildfire/report.hpp"
#include "wildfire/util.hpp"

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include <cmath>
#include <functional>
#include <sstream>

using namespace wildfire;
using test_support::error_kind;
namespace pt = boost::property_tree;

namespace {

/// Parses SVG with an XML parser and counts elements named `tag`, optionally
/// filtered by class.
std::size_t count_elements(const std::string& svg, const std::string& tag, const std::string& cls = "") {
    std::istringstream in(svg);
    pt::ptree tree;
    pt::read_xml(in, tree);
    std::size_t count = 0;
    std::function<void(const pt::ptree&)> walk = [&](const pt::ptree& node) {
        for (const auto& [name, child] : node) {
            if (name == tag && (cls.empty() || child.get<std::string>("<xmlattr>.class", "") == cls)) ++count;
            walk(child);
        }
    };
    walk(tree);
    return count;
}

EvalReport sample_report(std::size_t n) {
    EvalReport report;
    std::vector<double> truth, rf_pred, gbt_pred, lstm_pred;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = static_cast<double>(i * 7 % 60);
        truth.push_back(d);
        rf_pred.push_back(d * 0.8 + 1);
        gbt_pred.push_back(d * 0.9 + 0.5);
        lstm_pred.push_back(12);
        report.log_acres.push_back(std::log1p(static_cast<double>(i * 13 % 500)));
    }
    report.days = truth;
    const std::vector<std::string> names{"log_acres", "latitude", "CAUSE"};
    report.models.push_back(
        make_model_report(eval::ModelKind::RandomForest, truth, rf_pred, names, {0.2, 0.5, 0.3}));
    report.models.push_back(make_model_report(eval::ModelKind::Gbt, truth, gbt_pred, names, {0.6, 0.2, 0.2}));
    report.models.push_back(make_model_report(eval::ModelKind::Lstm, truth, lstm_pred, names, {}));
    return report;
}

}  // namespace

TEST_CASE("scatter plot has one circle per point and parses as XML") {
    const std::vector<double> x{1, 2, 3, 4, 5}, y{5, 3, 4, 1, 2};
    const auto svg = scatter_svg("Size vs days", "log acres", "days", x, y);
    CHECK(count_elements(svg, "circle") == 5);
    const std::vector<double> none;
    CHECK(count_elements(scatter_svg("empty", "x", "y", none, none), "circle") == 0);
    const std::vector<double> flat{2, 2};
    CHECK(count_elements(scatter_svg("flat & <odd>", "x", "y", flat, flat), "circle") == 2);
}

TEST_CASE("bar chart has one bar per value") {
    const std::vector<std::string> labels{"a", "b<c", "d"};
    const std::vector<double> values{0.5, 0.3, 0.2};
    CHECK(count_elements(bar_svg("importance", labels, values), "rect", "bar") == 3);
}

TEST_CASE("metrics csv matches the model metrics") {
    const auto report = sample_report(50);
    const auto table = csv::parse(metrics_csv(report));
    CHECK(table.header == std::vector<std::string>{"model", "mae_days", "rmse_days", "r2_days"});
    REQUIRE(table.rows.size() == 3);
    CHECK(table.rows[0][0] == "rf");
    CHECK(table.rows[1][0] == "gbt");
    for (std::size_t m = 0; m < 3; ++m) {
        CHECK(table.rows[m][1] == format_fixed(report.models[m].metrics.mae_days, 4));
        CHECK(table.rows[m][2] == format_fixed(report.models[m].metrics.rmse_days, 4));
    }

    EvalReport flat;
    flat.models.push_back(make_model_report(eval::ModelKind::Gbt, {3, 3, 3}, {2, 3, 4}, {}, {}));
    CHECK(csv::parse(metrics_csv(flat)).rows[0][3] == "NA");
}

TEST_CASE("importance csv is ranked") {
    const auto report = sample_report(20);
    const auto table = csv::parse(importance_csv(report.models[0]));
    REQUIRE(table.rows.size() == 3);
    CHECK(table.rows[0][0] == "1");
    CHECK(table.rows[0][1] == "latitude");
    CHECK(table.rows[1][1] == "CAUSE");
    const auto tied = csv::parse(importance_csv(report.models[1]));
    CHECK(tied.rows[1][1] == "latitude");
    CHECK(tied.rows[2][1] == "CAUSE");
}

TEST_CASE("residual bin csv covers every model and bin") {
    const auto table = csv::parse(residual_bins_csv(sample_report(40)));
    CHECK(table.rows.size() == 9);
}

TEST_CASE("rendered report layout") {
    const auto files = render_report(sample_report(30));
    for (const char* name : {"metrics.csv", "residual_bins.csv", "points_size_vs_days.csv", "size_vs_days.svg",
                             "points_error_rf.csv", "error_rf.svg", "importance_rf.csv", "importance_rf.svg",
                             "points_error_gbt.csv", "error_gbt.svg", "importance_gbt.csv", "importance_gbt.svg",
                             "points_error_lstm.csv", "error_lstm.svg"}) {
        CHECK_MESSAGE(files.count(name) == 1, name);
    }
    CHECK(files.count("importance_lstm.csv") == 0);
    CHECK(files.count("prediction_spread.csv") == 1);
    CHECK(count_elements(files.at("size_vs_days.svg"), "circle") == 30);
    CHECK(count_elements(files.at("error_gbt.svg"), "circle") == 30);
    CHECK(csv::parse(files.at("points_error_rf.csv")).rows.size() == 30);
    CHECK(count_elements(files.at("importance_gbt.svg"), "rect", "bar") == 3);
}

TEST_CASE("emitting replaces the directory atomically") {
    const auto dir = test_support::fresh_dir("report") / "report";
    emit_report(sample_report(12), dir);
    CHECK(std::filesystem::exists(dir / "metrics.csv"));
    write_file_atomic(dir / "stale.txt", "old");
    emit_report(sample_report(12), dir);
    CHECK_FALSE(std::filesystem::exists(dir / "stale.txt"));
    CHECK_FALSE(std::filesystem::exists(dir.string() + ".tmp"));
    const auto files = render_report(sample_report(12));
    for (const auto& [name, body] : files) CHECK(read_file(dir / name) == body);
}

TEST_CASE("an empty test set writes nothing") {
    const auto dir = test_support::fresh_dir("report_empty") / "report";
    EvalReport empty;
    empty.models.push_back(ModelReport{});
    CHECK(error_kind([&] { emit_report(empty, dir); }) == "EmptyTestSet");
    CHECK_FALSE(std::filesystem::exists(dir));
    CHECK_FALSE(std::filesystem::exists(dir.string() + ".tmp"));
}

TEST_CASE("prediction spread is recorded per model") {
    const auto report = sample_report(30);
    const auto table = csv::parse(prediction_spread_csv(report));
    REQUIRE(table.rows.size() == 3);
    CHECK(table.header == std::vector<std::string>{"model", "pred_std_days", "true_std_days"});
    CHECK(table.rows[2][1] == "0.0000");
    CHECK(table.rows[0][2] == table.rows[1][2]);
}

TEST_CASE("report json") {
    const auto doc = to_json(sample_report(10));
    CHECK(doc["models"].size() == 3);
}
