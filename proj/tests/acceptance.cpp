// SPDX-License-Identifier: Apache-2.0
// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
#include "wildfire/wildfire.h"

#include "wildfire/cart.hpp"
#include "wildfire/clean.hpp"
#include "wildfire/eval.hpp"
#include "wildfire/forest.hpp"
#include "wildfire/gbt.hpp"
#include "wildfire/geometry.hpp"
#include "wildfire/ingest.hpp"
#include "wildfire/lstm.hpp"
#include "wildfire/pipeline.hpp"
#include "wildfire/synthetic.hpp"
#include "wildfire/util.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace fs = std::filesystem;
using namespace wildfire;

namespace {

// Tolerances and budgets.
constexpr double kMetricTol = 1e-9;
constexpr double kMetricBudgetSeconds = 1.0;
constexpr double kNewtonTol = 1e-12;
constexpr double kReductionTol = 1e-9;
constexpr double kGbtBudgetSeconds = 10.0;
constexpr double kGradTol = 1e-4;
constexpr double kGradBudgetSeconds = 5.0;
constexpr double kCentroidTol = 1e-12;
constexpr int kRankingRequired = 8;
constexpr double kRankingBudgetSeconds = 300.0;
constexpr int kImportanceRequired = 95;

// Generator seeds for the desk-scale ranking run.
constexpr std::uint64_t kRankingSeeds[10] = {101, 102, 103, 104, 105, 106, 107, 108, 109, 110};

struct Outcome {
    enum Status { Pass, Fail, Skip } status = Fail;
    std::string detail;
};

using Clock = std::chrono::steady_clock;
double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(double v, int decimals = 4) { return format_fixed(v, decimals); }

std::string sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
}

fs::path data_dir() { return fs::path(WILDFIRE_DATA_DIR); }

fs::path scratch_dir(const std::string& name) {
    auto dir = fs::temp_directory_path() / ("wildfire_acceptance_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

// ---- 1. metric oracle -------------------------------------------------------

Outcome metric_oracle() {
    Rng rng(20240101);
    std::lognormal_distribution<double> days(1.5, 1.2);
    std::normal_distribution<double> noise(0.0, 4.0);
    double worst = 0;
    const auto start = Clock::now();
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> t(1000), p(1000);
        for (int i = 0; i < 1000; ++i) {
            t[i] = std::round(days(rng));
            p[i] = std::max(0.0, t[i] + noise(rng));
        }
        const auto m = eval::compute_metrics(t, p);

        long double abs_sum = 0, sq_sum = 0, y_sum = 0, y_sq = 0;
        for (int i = 0; i < 1000; ++i) {
            const long double e = static_cast<long double>(t[i]) - p[i];
            abs_sum += e < 0 ? -e : e;
            sq_sum += e * e;
            y_sum += t[i];
            y_sq += static_cast<long double>(t[i]) * t[i];
        }
        const long double n = 1000;
        const long double ss_tot = y_sq - y_sum * y_sum / n;
        const double mae = static_cast<double>(abs_sum / n);
        const double rmse = static_cast<double>(std::sqrt(sq_sum / n));
        const double r2 = static_cast<double>(1.0L - sq_sum / ss_tot);
        worst = std::max({worst, std::abs(mae - m.mae_days), std::abs(rmse - m.rmse_days), std::abs(r2 - m.r2_days)});
    }
    const double elapsed = seconds_since(start);
    const bool ok = worst <= kMetricTol && elapsed < kMetricBudgetSeconds;
    return {ok ? Outcome::Pass : Outcome::Fail,
            "max abs diff " + sci(worst) + ", " + fmt(elapsed, 3) + " s"};
}

// ---- 2. tree oracle ---------------------------------------------------------

struct OracleNode {
    int feature = -1;
    double threshold = 0;
    double value = 0;
    std::unique_ptr<OracleNode> left, right;
};

// Exhaustive greedy search, re-deriving every candidate's SSE from scratch.
std::unique_ptr<OracleNode> oracle_tree(const Matrix& x, const std::vector<double>& y, std::vector<std::size_t> rows,
                                        int depth, int max_depth) {
    auto node = std::make_unique<OracleNode>();
    const double n = static_cast<double>(rows.size());
    double sum = 0;
    for (auto r : rows) sum += y[r];
    node->value = sum / n;
    auto sse = [&](const std::vector<std::size_t>& part) {
        double s = 0;
        for (auto r : part) s += y[r];
        const double mean = s / static_cast<double>(part.size());
        double out = 0;
        for (auto r : part) out += (y[r] - mean) * (y[r] - mean);
        return out;
    };
    const double parent_sse = sse(rows);
    bool constant = true;
    for (auto r : rows) constant = constant && y[r] == y[rows[0]];
    if (depth >= max_depth || rows.size() < 2 || constant) return node;

    std::optional<double> best_gain;
    int best_feature = -1;
    double best_threshold = 0;
    for (std::size_t f = 0; f < x.cols(); ++f) {
        std::vector<double> values;
        for (auto r : rows) values.push_back(x(r, f));
        std::sort(values.begin(), values.end());
        values.erase(std::unique(values.begin(), values.end()), values.end());
        for (std::size_t i = 0; i + 1 < values.size(); ++i) {
            const double threshold = (values[i] + values[i + 1]) / 2;
            std::vector<std::size_t> left, right;
            for (auto r : rows) (x(r, f) <= threshold ? left : right).push_back(r);
            const double gain = (parent_sse - sse(left) - sse(right)) / n;
            if (!(gain > cart::kGainTolerance * parent_sse / n)) continue;
            if (!best_gain || gain > *best_gain + cart::kGainTolerance * std::abs(*best_gain)) {
                best_gain = gain;
                best_feature = static_cast<int>(f);
                best_threshold = threshold;
            }
        }
    }
    if (!best_gain) return node;
    node->feature = best_feature;
    node->threshold = best_threshold;
    std::vector<std::size_t> left, right;
    for (auto r : rows) (x(r, static_cast<std::size_t>(best_feature)) <= best_threshold ? left : right).push_back(r);
    node->left = oracle_tree(x, y, left, depth + 1, max_depth);
    node->right = oracle_tree(x, y, right, depth + 1, max_depth);
    return node;
}

bool same_structure(const cart::RegressionTree& tree, std::size_t id, const OracleNode& o) {
    const auto& n = tree.nodes()[id];
    if (n.is_leaf() != (o.feature < 0)) return false;
    if (n.is_leaf()) return n.value == o.value;
    return n.feature == o.feature && n.threshold == o.threshold &&
           same_structure(tree, static_cast<std::size_t>(n.left), *o.left) &&
           same_structure(tree, static_cast<std::size_t>(n.right), *o.right);
}

double oracle_predict(const OracleNode& o, std::span<const double> row) {
    const OracleNode* n = &o;
    while (n->feature >= 0) n = row[static_cast<std::size_t>(n->feature)] <= n->threshold ? n->left.get() : n->right.get();
    return n->value;
}

Outcome tree_oracle() {
    // Values on a 1/8 grid keep sums exact in any order, so leaf means and
    // midpoints are comparable bit for bit; the coarse grid also forces ties.
    Rng rng(77);
    int matched = 0;
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = std::uniform_int_distribution<std::size_t>(2, 30)(rng);
        const std::size_t d = std::uniform_int_distribution<std::size_t>(1, 4)(rng);
        const int depth = std::uniform_int_distribution<int>(1, 2)(rng);
        const int levels = std::uniform_int_distribution<int>(2, 40)(rng);
        Matrix x(n, d);
        std::vector<double> y(n);
        std::uniform_int_distribution<int> grid(0, levels);
        std::uniform_int_distribution<int> target(-32, 32);
        for (std::size_t r = 0; r < n; ++r) {
            for (std::size_t c = 0; c < d; ++c) x(r, c) = grid(rng) / 8.0;
            y[r] = target(rng) / 8.0;
        }
        std::vector<std::uint32_t> samples(n);
        std::iota(samples.begin(), samples.end(), 0u);
        cart::TreeParams params;
        params.max_depth = depth;
        Rng tree_rng(1);
        const auto tree = cart::fit_tree(x, {y, {}}, samples, params, cart::SplitCriterion::variance(), tree_rng);

        std::vector<std::size_t> rows(n);
        std::iota(rows.begin(), rows.end(), 0);
        const auto oracle = oracle_tree(x, y, rows, 0, depth);
        bool ok = same_structure(tree, 0, *oracle);
        for (std::size_t r = 0; r < n && ok; ++r) ok = tree.predict(x.row(r)) == oracle_predict(*oracle, x.row(r));
        std::vector<double> probe(d);
        for (int k = 0; k < 20 && ok; ++k) {
            for (auto& v : probe) v = std::uniform_real_distribution<double>(-0.5, levels / 8.0 + 0.5)(rng);
            ok = tree.predict(probe) == oracle_predict(*oracle, probe);
        }
        matched += ok;
    }
    return {matched == 50 ? Outcome::Pass : Outcome::Fail, std::to_string(matched) + "/50 datasets identical"};
}

// ---- 3. Newton algebra ------------------------------------------------------

Outcome newton_algebra() {
    Rng rng(3);
    std::uniform_real_distribution<double> g(-50, 50), h(0.01, 60), lam(0, 10), gam(0, 5);
    double worst = 0;
    for (int i = 0; i < 1000; ++i) {
        const double gl = g(rng), gr = g(rng), hl = h(rng), hr = h(rng), l = lam(rng), y = gam(rng);
        const double gain = 0.5 * (gl * gl / (hl + l) + gr * gr / (hr + l) - (gl + gr) * (gl + gr) / (hl + hr + l)) - y;
        const double weight = -(gl + gr) / (hl + hr + l);
        const double got_gain = cart::newton_gain(gl, hl, gr, hr, l, y);
        const double got_weight = cart::newton_leaf_weight(gl + gr, hl + hr, l);
        worst = std::max(worst, std::abs(got_gain - gain) / std::max(1.0, std::abs(gain)));
        worst = std::max(worst, std::abs(got_weight - weight) / std::max(1.0, std::abs(weight)));
    }

    // The gain a fitted stump records must match the closed form on its own children.
    int stump_mismatch = 0;
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 40;
        Matrix x(n, 2);
        std::vector<double> grad(n), hess(n);
        for (std::size_t r = 0; r < n; ++r) {
            x(r, 0) = g(rng);
            x(r, 1) = g(rng);
            grad[r] = g(rng) / 10;
            hess[r] = h(rng) / 10;
        }
        const double l = lam(rng), y = gam(rng) / 10;
        std::vector<std::uint32_t> samples(n);
        std::iota(samples.begin(), samples.end(), 0u);
        cart::TreeParams params;
        params.max_depth = 1;
        Rng tree_rng(1);
        const auto tree = cart::fit_tree(x, {grad, hess}, samples, params, cart::SplitCriterion::newton(l, y), tree_rng);
        const auto& root = tree.nodes()[0];
        if (root.is_leaf()) continue;
        double gl = 0, hl = 0, gr = 0, hr = 0;
        for (std::size_t r = 0; r < n; ++r) {
            if (x(r, static_cast<std::size_t>(root.feature)) <= root.threshold) {
                gl += grad[r];
                hl += hess[r];
            } else {
                gr += grad[r];
                hr += hess[r];
            }
        }
        const double gain = 0.5 * (gl * gl / (hl + l) + gr * gr / (hr + l) - (gl + gr) * (gl + gr) / (hl + hr + l)) - y;
        const auto& left = tree.nodes()[static_cast<std::size_t>(root.left)];
        const auto& right = tree.nodes()[static_cast<std::size_t>(root.right)];
        const bool ok = std::abs(root.gain - gain) <= kNewtonTol * std::max(1.0, std::abs(gain)) &&
                        std::abs(left.value + gl / (hl + l)) <= kNewtonTol * std::max(1.0, std::abs(gl / (hl + l))) &&
                        std::abs(right.value + gr / (hr + l)) <= kNewtonTol * std::max(1.0, std::abs(gr / (hr + l)));
        stump_mismatch += !ok;
    }
    const bool ok = worst <= kNewtonTol && stump_mismatch == 0;
    return {ok ? Outcome::Pass : Outcome::Fail, "max rel diff " + sci(worst) + ", stump mismatches " +
                                                    std::to_string(stump_mismatch)};
}

// ---- 4. boosting reduction --------------------------------------------------

Outcome gbt_reduction() {
    const auto start = Clock::now();
    Rng rng(4);
    std::uniform_real_distribution<double> u(0, 1);
    const std::size_t n = 300, d = 4;
    Matrix x(n, d);
    std::vector<double> y(n);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < d; ++c) x(r, c) = u(rng);
        y[r] = std::sin(6 * x(r, 0)) + x(r, 1) * x(r, 2) + 0.3 * u(rng);
    }
    std::vector<std::size_t> rows(n);
    std::iota(rows.begin(), rows.end(), 0);

    gbt::GbtParams exact;
    exact.n_estimators = 1;
    exact.learning_rate = 1;
    exact.max_depth = -1;
    exact.subsample = 1;
    exact.colsample_bytree = 1;
    exact.lambda = 0;
    exact.gamma = 0;
    const auto one = gbt::fit_gbt(x, y, rows, exact);
    double max_err = 0;
    for (std::size_t r = 0; r < n; ++r) max_err = std::max(max_err, std::abs(gbt::predict_gbt(one, x.row(r)) - y[r]));

    gbt::GbtParams full = exact;
    full.n_estimators = 100;
    full.learning_rate = 0.1;
    full.max_depth = 3;
    full.lambda = 1;
    const auto model = gbt::fit_gbt(x, y, rows, full);
    std::vector<double> pred(n, model.base_score);
    double previous = eval::rmse(y, pred);
    int increases = 0;
    for (const auto& tree : model.trees) {
        for (std::size_t r = 0; r < n; ++r) pred[r] += model.learning_rate * tree.predict(x.row(r));
        const double current = eval::rmse(y, pred);
        increases += current > previous;
        previous = current;
    }
    const double elapsed = seconds_since(start);
    const bool ok = max_err <= kReductionTol && increases == 0 && model.trees.size() == 100 && elapsed < kGbtBudgetSeconds;
    return {ok ? Outcome::Pass : Outcome::Fail, "single-round max error " + sci(max_err) +
                                                    ", RMSE increases " + std::to_string(increases) + "/100, " +
                                                    fmt(elapsed, 3) + " s"};
}

// ---- 5. LSTM gradient check -------------------------------------------------

Outcome lstm_gradients() {
    const auto start = Clock::now();
    const std::vector<std::size_t> tables{4, 3};
    const std::vector<std::size_t> dims{2, 3};
    auto weights = lstm::init_weights(3, tables, dims, 4, 11, 0.4);
    Rng rng(12);
    std::normal_distribution<double> normal(0, 1);
    for (auto& named : weights.tensors()) {
        for (auto& v : named.tensor->data) v += 0.1 * normal(rng);
    }
    std::vector<std::vector<double>> rows;
    std::vector<double> targets;
    std::vector<lstm::CellState> states;
    for (int i = 0; i < 6; ++i) {
        rows.push_back({normal(rng), normal(rng), normal(rng), static_cast<double>(i % 4), static_cast<double>(i % 3)});
        targets.push_back(normal(rng));
        lstm::CellState s;
        for (int u = 0; u < 4; ++u) {
            s.h.push_back(0.5 * normal(rng));
            s.c.push_back(0.5 * normal(rng));
        }
        states.push_back(s);
    }
    constexpr double kDropout = 0.25;
    auto forward = [&](const lstm::LstmWeights& w) {
        Rng mask_rng(99);  // same masks on every evaluation
        std::vector<lstm::ForwardCache> caches;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            caches.push_back(lstm::lstm_forward(w, rows[i], true, kDropout, &mask_rng, &states[i]));
        }
        return caches;
    };
    auto loss = [&](const lstm::LstmWeights& w) {
        double total = 0;
        for (std::size_t i = 0; auto& c : forward(w)) {
            total += (c.prediction - targets[i]) * (c.prediction - targets[i]);
            ++i;
        }
        return total / static_cast<double>(rows.size());
    };

    const auto caches = forward(weights);
    const auto grad = lstm::lstm_backward(weights, caches, targets);
    const auto grad_tensors = grad.tensors();
    auto tensors = weights.tensors();
    double worst = 0;
    std::string worst_name;
    std::size_t checked = 0;
    constexpr double kStep = 1e-5;
    for (std::size_t t = 0; t < tensors.size(); ++t) {
        auto& data = tensors[t].tensor->data;
        for (std::size_t k = 0; k < data.size(); ++k) {
            const double saved = data[k];
            data[k] = saved + kStep;
            const double up = loss(weights);
            data[k] = saved - kStep;
            const double down = loss(weights);
            data[k] = saved;
            const double numeric = (up - down) / (2 * kStep);
            const double analytic = grad_tensors[t].tensor->data[k];
            const double rel = std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), 1e-6});
            if (rel > worst) {
                worst = rel;
                worst_name = tensors[t].name;
            }
            ++checked;
        }
    }
    const double elapsed = seconds_since(start);
    const bool ok = worst < kGradTol && elapsed < kGradBudgetSeconds;
    return {ok ? Outcome::Pass : Outcome::Fail, std::to_string(checked) + " parameters, max rel error " +
                                                    sci(worst) + " (" + worst_name + "), " +
                                                    fmt(elapsed, 3) + " s"};
}

// ---- 6. determinism ---------------------------------------------------------

std::map<std::string, std::string> read_tree(const fs::path& root) {
    std::map<std::string, std::string> files;
    for (const auto& entry : fs::recursive_directory_iterator(root)) {
        if (entry.is_regular_file()) files[fs::relative(entry.path(), root).string()] = read_file(entry.path());
    }
    return files;
}

std::optional<std::string> run_stage(const char* command, const std::string& config, const std::string& out,
                                     const char* model, std::size_t threads) {
    wfd_run_options opts;
    wfd_run_options_init(&opts);
    opts.config_path = config.c_str();
    opts.out_dir = out.c_str();
    opts.model = model;
    opts.threads = threads;
    if (wfd_run(command, &opts) != WFD_OK) {
        return std::string(command) + " failed: " + wfd_last_error_message();
    }
    return std::nullopt;
}

Outcome determinism() {
    const auto config = (data_dir() / "synthetic_config.json").string();
    std::vector<std::map<std::string, std::string>> trees;
    for (std::size_t threads : {1u, 8u, 1u, 8u}) {
        const auto out = scratch_dir("determinism_" + std::to_string(trees.size())).string();
        for (const char* model : {"rf", "gbt", "lstm"}) {
            if (auto err = run_stage("tune", config, out, model, threads)) return {Outcome::Fail, *err};
            if (auto err = run_stage("train", config, out, model, threads)) return {Outcome::Fail, *err};
        }
        if (auto err = run_stage("evaluate", config, out, nullptr, threads)) return {Outcome::Fail, *err};
        if (auto err = run_stage("report", config, out, nullptr, threads)) return {Outcome::Fail, *err};
        trees.push_back(read_tree(out));
    }
    std::size_t differing = 0;
    for (std::size_t i = 1; i < trees.size(); ++i) differing += trees[i] != trees[0];
    const bool ok = differing == 0 && trees[0].count("report/metrics.csv") && trees[0].count("models/lstm.json");
    return {ok ? Outcome::Pass : Outcome::Fail,
            std::to_string(trees[0].size()) + " files per run, " + std::to_string(differing) + "/3 reruns differ"};
}

// ---- 7. pipeline fixture ----------------------------------------------------

Outcome pipeline_fixture() {
    const auto out = scratch_dir("fixture");
    if (auto err = run_stage("ingest", (data_dir() / "fixture_config.json").string(), out.string(), nullptr, 1)) {
        return {Outcome::Fail, *err};
    }
    const auto report = nlohmann::json::parse(read_file(out / "clean_report.json"));
    const std::map<std::string, std::size_t> expected{{"unparseable_date", 1}, {"cont_before_alarm", 1},
                                                      {"duplicate_key", 1},    {"missing_geometry", 0},
                                                      {"missing_acres", 0},    {"out_of_bounds", 0}};
    const auto drops = report.at("dropped_by_reason").get<std::map<std::string, std::size_t>>();
    const auto rows_out = report.at("rows_out").get<std::size_t>();
    const auto cleaned = read_cleaned_csv(read_file(out / "cleaned.csv"));

    const auto geometry = parse_geometry_csv(read_file(data_dir() / "fixture_geometry.csv"));
    std::optional<LatLon> square;
    for (const auto& entry : geometry.entries) {
        if (entry.irwin_id == "{PLANTED-SQUARE}" && entry.geometry) square = polygon_centroid(*entry.geometry);
    }
    const bool centroid_ok = square && std::abs(square->latitude - 0.5) <= kCentroidTol &&
                             std::abs(square->longitude - 0.5) <= kCentroidTol;
    const bool ok = rows_out == 7 && cleaned.size() == 7 && drops == expected && centroid_ok;
    std::string detail = "rows_out " + std::to_string(rows_out) + ", drops";
    for (const auto& [reason, count] : drops) detail += " " + reason + "=" + std::to_string(count);
    detail += square ? ", square centroid (" + format_double(square->longitude) + ", " + format_double(square->latitude) + ")"
                     : ", square centroid missing";
    return {ok ? Outcome::Pass : Outcome::Fail, detail};
}

// ---- 8. ranking at desk scale -----------------------------------------------

struct RankingRun {
    double rf = 0, gbt = 0, lstm = 0;
};

RankingRun ranking_run(std::uint64_t generator_seed) {
    const auto data = synthetic::interaction_data(2000, generator_seed);
    const auto& ds = data.dataset;
    const std::size_t threads = default_threads();
    const auto plan = eval::kfold_indices(data.train_rows.size(), 5, derive_seed(generator_seed, 7));

    std::vector<double> truth;
    for (auto r : data.test_rows) truth.push_back(ds.target_days[r]);
    auto test_rmse = [&](const std::vector<double>& logs) {
        return eval::compute_metrics(truth, eval::inverse_transform(logs)).rmse_days;
    };
    const Matrix test_x = ds.features.select_rows(data.test_rows);

    RankingRun run;
    {
        const auto grid = eval::make_grid(eval::ModelKind::RandomForest, {{"n_estimators", {100}},
                                                                          {"max_depth", {8, nullptr}},
                                                                          {"min_samples_leaf", {1, 4}},
                                                                          {"max_features", {"sqrt", nullptr}}});
        forest::ForestParams base;
        base.seed = generator_seed;
        const auto result = eval::grid_search(eval::ModelKind::RandomForest, grid, ds.features, ds.target,
                                              data.train_rows, plan, forest::to_json(base), threads);
        const auto params = forest::forest_params_from_json(result.combinations[result.best], base);
        const auto model = forest::fit_forest(ds.features, ds.target, data.train_rows, params, threads);
        run.rf = test_rmse(forest::predict_forest(model, test_x));
    }
    {
        const auto grid = eval::make_grid(eval::ModelKind::Gbt, {{"n_estimators", {300}},
                                                                 {"learning_rate", {0.05, 0.1}},
                                                                 {"max_depth", {3, 5}},
                                                                 {"subsample", {0.8}},
                                                                 {"gamma", {0.0, 0.4}}});
        gbt::GbtParams base;
        base.seed = generator_seed;
        const auto result = eval::grid_search(eval::ModelKind::Gbt, grid, ds.features, ds.target, data.train_rows,
                                              plan, gbt::to_json(base), threads);
        const auto params = gbt::gbt_params_from_json(result.combinations[result.best], base);
        const auto model = gbt::fit_gbt(ds.features, ds.target, data.train_rows, params);
        run.gbt = test_rmse(gbt::predict_gbt(model, test_x));
    }
    {
        const auto standardizer = fit_standardizer(ds, data.train_rows);
        const auto z = standardizer.apply(ds.features);
        const auto [fit_rows, val_rows] = validation_tail(ds, data.train_rows, 0.1);
        lstm::LstmParams base;
        base.epochs = 40;
        base.batch_size = 32;
        base.patience = 8;
        lstm::SearchSpace space;
        space.units_min = 16;
        space.units_max = 64;
        space.units_step = 16;
        space.lr_min = 1e-3;
        space.lr_max = 1e-2;
        const auto tuned =
            lstm::tune_lstm(z, ds.target, fit_rows, val_rows, ds.spec, space, base, 3, generator_seed, threads);
        auto params = tuned.trials[tuned.best].params;
        const auto fit = lstm::fit_lstm(z, ds.target, fit_rows, val_rows, ds.spec, params);
        run.lstm = test_rmse(lstm::predict_lstm(fit.weights, z.select_rows(data.test_rows)));
    }
    return run;
}

Outcome ranking() {
    const auto start = Clock::now();
    int ordered = 0;
    std::ostringstream detail;
    for (auto seed : kRankingSeeds) {
        const auto run = ranking_run(seed);
        const bool ok = run.gbt <= run.rf && run.rf <= run.lstm;
        ordered += ok;
        detail << " [" << seed << ": gbt " << fmt(run.gbt) << " rf " << fmt(run.rf) << " lstm " << fmt(run.lstm)
               << (ok ? "" : " x") << "]";
    }
    const double elapsed = seconds_since(start);
    const bool ok = ordered >= kRankingRequired && elapsed < kRankingBudgetSeconds;
    return {ok ? Outcome::Pass : Outcome::Fail, std::to_string(ordered) + "/10 seeds ordered gbt <= rf <= lstm, " +
                                                    fmt(elapsed, 1) + " s;" + detail.str()};
}

// ---- 9. FRAP reproduction (conditional) -------------------------------------

Outcome frap_reproduction() {
    const char* config = std::getenv("WILDFIRE_FRAP_CONFIG");
    if (!config || !*config) return {Outcome::Skip, "set WILDFIRE_FRAP_CONFIG to a config naming a FRAP export"};
    const auto out = scratch_dir("frap").string();
    if (auto err = run_stage("ingest", config, out, nullptr, default_threads())) return {Outcome::Fail, *err};
    for (const char* model : {"rf", "gbt", "lstm"}) {
        if (auto err = run_stage("train", config, out, model, default_threads())) return {Outcome::Fail, *err};
    }
    if (auto err = run_stage("evaluate", config, out, nullptr, default_threads())) return {Outcome::Fail, *err};

    std::vector<std::string> deviations;
    auto within = [&](const std::string& what, double got, double want, double rel) {
        if (std::abs(got - want) > rel * std::abs(want)) {
            deviations.push_back(what + " " + fmt(got) + " vs " + fmt(want));
        }
    };
    const auto report = nlohmann::json::parse(read_file(fs::path(out) / "clean_report.json"));
    within("rows_out", report.at("rows_out").get<double>(), 15546, 0.02);
    const auto records = read_cleaned_csv(read_file(fs::path(out) / "cleaned.csv"));
    const auto stats = descriptive_stats(records);
    within("containment mean", stats.rows[0].mean, 5.787, 0.10);
    if (stats.rows[0].max != 638) deviations.push_back("containment max " + fmt(stats.rows[0].max, 0) + " vs 638");
    const auto data = prepare_dataset(records, 2018);
    within("train rows", static_cast<double>(data.train_rows.size()), 12804, 0.02);
    within("test rows", static_cast<double>(data.test_rows.size()), 2742, 0.02);
    const auto eval_doc = nlohmann::json::parse(read_file(fs::path(out) / "eval.json"));
    const std::map<std::string, double> published{{"rf", 6.63}, {"gbt", 6.53}, {"lstm", 7.07}};
    for (const auto& m : eval_doc.at("models")) {
        const auto name = m.at("model").get<std::string>();
        within(name + " MAE", m.at("metrics").at("mae_days").get<double>(), published.at(name), 0.25);
    }
    std::string detail = deviations.empty() ? "all reproduction targets met" : "deviations (reported, not failed):";
    for (const auto& d : deviations) detail += " " + d + ";";
    return {Outcome::Pass, detail};
}

// ---- 10. importance argmax --------------------------------------------------

Outcome importance_argmax() {
    int rf_hits = 0, gbt_hits = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const std::size_t width = 6, signal = seed % width;
        const auto data = synthetic::single_signal(300, width, signal, 1000 + seed);
        std::vector<std::size_t> rows(300);
        std::iota(rows.begin(), rows.end(), 0);

        forest::ForestParams fp;
        fp.n_estimators = 30;
        fp.max_depth = 6;
        fp.seed = seed;
        const auto forest = forest::fit_forest(data.x, data.y, rows, fp);
        const auto& fi = forest.importances;
        rf_hits += static_cast<std::size_t>(std::max_element(fi.begin(), fi.end()) - fi.begin()) == signal;

        gbt::GbtParams gp;
        gp.n_estimators = 50;
        gp.learning_rate = 0.1;
        gp.max_depth = 3;
        gp.seed = seed;
        const auto boost = gbt::fit_gbt(data.x, data.y, rows, gp);
        const auto& gi = boost.importances;
        gbt_hits += static_cast<std::size_t>(std::max_element(gi.begin(), gi.end()) - gi.begin()) == signal;
    }
    const bool ok = rf_hits >= kImportanceRequired && gbt_hits >= kImportanceRequired;
    return {ok ? Outcome::Pass : Outcome::Fail,
            "impurity " + std::to_string(rf_hits) + "/100, gain " + std::to_string(gbt_hits) + "/100"};
}

}  // namespace

int main(int argc, char** argv) {
    set_default_threads(std::max(1u, std::thread::hardware_concurrency()));
    const std::vector<std::pair<int, std::function<Outcome()>>> criteria{
        {1, metric_oracle},  {2, tree_oracle}, {3, newton_algebra},    {4, gbt_reduction}, {5, lstm_gradients},
        {6, determinism},    {7, pipeline_fixture}, {8, ranking}, {9, frap_reproduction}, {10, importance_argmax}};

    std::vector<int> only;
    for (int i = 1; i < argc; ++i) only.push_back(std::atoi(argv[i]));

    int failures = 0;
    for (const auto& [id, check] : criteria) {
        if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
        Outcome outcome;
        try {
            outcome = check();
        } catch (const std::exception& e) {
            outcome = {Outcome::Fail, std::string("exception: ") + e.what()};
        }
        const char* label = outcome.status == Outcome::Pass ? "PASS" : outcome.status == Outcome::Skip ? "SKIP" : "FAIL";
        std::printf("criterion %d: %s - %s\n", id, label, outcome.detail.c_str());
        std::fflush(stdout);
        failures += outcome.status == Outcome::Fail;
    }
    return failures == 0 ? 0 : 1;
}
