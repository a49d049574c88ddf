// SPDX-License-Identifier: Apache-2.0
#include "wildfire/pipeline.hpp"

#include "wildfire/csv.hpp"
#include "wildfire/error.hpp"
#include "wildfire/ingest.hpp"
#include "wildfire/shapefile.hpp"
#include "wildfire/synthetic.hpp"
#include "wildfire/util.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <map>
#include <numeric>

namespace wildfire {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::vector<std::uint8_t> read_bytes(const fs::path& path) {
    const auto text = read_file(path);
    return {text.begin(), text.end()};
}

fs::path require_path(const PathConfig& paths, const std::string& value, const char* key) {
    if (value.empty()) fail_config("MissingPath", std::string("paths.") + key + " is not set");
    auto path = paths.resolve(value);
    std::error_code ec;
    if (!fs::exists(path, ec)) fail_config("PathNotFound", std::string("paths.") + key + ": " + path.string());
    return path;
}

fs::path out_dir(const RunConfig& config, const RunOptions& options) {
    if (options.out_dir) return *options.out_dir;
    return config.paths.resolve(config.paths.out.empty() ? "out" : config.paths.out);
}

fs::path cleaned_path(const RunConfig& config, const fs::path& out) {
    if (!config.paths.cleaned.empty()) return require_path(config.paths, config.paths.cleaned, "cleaned");
    auto path = out / "cleaned.csv";
    if (!fs::exists(path)) fail_config("PathNotFound", "no cleaned dataset; run ingest or set paths.cleaned");
    return path;
}

std::string model_file(eval::ModelKind kind) { return std::string(eval::model_kind_name(kind)) + ".json"; }

class Manifest {
public:
    Manifest(std::string command, const RunConfig& config, std::optional<eval::ModelKind> model)
        : command_(std::move(command)), config_(config), model_(model) {}

    void input(const std::string& role, std::string_view bytes) { inputs_[role] = sha256_hex(bytes); }
    void output(const std::string& name, std::string_view bytes) { outputs_[name] = sha256_hex(bytes); }

    void write(const fs::path& out) const {
        const std::string model = model_ ? std::string(eval::model_kind_name(*model_)) : "";
        const std::string config_hash = wildfire::config_hash(config_);
        std::string keyed = command_ + '\n' + model + '\n' + config_hash + '\n';
        for (const auto& [role, hash] : inputs_) keyed += role + '=' + hash + '\n';
        json doc = {{"command", command_},
                    {"model", model_ ? json(model) : json(nullptr)},
                    {"version", kVersion},
                    {"config_hash", config_hash},
                    {"seed", config_.seed},
                    {"split_year", config_.split_year},
                    {"inputs", inputs_},
                    {"outputs", outputs_},
                    {"manifest_hash", sha256_hex(keyed)}};
        write_file_atomic(out / "manifests" / (command_ + ".json"), doc.dump(1) + "\n");
    }

private:
    std::string command_;
    const RunConfig& config_;
    std::optional<eval::ModelKind> model_;
    std::map<std::string, std::string> inputs_;
    std::map<std::string, std::string> outputs_;
};

void put(const fs::path& out, const std::string& name, const std::string& contents, Manifest& manifest) {
    write_file_atomic(out / name, contents);
    manifest.output(name, contents);
}

struct LoadedData {
    PreparedData data;
    std::string cleaned_bytes;
};

LoadedData load_prepared(const RunConfig& config, const fs::path& out) {
    LoadedData loaded;
    loaded.cleaned_bytes = read_file(cleaned_path(config, out));
    loaded.data = prepare_dataset(read_cleaned_csv(loaded.cleaned_bytes), config.split_year);
    return loaded;
}

eval::ModelKind required_model(const RunOptions& options) {
    if (!options.model) fail_config("MissingModel", "--model is required (rf, gbt or lstm)");
    return eval::parse_model_kind(*options.model);
}

std::vector<double> gather(std::span<const double> values, std::span<const std::size_t> rows) {
    std::vector<double> out;
    out.reserve(rows.size());
    for (auto r : rows) out.push_back(values[r]);
    return out;
}

std::vector<std::string> feature_names(const FeatureSpec& spec) { return spec.column_names(); }

void run_ingest(const RunConfig& config, const fs::path& out) {
    Manifest manifest("ingest", config, std::nullopt);
    const auto perimeter_path = require_path(config.paths, config.paths.perimeters, "perimeters");
    const auto geometry_path = require_path(config.paths, config.paths.geometry, "geometry");
    const auto perimeters = read_file(perimeter_path);
    manifest.input("perimeters", perimeters);
    manifest.input("geometry", read_file(geometry_path));
    if (geometry_path.extension() == ".shp" || geometry_path.extension() == ".SHP") {
        auto dbf = geometry_path;
        dbf.replace_extension(geometry_path.extension() == ".shp" ? ".dbf" : ".DBF");
        manifest.input("geometry_dbf", read_file(dbf));
    }
    std::optional<DataDictionary> dictionary;
    if (!config.paths.dictionary.empty()) {
        const auto text = read_file(require_path(config.paths, config.paths.dictionary, "dictionary"));
        manifest.input("dictionary", text);
        dictionary = parse_data_dictionary(text);
    }

    const auto result = ingest_records(perimeters, load_geometry(geometry_path));
    put(out, "cleaned.csv", write_cleaned_csv(result.records, dictionary ? &*dictionary : nullptr), manifest);
    put(out, "clean_report.json", clean_report_to_json(result.report, result.join), manifest);
    put(out, "stats.csv", stats_to_csv(result.stats), manifest);
    manifest.write(out);
}

fs::path tune_file(const fs::path& out, eval::ModelKind kind) {
    return out / ("tune_" + std::string(eval::model_kind_name(kind)) + ".json");
}

void run_tune(const RunConfig& config, const RunOptions& options, const fs::path& out) {
    const auto kind = required_model(options);
    Manifest manifest("tune_" + std::string(eval::model_kind_name(kind)), config, kind);
    const auto loaded = load_prepared(config, out);
    manifest.input("cleaned", loaded.cleaned_bytes);
    const auto result = tune_model(kind, loaded.data, config, options.threads);
    put(out, tune_file(out, kind).filename().string(), result.dump(1) + "\n", manifest);
    manifest.write(out);
}

void run_train(const RunConfig& config, const RunOptions& options, const fs::path& out) {
    const auto kind = required_model(options);
    Manifest manifest("train_" + std::string(eval::model_kind_name(kind)), config, kind);
    const auto loaded = load_prepared(config, out);
    manifest.input("cleaned", loaded.cleaned_bytes);
    json tuned = nullptr;
    const auto tuned_path = tune_file(out, kind);
    if (fs::exists(tuned_path)) {
        const auto text = read_file(tuned_path);
        manifest.input("tuned", text);
        try {
            tuned = json::parse(text).at("best_params");
        } catch (const json::exception& e) {
            fail_data("MalformedTuneResult", tuned_path.string() + ": " + e.what());
        }
    }
    const auto artifact = train_model(kind, loaded.data, config, options.threads, tuned);
    put(out, "models/" + model_file(kind), serialize_artifact(artifact), manifest);
    manifest.write(out);
}

std::vector<ModelArtifact> load_artifacts(const RunConfig& config, const fs::path& out, Manifest& manifest) {
    std::vector<ModelArtifact> artifacts;
    for (auto kind : config.models) {
        const auto path = out / "models" / model_file(kind);
        if (!fs::exists(path)) continue;
        const auto text = read_file(path);
        manifest.input("model_" + std::string(eval::model_kind_name(kind)), text);
        artifacts.push_back(load_artifact(path));
    }
    if (artifacts.empty()) fail_config("NoArtifacts", "no trained models under " + (out / "models").string());
    return artifacts;
}

void run_evaluate(const RunConfig& config, const fs::path& out) {
    Manifest manifest("evaluate", config, std::nullopt);
    const auto loaded = load_prepared(config, out);
    manifest.input("cleaned", loaded.cleaned_bytes);
    const auto report = build_eval_report(load_artifacts(config, out, manifest), loaded.data);
    put(out, "eval.json", to_json(report).dump(1) + "\n", manifest);
    manifest.write(out);
}

void run_report(const RunConfig& config, const fs::path& out) {
    Manifest manifest("report", config, std::nullopt);
    const auto loaded = load_prepared(config, out);
    manifest.input("cleaned", loaded.cleaned_bytes);
    const auto report = build_eval_report(load_artifacts(config, out, manifest), loaded.data);
    emit_report(report, out / "report");
    for (const auto& [name, contents] : render_report(report)) manifest.output("report/" + name, contents);
    manifest.write(out);
}

void run_predict(const RunConfig& config, const RunOptions& options, const fs::path& out) {
    const auto kind = options.model ? eval::parse_model_kind(*options.model) : eval::ModelKind::Gbt;
    if (!options.input) fail_config("MissingInput", "predict needs --input rows.csv");
    Manifest manifest("predict", config, kind);
    const auto model_path = out / "models" / model_file(kind);
    if (!fs::exists(model_path)) fail_config("NoArtifacts", "no trained model at " + model_path.string());
    manifest.input("model", read_file(model_path));
    const auto artifact = load_artifact(model_path);
    const auto input_text = read_file(*options.input);
    manifest.input("rows", input_text);
    const auto records = read_cleaned_csv(input_text, false);
    if (records.empty()) fail_data("EmptyDataset", "no rows to predict");
    const auto dataset = build_matrix(records, artifact.spec);
    const auto logs = predict_log(artifact, dataset.features);

    std::string csv_text = csv::join_row({"IRWINID", "FIRE_NAME", "ALARM_DATE", "PRED_LOG", "PRED_DAYS"});
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& raw = records[i].raw;
        csv_text += csv::join_row({raw.irwin_id.value_or(""), raw.fire_name, raw.alarm_date_text, format_double(logs[i]),
                                   format_double(eval::inverse_transform(logs[i]))});
    }
    const auto target = options.output ? *options.output : out / ("predictions_" + std::string(eval::model_kind_name(kind)) + ".csv");
    write_file_atomic(target, csv_text);
    manifest.output(target.filename().string(), csv_text);
    manifest.write(out);
}

void run_synth(const RunConfig& config, const RunOptions& options, const fs::path& out) {
    Manifest manifest("synth", config, std::nullopt);
    const auto text = write_cleaned_csv(synthetic::fire_records(500, config.seed));
    const auto target = options.output ? *options.output : out / "synthetic_500.csv";
    write_file_atomic(target, text);
    manifest.output(target.filename().string(), text);
    manifest.write(out);
}

}  // namespace

RunConfig effective_config(const RunOptions& options) {
    RunConfig config;
    if (options.config_path.empty()) {
        config = default_config();
        config.paths.base_dir = fs::current_path();
    } else {
        config = load_config(options.config_path);
    }
    if (options.seed) set_seed(config, *options.seed);
    if (options.split_year) config.split_year = *options.split_year;
    validate(config);
    return config;
}

void run_command(std::string_view subcommand, const RunOptions& options) {
    if (options.threads == 0) fail_config("InvalidOption", "--threads must be at least 1");
    const auto config = effective_config(options);
    const auto out = out_dir(config, options);
    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec) fail_io("IoError", "cannot create " + out.string() + ": " + ec.message());

    if (subcommand == "ingest") return run_ingest(config, out);
    if (subcommand == "tune") return run_tune(config, options, out);
    if (subcommand == "train") return run_train(config, options, out);
    if (subcommand == "evaluate") return run_evaluate(config, out);
    if (subcommand == "report") return run_report(config, out);
    if (subcommand == "predict") return run_predict(config, options, out);
    if (subcommand == "synth") return run_synth(config, options, out);
    fail_config("UnknownCommand", "unknown subcommand '" + std::string(subcommand) + "'");
}

GeometryTable load_geometry(const fs::path& path) {
    const auto ext = to_upper(path.extension().string());
    if (ext == ".SHP") {
        auto dbf = path;
        dbf.replace_extension(path.extension() == ".shp" ? ".dbf" : ".DBF");
        if (!fs::exists(dbf)) fail_config("PathNotFound", "shapefile needs its .dbf: " + dbf.string());
        const auto shp_bytes = read_bytes(path);
        const auto dbf_bytes = read_bytes(dbf);
        return shapefile::read_shapefile_subset(shp_bytes, dbf_bytes);
    }
    return parse_geometry_csv(read_file(path));
}

IngestResult ingest_records(std::string_view perimeter_csv, const GeometryTable& geometry) {
    const auto records = parse_perimeter_csv(perimeter_csv);
    auto joined = join_geometry(records, geometry);
    auto cleaned = clean_records(joined.rows);
    IngestResult result;
    result.join = joined.dropped;
    result.report = cleaned.report;
    result.records = std::move(cleaned.records);
    if (result.records.empty()) fail_data("EmptyDataset", "no rows survived cleaning");
    result.stats = descriptive_stats(result.records);
    return result;
}

PreparedData prepare_dataset(const std::vector<FireRecord>& records, int split_year) {
    const auto train_records = records_before(records, split_year);
    if (train_records.empty()) fail_data("DegenerateSplit", "no records before " + std::to_string(split_year));
    PreparedData data;
    data.dataset = build_matrix(records, build_feature_spec(train_records));
    data.dataset.split = temporal_split(data.dataset, split_year);
    data.train_rows = data.dataset.rows_in(Split::Train);
    data.test_rows = data.dataset.rows_in(Split::Test);
    return data;
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> validation_tail(const Dataset& dataset,
                                                                              std::span<const std::size_t> rows,
                                                                              double fraction) {
    std::vector<std::size_t> order(rows.begin(), rows.end());
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return dataset.alarm_day[a] != dataset.alarm_day[b] ? dataset.alarm_day[a] < dataset.alarm_day[b] : a < b;
    });
    if (order.size() < 2) return {order, {}};
    auto n_val = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(order.size())));
    n_val = std::clamp<std::size_t>(n_val, 1, order.size() - 1);
    std::vector<std::size_t> fit(order.begin(), order.end() - static_cast<std::ptrdiff_t>(n_val));
    std::vector<std::size_t> val(order.end() - static_cast<std::ptrdiff_t>(n_val), order.end());
    std::sort(fit.begin(), fit.end());
    std::sort(val.begin(), val.end());
    return {fit, val};
}

json tune_model(eval::ModelKind kind, const PreparedData& data, const RunConfig& config, std::size_t threads) {
    const auto& ds = data.dataset;
    if (kind == eval::ModelKind::Lstm) {
        const auto standardizer = fit_standardizer(ds, data.train_rows);
        const auto standardized = standardizer.apply(ds.features);
        const auto [fit_rows, val_rows] = validation_tail(ds, data.train_rows, config.validation_fraction);
        const auto result = lstm::tune_lstm(standardized, ds.target, fit_rows, val_rows, ds.spec, config.lstm_search,
                                            config.lstm, config.lstm_trials, config.seed, threads);
        json trials = json::array();
        for (const auto& t : result.trials) {
            trials.push_back({{"params", lstm::to_json(t.params)}, {"validation_rmse", t.validation_rmse}});
        }
        const auto& best = result.trials[result.best].params;
        return {{"model", "lstm"},
                {"best_index", result.best},
                {"best_params",
                 {{"units", best.units}, {"dropout", best.dropout}, {"learning_rate", best.learning_rate}}},
                {"trials", std::move(trials)}};
    }

    const auto plan = eval::kfold_indices(data.train_rows.size(), config.cv_folds, derive_seed(config.seed, 7));
    const auto& grid = kind == eval::ModelKind::RandomForest ? config.rf_grid : config.gbt_grid;
    const json base = kind == eval::ModelKind::RandomForest ? forest::to_json(config.rf) : gbt::to_json(config.gbt);
    const auto result = eval::grid_search(kind, grid, ds.features, ds.target, data.train_rows, plan, base, threads);
    auto doc = eval::to_json(result);
    doc["model"] = std::string(eval::model_kind_name(kind));
    doc["cv_folds"] = config.cv_folds;
    doc["grid"] = eval::grid_to_json(grid);
    return doc;
}

ModelArtifact train_model(eval::ModelKind kind, const PreparedData& data, const RunConfig& config,
                          std::size_t threads, const json& tuned) {
    const auto& ds = data.dataset;
    if (data.train_rows.empty() || data.test_rows.empty()) fail_data("DegenerateSplit", "empty train or test rows");
    ModelArtifact a;
    a.kind = kind;
    a.seed = config.seed;
    a.split_year = config.split_year;
    a.spec = ds.spec;
    a.data_fingerprint = training_fingerprint(ds, data.train_rows);

    switch (kind) {
        case eval::ModelKind::RandomForest: {
            auto params = tuned.is_null() ? config.rf : forest::forest_params_from_json(tuned, config.rf);
            params.seed = config.seed;
            a.forest = forest::fit_forest(ds.features, ds.target, data.train_rows, params, threads);
            a.importances = a.forest->importances;
            break;
        }
        case eval::ModelKind::Gbt: {
            auto params = tuned.is_null() ? config.gbt : gbt::gbt_params_from_json(tuned, config.gbt);
            params.seed = config.seed;
            if (params.early_stopping_rounds) {
                const auto [fit_rows, val_rows] = validation_tail(ds, data.train_rows, config.validation_fraction);
                a.gbt = gbt::fit_gbt(ds.features, ds.target, fit_rows, params, val_rows);
            } else {
                a.gbt = gbt::fit_gbt(ds.features, ds.target, data.train_rows, params);
            }
            a.importances = a.gbt->importances;
            break;
        }
        case eval::ModelKind::Lstm: {
            auto params = tuned.is_null() ? config.lstm : lstm::lstm_params_from_json(tuned, config.lstm);
            params.seed = config.seed;
            a.standardizer = fit_standardizer(ds, data.train_rows);
            const auto standardized = a.standardizer->apply(ds.features);
            const auto [fit_rows, val_rows] = validation_tail(ds, data.train_rows, config.validation_fraction);
            auto fit = lstm::fit_lstm(standardized, ds.target, fit_rows, val_rows, ds.spec, params);
            a.lstm = std::move(fit.weights);
            a.lstm_params = params;
            a.lstm_curve = std::move(fit.curve);
            break;
        }
    }

    a.test_predictions = predict_log(a, ds.features.select_rows(data.test_rows));
    a.metrics = eval::compute_metrics(gather(ds.target_days, data.test_rows), eval::inverse_transform(a.test_predictions));
    return a;
}

ModelReport evaluate_artifact(const ModelArtifact& artifact, const PreparedData& data) {
    const auto& ds = data.dataset;
    if (artifact.data_fingerprint != training_fingerprint(ds, data.train_rows)) {
        fail_data("StaleArtifact", std::string(eval::model_kind_name(artifact.kind)) +
                                       " was trained on different data; retrain it");
    }
    const auto logs = predict_log(artifact, ds.features.select_rows(data.test_rows));
    if (logs.size() != artifact.test_predictions.size() ||
        std::memcmp(logs.data(), artifact.test_predictions.data(), logs.size() * sizeof(double)) != 0) {
        fail_internal("ArtifactMismatch", "reloaded " + std::string(eval::model_kind_name(artifact.kind)) +
                                              " does not reproduce its stored predictions");
    }
    return make_model_report(artifact.kind, gather(ds.target_days, data.test_rows), eval::inverse_transform(logs),
                             feature_names(ds.spec), artifact.importances);
}

EvalReport build_eval_report(const std::vector<ModelArtifact>& artifacts, const PreparedData& data) {
    EvalReport report;
    for (const auto& a : artifacts) report.models.push_back(evaluate_artifact(a, data));
    const auto& ds = data.dataset;
    const auto log_acres_col = static_cast<std::size_t>(
        std::find(ds.spec.numeric_columns.begin(), ds.spec.numeric_columns.end(), "log_acres") -
        ds.spec.numeric_columns.begin());
    for (auto r : data.test_rows) {
        report.log_acres.push_back(log_acres_col < ds.spec.numeric_count() ? ds.features(r, log_acres_col) : 0.0);
        report.days.push_back(ds.target_days[r]);
    }
    return report;
}

}  // namespace wildfire
