// SPDX-License-Identifier: Apache-2.0
#include "wildfire/artifact.hpp"

#include "wildfire/error.hpp"
#include "wildfire/util.hpp"

namespace wildfire {

namespace {

nlohmann::json curve_to_json(const std::vector<lstm::EpochStats>& curve) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& e : curve) out.push_back({e.epoch, e.train_loss, e.validation_rmse});
    return out;
}

std::vector<lstm::EpochStats> curve_from_json(const nlohmann::json& doc) {
    std::vector<lstm::EpochStats> out;
    for (const auto& e : doc) out.push_back({e.at(0).get<int>(), e.at(1).get<double>(), e.at(2).get<double>()});
    return out;
}

}  // namespace

nlohmann::json ModelArtifact::params() const {
    switch (kind) {
        case eval::ModelKind::RandomForest: return forest ? forest::to_json(forest->params) : nlohmann::json();
        case eval::ModelKind::Gbt: return gbt ? gbt::to_json(gbt->params) : nlohmann::json();
        case eval::ModelKind::Lstm: return lstm::to_json(lstm_params);
    }
    return {};
}

std::vector<double> predict_log(const ModelArtifact& artifact, const Matrix& features) {
    if (features.cols() != artifact.spec.width()) {
        fail_data("WidthMismatch", "matrix has " + std::to_string(features.cols()) + " columns, model expects " +
                                       std::to_string(artifact.spec.width()));
    }
    switch (artifact.kind) {
        case eval::ModelKind::RandomForest:
            if (!artifact.forest) break;
            return forest::predict_forest(*artifact.forest, features);
        case eval::ModelKind::Gbt:
            if (!artifact.gbt) break;
            return gbt::predict_gbt(*artifact.gbt, features);
        case eval::ModelKind::Lstm:
            if (!artifact.lstm || !artifact.standardizer) break;
            return lstm::predict_lstm(*artifact.lstm, artifact.standardizer->apply(features));
    }
    fail_data("MalformedArtifact", "artifact has no fitted model of its kind");
}

std::string training_fingerprint(const Dataset& dataset, std::span<const std::size_t> rows) {
    std::vector<double> values;
    values.reserve(rows.size() * (dataset.features.cols() + 1));
    for (auto r : rows) {
        const auto row = dataset.features.row(r);
        values.insert(values.end(), row.begin(), row.end());
        values.push_back(dataset.target[r]);
    }
    return sha256_hex(std::span<const double>(values));
}

nlohmann::json to_json(const ModelArtifact& a) {
    nlohmann::json model;
    switch (a.kind) {
        case eval::ModelKind::RandomForest:
            if (a.forest) model = forest::to_json(*a.forest);
            break;
        case eval::ModelKind::Gbt:
            if (a.gbt) model = gbt::to_json(*a.gbt);
            break;
        case eval::ModelKind::Lstm:
            if (a.lstm) model = {{"weights", lstm::to_json(*a.lstm)}, {"curve", curve_to_json(a.lstm_curve)}};
            break;
    }
    if (model.is_null()) fail_internal("MalformedArtifact", "artifact has no fitted model");
    return {{"format", kArtifactFormat},
            {"version", kArtifactVersion},
            {"kind", std::string(eval::model_kind_name(a.kind))},
            {"seed", a.seed},
            {"split_year", a.split_year},
            {"params", a.params()},
            {"feature_spec", to_json(a.spec)},
            {"standardizer", a.standardizer ? to_json(*a.standardizer) : nlohmann::json(nullptr)},
            {"model", std::move(model)},
            {"data_fingerprint", a.data_fingerprint},
            {"metrics", eval::to_json(a.metrics)},
            {"importances", a.importances},
            {"test_predictions", a.test_predictions}};
}

ModelArtifact artifact_from_json(const nlohmann::json& doc) {
    try {
        if (!doc.is_object() || doc.value("format", "") != kArtifactFormat) {
            fail_data("MalformedArtifact", "not a model artifact");
        }
        if (!doc.contains("version") || doc.at("version").get<int>() != kArtifactVersion) {
            fail_data("MalformedArtifact", "unsupported artifact version");
        }
        ModelArtifact a;
        a.kind = eval::parse_model_kind(doc.at("kind").get<std::string>());
        a.seed = doc.at("seed").get<std::uint64_t>();
        a.split_year = doc.at("split_year").get<int>();
        a.spec = feature_spec_from_json(doc.at("feature_spec"));
        if (!doc.at("standardizer").is_null()) a.standardizer = standardizer_from_json(doc.at("standardizer"));
        const auto& model = doc.at("model");
        switch (a.kind) {
            case eval::ModelKind::RandomForest: a.forest = forest::forest_from_json(model); break;
            case eval::ModelKind::Gbt: a.gbt = gbt::gbt_from_json(model); break;
            case eval::ModelKind::Lstm:
                a.lstm = lstm::lstm_weights_from_json(model.at("weights"));
                a.lstm_params = lstm::lstm_params_from_json(doc.at("params"));
                a.lstm_curve = curve_from_json(model.at("curve"));
                if (!a.standardizer) fail_data("MalformedArtifact", "LSTM artifact lacks a standardizer");
                break;
        }
        a.data_fingerprint = doc.at("data_fingerprint").get<std::string>();
        a.metrics = eval::metrics_from_json(doc.at("metrics"));
        a.importances = doc.at("importances").get<std::vector<double>>();
        a.test_predictions = doc.at("test_predictions").get<std::vector<double>>();
        return a;
    } catch (const nlohmann::json::exception& e) {
        fail_data("MalformedArtifact", e.what());
    }
}

std::string serialize_artifact(const ModelArtifact& artifact) { return to_json(artifact).dump(1) + "\n"; }

void save_artifact(const ModelArtifact& artifact, const std::filesystem::path& path) {
    write_file_atomic(path, serialize_artifact(artifact));
}

ModelArtifact load_artifact(const std::filesystem::path& path) {
    const auto text = read_file(path);
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        fail_data("MalformedArtifact", path.string() + ": " + e.what());
    }
    return artifact_from_json(doc);
}

}  // namespace wildfire
