// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "wildfire/eval.hpp"
#include "wildfire/features.hpp"
#include "wildfire/forest.hpp"
#include "wildfire/gbt.hpp"
#include "wildfire/lstm.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace wildfire {

inline constexpr const char* kArtifactFormat = "wildfire-artifact";
inline constexpr int kArtifactVersion = 1;

/// A trained model with everything needed to featurize and predict new rows.
struct ModelArtifact {
    eval::ModelKind kind = eval::ModelKind::Gbt;
    std::uint64_t seed = 0;
    int split_year = 2018;
    FeatureSpec spec;
    std::optional<Standardizer> standardizer;  // LSTM only

    std::optional<forest::ForestModel> forest;
    std::optional<gbt::GbtModel> gbt;
    std::optional<lstm::LstmWeights> lstm;
    lstm::LstmParams lstm_params;
    std::vector<lstm::EpochStats> lstm_curve;

    std::string data_fingerprint;           // SHA-256 of the training rows
    eval::MetricSet metrics;                // test set, day units
    std::vector<double> test_predictions;   // log space, test-row order
    std::vector<double> importances;        // empty for the LSTM

    nlohmann::json params() const;
};

/// Log-space predictions for a feature matrix laid out by `artifact.spec`.
std::vector<double> predict_log(const ModelArtifact& artifact, const Matrix& features);

/// SHA-256 over the feature values and targets of `rows`.
std::string training_fingerprint(const Dataset& dataset, std::span<const std::size_t> rows);

nlohmann::json to_json(const ModelArtifact& artifact);
/// Throws MalformedArtifact (data) for a wrong format, version or layout.
ModelArtifact artifact_from_json(const nlohmann::json& doc);

std::string serialize_artifact(const ModelArtifact& artifact);
void save_artifact(const ModelArtifact& artifact, const std::filesystem::path& path);
ModelArtifact load_artifact(const std::filesystem::path& path);

}  // namespace wildfire
