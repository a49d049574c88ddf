// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "wildfire/artifact.hpp"
#include "wildfire/clean.hpp"
#include "wildfire/config.hpp"
#include "wildfire/report.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace wildfire {

inline constexpr const char* kVersion = "1.0.0";

struct RunOptions {
    std::filesystem::path config_path;  // empty = built-in defaults, paths relative to the working directory
    std::optional<std::filesystem::path> out_dir;
    std::optional<std::string> model;
    std::optional<std::filesystem::path> input;
    std::optional<std::filesystem::path> output;
    std::size_t threads = 1;
    std::optional<std::uint64_t> seed;
    std::optional<int> split_year;
};

/// Loads the config and applies command-line overrides.
RunConfig effective_config(const RunOptions& options);

/// Dispatches ingest, tune, train, evaluate, report, predict or synth. Every
/// successful run writes manifests/<subcommand>.json under the output
/// directory. Throws wildfire::Error.
void run_command(std::string_view subcommand, const RunOptions& options);

struct IngestResult {
    std::vector<FireRecord> records;
    CleanReport report;
    JoinStats join;
    StatsTable stats;
};

/// .shp (with its sibling .dbf) or a WKT/GeoJSON CSV, chosen by extension.
GeometryTable load_geometry(const std::filesystem::path& path);
IngestResult ingest_records(std::string_view perimeter_csv, const GeometryTable& geometry);

struct PreparedData {
    Dataset dataset;
    std::vector<std::size_t> train_rows;
    std::vector<std::size_t> test_rows;
};

/// Category maps fitted on pre-`split_year` records, then the temporal split.
PreparedData prepare_dataset(const std::vector<FireRecord>& records, int split_year);

/// Latest `fraction` of `rows` by alarm date (ties by row id) as validation;
/// returns {fit rows, validation rows}, both non-empty when rows.size() >= 2.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> validation_tail(const Dataset& dataset,
                                                                              std::span<const std::size_t> rows,
                                                                              double fraction);

/// Grid search (forest, boosting) or seeded random search (LSTM) on the
/// training rows. The result holds "best_params" plus the score table.
nlohmann::json tune_model(eval::ModelKind kind, const PreparedData& data, const RunConfig& config, std::size_t threads);

/// Fits on the training rows with the config parameters, overridden by
/// `tuned` when given, and records test predictions and metrics.
ModelArtifact train_model(eval::ModelKind kind, const PreparedData& data, const RunConfig& config,
                          std::size_t threads, const nlohmann::json& tuned = nullptr);

/// Day-unit truth and predictions for the test rows. Throws ArtifactMismatch
/// (internal) if recomputed predictions differ from the stored ones and
/// StaleArtifact (data) if the training fingerprint does not match.
ModelReport evaluate_artifact(const ModelArtifact& artifact, const PreparedData& data);

EvalReport build_eval_report(const std::vector<ModelArtifact>& artifacts, const PreparedData& data);

}  // namespace wildfire
