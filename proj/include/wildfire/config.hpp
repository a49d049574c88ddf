// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "wildfire/eval.hpp"
#include "wildfire/forest.hpp"
#include "wildfire/gbt.hpp"
#include "wildfire/lstm.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace wildfire {

struct PathConfig {
    // As written in the config file; empty when unset.
    std::string perimeters, dictionary, geometry, cleaned, out;
    // Resolved against the config file's directory.
    std::filesystem::path resolve(const std::string& value) const;
    std::filesystem::path base_dir;
};

struct RunConfig {
    PathConfig paths;
    int split_year = 2018;
    std::uint64_t seed = 42;
    std::vector<eval::ModelKind> models{eval::ModelKind::RandomForest, eval::ModelKind::Gbt, eval::ModelKind::Lstm};
    std::size_t cv_folds = 5;
    double validation_fraction = 0.1;  // latest training rows held out for early stopping

    forest::ForestParams rf;
    gbt::GbtParams gbt;
    lstm::LstmParams lstm;
    eval::ParamGrid rf_grid;
    eval::ParamGrid gbt_grid;
    std::size_t lstm_trials = 10;
    lstm::SearchSpace lstm_search;
};

/// Tuned parameters and full grids from the published setup; boosting uses
/// early stopping after 50 rounds without improvement.
RunConfig default_config();

/// Missing keys keep their defaults; unknown keys throw UnknownKey (config).
RunConfig config_from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir);
/// Throws ConfigNotFound / InvalidConfig.
RunConfig load_config(const std::filesystem::path& path);

/// Sets the master seed and every model seed.
void set_seed(RunConfig& config, std::uint64_t seed);
/// Throws InvalidConfig for out-of-range values.
void validate(const RunConfig& config);

/// Effective configuration; the output directory is left out.
nlohmann::json config_to_json(const RunConfig& config);
std::string config_hash(const RunConfig& config);

}  // namespace wildfire
