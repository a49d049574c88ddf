// SPDX-License-Identifier: Apache-2.0
#include "wildfire/config.hpp"

#include "wildfire/error.hpp"
#include "wildfire/util.hpp"

#include <algorithm>
#include <initializer_list>

namespace wildfire {

namespace {

using nlohmann::json;

void check_keys(const json& object, std::string_view where, std::initializer_list<std::string_view> allowed) {
    if (!object.is_object()) fail_config("InvalidConfig", std::string(where) + " must be an object");
    for (const auto& [key, value] : object.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
            fail_config("UnknownKey", std::string(where) + "." + key);
        }
    }
}

eval::ParamGrid default_rf_grid() {
    return eval::make_grid(eval::ModelKind::RandomForest,
                           {{"n_estimators", {200, 350, 500, 700}},
                            {"max_depth", {10, 20, 40, nullptr}},
                            {"min_samples_split", {2, 5, 10}},
                            {"min_samples_leaf", {1, 2, 4}},
                            {"max_features", {"sqrt", "log2", nullptr}}});
}

eval::ParamGrid default_gbt_grid() {
    return eval::make_grid(eval::ModelKind::Gbt, {{"n_estimators", {300, 500, 700}},
                                                  {"learning_rate", {0.01, 0.05, 0.1}},
                                                  {"max_depth", {4, 6, 10}},
                                                  {"subsample", {0.6, 0.8, 1.0}},
                                                  {"colsample_bytree", {0.6, 0.8, 1.0}},
                                                  {"gamma", {0, 0.2, 0.4}}});
}

json search_to_json(const lstm::SearchSpace& s) {
    return {{"units_min", s.units_min}, {"units_max", s.units_max}, {"units_step", s.units_step},
            {"dropout_min", s.dropout_min}, {"dropout_max", s.dropout_max}, {"lr_min", s.lr_min},
            {"lr_max", s.lr_max}};
}

lstm::SearchSpace search_from_json(const json& doc, lstm::SearchSpace s) {
    check_keys(doc, "lstm.search",
               {"units_min", "units_max", "units_step", "dropout_min", "dropout_max", "lr_min", "lr_max"});
    s.units_min = doc.value("units_min", s.units_min);
    s.units_max = doc.value("units_max", s.units_max);
    s.units_step = doc.value("units_step", s.units_step);
    s.dropout_min = doc.value("dropout_min", s.dropout_min);
    s.dropout_max = doc.value("dropout_max", s.dropout_max);
    s.lr_min = doc.value("lr_min", s.lr_min);
    s.lr_max = doc.value("lr_max", s.lr_max);
    return s;
}

}  // namespace

std::filesystem::path PathConfig::resolve(const std::string& value) const {
    if (value.empty()) return {};
    std::filesystem::path p(value);
    return p.is_absolute() ? p : base_dir / p;
}

RunConfig default_config() {
    RunConfig c;
    c.gbt.early_stopping_rounds = 50;
    c.rf_grid = default_rf_grid();
    c.gbt_grid = default_gbt_grid();
    c.paths.out = "out";
    return c;
}

RunConfig config_from_json(const json& doc, const std::filesystem::path& base_dir) {
    RunConfig c = default_config();
    c.paths.base_dir = base_dir;
    try {
        check_keys(doc, "config",
                   {"paths", "split_year", "seed", "models", "cv_folds", "validation_fraction", "rf", "gbt", "lstm"});
        if (doc.contains("paths")) {
            const auto& p = doc.at("paths");
            check_keys(p, "paths", {"perimeters", "dictionary", "geometry", "cleaned", "out"});
            c.paths.perimeters = p.value("perimeters", c.paths.perimeters);
            c.paths.dictionary = p.value("dictionary", c.paths.dictionary);
            c.paths.geometry = p.value("geometry", c.paths.geometry);
            c.paths.cleaned = p.value("cleaned", c.paths.cleaned);
            c.paths.out = p.value("out", c.paths.out);
        }
        c.split_year = doc.value("split_year", c.split_year);
        c.cv_folds = doc.value("cv_folds", c.cv_folds);
        c.validation_fraction = doc.value("validation_fraction", c.validation_fraction);
        if (doc.contains("models")) {
            c.models.clear();
            for (const auto& m : doc.at("models")) c.models.push_back(eval::parse_model_kind(m.get<std::string>()));
        }
        if (doc.contains("rf")) {
            const auto& rf = doc.at("rf");
            check_keys(rf, "rf", {"params", "grid"});
            if (rf.contains("params")) c.rf = forest::forest_params_from_json(rf.at("params"), c.rf);
            if (rf.contains("grid")) c.rf_grid = eval::make_grid(eval::ModelKind::RandomForest, rf.at("grid"));
        }
        if (doc.contains("gbt")) {
            const auto& g = doc.at("gbt");
            check_keys(g, "gbt", {"params", "grid"});
            if (g.contains("params")) c.gbt = gbt::gbt_params_from_json(g.at("params"), c.gbt);
            if (g.contains("grid")) c.gbt_grid = eval::make_grid(eval::ModelKind::Gbt, g.at("grid"));
        }
        if (doc.contains("lstm")) {
            const auto& l = doc.at("lstm");
            check_keys(l, "lstm", {"params", "trials", "search"});
            if (l.contains("params")) c.lstm = lstm::lstm_params_from_json(l.at("params"), c.lstm);
            c.lstm_trials = l.value("trials", c.lstm_trials);
            if (l.contains("search")) c.lstm_search = search_from_json(l.at("search"), c.lstm_search);
        }
        set_seed(c, doc.value("seed", c.seed));
    } catch (const json::exception& e) {
        fail_config("InvalidConfig", e.what());
    }
    validate(c);
    return c;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::error_code ec;
    if (!std::filesystem::is_regular_file(path, ec)) fail_config("ConfigNotFound", path.string());
    json doc;
    try {
        doc = json::parse(read_file(path));
    } catch (const json::exception& e) {
        fail_config("InvalidConfig", path.string() + ": " + e.what());
    }
    return config_from_json(doc, std::filesystem::absolute(path).parent_path());
}

void set_seed(RunConfig& c, std::uint64_t seed) {
    c.seed = seed;
    c.rf.seed = seed;
    c.gbt.seed = seed;
    c.lstm.seed = seed;
}

void validate(const RunConfig& c) {
    if (c.split_year < 1900 || c.split_year > 2100) {
        fail_config("InvalidConfig", "split_year must be in [1900, 2100], got " + std::to_string(c.split_year));
    }
    if (c.cv_folds < 2) fail_config("InvalidConfig", "cv_folds must be at least 2");
    if (!(c.validation_fraction > 0 && c.validation_fraction < 1)) {
        fail_config("InvalidConfig", "validation_fraction must be in (0, 1)");
    }
    if (c.lstm_trials < 1) fail_config("InvalidConfig", "lstm.trials must be at least 1");
    if (c.models.empty()) fail_config("InvalidConfig", "models must not be empty");
}

json config_to_json(const RunConfig& c) {
    json models = json::array();
    for (auto m : c.models) models.push_back(std::string(eval::model_kind_name(m)));
    return {{"paths",
             {{"perimeters", c.paths.perimeters},
              {"dictionary", c.paths.dictionary},
              {"geometry", c.paths.geometry},
              {"cleaned", c.paths.cleaned}}},
            {"split_year", c.split_year},
            {"seed", c.seed},
            {"models", std::move(models)},
            {"cv_folds", c.cv_folds},
            {"validation_fraction", c.validation_fraction},
            {"rf", {{"params", forest::to_json(c.rf)}, {"grid", eval::grid_to_json(c.rf_grid)}}},
            {"gbt", {{"params", gbt::to_json(c.gbt)}, {"grid", eval::grid_to_json(c.gbt_grid)}}},
            {"lstm",
             {{"params", lstm::to_json(c.lstm)}, {"trials", c.lstm_trials}, {"search", search_to_json(c.lstm_search)}}}};
}

std::string config_hash(const RunConfig& config) { return sha256_hex(config_to_json(config).dump()); }

}  // namespace wildfire
