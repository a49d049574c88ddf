// SPDX-License-Identifier: Apache-2.0
#include "wildfire/features.hpp"

#include "wildfire/csv.hpp"
#include "wildfire/error.hpp"
#include "wildfire/util.hpp"

#include <algorithm>
#include <cmath>

namespace wildfire {

Matrix Matrix::select_rows(std::span<const std::size_t> rows) const {
    Matrix out(rows.size(), cols_);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        std::copy_n(data_.begin() + static_cast<std::ptrdiff_t>(rows[i] * cols_), cols_,
                    out.data_.begin() + static_cast<std::ptrdiff_t>(i * cols_));
    }
    return out;
}

int CategoryMap::add(const std::string& value) {
    auto [it, inserted] = index_.emplace(value, static_cast<int>(values_.size()));
    if (inserted) values_.push_back(value);
    return it->second;
}

int CategoryMap::code(const std::string& value) const {
    auto it = index_.find(value);
    return it == index_.end() ? unseen_code() : it->second;
}

std::vector<std::string> FeatureSpec::column_names() const {
    std::vector<std::string> names = numeric_columns;
    names.insert(names.end(), categorical_columns.begin(), categorical_columns.end());
    return names;
}

std::vector<std::string> default_numeric_columns() {
    return {"log_acres", "latitude", "longitude", "alarm_month", "alarm_day_of_year"};
}

std::vector<std::string> default_categorical_columns() { return {"CAUSE", "AGENCY", "UNIT_ID", "C_METHOD", "OBJECTIVE"}; }

double numeric_feature(const FireRecord& record, const std::string& column) {
    if (column == "log_acres") return std::log1p(record.raw.gis_acres.value_or(0.0));
    if (column == "latitude") return record.latitude;
    if (column == "longitude") return record.longitude;
    if (column == "alarm_month") return static_cast<unsigned>(record.alarm_date.month());
    if (column == "alarm_day_of_year") return day_of_year(record.alarm_date);
    fail_data("UnknownColumn", column);
}

std::string categorical_feature(const FireRecord& record, const std::string& column) {
    const auto& raw = record.raw;
    auto from_int = [](const std::optional<int>& v) { return v ? std::to_string(*v) : std::string(kMissingCategory); };
    if (column == "CAUSE") return from_int(raw.cause_code);
    if (column == "AGENCY") return raw.agency_code.value_or(kMissingCategory);
    if (column == "UNIT_ID") return raw.unit_id.value_or(kMissingCategory);
    if (column == "C_METHOD") return from_int(raw.c_method_code);
    if (column == "OBJECTIVE") return from_int(raw.objective_code);
    fail_data("UnknownColumn", column);
}

FeatureSpec build_feature_spec(const std::vector<FireRecord>& train_records) {
    if (train_records.empty()) fail_data("EmptyDataset", "no training records for feature fitting");
    FeatureSpec spec;
    spec.numeric_columns = default_numeric_columns();
    spec.categorical_columns = default_categorical_columns();
    spec.category_maps.resize(spec.categorical_columns.size());
    for (const auto& record : train_records) {
        for (std::size_t c = 0; c < spec.categorical_columns.size(); ++c) {
            spec.category_maps[c].add(categorical_feature(record, spec.categorical_columns[c]));
        }
    }
    return spec;
}

std::vector<std::size_t> Dataset::rows_in(Split which) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < split.size(); ++i) {
        if (split[i] == which) out.push_back(i);
    }
    return out;
}

Dataset build_matrix(const std::vector<FireRecord>& records, const FeatureSpec& spec) {
    if (spec.category_maps.size() != spec.categorical_columns.size()) {
        fail_data("UnknownColumn", "category maps do not match categorical columns");
    }
    Dataset ds;
    ds.spec = spec;
    ds.features = Matrix(records.size(), spec.width());
    ds.target.reserve(records.size());
    ds.target_days.reserve(records.size());
    const std::size_t numeric = spec.numeric_count();
    for (std::size_t r = 0; r < records.size(); ++r) {
        const auto& rec = records[r];
        for (std::size_t c = 0; c < numeric; ++c) {
            const double value = numeric_feature(rec, spec.numeric_columns[c]);
            if (!std::isfinite(value)) fail_data("NonFiniteFeature", spec.numeric_columns[c]);
            ds.features(r, c) = value;
        }
        for (std::size_t c = 0; c < spec.categorical_columns.size(); ++c) {
            ds.features(r, numeric + c) =
                spec.category_maps[c].code(categorical_feature(rec, spec.categorical_columns[c]));
        }
        ds.target.push_back(rec.log_cont_days);
        ds.target_days.push_back(rec.containment_days);
        ds.alarm_year.push_back(static_cast<int>(rec.alarm_date.year()));
        ds.alarm_day.push_back(day_number(rec.alarm_date));
    }
    return ds;
}

std::vector<Split> temporal_split(const Dataset& dataset, int threshold_year) {
    std::vector<Split> labels;
    labels.reserve(dataset.alarm_year.size());
    std::size_t train = 0;
    for (int year : dataset.alarm_year) {
        const bool is_train = year < threshold_year;
        train += is_train;
        labels.push_back(is_train ? Split::Train : Split::Test);
    }
    if (train == 0 || train == labels.size()) {
        fail_data("DegenerateSplit", std::to_string(train) + " train rows of " + std::to_string(labels.size()) +
                                         " at threshold " + std::to_string(threshold_year));
    }
    return labels;
}

std::vector<FireRecord> records_before(const std::vector<FireRecord>& records, int threshold_year) {
    std::vector<FireRecord> out;
    for (const auto& r : records) {
        if (static_cast<int>(r.alarm_date.year()) < threshold_year) out.push_back(r);
    }
    return out;
}

Matrix Standardizer::apply(const Matrix& matrix) const {
    Matrix out = matrix;
    for (std::size_t r = 0; r < out.rows(); ++r) {
        for (std::size_t c = 0; c < mean.size(); ++c) {
            out(r, c) = constant[c] ? 0.0 : (out(r, c) - mean[c]) / std[c];
        }
    }
    return out;
}

Standardizer fit_standardizer(const Dataset& dataset, std::span<const std::size_t> rows) {
    if (rows.empty()) fail_data("EmptyDataset", "no rows to fit the standardizer");
    const std::size_t numeric = dataset.spec.numeric_count();
    Standardizer s;
    s.mean.assign(numeric, 0.0);
    s.std.assign(numeric, 0.0);
    s.constant.assign(numeric, false);
    const double n = static_cast<double>(rows.size());
    for (std::size_t c = 0; c < numeric; ++c) {
        double sum = 0;
        for (auto r : rows) sum += dataset.features(r, c);
        const double mean = sum / n;
        double ss = 0;
        for (auto r : rows) ss += (dataset.features(r, c) - mean) * (dataset.features(r, c) - mean);
        const double sd = std::sqrt(ss / n);
        s.mean[c] = mean;
        s.std[c] = sd;
        s.constant[c] = sd <= 1e-12 * std::max(1.0, std::fabs(mean));
    }
    return s;
}

Standardizer fit_standardizer(const Dataset& dataset) {
    if (dataset.split.empty()) {
        std::vector<std::size_t> all(dataset.rows());
        for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
        return fit_standardizer(dataset, all);
    }
    return fit_standardizer(dataset, dataset.rows_in(Split::Train));
}

nlohmann::json to_json(const FeatureSpec& spec) {
    nlohmann::json maps = nlohmann::json::array();
    for (const auto& m : spec.category_maps) maps.push_back(m.values());
    return {{"numeric_columns", spec.numeric_columns},
            {"categorical_columns", spec.categorical_columns},
            {"category_values", maps}};
}

FeatureSpec feature_spec_from_json(const nlohmann::json& doc) try {
    FeatureSpec spec;
    spec.numeric_columns = doc.at("numeric_columns").get<std::vector<std::string>>();
    spec.categorical_columns = doc.at("categorical_columns").get<std::vector<std::string>>();
    for (const auto& values : doc.at("category_values")) {
        CategoryMap map;
        for (const auto& v : values) map.add(v.get<std::string>());
        spec.category_maps.push_back(std::move(map));
    }
    if (spec.category_maps.size() != spec.categorical_columns.size()) {
        fail_data("MalformedArtifact", "category maps do not match categorical columns");
    }
    return spec;
} catch (const nlohmann::json::exception& e) {
    fail_data("MalformedArtifact", e.what());
}

nlohmann::json to_json(const Standardizer& s) {
    return {{"mean", s.mean}, {"std", s.std}, {"constant", s.constant}};
}

Standardizer standardizer_from_json(const nlohmann::json& doc) try {
    Standardizer s;
    s.mean = doc.at("mean").get<std::vector<double>>();
    s.std = doc.at("std").get<std::vector<double>>();
    s.constant = doc.at("constant").get<std::vector<bool>>();
    if (s.std.size() != s.mean.size() || s.constant.size() != s.mean.size()) {
        fail_data("MalformedArtifact", "standardizer vectors differ in length");
    }
    return s;
} catch (const nlohmann::json::exception& e) {
    fail_data("MalformedArtifact", e.what());
}

std::string dataset_to_csv(const Dataset& dataset) {
    auto header = dataset.spec.column_names();
    header.emplace_back("target_log");
    header.emplace_back("target_days");
    header.emplace_back("split");
    std::string out = csv::join_row(header);
    for (std::size_t r = 0; r < dataset.rows(); ++r) {
        std::vector<std::string> row;
        for (double v : dataset.features.row(r)) row.push_back(format_double(v));
        row.push_back(format_double(dataset.target[r]));
        row.push_back(format_double(dataset.target_days[r]));
        row.emplace_back(dataset.split.empty() ? "" : dataset.split[r] == Split::Train ? "TRAIN" : "TEST");
        out += csv::join_row(row);
    }
    return out;
}

}  // namespace wildfire
