// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "wildfire/clean.hpp"

#include <json.hpp>

#include <cstddef>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace wildfire {

/// Dense row-major matrix of doubles.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }

    double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

    std::span<const double> row(std::size_t r) const noexcept { return {data_.data() + r * cols_, cols_}; }
    std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }

    const std::vector<double>& data() const noexcept { return data_; }

    /// Copy of the given rows, in order.
    Matrix select_rows(std::span<const std::size_t> rows) const;

    bool operator==(const Matrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// Dense codes for one categorical column, assigned by first appearance.
/// Code size() is reserved for values never seen during fitting.
class CategoryMap {
public:
    int add(const std::string& value);
    int code(const std::string& value) const;
    int unseen_code() const noexcept { return static_cast<int>(values_.size()); }
    /// Number of embedding rows needed: seen values plus the reserved code.
    std::size_t table_size() const noexcept { return values_.size() + 1; }
    const std::vector<std::string>& values() const noexcept { return values_; }

private:
    std::vector<std::string> values_;
    std::unordered_map<std::string, int> index_;
};

inline constexpr const char* kMissingCategory = "NA";

struct FeatureSpec {
    std::vector<std::string> numeric_columns;
    std::vector<std::string> categorical_columns;
    std::vector<CategoryMap> category_maps;  // parallel to categorical_columns

    std::size_t numeric_count() const noexcept { return numeric_columns.size(); }
    std::size_t width() const noexcept { return numeric_columns.size() + categorical_columns.size(); }
    /// All column names: numeric first, then categorical.
    std::vector<std::string> column_names() const;
};

/// Default column sets for fire records.
std::vector<std::string> default_numeric_columns();
std::vector<std::string> default_categorical_columns();

/// Fits category maps on the training records only. Throws EmptyDataset.
FeatureSpec build_feature_spec(const std::vector<FireRecord>& train_records);

enum class Split : unsigned char { Train, Test };

struct Dataset {
    Matrix features;                 // numeric columns, then integer category codes
    std::vector<double> target;      // log1p(containment days)
    std::vector<double> target_days;
    FeatureSpec spec;
    std::vector<Split> split;        // empty until temporal_split is applied
    std::vector<int> alarm_year;
    std::vector<int> alarm_day;      // days since epoch, orders rows in time

    std::size_t rows() const noexcept { return features.rows(); }
    std::vector<std::size_t> rows_in(Split which) const;
};

/// Value of a named feature column for one record. Categorical columns
/// return the raw code as text, or "NA" when absent.
double numeric_feature(const FireRecord& record, const std::string& column);
std::string categorical_feature(const FireRecord& record, const std::string& column);

/// Throws UnknownColumn for columns the record type does not provide.
Dataset build_matrix(const std::vector<FireRecord>& records, const FeatureSpec& spec);

/// Train when the alarm year is below the threshold. Throws DegenerateSplit
/// if either side is empty.
std::vector<Split> temporal_split(const Dataset& dataset, int threshold_year = 2018);

/// Splits records (not yet featurized) the same way.
std::vector<FireRecord> records_before(const std::vector<FireRecord>& records, int threshold_year);

/// Population (n) statistics of the numeric columns over TRAIN rows.
struct Standardizer {
    std::vector<double> mean;
    std::vector<double> std;
    std::vector<bool> constant;  // transformed to 0

    Matrix apply(const Matrix& matrix) const;
};

/// Fits on the given rows (normally the TRAIN rows). Throws EmptyDataset.
Standardizer fit_standardizer(const Dataset& dataset, std::span<const std::size_t> rows);
Standardizer fit_standardizer(const Dataset& dataset);

nlohmann::json to_json(const FeatureSpec& spec);
FeatureSpec feature_spec_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const Standardizer& standardizer);
Standardizer standardizer_from_json(const nlohmann::json& doc);

/// Feature columns, target columns and split label, one row per record.
std::string dataset_to_csv(const Dataset& dataset);

}  // namespace wildfire
