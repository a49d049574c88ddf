// SPDX-License-Identifier: Apache-2.0
#include "wildfire/synthetic.hpp"

#include "wildfire/util.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <random>
#include <string>

namespace wildfire::synthetic {

namespace {

constexpr std::array<const char*, 6> kAgencies{"CDF", "USF", "BLM", "NPS", "CCO", "LRA"};
constexpr std::array<const char*, 10> kUnits{"LNU", "BEU", "RRU", "SLU", "BTU", "FKU", "TCU", "SKU", "MEU", "SQF"};
constexpr std::array<double, 12> kMonthWeights{1, 1, 2, 3, 5, 9, 12, 12, 9, 6, 3, 1};
// Collection methods ordered roughly by the incident scale they imply.
constexpr std::array<double, 8> kMethodEffect{0.0, 0.1, 0.45, 0.6, 0.2, 0.05, 0.8, 0.3};

Date add_days(const Date& date, int days) {
    return Date{std::chrono::sys_days(date) + std::chrono::days(days)};
}

}  // namespace

std::vector<FireRecord> fire_records(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::uniform_int_distribution<int> year(2005, 2024);
    std::discrete_distribution<int> month(kMonthWeights.begin(), kMonthWeights.end());
    std::uniform_int_distribution<int> day(1, 28);
    std::uniform_real_distribution<double> lat(33.0, 41.5), lon(-123.5, -115.5);
    std::normal_distribution<double> log_acres(4.0, 1.8), noise(0.0, 0.55);
    std::uniform_int_distribution<int> cause(1, 14), method(1, 8), objective(1, 2);
    std::uniform_int_distribution<std::size_t> agency(0, kAgencies.size() - 1), unit(0, kUnits.size() - 1);
    std::bernoulli_distribution has_irwin(0.8);

    std::vector<FireRecord> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        FireRecord rec;
        const int y = year(rng);
        rec.alarm_date = Date{std::chrono::year(y), std::chrono::month(static_cast<unsigned>(month(rng) + 1)),
                              std::chrono::day(static_cast<unsigned>(day(rng)))};
        rec.latitude = lat(rng);
        rec.longitude = lon(rng);
        const double la = std::max(0.0, log_acres(rng));
        const int m = method(rng);

        const double log_days = -0.6 + 0.42 * la + kMethodEffect[static_cast<std::size_t>(m - 1)] + noise(rng);
        const int days = std::clamp(static_cast<int>(std::lround(std::expm1(std::max(0.0, log_days)))), 0, 400);
        rec.cont_date = add_days(rec.alarm_date, days);
        rec.containment_days = days;
        rec.log_cont_days = std::log1p(static_cast<double>(days));

        auto& raw = rec.raw;
        raw.year_digitized = y;
        char id[32];
        std::snprintf(id, sizeof id, "SYN-%05zu", i + 1);
        if (has_irwin(rng)) raw.irwin_id = id;
        raw.fire_name = std::string("FIRE ") + std::to_string(i + 1);
        raw.alarm_date_text = format_date(rec.alarm_date);
        raw.cont_date_text = format_date(rec.cont_date);
        raw.cause_code = cause(rng);
        raw.agency_code = kAgencies[agency(rng)];
        raw.unit_id = kUnits[unit(rng)];
        raw.c_method_code = m;
        raw.objective_code = objective(rng);
        raw.gis_acres = std::round(std::expm1(la) * 100.0) / 100.0;
        out.push_back(std::move(rec));
    }
    return out;
}

InteractionData interaction_data(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> noise(0.0, 0.3);
    constexpr std::array<int, 3> kLevels{4, 6, 8};
    constexpr std::array<double, 4> kCatEffect{0.0, 0.6, -0.3, 1.0};

    InteractionData data;
    Dataset& ds = data.dataset;
    ds.spec.numeric_columns = {"x0", "x1", "x2", "x3", "x4"};
    ds.spec.categorical_columns = {"cat0", "cat1", "cat2"};
    ds.spec.category_maps.resize(3);
    for (std::size_t c = 0; c < 3; ++c) {
        for (int l = 0; l < kLevels[c]; ++l) ds.spec.category_maps[c].add("L" + std::to_string(l));
    }
    ds.features = Matrix(n, 8);
    const std::size_t n_test = n / 5;
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < 5; ++c) ds.features(r, c) = unit(rng);
        for (std::size_t c = 0; c < 3; ++c) {
            ds.features(r, 5 + c) = static_cast<double>(std::uniform_int_distribution<int>(0, kLevels[c] - 1)(rng));
        }
        const double x0 = ds.features(r, 0), x1 = ds.features(r, 1);
        const auto cat0 = static_cast<std::size_t>(ds.features(r, 5));
        double log_days = -0.4 + kCatEffect[cat0] + 0.6 * x0;
        if (x0 > 0.3) log_days += 0.8;
        if (x0 > 0.7) log_days += 0.6;
        if (x0 > 0.5) log_days += 0.4;
        if (x1 > 0.2) log_days += 0.6;
        if (x1 > 0.5) log_days += 0.7;
        if (x1 > 0.8) log_days += 0.5;
        if (x0 > 0.6 && x1 > 0.3) log_days += 0.8;
        if (x0 > 0.3 && x1 > 0.5 && cat0 == 3) log_days += 0.5;
        if (x1 < 0.4 && cat0 == 1) log_days += 0.4;
        log_days += noise(rng);
        const double days = std::round(std::exp(log_days));
        ds.target_days.push_back(days);
        ds.target.push_back(std::log1p(days));
        const bool test = r >= n - n_test;
        ds.split.push_back(test ? Split::Test : Split::Train);
        ds.alarm_year.push_back(test ? 2020 : 2010);
        ds.alarm_day.push_back(static_cast<int>(r));
        (test ? data.test_rows : data.train_rows).push_back(r);
    }
    return data;
}

SignalData single_signal(std::size_t n, std::size_t width, std::size_t signal, std::uint64_t seed) {
    Rng rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> noise(0.0, 0.1);
    SignalData data{Matrix(n, width), {}};
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < width; ++c) data.x(r, c) = unit(rng);
        const double s = data.x(r, signal);
        data.y.push_back((s > 0.5 ? 2.0 : 0.0) + (s > 0.8 ? 1.0 : 0.0) + noise(rng));
    }
    return data;
}

}  // namespace wildfire::synthetic
