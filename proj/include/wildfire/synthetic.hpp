// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "wildfire/clean.hpp"
#include "wildfire/features.hpp"

#include <cstddef>
#include <cstdint>
#include <vector>

namespace wildfire::synthetic {

/// Cleaned fire records with FRAP-like codes, California coordinates,
/// alarm years 2005-2024 and right-skewed durations that grow with fire size
/// and collection method.
std::vector<FireRecord> fire_records(std::size_t n, std::uint64_t seed);

/// Dense benchmark table: five numeric and three categorical columns, with a
/// log-normal duration driven by x0, x1 and cat0 only: a linear term, additive
/// steps and threshold interactions. The remaining five columns are noise.
/// The last fifth of the rows forms the test set.
struct InteractionData {
    Dataset dataset;  // split filled in
    std::vector<std::size_t> train_rows;
    std::vector<std::size_t> test_rows;
};

InteractionData interaction_data(std::size_t n, std::uint64_t seed);

/// Single informative numeric column (index `signal`) among `width` columns
/// of uniform noise; y is a step function of the signal plus small noise.
struct SignalData {
    Matrix x;
    std::vector<double> y;
};

SignalData single_signal(std::size_t n, std::size_t width, std::size_t signal, std::uint64_t seed);

}  // namespace wildfire::synthetic
