// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "wildfire/features.hpp"
#include "wildfire/util.hpp"

#include <json.hpp>

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace wildfire::lstm {

struct LstmParams {
    int units = 192;
    double dropout = 0.1;
    double learning_rate = 0.001;
    std::vector<int> embedding_dims;  // per categorical column; empty = min(8, ceil(k/2))
    int epochs = 100;
    int batch_size = 64;
    int patience = 10;  // epochs without validation improvement
    std::uint64_t seed = 42;

    bool operator==(const LstmParams&) const = default;
};

struct Tensor {
    std::vector<std::size_t> shape;
    std::vector<double> data;

    static Tensor zeros(std::vector<std::size_t> shape);
    double& at(std::size_t r, std::size_t c) noexcept { return data[r * shape[1] + c]; }
    double at(std::size_t r, std::size_t c) const noexcept { return data[r * shape[1] + c]; }
    bool operator==(const Tensor&) const = default;
};

/// Gate order throughout: input, forget, cell candidate, output.
enum Gate : std::size_t { kInput = 0, kForget = 1, kCell = 2, kOutput = 3 };

struct LstmWeights {
    std::size_t numeric_count = 0;
    std::size_t units = 0;
    std::vector<std::size_t> embedding_dims;
    std::vector<Tensor> embeddings;  // (table_size × dim) per categorical column
    std::array<Tensor, 4> w;         // units × input_width
    std::array<Tensor, 4> u;         // units × units
    std::array<Tensor, 4> b;         // units
    Tensor w_out;                    // units
    Tensor b_out;                    // scalar

    std::size_t input_width() const noexcept;
    std::size_t categorical_count() const noexcept { return embeddings.size(); }

    struct Named {
        std::string name;
        Tensor* tensor;
    };
    struct ConstNamed {
        std::string name;
        const Tensor* tensor;
    };
    /// Every parameter tensor in a fixed order.
    std::vector<Named> tensors();
    std::vector<ConstNamed> tensors() const;

    /// Same shapes, all zeros.
    LstmWeights zeros_like() const;
    bool operator==(const LstmWeights&) const = default;
};

/// Shapes for a feature layout; all values zero.
LstmWeights make_weights(std::size_t numeric_count, std::span<const std::size_t> table_sizes,
                         std::span<const std::size_t> embedding_dims, std::size_t units);
/// Seeded initialization: Glorot-uniform kernels, small uniform embeddings,
/// forget-gate bias 1, output bias at `output_bias`.
LstmWeights init_weights(std::size_t numeric_count, std::span<const std::size_t> table_sizes,
                         std::span<const std::size_t> embedding_dims, std::size_t units, std::uint64_t seed,
                         double output_bias = 0.0);

std::vector<std::size_t> default_embedding_dims(std::span<const std::size_t> table_sizes);

struct CellState {
    std::vector<double> h;
    std::vector<double> c;
};

/// Activations retained for the backward pass.
struct ForwardCache {
    std::vector<double> x;
    std::vector<int> codes;
    std::vector<double> h0, c0;
    std::array<std::vector<double>, 4> gate;  // post-activation
    std::vector<double> c, tanh_c, h;
    std::vector<double> mask;  // inverted-dropout multipliers (1 when inactive)
    std::vector<double> h_drop;
    double prediction = 0;
    bool has_state = false;
};

/// One cell step on a standardized row (numeric values then category codes).
/// With no `state`, h₀ = c₀ = 0. Dropout applies to h when `training` and
/// `dropout` > 0, drawing from `rng`. Throws CodeOutOfRange / WidthMismatch.
ForwardCache lstm_forward(const LstmWeights& weights, std::span<const double> row, bool training, double dropout,
                          Rng* rng, const CellState* state = nullptr);

/// Exact gradients of mean((ŷ − y)²) over the batch. Throws ShapeMismatch.
LstmWeights lstm_backward(const LstmWeights& weights, std::span<const ForwardCache> batch,
                          std::span<const double> targets);

double predict_lstm(const LstmWeights& weights, std::span<const double> row);
std::vector<double> predict_lstm(const LstmWeights& weights, const Matrix& standardized);

struct EpochStats {
    int epoch = 0;
    double train_loss = 0;      // MSE over the training rows, inference mode
    double validation_rmse = 0;  // log space
};

struct LstmFit {
    LstmWeights weights;
    LstmParams params;
    std::vector<EpochStats> curve;
    int best_epoch = 0;  // 0 = initial weights
};

/// Adam (β₁ 0.9, β₂ 0.999, ε 1e-8) over seeded shuffled mini-batches. Keeps
/// the weights of the best validation epoch (training loss when no
/// validation rows are given). Throws EmptyDataset.
LstmFit fit_lstm(const Matrix& standardized, std::span<const double> y, std::span<const std::size_t> train_rows,
                 std::span<const std::size_t> validation_rows, const FeatureSpec& spec, const LstmParams& params);

struct SearchSpace {
    int units_min = 32;
    int units_max = 256;
    int units_step = 32;
    double dropout_min = 0.0;
    double dropout_max = 0.5;
    double lr_min = 1e-4;
    double lr_max = 1e-2;
};

struct Trial {
    LstmParams params;
    double validation_rmse = 0;
    std::uint64_t seed = 0;
};

struct TuneResult {
    std::vector<Trial> trials;
    std::size_t best = 0;
};

/// Seeded random draws from the space; other fields copied from `base`.
std::vector<LstmParams> sample_trials(const SearchSpace& space, const LstmParams& base, std::size_t n_trials,
                                      std::uint64_t seed);
/// Trains every candidate (in parallel across `threads`) and picks the lowest
/// validation RMSE, first index on ties.
TuneResult run_trials(const std::vector<LstmParams>& candidates, const Matrix& standardized, std::span<const double> y,
                      std::span<const std::size_t> train_rows, std::span<const std::size_t> validation_rows,
                      const FeatureSpec& spec, std::size_t threads = 1);
TuneResult tune_lstm(const Matrix& standardized, std::span<const double> y, std::span<const std::size_t> train_rows,
                     std::span<const std::size_t> validation_rows, const FeatureSpec& spec, const SearchSpace& space,
                     const LstmParams& base, std::size_t n_trials = 10, std::uint64_t seed = 42,
                     std::size_t threads = 1);

nlohmann::json to_json(const LstmParams& params);
LstmParams lstm_params_from_json(const nlohmann::json& doc, LstmParams base = {});
nlohmann::json to_json(const LstmWeights& weights);
LstmWeights lstm_weights_from_json(const nlohmann::json& doc);

}  // namespace wildfire::lstm
