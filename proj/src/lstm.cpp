// SPDX-License-Identifier: Apache-2.0
#include "wildfire/lstm.hpp"

#include "wildfire/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace wildfire::lstm {

namespace {

double sigmoid(double a) noexcept {
    if (a >= 0) return 1.0 / (1.0 + std::exp(-a));
    const double e = std::exp(a);
    return e / (1.0 + e);
}

constexpr std::array<const char*, 4> kGateNames{"i", "f", "g", "o"};

void glorot(Tensor& t, std::size_t fan_in, std::size_t fan_out, Rng& rng) {
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    std::uniform_real_distribution<double> dist(-limit, limit);
    for (auto& v : t.data) v = dist(rng);
}

double mse(const LstmWeights& w, const Matrix& x, std::span<const double> y, std::span<const std::size_t> rows) {
    double ss = 0;
    for (auto r : rows) {
        const double e = predict_lstm(w, x.row(r)) - y[r];
        ss += e * e;
    }
    return ss / static_cast<double>(rows.size());
}

std::vector<std::size_t> table_sizes_of(const FeatureSpec& spec) {
    std::vector<std::size_t> sizes;
    for (const auto& m : spec.category_maps) sizes.push_back(m.table_size());
    return sizes;
}

}  // namespace

Tensor Tensor::zeros(std::vector<std::size_t> shape) {
    Tensor t;
    std::size_t n = 1;
    for (auto s : shape) n *= s;
    t.shape = std::move(shape);
    t.data.assign(n, 0.0);
    return t;
}

std::size_t LstmWeights::input_width() const noexcept {
    return numeric_count + std::accumulate(embedding_dims.begin(), embedding_dims.end(), std::size_t{0});
}

std::vector<LstmWeights::Named> LstmWeights::tensors() {
    std::vector<Named> out;
    for (std::size_t c = 0; c < embeddings.size(); ++c) out.push_back({"E_" + std::to_string(c), &embeddings[c]});
    for (std::size_t k = 0; k < 4; ++k) out.push_back({std::string("W_") + kGateNames[k], &w[k]});
    for (std::size_t k = 0; k < 4; ++k) out.push_back({std::string("U_") + kGateNames[k], &u[k]});
    for (std::size_t k = 0; k < 4; ++k) out.push_back({std::string("b_") + kGateNames[k], &b[k]});
    out.push_back({"w_out", &w_out});
    out.push_back({"b_out", &b_out});
    return out;
}

std::vector<LstmWeights::ConstNamed> LstmWeights::tensors() const {
    std::vector<ConstNamed> out;
    for (auto& [name, tensor] : const_cast<LstmWeights*>(this)->tensors()) out.push_back({name, tensor});
    return out;
}

LstmWeights LstmWeights::zeros_like() const {
    LstmWeights out = *this;
    for (auto& named : out.tensors()) std::fill(named.tensor->data.begin(), named.tensor->data.end(), 0.0);
    return out;
}

std::vector<std::size_t> default_embedding_dims(std::span<const std::size_t> table_sizes) {
    std::vector<std::size_t> dims;
    for (auto size : table_sizes) {
        const std::size_t categories = size > 1 ? size - 1 : 1;
        dims.push_back(std::clamp<std::size_t>((categories + 1) / 2, 1, 8));
    }
    return dims;
}

LstmWeights make_weights(std::size_t numeric_count, std::span<const std::size_t> table_sizes,
                         std::span<const std::size_t> embedding_dims, std::size_t units) {
    if (table_sizes.size() != embedding_dims.size()) fail_config("ShapeMismatch", "one embedding dim per column");
    if (units == 0) fail_config("InvalidParameter", "units must be positive");
    LstmWeights w;
    w.numeric_count = numeric_count;
    w.units = units;
    w.embedding_dims.assign(embedding_dims.begin(), embedding_dims.end());
    for (std::size_t c = 0; c < table_sizes.size(); ++c) {
        w.embeddings.push_back(Tensor::zeros({table_sizes[c], embedding_dims[c]}));
    }
    const std::size_t width = w.input_width();
    for (std::size_t k = 0; k < 4; ++k) {
        w.w[k] = Tensor::zeros({units, width});
        w.u[k] = Tensor::zeros({units, units});
        w.b[k] = Tensor::zeros({units});
    }
    w.w_out = Tensor::zeros({units});
    w.b_out = Tensor::zeros({1});
    return w;
}

LstmWeights init_weights(std::size_t numeric_count, std::span<const std::size_t> table_sizes,
                         std::span<const std::size_t> embedding_dims, std::size_t units, std::uint64_t seed,
                         double output_bias) {
    LstmWeights w = make_weights(numeric_count, table_sizes, embedding_dims, units);
    Rng rng(seed);
    std::uniform_real_distribution<double> small(-0.05, 0.05);
    for (auto& e : w.embeddings) {
        for (auto& v : e.data) v = small(rng);
    }
    const std::size_t width = w.input_width();
    for (std::size_t k = 0; k < 4; ++k) {
        glorot(w.w[k], width, 4 * units, rng);
        glorot(w.u[k], units, 4 * units, rng);
    }
    std::fill(w.b[kForget].data.begin(), w.b[kForget].data.end(), 1.0);
    glorot(w.w_out, units, 1, rng);
    w.b_out.data[0] = output_bias;
    return w;
}

ForwardCache lstm_forward(const LstmWeights& weights, std::span<const double> row, bool training, double dropout,
                          Rng* rng, const CellState* state) {
    const std::size_t numeric = weights.numeric_count;
    const std::size_t n_cat = weights.categorical_count();
    if (row.size() != numeric + n_cat) {
        fail_data("WidthMismatch", "row has " + std::to_string(row.size()) + " values, network expects " +
                                       std::to_string(numeric + n_cat));
    }
    const std::size_t units = weights.units;
    const std::size_t width = weights.input_width();

    ForwardCache cache;
    cache.x.reserve(width);
    cache.x.assign(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(numeric));
    for (std::size_t c = 0; c < n_cat; ++c) {
        const double raw = row[numeric + c];
        const auto& table = weights.embeddings[c];
        if (!(raw >= 0) || raw != std::floor(raw) || raw >= static_cast<double>(table.shape[0])) {
            fail_data("CodeOutOfRange", "column " + std::to_string(c) + " code " + format_double(raw));
        }
        const auto code = static_cast<std::size_t>(raw);
        cache.codes.push_back(static_cast<int>(code));
        for (std::size_t d = 0; d < table.shape[1]; ++d) cache.x.push_back(table.at(code, d));
    }

    cache.has_state = state != nullptr;
    if (state) {
        if (state->h.size() != units || state->c.size() != units) fail_data("ShapeMismatch", "state size differs from units");
        cache.h0 = state->h;
        cache.c0 = state->c;
    } else {
        cache.h0.assign(units, 0.0);
        cache.c0.assign(units, 0.0);
    }

    for (std::size_t k = 0; k < 4; ++k) {
        auto& act = cache.gate[k];
        act.resize(units);
        const auto& wk = weights.w[k].data;
        const auto& uk = weights.u[k].data;
        for (std::size_t j = 0; j < units; ++j) {
            double a = weights.b[k].data[j];
            const double* wrow = wk.data() + j * width;
            for (std::size_t m = 0; m < width; ++m) a += wrow[m] * cache.x[m];
            if (cache.has_state) {
                const double* urow = uk.data() + j * units;
                for (std::size_t m = 0; m < units; ++m) a += urow[m] * cache.h0[m];
            }
            act[j] = k == kCell ? std::tanh(a) : sigmoid(a);
        }
    }

    cache.c.resize(units);
    cache.tanh_c.resize(units);
    cache.h.resize(units);
    cache.mask.assign(units, 1.0);
    cache.h_drop.resize(units);
    const bool drop = training && dropout > 0;
    std::bernoulli_distribution keep(1.0 - dropout);
    double y = weights.b_out.data[0];
    for (std::size_t j = 0; j < units; ++j) {
        cache.c[j] = cache.gate[kForget][j] * cache.c0[j] + cache.gate[kInput][j] * cache.gate[kCell][j];
        cache.tanh_c[j] = std::tanh(cache.c[j]);
        cache.h[j] = cache.gate[kOutput][j] * cache.tanh_c[j];
        if (drop) {
            if (!rng) fail_internal("MissingRng", "dropout needs a random stream");
            cache.mask[j] = keep(*rng) ? 1.0 / (1.0 - dropout) : 0.0;
        }
        cache.h_drop[j] = cache.h[j] * cache.mask[j];
        y += weights.w_out.data[j] * cache.h_drop[j];
    }
    cache.prediction = y;
    return cache;
}

LstmWeights lstm_backward(const LstmWeights& weights, std::span<const ForwardCache> batch,
                          std::span<const double> targets) {
    if (batch.size() != targets.size() || batch.empty()) {
        fail_data("ShapeMismatch", "batch and target sizes differ or are zero");
    }
    const std::size_t units = weights.units;
    const std::size_t width = weights.input_width();
    LstmWeights grad = weights.zeros_like();
    const double scale = 2.0 / static_cast<double>(batch.size());

    std::array<std::vector<double>, 4> da;
    for (auto& v : da) v.resize(units);
    std::vector<double> dx(width);

    for (std::size_t n = 0; n < batch.size(); ++n) {
        const auto& cache = batch[n];
        if (cache.x.size() != width || cache.h.size() != units) fail_data("ShapeMismatch", "cache does not match weights");
        const double e = scale * (cache.prediction - targets[n]);
        if (e == 0) continue;

        grad.b_out.data[0] += e;
        for (std::size_t j = 0; j < units; ++j) {
            grad.w_out.data[j] += e * cache.h_drop[j];
            const double dh = e * weights.w_out.data[j] * cache.mask[j];
            const double i = cache.gate[kInput][j], f = cache.gate[kForget][j];
            const double g = cache.gate[kCell][j], o = cache.gate[kOutput][j];
            const double d_o = dh * cache.tanh_c[j];
            const double dc = dh * o * (1.0 - cache.tanh_c[j] * cache.tanh_c[j]);
            da[kInput][j] = dc * g * i * (1.0 - i);
            da[kForget][j] = dc * cache.c0[j] * f * (1.0 - f);
            da[kCell][j] = dc * i * (1.0 - g * g);
            da[kOutput][j] = d_o * o * (1.0 - o);
        }

        std::fill(dx.begin(), dx.end(), 0.0);
        for (std::size_t k = 0; k < 4; ++k) {
            auto& gw = grad.w[k].data;
            auto& gu = grad.u[k].data;
            const auto& wk = weights.w[k].data;
            for (std::size_t j = 0; j < units; ++j) {
                const double d = da[k][j];
                if (d == 0) continue;
                grad.b[k].data[j] += d;
                double* gw_row = gw.data() + j * width;
                const double* w_row = wk.data() + j * width;
                for (std::size_t m = 0; m < width; ++m) {
                    gw_row[m] += d * cache.x[m];
                    dx[m] += d * w_row[m];
                }
                if (cache.has_state) {
                    double* gu_row = gu.data() + j * units;
                    for (std::size_t m = 0; m < units; ++m) gu_row[m] += d * cache.h0[m];
                }
            }
        }

        std::size_t offset = weights.numeric_count;
        for (std::size_t c = 0; c < weights.embeddings.size(); ++c) {
            auto& table = grad.embeddings[c];
            const auto code = static_cast<std::size_t>(cache.codes[c]);
            for (std::size_t d = 0; d < table.shape[1]; ++d) table.at(code, d) += dx[offset + d];
            offset += table.shape[1];
        }
    }
    return grad;
}

double predict_lstm(const LstmWeights& weights, std::span<const double> row) {
    return lstm_forward(weights, row, false, 0.0, nullptr).prediction;
}

std::vector<double> predict_lstm(const LstmWeights& weights, const Matrix& standardized) {
    std::vector<double> out(standardized.rows());
    for (std::size_t r = 0; r < standardized.rows(); ++r) out[r] = predict_lstm(weights, standardized.row(r));
    return out;
}

LstmFit fit_lstm(const Matrix& standardized, std::span<const double> y, std::span<const std::size_t> train_rows,
                 std::span<const std::size_t> validation_rows, const FeatureSpec& spec, const LstmParams& params) {
    if (train_rows.empty()) fail_data("EmptyDataset", "no training rows for the LSTM");
    if (params.units < 1 || params.batch_size < 1 || params.epochs < 0) {
        fail_config("InvalidParameter", "units and batch_size must be positive, epochs nonnegative");
    }
    if (!(params.dropout >= 0 && params.dropout < 1)) fail_config("InvalidParameter", "dropout must be in [0, 1)");
    if (!(params.learning_rate >= 0)) fail_config("InvalidParameter", "learning_rate must be >= 0");

    const auto table_sizes = table_sizes_of(spec);
    std::vector<std::size_t> dims;
    if (params.embedding_dims.empty()) {
        dims = default_embedding_dims(table_sizes);
    } else {
        if (params.embedding_dims.size() != table_sizes.size()) {
            fail_config("InvalidParameter", "embedding_dims needs one entry per categorical column");
        }
        for (int d : params.embedding_dims) dims.push_back(static_cast<std::size_t>(std::max(1, d)));
    }

    double mean_y = 0;
    for (auto r : train_rows) mean_y += y[r];
    mean_y /= static_cast<double>(train_rows.size());

    LstmFit fit;
    fit.params = params;
    LstmWeights weights = init_weights(spec.numeric_count(), table_sizes, dims, static_cast<std::size_t>(params.units),
                                       derive_seed(params.seed, 0), mean_y);

    const bool use_validation = !validation_rows.empty();
    auto score = [&](const LstmWeights& w) {
        return use_validation ? std::sqrt(mse(w, standardized, y, validation_rows))
                              : std::sqrt(mse(w, standardized, y, train_rows));
    };

    LstmWeights best = weights;
    double best_score = score(weights);
    int since_best = 0;

    // Adam moments, parallel to weights.tensors().
    LstmWeights m = weights.zeros_like();
    LstmWeights v = weights.zeros_like();
    constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
    std::uint64_t step = 0;

    Rng rng(derive_seed(params.seed, 1));
    std::vector<std::size_t> order(train_rows.begin(), train_rows.end());
    const auto batch_size = static_cast<std::size_t>(params.batch_size);
    std::vector<ForwardCache> caches;
    std::vector<double> batch_targets;

    for (int epoch = 1; epoch <= params.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t start = 0; start < order.size(); start += batch_size) {
            const std::size_t end = std::min(order.size(), start + batch_size);
            caches.clear();
            batch_targets.clear();
            for (std::size_t i = start; i < end; ++i) {
                caches.push_back(lstm_forward(weights, standardized.row(order[i]), true, params.dropout, &rng));
                batch_targets.push_back(y[order[i]]);
            }
            LstmWeights grad = lstm_backward(weights, caches, batch_targets);

            ++step;
            const double correction1 = 1.0 - std::pow(kBeta1, static_cast<double>(step));
            const double correction2 = 1.0 - std::pow(kBeta2, static_cast<double>(step));
            auto w_t = weights.tensors();
            auto g_t = grad.tensors();
            auto m_t = m.tensors();
            auto v_t = v.tensors();
            for (std::size_t t = 0; t < w_t.size(); ++t) {
                auto& wd = w_t[t].tensor->data;
                const auto& gd = g_t[t].tensor->data;
                auto& md = m_t[t].tensor->data;
                auto& vd = v_t[t].tensor->data;
                for (std::size_t k = 0; k < wd.size(); ++k) {
                    md[k] = kBeta1 * md[k] + (1 - kBeta1) * gd[k];
                    vd[k] = kBeta2 * vd[k] + (1 - kBeta2) * gd[k] * gd[k];
                    const double m_hat = md[k] / correction1;
                    const double v_hat = vd[k] / correction2;
                    wd[k] -= params.learning_rate * m_hat / (std::sqrt(v_hat) + kEps);
                }
            }
        }

        EpochStats stats;
        stats.epoch = epoch;
        stats.train_loss = mse(weights, standardized, y, train_rows);
        stats.validation_rmse = use_validation ? std::sqrt(mse(weights, standardized, y, validation_rows))
                                               : std::sqrt(stats.train_loss);
        fit.curve.push_back(stats);
        if (!std::isfinite(stats.validation_rmse)) break;
        if (stats.validation_rmse < best_score) {
            best_score = stats.validation_rmse;
            best = weights;
            fit.best_epoch = epoch;
            since_best = 0;
        } else if (++since_best >= params.patience) {
            break;
        }
    }
    fit.weights = std::move(best);
    return fit;
}

std::vector<LstmParams> sample_trials(const SearchSpace& space, const LstmParams& base, std::size_t n_trials,
                                      std::uint64_t seed) {
    if (space.units_step < 1 || space.units_min < 1 || space.units_max < space.units_min) {
        fail_config("InvalidParameter", "bad units range in the search space");
    }
    if (!(space.lr_min > 0 && space.lr_max >= space.lr_min)) fail_config("InvalidParameter", "bad learning-rate range");
    if (!(space.dropout_min >= 0 && space.dropout_max < 1 && space.dropout_max >= space.dropout_min)) {
        fail_config("InvalidParameter", "bad dropout range");
    }
    const int unit_choices = (space.units_max - space.units_min) / space.units_step + 1;
    std::vector<LstmParams> out;
    for (std::size_t t = 0; t < n_trials; ++t) {
        Rng rng(derive_seed(seed, 1000 + t));
        std::uniform_int_distribution<int> unit_pick(0, unit_choices - 1);
        std::uniform_real_distribution<double> dropout(space.dropout_min, space.dropout_max);
        std::uniform_real_distribution<double> log_lr(std::log(space.lr_min), std::log(space.lr_max));
        LstmParams p = base;
        p.units = space.units_min + unit_pick(rng) * space.units_step;
        p.dropout = dropout(rng);
        p.learning_rate = std::exp(log_lr(rng));
        p.seed = derive_seed(seed, t);
        out.push_back(std::move(p));
    }
    return out;
}

TuneResult run_trials(const std::vector<LstmParams>& candidates, const Matrix& standardized, std::span<const double> y,
                      std::span<const std::size_t> train_rows, std::span<const std::size_t> validation_rows,
                      const FeatureSpec& spec, std::size_t threads) {
    TuneResult result;
    result.trials.resize(candidates.size());
    parallel_for(candidates.size(), threads, [&](std::size_t t) {
        const auto fit = fit_lstm(standardized, y, train_rows, validation_rows, spec, candidates[t]);
        const auto& rows = validation_rows.empty() ? train_rows : validation_rows;
        result.trials[t] = Trial{candidates[t], std::sqrt(mse(fit.weights, standardized, y, rows)), candidates[t].seed};
    });
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < result.trials.size(); ++t) {
        if (result.trials[t].validation_rmse < best) {
            best = result.trials[t].validation_rmse;
            result.best = t;
        }
    }
    return result;
}

TuneResult tune_lstm(const Matrix& standardized, std::span<const double> y, std::span<const std::size_t> train_rows,
                     std::span<const std::size_t> validation_rows, const FeatureSpec& spec, const SearchSpace& space,
                     const LstmParams& base, std::size_t n_trials, std::uint64_t seed, std::size_t threads) {
    return run_trials(sample_trials(space, base, n_trials, seed), standardized, y, train_rows, validation_rows, spec,
                      threads);
}

nlohmann::json to_json(const LstmParams& p) {
    return {{"units", p.units},           {"dropout", p.dropout}, {"learning_rate", p.learning_rate},
            {"embedding_dims", p.embedding_dims}, {"epochs", p.epochs}, {"batch_size", p.batch_size},
            {"patience", p.patience},     {"seed", p.seed}};
}

LstmParams lstm_params_from_json(const nlohmann::json& doc, LstmParams p) try {
    for (const auto& [key, value] : doc.items()) {
        if (key == "units") p.units = value.get<int>();
        else if (key == "dropout") p.dropout = value.get<double>();
        else if (key == "learning_rate") p.learning_rate = value.get<double>();
        else if (key == "embedding_dims") p.embedding_dims = value.get<std::vector<int>>();
        else if (key == "epochs") p.epochs = value.get<int>();
        else if (key == "batch_size") p.batch_size = value.get<int>();
        else if (key == "patience") p.patience = value.get<int>();
        else if (key == "seed") p.seed = value.get<std::uint64_t>();
        else fail_config("UnknownParameter", "LSTM has no parameter " + key);
    }
    if (p.units < 1) fail_config("InvalidParameter", "units must be positive");
    if (!(p.dropout >= 0 && p.dropout < 1)) fail_config("InvalidParameter", "dropout must be in [0, 1)");
    if (!(p.learning_rate >= 0)) fail_config("InvalidParameter", "learning_rate must be >= 0");
    if (p.batch_size < 1 || p.epochs < 0 || p.patience < 1) {
        fail_config("InvalidParameter", "batch_size and patience must be positive, epochs nonnegative");
    }
    return p;
} catch (const nlohmann::json::exception& e) {
    fail_config("InvalidParameter", e.what());
}

nlohmann::json to_json(const LstmWeights& w) {
    nlohmann::json tensors = nlohmann::json::object();
    for (const auto& [name, tensor] : w.tensors()) tensors[name] = {{"shape", tensor->shape}, {"data", tensor->data}};
    return {{"numeric_count", w.numeric_count},
            {"units", w.units},
            {"embedding_dims", w.embedding_dims},
            {"tensors", std::move(tensors)}};
}

LstmWeights lstm_weights_from_json(const nlohmann::json& doc) try {
    const auto numeric = doc.at("numeric_count").get<std::size_t>();
    const auto units = doc.at("units").get<std::size_t>();
    const auto dims = doc.at("embedding_dims").get<std::vector<std::size_t>>();
    const auto& tensors = doc.at("tensors");
    std::vector<std::size_t> table_sizes;
    for (std::size_t c = 0; c < dims.size(); ++c) {
        const auto shape = tensors.at("E_" + std::to_string(c)).at("shape").get<std::vector<std::size_t>>();
        if (shape.size() != 2) fail_data("MalformedArtifact", "embedding table must be 2-D");
        table_sizes.push_back(shape[0]);
    }
    LstmWeights w = make_weights(numeric, table_sizes, dims, units);
    for (auto& [name, tensor] : w.tensors()) {
        const auto& entry = tensors.at(name);
        if (entry.at("shape").get<std::vector<std::size_t>>() != tensor->shape) {
            fail_data("MalformedArtifact", "tensor " + name + " has the wrong shape");
        }
        tensor->data = entry.at("data").get<std::vector<double>>();
        if (tensor->data.size() != Tensor::zeros(tensor->shape).data.size()) {
            fail_data("MalformedArtifact", "tensor " + name + " has the wrong size");
        }
    }
    return w;
} catch (const nlohmann::json::exception& e) {
    fail_data("MalformedArtifact", e.what());
}

}  // namespace wildfire::lstm
