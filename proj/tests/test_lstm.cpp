// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "support.hpp"
#include "wildfire/lstm.hpp"
#include "wildfire/synthetic.hpp"

#include <algorithm>
#include <cmath>

using namespace wildfire;
using namespace wildfire::lstm;
using test_support::error_kind;

namespace {

const std::vector<std::size_t> kTables{4, 3};
const std::vector<std::size_t> kDims{2, 3};

double sigmoid_ref(double z) { return 1.0 / (1.0 + std::exp(-z)); }

/// Straight transcription of one cell step from zero or given state.
double reference_forward(const LstmWeights& w, const std::vector<double>& row, const std::vector<double>& h0,
                         const std::vector<double>& c0) {
    std::vector<double> x(row.begin(), row.begin() + static_cast<long>(w.numeric_count));
    for (std::size_t k = 0; k < w.embeddings.size(); ++k) {
        const auto code = static_cast<std::size_t>(row[w.numeric_count + k]);
        for (std::size_t d = 0; d < w.embedding_dims[k]; ++d) x.push_back(w.embeddings[k].at(code, d));
    }
    const std::size_t u = w.units;
    std::vector<double> h(u);
    for (std::size_t j = 0; j < u; ++j) {
        double z[4];
        for (std::size_t g = 0; g < 4; ++g) {
            z[g] = w.b[g].data[j];
            for (std::size_t i = 0; i < x.size(); ++i) z[g] += w.w[g].at(j, i) * x[i];
            for (std::size_t i = 0; i < u; ++i) z[g] += w.u[g].at(j, i) * h0[i];
        }
        const double c = sigmoid_ref(z[1]) * c0[j] + sigmoid_ref(z[0]) * std::tanh(z[2]);
        h[j] = sigmoid_ref(z[3]) * std::tanh(c);
    }
    double out = w.b_out.data[0];
    for (std::size_t j = 0; j < u; ++j) out += w.w_out.data[j] * h[j];
    return out;
}

Matrix random_rows(Rng& rng, std::size_t n) {
    std::uniform_real_distribution<double> unit(-1, 1);
    Matrix m(n, 5);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < 3; ++c) m(r, c) = unit(rng);
        m(r, 3) = static_cast<double>(rng() % kTables[0]);
        m(r, 4) = static_cast<double>(rng() % kTables[1]);
    }
    return m;
}

double loss(const LstmWeights& w, const Matrix& m, const std::vector<double>& y) {
    double s = 0;
    for (std::size_t r = 0; r < m.rows(); ++r) {
        const double e = predict_lstm(w, m.row(r)) - y[r];
        s += e * e;
    }
    return s / static_cast<double>(m.rows());
}

}  // namespace

TEST_CASE("forward pass matches a direct transcription") {
    Rng rng(1);
    auto w = init_weights(3, kTables, kDims, 5, 17, 0.3);
    std::uniform_real_distribution<double> unit(-0.5, 0.5);
    for (auto& named : w.tensors()) {
        for (auto& v : named.tensor->data) v += unit(rng);
    }
    const auto m = random_rows(rng, 20);
    const std::vector<double> zeros(5, 0.0);
    for (std::size_t r = 0; r < m.rows(); ++r) {
        const std::vector<double> row(m.row(r).begin(), m.row(r).end());
        CHECK(predict_lstm(w, m.row(r)) == doctest::Approx(reference_forward(w, row, zeros, zeros)).epsilon(1e-12));
        CellState state{{0.1, -0.2, 0.3, 0.0, 0.5}, {-0.4, 0.2, 0.0, 0.1, 0.3}};
        const auto cache = lstm_forward(w, m.row(r), false, 0.0, nullptr, &state);
        CHECK(cache.prediction == doctest::Approx(reference_forward(w, row, state.h, state.c)).epsilon(1e-12));
    }
}

TEST_CASE("analytic gradients match central differences without state") {
    Rng rng(2);
    auto w = init_weights(3, kTables, kDims, 6, 5, 0.1);
    const auto m = random_rows(rng, 12);
    std::vector<double> y(12);
    for (auto& v : y) v = std::uniform_real_distribution<double>(0, 2)(rng);

    std::vector<ForwardCache> caches;
    for (std::size_t r = 0; r < m.rows(); ++r) caches.push_back(lstm_forward(w, m.row(r), false, 0.0, nullptr));
    const auto grad = lstm_backward(w, caches, y);
    auto g_tensors = grad.tensors();
    auto w_tensors = w.tensors();
    REQUIRE(g_tensors.size() == w_tensors.size());
    double worst = 0;
    for (std::size_t t = 0; t < w_tensors.size(); ++t) {
        auto& data = w_tensors[t].tensor->data;
        for (std::size_t i = 0; i < data.size(); ++i) {
            const double keep = data[i];
            data[i] = keep + 1e-5;
            const double up = loss(w, m, y);
            data[i] = keep - 1e-5;
            const double down = loss(w, m, y);
            data[i] = keep;
            const double numeric = (up - down) / 2e-5;
            const double analytic = g_tensors[t].tensor->data[i];
            const double rel = std::abs(numeric - analytic) / std::max({std::abs(numeric), std::abs(analytic), 1e-6});
            worst = std::max(worst, rel);
        }
    }
    CHECK(worst < 1e-4);
}

TEST_CASE("inverted dropout masks") {
    Rng rng(3);
    const auto w = init_weights(3, kTables, kDims, 400, 9);
    const auto m = random_rows(rng, 1);
    const auto cache = lstm_forward(w, m.row(0), true, 0.25, &rng);
    std::size_t dropped = 0;
    for (double v : cache.mask) {
        CHECK((v == 0.0 || v == doctest::Approx(1.0 / 0.75)));
        dropped += v == 0.0;
    }
    CHECK(dropped > 60);
    CHECK(dropped < 140);
    const auto inference = lstm_forward(w, m.row(0), false, 0.25, nullptr);
    for (double v : inference.mask) CHECK(v == 1.0);
    CHECK(inference.prediction == predict_lstm(w, m.row(0)));
}

TEST_CASE("embedding sizes and initialization") {
    const std::vector<std::size_t> tables{2, 5, 40};
    CHECK(default_embedding_dims(tables) == std::vector<std::size_t>{1, 2, 8});
    const auto w = init_weights(3, kTables, kDims, 4, 1, 2.5);
    CHECK(w.input_width() == 3 + 2 + 3);
    CHECK(w.b_out.data[0] == 2.5);
    for (std::size_t j = 0; j < 4; ++j) {
        CHECK(w.b[kForget].data[j] == 1.0);
        CHECK(w.b[kInput].data[j] == 0.0);
    }
    const double limit = std::sqrt(6.0 / (8.0 + 16.0));
    for (double v : w.w[kCell].data) CHECK(std::abs(v) <= limit);
    for (double v : w.embeddings[0].data) CHECK(std::abs(v) <= 0.05);
    CHECK(init_weights(3, kTables, kDims, 4, 1) == init_weights(3, kTables, kDims, 4, 1));
    CHECK_FALSE(init_weights(3, kTables, kDims, 4, 1) == init_weights(3, kTables, kDims, 4, 2));
}

TEST_CASE("input checks") {
    const auto w = init_weights(3, kTables, kDims, 4, 1);
    const std::vector<double> bad_code{0, 0, 0, 4, 0};
    CHECK(error_kind([&] { predict_lstm(w, bad_code); }) == "CodeOutOfRange");
    const std::vector<double> short_row{0, 0, 0, 1};
    CHECK(error_kind([&] { predict_lstm(w, short_row); }) == "WidthMismatch");
}

TEST_CASE("training improves on the initial weights and is reproducible") {
    auto data = synthetic::interaction_data(600, 4);
    auto& ds = data.dataset;
    const auto st = fit_standardizer(ds, data.train_rows);
    const auto z = st.apply(ds.features);
    std::vector<std::size_t> fit(data.train_rows.begin(), data.train_rows.end() - 48);
    std::vector<std::size_t> val(data.train_rows.end() - 48, data.train_rows.end());
    LstmParams p;
    p.units = 16;
    p.epochs = 12;
    p.batch_size = 32;
    p.learning_rate = 5e-3;
    p.patience = 4;
    const auto a = fit_lstm(z, ds.target, fit, val, ds.spec, p);
    REQUIRE(!a.curve.empty());
    const auto best = std::min_element(a.curve.begin(), a.curve.end(), [](const auto& l, const auto& r) {
        return l.validation_rmse < r.validation_rmse;
    });
    CHECK(a.best_epoch == best->epoch);
    CHECK(a.curve.front().train_loss > a.curve.back().train_loss);
    double se = 0;
    for (auto r : val) se += std::pow(predict_lstm(a.weights, z.row(r)) - ds.target[r], 2);
    CHECK(std::sqrt(se / static_cast<double>(val.size())) == doctest::Approx(best->validation_rmse).epsilon(1e-12));

    const auto b = fit_lstm(z, ds.target, fit, val, ds.spec, p);
    CHECK(a.weights == b.weights);
    CHECK(error_kind([&] { fit_lstm(z, ds.target, std::vector<std::size_t>{}, val, ds.spec, p); }) == "EmptyDataset");
}

TEST_CASE("patience stops training") {
    auto data = synthetic::interaction_data(300, 5);
    const auto z = fit_standardizer(data.dataset, data.train_rows).apply(data.dataset.features);
    std::vector<std::size_t> fit(data.train_rows.begin(), data.train_rows.end() - 24);
    std::vector<std::size_t> val(data.train_rows.end() - 24, data.train_rows.end());
    LstmParams p;
    p.units = 8;
    p.epochs = 200;
    p.learning_rate = 0.05;
    p.patience = 2;
    const auto f = fit_lstm(z, data.dataset.target, fit, val, data.dataset.spec, p);
    CHECK(f.curve.size() < 200);
    CHECK(static_cast<int>(f.curve.size()) - f.best_epoch == 2);
}

TEST_CASE("trial sampling stays inside the space") {
    SearchSpace space;
    const auto trials = sample_trials(space, LstmParams{}, 200, 11);
    REQUIRE(trials.size() == 200);
    for (const auto& t : trials) {
        CHECK(t.units >= 32);
        CHECK(t.units <= 256);
        CHECK(t.units % 32 == 0);
        CHECK(t.dropout >= 0);
        CHECK(t.dropout <= 0.5);
        CHECK(t.learning_rate >= 1e-4);
        CHECK(t.learning_rate <= 1e-2);
        CHECK(t.epochs == LstmParams{}.epochs);
    }
    const auto again = sample_trials(space, LstmParams{}, 200, 11);
    CHECK(again == trials);
    std::size_t below = 0;
    for (const auto& t : trials) below += t.learning_rate < 1e-3;
    CHECK(below > 60);
    CHECK(below < 140);
}

TEST_CASE("tuning picks the lowest validation error at any thread count") {
    auto data = synthetic::interaction_data(300, 6);
    const auto z = fit_standardizer(data.dataset, data.train_rows).apply(data.dataset.features);
    std::vector<std::size_t> fit(data.train_rows.begin(), data.train_rows.end() - 24);
    std::vector<std::size_t> val(data.train_rows.end() - 24, data.train_rows.end());
    SearchSpace space{8, 16, 8, 0.0, 0.2, 1e-3, 1e-2};
    LstmParams base;
    base.epochs = 3;
    const auto one = tune_lstm(z, data.dataset.target, fit, val, data.dataset.spec, space, base, 3, 5, 1);
    const auto many = tune_lstm(z, data.dataset.target, fit, val, data.dataset.spec, space, base, 3, 5, 3);
    REQUIRE(one.trials.size() == 3);
    for (std::size_t t = 0; t < 3; ++t) {
        CHECK(one.trials[t].validation_rmse == many.trials[t].validation_rmse);
        CHECK(one.trials[t].validation_rmse >= one.trials[one.best].validation_rmse);
    }
    CHECK(one.best == many.best);
}

TEST_CASE("defaults match the tuned configuration") {
    const LstmParams p;
    CHECK(p.units == 192);
    CHECK(p.dropout == 0.1);
    CHECK(p.learning_rate == 0.001);
}

TEST_CASE("json round trips") {
    LstmParams p;
    p.units = 24;
    p.embedding_dims = {2, 3};
    CHECK(lstm_params_from_json(to_json(p)) == p);
    CHECK(error_kind([] { lstm_params_from_json({{"layers", 2}}); }) == "UnknownParameter");
    CHECK(error_kind([] { lstm_params_from_json({{"dropout", 1.0}}); }) == "InvalidParameter");
    CHECK(error_kind([] { lstm_params_from_json({{"units", 0}}); }) == "InvalidParameter");

    const auto w = init_weights(3, kTables, kDims, 4, 8);
    CHECK(lstm_weights_from_json(nlohmann::json::parse(to_json(w).dump())) == w);
    auto broken = to_json(w);
    broken["tensors"].erase("w_out");
    CHECK(error_kind([&] { lstm_weights_from_json(broken); }) == "MalformedArtifact");
}

TEST_CASE("inference is batch invariant") {
    Rng rng(61);
    const auto w = init_weights(3, kTables, kDims, 7, 3);
    const auto m = random_rows(rng, 40);
    const auto batch = predict_lstm(w, m);
    for (std::size_t r = 0; r < m.rows(); ++r) {
        CHECK(std::abs(batch[r] - predict_lstm(w, m.row(r))) <= 1e-9);
        CHECK(lstm_forward(w, m.row(r), false, 0.3, nullptr).prediction == predict_lstm(w, m.row(r)));
    }
}

TEST_CASE("embedding rows of absent codes get zero gradient") {
    Rng rng(62);
    const auto w = init_weights(3, kTables, kDims, 5, 4);
    Matrix m = random_rows(rng, 10);
    for (std::size_t r = 0; r < m.rows(); ++r) m(r, 3) = static_cast<double>(r % 2);
    std::vector<ForwardCache> caches;
    std::vector<double> y(10, 1.0);
    for (std::size_t r = 0; r < m.rows(); ++r) caches.push_back(lstm_forward(w, m.row(r), true, 0.2, &rng));
    const auto grad = lstm_backward(w, caches, y);
    for (std::size_t code : {2u, 3u}) {
        for (std::size_t d = 0; d < kDims[0]; ++d) CHECK(grad.embeddings[0].at(code, d) == 0.0);
    }
    double touched = 0;
    for (std::size_t d = 0; d < kDims[0]; ++d) touched += std::abs(grad.embeddings[0].at(0, d));
    CHECK(touched > 0);
}
