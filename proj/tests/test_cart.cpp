// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "support.hpp"
#include "wildfire/cart.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

using namespace wildfire;
using namespace wildfire::cart;
using test_support::error_kind;

namespace {

Matrix column(const std::vector<double>& values) {
    Matrix m(values.size(), 1);
    for (std::size_t r = 0; r < values.size(); ++r) m(r, 0) = values[r];
    return m;
}

std::vector<std::uint32_t> all_rows(std::size_t n) {
    std::vector<std::uint32_t> rows(n);
    std::iota(rows.begin(), rows.end(), 0u);
    return rows;
}

/// Brute-force best variance split over one feature: SSE reduction / n.
std::pair<double, double> brute_force_split(const std::vector<double>& x, const std::vector<double>& y,
                                            std::size_t min_leaf) {
    std::vector<double> values = x;
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    auto sse = [](const std::vector<double>& v) {
        if (v.empty()) return 0.0;
        const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
        double s = 0;
        for (double e : v) s += (e - mean) * (e - mean);
        return s;
    };
    const double total = sse(y);
    double best_gain = 0, best_threshold = 0;
    for (std::size_t i = 0; i + 1 < values.size(); ++i) {
        const double t = 0.5 * (values[i] + values[i + 1]);
        std::vector<double> l, r;
        for (std::size_t k = 0; k < x.size(); ++k) (x[k] <= t ? l : r).push_back(y[k]);
        if (l.size() < min_leaf || r.size() < min_leaf) continue;
        const double gain = (total - sse(l) - sse(r)) / static_cast<double>(x.size());
        if (gain > best_gain * (1 + 1e-9) + 1e-15) {
            best_gain = gain;
            best_threshold = t;
        }
    }
    return {best_gain, best_threshold};
}

}  // namespace

TEST_CASE("best split matches brute force on one feature") {
    Rng rng(21);
    std::uniform_real_distribution<double> unit(0, 1);
    std::uniform_int_distribution<int> size(5, 40);
    for (int trial = 0; trial < 200; ++trial) {
        const auto n = static_cast<std::size_t>(size(rng));
        std::vector<double> x(n), y(n);
        for (std::size_t i = 0; i < n; ++i) {
            x[i] = std::round(unit(rng) * 10) / 10;
            y[i] = unit(rng) * 5;
        }
        const std::size_t min_leaf = 1 + static_cast<std::size_t>(trial % 3);
        const auto [gain, threshold] = brute_force_split(x, y, min_leaf);
        const auto m = column(x);
        const std::vector<std::size_t> features{0};
        const auto rows = all_rows(n);
        const auto split = best_split(m, Targets{y, {}}, rows, features, SplitCriterion::variance(), min_leaf);
        if (gain <= 0) {
            CHECK_FALSE(split.has_value());
            continue;
        }
        REQUIRE(split.has_value());
        CHECK(split->gain == doctest::Approx(gain).epsilon(1e-9));
        CHECK(split->threshold == threshold);
    }
}

TEST_CASE("ties go to the lowest feature") {
    Matrix m(4, 3);
    const std::vector<double> col{1, 2, 3, 4};
    for (std::size_t r = 0; r < 4; ++r) {
        m(r, 0) = 0;
        m(r, 1) = col[r];
        m(r, 2) = col[r];
    }
    const std::vector<double> y{0, 0, 1, 1};
    const std::vector<std::size_t> features{2, 1, 0};
    const auto rows = all_rows(4);
    const auto split = best_split(m, Targets{y, {}}, rows, features, SplitCriterion::variance(), 1);
    REQUIRE(split.has_value());
    CHECK(split->feature == 1);
    CHECK(split->threshold == 2.5);
}

TEST_CASE("constant targets and features give a single leaf") {
    Rng rng(1);
    const auto m = column({1, 2, 3, 4, 5});
    const std::vector<double> y(5, 3.25);
    const auto rows = all_rows(5);
    const auto tree = fit_tree(m, Targets{y, {}}, rows, TreeParams{}, SplitCriterion::variance(), rng);
    REQUIRE(tree.nodes().size() == 1);
    CHECK(tree.nodes()[0].value == 3.25);

    const auto flat = column({2, 2, 2});
    const std::vector<double> y3{1, 2, 3};
    const auto single = fit_tree(flat, Targets{y3, {}}, all_rows(3), TreeParams{}, SplitCriterion::variance(), rng);
    CHECK(single.nodes().size() == 1);
    CHECK(single.nodes()[0].value == doctest::Approx(2.0));
}

TEST_CASE("tree structure respects its limits") {
    Rng data_rng(2);
    std::uniform_real_distribution<double> unit(0, 1);
    Matrix m(300, 4);
    std::vector<double> y(300);
    for (std::size_t r = 0; r < 300; ++r) {
        for (std::size_t c = 0; c < 4; ++c) m(r, c) = unit(data_rng);
        y[r] = std::sin(6 * m(r, 0)) + m(r, 1) + 0.1 * unit(data_rng);
    }
    const auto rows = all_rows(300);
    for (int depth : {1, 3, 6}) {
        for (std::size_t leaf : {1u, 5u, 20u}) {
            Rng rng(3);
            TreeParams params;
            params.max_depth = depth;
            params.min_samples_leaf = leaf;
            const auto tree = fit_tree(m, Targets{y, {}}, rows, params, SplitCriterion::variance(), rng);
            CHECK(tree.depth() <= depth);
            const double lo = *std::min_element(y.begin(), y.end());
            const double hi = *std::max_element(y.begin(), y.end());
            for (const auto& node : tree.nodes()) {
                CHECK(node.n_samples >= static_cast<double>(leaf));
                if (node.is_leaf()) {
                    CHECK(node.value >= lo);
                    CHECK(node.value <= hi);
                } else {
                    CHECK(node.gain > 0);
                    CHECK(tree.nodes()[node.left].n_samples + tree.nodes()[node.right].n_samples == node.n_samples);
                }
            }
        }
    }
}

TEST_CASE("unlimited depth interpolates distinct rows") {
    Rng rng(4);
    std::uniform_real_distribution<double> unit(0, 1);
    Matrix m(64, 2);
    std::vector<double> y(64);
    for (std::size_t r = 0; r < 64; ++r) {
        m(r, 0) = unit(rng);
        m(r, 1) = unit(rng);
        y[r] = unit(rng);
    }
    const auto tree = fit_tree(m, Targets{y, {}}, all_rows(64), TreeParams{}, SplitCriterion::variance(), rng);
    for (std::size_t r = 0; r < 64; ++r) CHECK(tree.predict(m.row(r)) == y[r]);
}

TEST_CASE("repeated rows weight the leaf mean") {
    Rng rng(5);
    const auto m = column({0, 1});
    const std::vector<double> y{0, 3};
    const std::vector<std::uint32_t> samples{0, 0, 1};
    TreeParams params;
    params.max_depth = 0;
    const auto tree = fit_tree(m, Targets{y, {}}, samples, params, SplitCriterion::variance(), rng);
    REQUIRE(tree.nodes().size() == 1);
    CHECK(tree.nodes()[0].value == doctest::Approx(1.0));
    CHECK(tree.nodes()[0].n_samples == 3);
}

TEST_CASE("descent goes left on equality") {
    RegressionTree tree({Node{0, 0.5, 1, 2, 0, 1, 2}, Node{-1, 0, -1, -1, -1.0, 0, 1}, Node{-1, 0, -1, -1, 1.0, 0, 1}},
                        1);
    const std::vector<double> at{0.5}, above{0.50001};
    CHECK(tree.predict(at) == -1.0);
    CHECK(tree.predict(above) == 1.0);
    const std::vector<double> wide{0.1, 0.2};
    CHECK(error_kind([&] { tree.predict(wide); }) == "WidthMismatch");
}

TEST_CASE("Newton leaves use the closed form") {
    Rng rng(6);
    const auto m = column({0, 1, 2, 3});
    const std::vector<double> g{-1, -2, 3, 4}, h{1, 1, 1, 1};
    TreeParams params;
    params.max_depth = 1;
    const auto tree = fit_tree(m, Targets{g, h}, all_rows(4), params, SplitCriterion::newton(1.0, 0.0), rng);
    REQUIRE(tree.nodes().size() == 3);
    CHECK(tree.nodes()[0].threshold == 1.5);
    CHECK(tree.nodes()[0].gain == doctest::Approx(newton_gain(-3, 2, 7, 2, 1.0, 0.0)));
    CHECK(tree.nodes()[1].value == doctest::Approx(newton_leaf_weight(-3, 2, 1.0)));
    CHECK(tree.nodes()[2].value == doctest::Approx(newton_leaf_weight(7, 2, 1.0)));

    const auto pruned = fit_tree(m, Targets{g, h}, all_rows(4), params, SplitCriterion::newton(1.0, 100.0), rng);
    CHECK(pruned.nodes().size() == 1);
}

TEST_CASE("feature sampling counts") {
    CHECK(FeatureSampling{FeatureSubsample::All}.count(10) == 10);
    CHECK(FeatureSampling{FeatureSubsample::Sqrt}.count(10) == 3);
    CHECK(FeatureSampling{FeatureSubsample::Log2}.count(10) == 3);
    CHECK(FeatureSampling{FeatureSubsample::Sqrt}.count(1) == 1);
    CHECK(FeatureSampling{FeatureSubsample::Fraction, 0.5}.count(10) == 5);
    CHECK(FeatureSampling{FeatureSubsample::Fraction, 0.01}.count(10) == 1);
}

TEST_CASE("presorted and unsorted growth agree") {
    Rng data_rng(8);
    std::uniform_real_distribution<double> unit(0, 1);
    Matrix m(100, 3);
    std::vector<double> y(100);
    for (std::size_t r = 0; r < 100; ++r) {
        for (std::size_t c = 0; c < 3; ++c) m(r, c) = std::round(unit(data_rng) * 20);
        y[r] = m(r, 0) * m(r, 1) + unit(data_rng);
    }
    const auto base = all_rows(100);
    const auto sorted = presort(m, base);
    std::vector<std::uint32_t> sample;
    for (int i = 0; i < 100; ++i) sample.push_back(static_cast<std::uint32_t>(data_rng() % 100));
    TreeParams params;
    params.max_depth = 5;
    Rng a(9), b(9);
    const auto t1 = fit_tree(m, Targets{y, {}}, sample, params, SplitCriterion::variance(), a);
    const auto t2 = fit_tree(m, Targets{y, {}}, sample, params, SplitCriterion::variance(), b, {}, &sorted);
    CHECK(t1 == t2);
}

TEST_CASE("tree json round trip") {
    Rng rng(10);
    std::uniform_real_distribution<double> unit(0, 1);
    Matrix m(50, 2);
    std::vector<double> y(50);
    for (std::size_t r = 0; r < 50; ++r) {
        m(r, 0) = unit(rng);
        m(r, 1) = unit(rng);
        y[r] = unit(rng) / 3;
    }
    const auto tree = fit_tree(m, Targets{y, {}}, all_rows(50), TreeParams{}, SplitCriterion::variance(), rng);
    const auto back = tree_from_json(nlohmann::json::parse(to_json(tree).dump()));
    CHECK(back == tree);
    CHECK(error_kind([] { tree_from_json(nlohmann::json::object()); }) == "MalformedArtifact");
}

TEST_CASE("leaf assignment is invariant to monotone feature transforms") {
    Rng rng(41);
    std::uniform_real_distribution<double> unit(0, 1);
    for (int trial = 0; trial < 20; ++trial) {
        Matrix m(80, 3), t(80, 3);
        std::vector<double> y(80);
        for (std::size_t r = 0; r < 80; ++r) {
            for (std::size_t c = 0; c < 3; ++c) {
                m(r, c) = unit(rng);
                t(r, c) = c == 0 ? std::exp(5 * m(r, c)) : c == 1 ? std::pow(m(r, c), 3) - 7 : m(r, c);
            }
            y[r] = std::sin(5 * m(r, 0)) + m(r, 1) * m(r, 2) + 0.1 * unit(rng);
        }
        TreeParams params;
        params.max_depth = 5;
        Rng a(1), b(1);
        const auto rows = all_rows(80);
        const auto tree_m = fit_tree(m, Targets{y, {}}, rows, params, SplitCriterion::variance(), a);
        const auto tree_t = fit_tree(t, Targets{y, {}}, rows, params, SplitCriterion::variance(), b);
        REQUIRE(tree_m.nodes().size() == tree_t.nodes().size());
        for (std::size_t r = 0; r < 80; ++r) CHECK(tree_m.leaf_index(m.row(r)) == tree_t.leaf_index(t.row(r)));
    }
}

TEST_CASE("every training row lands in one leaf and leaf counts add up") {
    Rng rng(42);
    std::uniform_real_distribution<double> unit(0, 1);
    Matrix m(200, 3);
    std::vector<double> y(200);
    for (std::size_t r = 0; r < 200; ++r) {
        for (std::size_t c = 0; c < 3; ++c) m(r, c) = unit(rng);
        y[r] = m(r, 0) > 0.5 ? 1 + unit(rng) : unit(rng);
    }
    TreeParams params;
    params.max_depth = 6;
    params.min_samples_leaf = 3;
    const auto tree = fit_tree(m, Targets{y, {}}, all_rows(200), params, SplitCriterion::variance(), rng);
    std::vector<double> per_leaf(tree.nodes().size(), 0.0);
    for (std::size_t r = 0; r < 200; ++r) {
        const auto leaf = tree.leaf_index(m.row(r));
        REQUIRE(tree.nodes()[leaf].is_leaf());
        per_leaf[leaf] += 1;
    }
    double total = 0;
    for (std::size_t i = 0; i < per_leaf.size(); ++i) {
        if (!tree.nodes()[i].is_leaf()) continue;
        CHECK(per_leaf[i] == tree.nodes()[i].n_samples);
        total += per_leaf[i];
    }
    CHECK(total == 200);
}

TEST_CASE("training error does not increase with depth") {
    Rng rng(43);
    std::uniform_real_distribution<double> unit(0, 1);
    Matrix m(150, 4);
    std::vector<double> y(150);
    for (std::size_t r = 0; r < 150; ++r) {
        for (std::size_t c = 0; c < 4; ++c) m(r, c) = unit(rng);
        y[r] = std::cos(4 * m(r, 0)) * m(r, 1) + unit(rng) * 0.2;
    }
    double last = 1e300;
    for (int depth = 0; depth <= 12; ++depth) {
        TreeParams params;
        params.max_depth = depth;
        Rng seeded(5);
        const auto tree = fit_tree(m, Targets{y, {}}, all_rows(150), params, SplitCriterion::variance(), seeded);
        double sse = 0;
        for (std::size_t r = 0; r < 150; ++r) sse += std::pow(tree.predict(m.row(r)) - y[r], 2);
        CHECK(sse <= last + 1e-12);
        last = sse;
    }
}
