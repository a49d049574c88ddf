// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "wildfire/features.hpp"
#include "wildfire/util.hpp"

#include <json.hpp>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace wildfire::cart {

/// Relative tolerance used both to reject numerically-zero gains and to treat
/// near-equal gains as ties (resolved by lowest feature, then lowest threshold).
inline constexpr double kGainTolerance = 1e-12;

enum class CriterionKind { Variance, Newton };

struct SplitCriterion {
    CriterionKind kind = CriterionKind::Variance;
    double lambda = 0;  // Newton only: L2 penalty on leaf weights
    double gamma = 0;   // Newton only: per-split penalty

    static SplitCriterion variance() { return {}; }
    static SplitCriterion newton(double lambda, double gamma) { return {CriterionKind::Newton, lambda, gamma}; }
};

/// ½[G_L²/(H_L+λ) + G_R²/(H_R+λ) − (G_L+G_R)²/(H_L+H_R+λ)] − γ
double newton_gain(double grad_left, double hess_left, double grad_right, double hess_right, double lambda,
                   double gamma) noexcept;

/// −G/(H+λ)
double newton_leaf_weight(double grad, double hess, double lambda) noexcept;

/// Per-row training signal indexed by matrix row id. Variance trees read
/// `primary` as the target; Newton trees read gradients from `primary` and
/// hessians from `secondary`.
struct Targets {
    std::span<const double> primary;
    std::span<const double> secondary;
};

struct Node {
    std::int32_t feature = -1;  // -1 for leaves
    double threshold = 0;
    std::int32_t left = -1;
    std::int32_t right = -1;
    double value = 0;     // leaf prediction
    double gain = 0;      // split gain, internal nodes only
    double n_samples = 0;

    bool is_leaf() const noexcept { return feature < 0; }
    bool operator==(const Node&) const = default;
};

class RegressionTree {
public:
    RegressionTree() = default;
    RegressionTree(std::vector<Node> nodes, std::size_t n_features) : nodes_(std::move(nodes)), n_features_(n_features) {}

    /// Root-to-leaf descent, going left when value <= threshold. Throws
    /// WidthMismatch.
    double predict(std::span<const double> row) const;
    std::size_t leaf_index(std::span<const double> row) const;
    int depth() const;

    const std::vector<Node>& nodes() const noexcept { return nodes_; }
    std::vector<Node>& nodes() noexcept { return nodes_; }
    std::size_t n_features() const noexcept { return n_features_; }

    bool operator==(const RegressionTree&) const = default;

private:
    std::vector<Node> nodes_;
    std::size_t n_features_ = 0;
};

enum class FeatureSubsample { All, Sqrt, Log2, Fraction };

struct FeatureSampling {
    FeatureSubsample mode = FeatureSubsample::All;
    double fraction = 1.0;

    std::size_t count(std::size_t available) const noexcept;
};

struct TreeParams {
    std::optional<int> max_depth;  // unlimited when absent
    std::size_t min_samples_split = 2;
    std::size_t min_samples_leaf = 1;
    FeatureSampling features;
};

struct SplitCandidate {
    std::size_t feature = 0;
    double threshold = 0;
    double gain = 0;
};

/// Exhaustive search over midpoints between consecutive distinct values of
/// each feature in `feature_subset`. `rows` may repeat (bootstrap samples).
std::optional<SplitCandidate> best_split(const Matrix& x, const Targets& targets, std::span<const std::uint32_t> rows,
                                         std::span<const std::size_t> feature_subset, const SplitCriterion& criterion,
                                         std::size_t min_samples_leaf);

/// Row ids of a base row set sorted by each feature's value. Reused across
/// the trees of one ensemble so each tree only filters instead of sorting.
struct PresortedColumns {
    std::vector<std::vector<std::uint32_t>> order;  // per feature
};

PresortedColumns presort(const Matrix& x, std::span<const std::uint32_t> rows);

/// Greedy depth-first growth. `samples` is a multiset of row ids drawn from
/// the presorted base set (computed on the fly when `presorted` is null).
/// `allowed_features` restricts the candidate pool (all features when empty);
/// the per-node subsample is drawn from that pool using `rng`.
RegressionTree fit_tree(const Matrix& x, const Targets& targets, std::span<const std::uint32_t> samples,
                        const TreeParams& params, const SplitCriterion& criterion, Rng& rng,
                        std::span<const std::size_t> allowed_features = {},
                        const PresortedColumns* presorted = nullptr);

double predict_tree(const RegressionTree& tree, std::span<const double> row);

nlohmann::json to_json(const RegressionTree& tree);
RegressionTree tree_from_json(const nlohmann::json& doc);

}  // namespace wildfire::cart
