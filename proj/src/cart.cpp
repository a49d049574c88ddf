// SPDX-License-Identifier: Apache-2.0
#include "wildfire/cart.hpp"

#include "wildfire/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace wildfire::cart {

double newton_gain(double grad_left, double hess_left, double grad_right, double hess_right, double lambda,
                   double gamma) noexcept {
    const double grad = grad_left + grad_right;
    const double hess = hess_left + hess_right;
    return 0.5 * (grad_left * grad_left / (hess_left + lambda) + grad_right * grad_right / (hess_right + lambda) -
                  grad * grad / (hess + lambda)) -
           gamma;
}

double newton_leaf_weight(double grad, double hess, double lambda) noexcept { return -grad / (hess + lambda); }

std::size_t FeatureSampling::count(std::size_t available) const noexcept {
    if (available == 0) return 0;
    const double d = static_cast<double>(available);
    double n = d;
    switch (mode) {
        case FeatureSubsample::All: n = d; break;
        case FeatureSubsample::Sqrt: n = std::floor(std::sqrt(d)); break;
        case FeatureSubsample::Log2: n = std::floor(std::log2(d)); break;
        case FeatureSubsample::Fraction: n = std::floor(fraction * d); break;
    }
    return std::clamp<std::size_t>(static_cast<std::size_t>(std::max(n, 1.0)), 1, available);
}

std::size_t RegressionTree::leaf_index(std::span<const double> row) const {
    if (row.size() != n_features_) {
        fail_data("WidthMismatch", "row has " + std::to_string(row.size()) + " values, tree expects " +
                                       std::to_string(n_features_));
    }
    if (nodes_.empty()) fail_internal("EmptyTree", "tree has no nodes");
    std::size_t at = 0;
    while (!nodes_[at].is_leaf()) {
        const auto& n = nodes_[at];
        at = static_cast<std::size_t>(row[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right);
    }
    return at;
}

double RegressionTree::predict(std::span<const double> row) const { return nodes_[leaf_index(row)].value; }

int RegressionTree::depth() const {
    if (nodes_.empty()) return 0;
    std::vector<int> depth(nodes_.size(), 0);
    int deepest = 0;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        deepest = std::max(deepest, depth[i]);
        if (!nodes_[i].is_leaf()) {
            depth[static_cast<std::size_t>(nodes_[i].left)] = depth[i] + 1;
            depth[static_cast<std::size_t>(nodes_[i].right)] = depth[i] + 1;
        }
    }
    return deepest;
}

double predict_tree(const RegressionTree& tree, std::span<const double> row) { return tree.predict(row); }

namespace {

struct NodeTotals {
    double primary = 0;    // Σy or ΣG
    double secondary = 0;  // Σh (Newton)
    double mean = 0;       // ȳ (variance)
    double variance = 0;   // mean squared deviation (variance)
    std::size_t count = 0;
    bool constant = false;
};

NodeTotals node_totals(const Targets& t, std::span<const std::uint32_t> rows, const SplitCriterion& criterion) {
    NodeTotals tot;
    tot.count = rows.size();
    if (rows.empty()) return tot;
    if (criterion.kind == CriterionKind::Variance) {
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (auto r : rows) {
            const double y = t.primary[r];
            tot.primary += y;
            lo = std::min(lo, y);
            hi = std::max(hi, y);
        }
        tot.mean = tot.primary / static_cast<double>(tot.count);
        double ss = 0;
        for (auto r : rows) ss += (t.primary[r] - tot.mean) * (t.primary[r] - tot.mean);
        tot.variance = ss / static_cast<double>(tot.count);
        tot.constant = lo == hi;
    } else {
        for (auto r : rows) {
            tot.primary += t.primary[r];
            tot.secondary += t.secondary[r];
        }
    }
    return tot;
}

double leaf_value(const NodeTotals& tot, const SplitCriterion& criterion) {
    if (criterion.kind == CriterionKind::Variance) return tot.mean;
    return newton_leaf_weight(tot.primary, tot.secondary, criterion.lambda);
}

bool better(double gain, const std::optional<SplitCandidate>& best) {
    return !best || gain > best->gain + kGainTolerance * std::fabs(best->gain);
}

double midpoint(double a, double b) {
    const double mid = a + (b - a) / 2;
    return mid < b ? mid : a;
}

// Scans one feature's positions (sorted by value) and folds the best
// admissible split into `best`.
void scan_feature(const Matrix& x, const Targets& t, std::span<const std::uint32_t> sorted, std::size_t feature,
                  const NodeTotals& tot, const SplitCriterion& criterion, std::size_t min_leaf,
                  std::optional<SplitCandidate>& best) {
    const std::size_t n = sorted.size();
    if (n < 2 || n < 2 * min_leaf) return;
    const double inv_n = 1.0 / static_cast<double>(n);
    double acc_primary = 0, acc_secondary = 0;

    for (std::size_t i = 0; i + 1 < n; ++i) {
        const std::uint32_t r = sorted[i];
        if (criterion.kind == CriterionKind::Variance) {
            acc_primary += t.primary[r] - tot.mean;
        } else {
            acc_primary += t.primary[r];
            acc_secondary += t.secondary[r];
        }
        const std::size_t n_left = i + 1;
        const std::size_t n_right = n - n_left;
        if (n_left < min_leaf) continue;
        if (n_right < min_leaf) break;
        const double v = x(r, feature);
        const double v_next = x(sorted[i + 1], feature);
        if (!(v < v_next)) continue;

        double gain = 0;
        double scale = 0;
        if (criterion.kind == CriterionKind::Variance) {
            gain = acc_primary * acc_primary *
                   (1.0 / static_cast<double>(n_left) + 1.0 / static_cast<double>(n_right)) * inv_n;
            scale = tot.variance;
        } else {
            const double gl = acc_primary, hl = acc_secondary;
            const double gr = tot.primary - gl, hr = tot.secondary - hl;
            if (hl + criterion.lambda <= 0 || hr + criterion.lambda <= 0) continue;
            gain = newton_gain(gl, hl, gr, hr, criterion.lambda, criterion.gamma);
            scale = 0.5 * (gl * gl / (hl + criterion.lambda) + gr * gr / (hr + criterion.lambda) +
                           tot.primary * tot.primary / (tot.secondary + criterion.lambda));
            if (gain + criterion.gamma <= kGainTolerance * scale) continue;
        }
        if (!(gain > 0) || gain <= kGainTolerance * scale) continue;
        if (better(gain, best)) best = SplitCandidate{feature, midpoint(v, v_next), gain};
    }
}

std::vector<std::uint32_t> sorted_by_feature(const Matrix& x, std::span<const std::uint32_t> rows, std::size_t feature) {
    std::vector<std::uint32_t> out(rows.begin(), rows.end());
    std::stable_sort(out.begin(), out.end(), [&](std::uint32_t a, std::uint32_t b) {
        const double va = x(a, feature), vb = x(b, feature);
        return va < vb || (va == vb && a < b);
    });
    return out;
}

}  // namespace

std::optional<SplitCandidate> best_split(const Matrix& x, const Targets& targets, std::span<const std::uint32_t> rows,
                                         std::span<const std::size_t> feature_subset, const SplitCriterion& criterion,
                                         std::size_t min_samples_leaf) {
    std::optional<SplitCandidate> best;
    if (rows.size() < 2 || feature_subset.empty()) return best;
    const NodeTotals tot = node_totals(targets, rows, criterion);
    if (criterion.kind == CriterionKind::Variance && tot.constant) return best;
    std::vector<std::size_t> features(feature_subset.begin(), feature_subset.end());
    std::sort(features.begin(), features.end());
    for (auto f : features) {
        const auto sorted = sorted_by_feature(x, rows, f);
        scan_feature(x, targets, sorted, f, tot, criterion, std::max<std::size_t>(1, min_samples_leaf), best);
    }
    return best;
}

PresortedColumns presort(const Matrix& x, std::span<const std::uint32_t> rows) {
    std::vector<std::uint32_t> unique(rows.begin(), rows.end());
    std::sort(unique.begin(), unique.end());
    unique.erase(std::unique(unique.begin(), unique.end()), unique.end());
    PresortedColumns out;
    out.order.reserve(x.cols());
    for (std::size_t f = 0; f < x.cols(); ++f) out.order.push_back(sorted_by_feature(x, unique, f));
    return out;
}

RegressionTree fit_tree(const Matrix& x, const Targets& targets, std::span<const std::uint32_t> samples,
                        const TreeParams& params, const SplitCriterion& criterion, Rng& rng,
                        std::span<const std::size_t> allowed_features, const PresortedColumns* presorted) {
    if (samples.empty()) fail_data("EmptyDataset", "cannot fit a tree on zero rows");

    std::vector<std::size_t> pool(allowed_features.begin(), allowed_features.end());
    if (pool.empty()) {
        pool.resize(x.cols());
        std::iota(pool.begin(), pool.end(), std::size_t{0});
    }
    std::sort(pool.begin(), pool.end());

    PresortedColumns local;
    if (!presorted) {
        local = presort(x, samples);
        presorted = &local;
    }

    // Expand the multiset into per-feature position lists in value order.
    std::vector<std::uint32_t> multiplicity(x.rows(), 0);
    for (auto r : samples) ++multiplicity[r];
    std::vector<std::vector<std::uint32_t>> lists(pool.size());
    for (std::size_t k = 0; k < pool.size(); ++k) {
        auto& list = lists[k];
        list.reserve(samples.size());
        for (auto r : presorted->order[pool[k]]) {
            for (std::uint32_t c = 0; c < multiplicity[r]; ++c) list.push_back(r);
        }
        if (list.size() != samples.size()) fail_internal("PresortMismatch", "samples outside the presorted base set");
    }

    const std::size_t min_leaf = std::max<std::size_t>(1, params.min_samples_leaf);
    const std::size_t n_candidates = params.features.count(pool.size());
    std::vector<std::size_t> candidate_slots(pool.size());
    std::vector<std::uint8_t> goes_left(x.rows(), 0);
    std::vector<std::uint32_t> scratch(samples.size());

    std::vector<Node> nodes(1);
    struct Task {
        std::size_t node, begin, end;
        int depth;
    };
    std::vector<Task> stack{{0, 0, samples.size(), 0}};

    while (!stack.empty()) {
        const Task task = stack.back();
        stack.pop_back();
        const std::span<const std::uint32_t> node_rows(lists[0].data() + task.begin, task.end - task.begin);
        const NodeTotals tot = node_totals(targets, node_rows, criterion);
        nodes[task.node].n_samples = static_cast<double>(tot.count);
        nodes[task.node].value = leaf_value(tot, criterion);

        const bool depth_reached = params.max_depth && task.depth >= *params.max_depth;
        if (depth_reached || tot.count < params.min_samples_split || tot.count < 2 ||
            (criterion.kind == CriterionKind::Variance && tot.constant)) {
            continue;
        }

        // Draw the node's candidate features, then scan them in index order.
        std::iota(candidate_slots.begin(), candidate_slots.end(), std::size_t{0});
        if (n_candidates < pool.size()) {
            for (std::size_t i = 0; i < n_candidates; ++i) {
                std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
                std::swap(candidate_slots[i], candidate_slots[pick(rng)]);
            }
            candidate_slots.resize(n_candidates);
            std::sort(candidate_slots.begin(), candidate_slots.end());
        }

        std::optional<SplitCandidate> best;
        std::size_t best_slot = 0;
        for (auto slot : candidate_slots) {
            const auto before = best;
            const std::span<const std::uint32_t> sorted(lists[slot].data() + task.begin, task.end - task.begin);
            scan_feature(x, targets, sorted, pool[slot], tot, criterion, min_leaf, best);
            if (best && (!before || best->feature != before->feature || best->threshold != before->threshold)) {
                best_slot = slot;
            }
        }
        candidate_slots.resize(pool.size());
        if (!best) continue;

        std::size_t n_left = 0;
        for (std::size_t i = task.begin; i < task.end; ++i) {
            const auto r = lists[best_slot][i];
            goes_left[r] = x(r, best->feature) <= best->threshold;
            n_left += goes_left[r];
        }
        for (auto& list : lists) {
            auto* out_left = scratch.data();
            auto* out_right = scratch.data() + n_left;
            for (std::size_t i = task.begin; i < task.end; ++i) {
                const auto r = list[i];
                if (goes_left[r]) *out_left++ = r;
                else *out_right++ = r;
            }
            std::copy(scratch.data(), scratch.data() + (task.end - task.begin), list.data() + task.begin);
        }

        const auto left_id = nodes.size();
        auto& node = nodes[task.node];
        node.feature = static_cast<std::int32_t>(best->feature);
        node.threshold = best->threshold;
        node.gain = best->gain;
        node.left = static_cast<std::int32_t>(left_id);
        node.right = static_cast<std::int32_t>(left_id + 1);
        nodes.emplace_back();
        nodes.emplace_back();
        stack.push_back({left_id + 1, task.begin + n_left, task.end, task.depth + 1});
        stack.push_back({left_id, task.begin, task.begin + n_left, task.depth + 1});
    }
    return RegressionTree(std::move(nodes), x.cols());
}

nlohmann::json to_json(const RegressionTree& tree) {
    nlohmann::json nodes = nlohmann::json::array();
    for (const auto& n : tree.nodes()) {
        nodes.push_back({n.feature, n.threshold, n.left, n.right, n.value, n.gain, n.n_samples});
    }
    return {{"n_features", tree.n_features()}, {"nodes", std::move(nodes)}};
}

RegressionTree tree_from_json(const nlohmann::json& doc) try {
    std::vector<Node> nodes;
    for (const auto& n : doc.at("nodes")) {
        if (!n.is_array() || n.size() != 7) fail_data("MalformedArtifact", "tree node must have 7 fields");
        Node node;
        node.feature = n[0].get<std::int32_t>();
        node.threshold = n[1].get<double>();
        node.left = n[2].get<std::int32_t>();
        node.right = n[3].get<std::int32_t>();
        node.value = n[4].get<double>();
        node.gain = n[5].get<double>();
        node.n_samples = n[6].get<double>();
        nodes.push_back(node);
    }
    const auto size = static_cast<std::int32_t>(nodes.size());
    for (const auto& n : nodes) {
        if (!n.is_leaf() && (n.left <= 0 || n.right <= 0 || n.left >= size || n.right >= size)) {
            fail_data("MalformedArtifact", "tree child index out of range");
        }
    }
    if (nodes.empty()) fail_data("MalformedArtifact", "tree has no nodes");
    return RegressionTree(std::move(nodes), doc.at("n_features").get<std::size_t>());
} catch (const nlohmann::json::exception& e) {
    fail_data("MalformedArtifact", e.what());
}

}  // namespace wildfire::cart
