#pragma once
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <queue>
#include <string>
#include <vector>

#include "json.hpp"

#include "cartsplit/dataset.hpp"
#include "cartsplit/marginals.hpp"
#include "cartsplit/rng.hpp"

namespace cartsplit {

// Axis-aligned box in feature space (no row bookkeeping).
struct Box {
    std::vector<double> lo, hi;
    static Box unit(int d) {
        Box b;
        b.lo.assign(d, 0.0);
        b.hi.assign(d, 1.0);
        return b;
    }
};

struct SplitEvaluation {
    int feature = -1;
    double threshold = 0.0;
    double decrease = 0.0;  // P_L * P_R * (meanL - meanR)^2
    int left_count = 0;
    int right_count = 0;
    double left_fraction = 0.0;
};

struct ScanCounters {
    std::size_t rows_visited = 0;
    std::size_t candidates = 0;
};

namespace detail {

// Neumaier-compensated accumulator.
struct Kahan {
    double sum = 0.0, c = 0.0;
    void add(double v) {
        const double t = sum + v;
        if (std::fabs(sum) >= std::fabs(v))
            c += (sum - t) + v;
        else
            c += (v - t) + sum;
        sum = t;
    }
    double get() const { return sum + c; }
};

} // namespace detail

// Within-node impurity: sample variance with divisor N for regression, Gini
// 4*p+*p- for binary labels. The two coincide on +-1 responses.
inline double node_impurity(const NodeRegion& node, const Dataset& data) {
    const int n = node.count();
    if (n < 1) throw DataError("node_impurity: empty node");
    if (data.kind == ResponseKind::Binary) {
        int pos = 0;
        for (int r : node.rows)
            if (data.response[r] > 0.0) ++pos;
        const double pp = static_cast<double>(pos) / n;
        return 4.0 * pp * (1.0 - pp);
    }
    detail::Kahan mean;
    for (int r : node.rows) mean.add(data.response[r]);
    const double mu = mean.get() / n;
    detail::Kahan ss;
    for (int r : node.rows) {
        const double dcent = data.response[r] - mu;
        ss.add(dcent * dcent);
    }
    return ss.get() / n;
}

namespace detail {

// Core scan over (value, response) pairs already gathered for one feature.
// Sorts once, then sweeps candidate thresholds at midpoints of consecutive
// distinct values, maintaining compensated prefix sums of the centered
// responses. Ties in the criterion keep the smallest threshold.
inline std::optional<SplitEvaluation> scan_pairs(std::vector<std::pair<double, double>>& pairs,
                                                 int feature, int min_leaf,
                                                 ScanCounters* counters) {
    const int n = static_cast<int>(pairs.size());
    if (n < 2) return std::nullopt;
    std::sort(pairs.begin(), pairs.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    if (pairs.front().first == pairs.back().first) return std::nullopt;

    Kahan total;
    for (const auto& p : pairs) total.add(p.second);
    const double mu = total.get() / n;

    SplitEvaluation best;
    bool found = false;
    Kahan prefix;
    double prefix_total = 0.0;
    {
        Kahan centered_total;
        for (const auto& p : pairs) centered_total.add(p.second - mu);
        prefix_total = centered_total.get();
    }
    if (counters) counters->rows_visited += static_cast<std::size_t>(n);
    for (int i = 0; i < n - 1; ++i) {
        prefix.add(pairs[i].second - mu);
        if (pairs[i].first == pairs[i + 1].first) continue;
        const int nl = i + 1;
        const int nr = n - nl;
        if (nl < min_leaf || nr < min_leaf) continue;
        if (counters) ++counters->candidates;
        const double pl = static_cast<double>(nl) / n;
        const double pr = 1.0 - pl;
        const double mean_l = prefix.get() / nl;
        const double mean_r = (prefix_total - prefix.get()) / nr;
        const double diff = mean_l - mean_r;
        const double decrease = pl * pr * diff * diff;
        if (!found || decrease > best.decrease) {
            found = true;
            best.feature = feature;
            best.threshold = 0.5 * (pairs[i].first + pairs[i + 1].first);
            best.decrease = decrease;
            best.left_count = nl;
            best.right_count = nr;
            best.left_fraction = pl;
        }
    }
    if (!found) return std::nullopt;
    return best;
}

} // namespace detail

// Exact best split for one feature in one pass over the sorted values.
inline std::optional<SplitEvaluation> best_split_single_pass(const NodeRegion& node,
                                                             const Dataset& data, int feature,
                                                             int min_leaf = 1,
                                                             ScanCounters* counters = nullptr) {
    std::vector<std::pair<double, double>> pairs;
    pairs.reserve(node.rows.size());
    const auto& col = data.columns[feature];
    for (int r : node.rows) pairs.emplace_back(col[r], data.response[r]);
    return detail::scan_pairs(pairs, feature, min_leaf, counters);
}

// ---------------------------------------------------------------------------
// Tree growth
// ---------------------------------------------------------------------------

struct GrowthConfig {
    int max_depth = -1;                    // -1: unlimited
    int min_node_size = 1;                 // minimum rows in each leaf
    double min_relative_decrease = 0.001;  // cp: weighted decrease / root impurity
    int max_leaves = -1;                   // -1: unlimited
    int mtry = 0;                          // 0: consider all features
    bool random_tie_break = false;         // forests break criterion ties at random
};

struct TreeNode {
    int feature = -1;  // -1 for leaves
    double threshold = 0.0;
    double decrease = 0.0;
    int left = -1, right = -1;
    double value = 0.0;  // node prediction (mean / majority vote)
    int count = 0;
    double weight = 0.0;  // N(t) / n
    int depth = 0;
};

struct Tree {
    std::vector<TreeNode> nodes;  // nodes[0] is the root
    int d = 0;
    int n_train = 0;
    ResponseKind kind = ResponseKind::Continuous;
    double root_impurity = 0.0;

    bool is_leaf(int id) const { return nodes[id].feature < 0; }

    int route(const double* x) const {
        int id = 0;
        while (!is_leaf(id))
            id = (x[nodes[id].feature] <= nodes[id].threshold) ? nodes[id].left : nodes[id].right;
        return id;
    }
    double predict(const double* x) const { return nodes[route(x)].value; }
    double predict(const std::vector<double>& x) const { return predict(x.data()); }

    std::vector<int> leaf_ids() const {
        std::vector<int> out;
        for (int i = 0; i < static_cast<int>(nodes.size()); ++i)
            if (is_leaf(i)) out.push_back(i);
        return out;
    }

    int leaf_count() const { return static_cast<int>(leaf_ids().size()); }

    int max_depth() const {
        int m = 0;
        for (const auto& nd : nodes) m = std::max(m, nd.depth);
        return m;
    }

    // Region of every node, derived from the recorded splits with the unit
    // cube at the root.
    std::vector<Box> node_boxes() const {
        std::vector<Box> boxes(nodes.size(), Box::unit(d));
        for (int i = 0; i < static_cast<int>(nodes.size()); ++i) {
            if (is_leaf(i)) continue;
            const auto& nd = nodes[i];
            boxes[nd.left] = boxes[i];
            boxes[nd.left].hi[nd.feature] = nd.threshold;
            boxes[nd.right] = boxes[i];
            boxes[nd.right].lo[nd.feature] = nd.threshold;
        }
        return boxes;
    }

    // Training rows landing in every node (rederived by routing).
    std::vector<std::vector<int>> node_rows(const Dataset& data) const {
        std::vector<std::vector<int>> rows(nodes.size());
        for (int r = 0; r < data.n(); ++r) {
            int id = 0;
            rows[0].push_back(r);
            while (!is_leaf(id)) {
                id = (data.x(r, nodes[id].feature) <= nodes[id].threshold) ? nodes[id].left
                                                                           : nodes[id].right;
                rows[id].push_back(r);
            }
        }
        return rows;
    }
};

namespace detail {

inline double leaf_value(const std::vector<int>& rows, const Dataset& data) {
    if (data.kind == ResponseKind::Binary) {
        int pos = 0;
        for (int r : rows)
            if (data.response[r] > 0.0) ++pos;
        return (2 * pos >= static_cast<int>(rows.size())) ? 1.0 : -1.0;
    }
    Kahan s;
    for (int r : rows) s.add(data.response[r]);
    return s.get() / static_cast<double>(rows.size());
}

inline double rows_impurity(const std::vector<int>& rows, const Dataset& data) {
    NodeRegion tmp;
    tmp.rows = rows;
    return node_impurity(tmp, data);
}

} // namespace detail

// Recursive CART growth. Within a node the best split is chosen across the
// (sub)set of features by largest decrease; feature ties go to the smallest
// index unless random_tie_break is set. Expansion is best-first by weighted
// decrease so a max_leaves cap keeps the most useful splits.
inline Tree grow_tree(const Dataset& data, const GrowthConfig& config, std::uint64_t seed,
                      const std::vector<int>* bootstrap_rows = nullptr) {
    data.validate();
    if (config.mtry < 0 || config.mtry > data.d()) throw SpecError("mtry must be in [1,d]");
    Tree tree;
    tree.d = data.d();
    tree.kind = data.kind;
    Rng rng(seed);

    std::vector<int> root_rows;
    if (bootstrap_rows) {
        root_rows = *bootstrap_rows;
        std::sort(root_rows.begin(), root_rows.end());
    } else {
        root_rows.resize(data.n());
        for (int i = 0; i < data.n(); ++i) root_rows[i] = i;
    }
    tree.n_train = static_cast<int>(root_rows.size());
    const int n = tree.n_train;

    struct Pending {
        int node_id;
        std::vector<int> rows;
        SplitEvaluation split;
        double priority;  // weighted decrease
    };
    struct PendingOrder {
        bool operator()(const Pending& a, const Pending& b) const {
            if (a.priority != b.priority) return a.priority < b.priority;
            return a.node_id > b.node_id;
        }
    };

    auto make_node = [&](const std::vector<int>& rows, int depth) {
        TreeNode nd;
        nd.count = static_cast<int>(rows.size());
        nd.weight = static_cast<double>(rows.size()) / n;
        nd.depth = depth;
        nd.value = detail::leaf_value(rows, data);
        tree.nodes.push_back(nd);
        return static_cast<int>(tree.nodes.size()) - 1;
    };

    tree.root_impurity = detail::rows_impurity(root_rows, data);
    const double gain_floor =
        (tree.root_impurity > 0.0) ? config.min_relative_decrease * tree.root_impurity : 0.0;

    // For bootstrap samples with repeated rows the scan sees duplicates;
    // gather multiplicities by expanding rows directly.
    auto evaluate = [&](const std::vector<int>& rows, int depth,
                        std::optional<SplitEvaluation>& out) {
        out.reset();
        if (config.max_depth >= 0 && depth >= config.max_depth) return;
        if (static_cast<int>(rows.size()) < 2 * config.min_node_size) return;
        std::vector<int> features;
        const int d = data.d();
        const int mtry = (config.mtry == 0) ? d : config.mtry;
        if (mtry >= d) {
            features.resize(d);
            for (int j = 0; j < d; ++j) features[j] = j;
        } else {
            features = rng.sample_without_replacement(d, mtry);
        }
        std::vector<std::pair<double, double>> pairs;
        std::optional<SplitEvaluation> best;
        std::vector<SplitEvaluation> ties;
        for (int j : features) {
            pairs.clear();
            const auto& col = data.columns[j];
            for (int r : rows) pairs.emplace_back(col[r], data.response[r]);
            auto cand = detail::scan_pairs(pairs, j, config.min_node_size, nullptr);
            if (!cand) continue;
            if (!best || cand->decrease > best->decrease) {
                best = cand;
                ties.clear();
                ties.push_back(*cand);
            } else if (config.random_tie_break && cand->decrease == best->decrease) {
                ties.push_back(*cand);
            }
        }
        if (!best) return;
        if (config.random_tie_break && ties.size() > 1)
            best = ties[rng.uniform_int(ties.size())];
        if (best->decrease <= 0.0) return;
        const double weighted = best->decrease * (static_cast<double>(rows.size()) / n);
        if (weighted < gain_floor) return;
        out = *best;
    };

    std::priority_queue<Pending, std::vector<Pending>, PendingOrder> queue;
    const int root_id = make_node(root_rows, 0);
    {
        std::optional<SplitEvaluation> sp;
        evaluate(root_rows, 0, sp);
        if (sp)
            queue.push({root_id, std::move(root_rows), *sp,
                        sp->decrease * tree.nodes[root_id].weight});
    }
    int leaves = 1;
    while (!queue.empty()) {
        if (config.max_leaves >= 0 && leaves >= config.max_leaves) break;
        Pending cur = queue.top();
        queue.pop();
        auto& nd = tree.nodes[cur.node_id];
        nd.feature = cur.split.feature;
        nd.threshold = cur.split.threshold;
        nd.decrease = cur.split.decrease;
        std::vector<int> left_rows, right_rows;
        left_rows.reserve(cur.split.left_count);
        right_rows.reserve(cur.split.right_count);
        const auto& col = data.columns[cur.split.feature];
        for (int r : cur.rows)
            (col[r] <= cur.split.threshold ? left_rows : right_rows).push_back(r);
        const int depth = nd.depth + 1;
        const int left_id = make_node(left_rows, depth);
        const int right_id = make_node(right_rows, depth);
        tree.nodes[cur.node_id].left = left_id;
        tree.nodes[cur.node_id].right = right_id;
        ++leaves;
        std::optional<SplitEvaluation> sp;
        evaluate(left_rows, depth, sp);
        if (sp)
            queue.push({left_id, std::move(left_rows), *sp,
                        sp->decrease * tree.nodes[left_id].weight});
        evaluate(right_rows, depth, sp);
        if (sp)
            queue.push({right_id, std::move(right_rows), *sp,
                        sp->decrease * tree.nodes[right_id].weight});
    }
    return tree;
}

// ---------------------------------------------------------------------------
// JSON serialization
// ---------------------------------------------------------------------------

inline nlohmann::json tree_to_json(const Tree& tree) {
    nlohmann::json j;
    j["kind"] = (tree.kind == ResponseKind::Binary) ? "classification" : "regression";
    j["d"] = tree.d;
    j["n_train"] = tree.n_train;
    j["root_impurity"] = tree.root_impurity;
    nlohmann::json nodes = nlohmann::json::array();
    for (const auto& nd : tree.nodes) {
        nlohmann::json e;
        e["feature"] = nd.feature;
        e["threshold"] = nd.threshold;
        e["decrease"] = nd.decrease;
        e["left"] = nd.left;
        e["right"] = nd.right;
        e["value"] = nd.value;
        e["count"] = nd.count;
        e["weight"] = nd.weight;
        e["depth"] = nd.depth;
        nodes.push_back(e);
    }
    j["nodes"] = nodes;
    return j;
}

inline Tree tree_from_json(const nlohmann::json& j) {
    Tree tree;
    tree.kind = (j.at("kind").get<std::string>() == "classification") ? ResponseKind::Binary
                                                                      : ResponseKind::Continuous;
    tree.d = j.at("d").get<int>();
    tree.n_train = j.at("n_train").get<int>();
    tree.root_impurity = j.at("root_impurity").get<double>();
    for (const auto& e : j.at("nodes")) {
        TreeNode nd;
        nd.feature = e.at("feature").get<int>();
        nd.threshold = e.at("threshold").get<double>();
        nd.decrease = e.at("decrease").get<double>();
        nd.left = e.at("left").get<int>();
        nd.right = e.at("right").get<int>();
        nd.value = e.at("value").get<double>();
        nd.count = e.at("count").get<int>();
        nd.weight = e.at("weight").get<double>();
        nd.depth = e.at("depth").get<int>();
        tree.nodes.push_back(nd);
    }
    return tree;
}

} // namespace cartsplit
