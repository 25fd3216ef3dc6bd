#pragma once
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <string>
#include <vector>

#include "cartsplit/dataset.hpp"
#include "cartsplit/marginals.hpp"
#include "cartsplit/rng.hpp"
#include "cartsplit/tree.hpp"

namespace cartsplit {

// Per-tree global MDI: sum of weight * decrease over internal nodes splitting
// on each feature.
inline std::vector<double> mdi_tree(const Tree& tree) {
    std::vector<double> mdi(tree.d, 0.0);
    for (const auto& nd : tree.nodes)
        if (nd.feature >= 0) mdi[nd.feature] += nd.weight * nd.decrease;
    return mdi;
}

inline std::vector<double> mdi_global(const std::vector<Tree>& trees) {
    if (trees.empty()) throw SpecError("mdi_global: need at least one tree");
    std::vector<double> mdi(trees[0].d, 0.0);
    for (const auto& t : trees) {
        auto m = mdi_tree(t);
        for (size_t j = 0; j < mdi.size(); ++j) mdi[j] += m[j];
    }
    for (auto& v : mdi) v /= static_cast<double>(trees.size());
    return mdi;
}

inline std::vector<int> tree_parents(const Tree& tree) {
    std::vector<int> parent(tree.nodes.size(), -1);
    for (int i = 0; i < static_cast<int>(tree.nodes.size()); ++i) {
        if (tree.is_leaf(i)) continue;
        parent[tree.nodes[i].left] = i;
        parent[tree.nodes[i].right] = i;
    }
    return parent;
}

// Ancestors of a node, root first (the node itself excluded).
inline std::vector<int> ancestor_chain(const Tree& tree, int node_id) {
    auto parent = tree_parents(tree);
    std::vector<int> chain;
    for (int p = parent[node_id]; p >= 0; p = parent[p]) chain.push_back(p);
    std::reverse(chain.begin(), chain.end());
    return chain;
}

// Selection frequencies K_j(t): how often each feature was split on among the
// ancestors of a leaf.
inline std::vector<int> selection_counts(const Tree& tree, int leaf_id) {
    std::vector<int> k(tree.d, 0);
    for (int a : ancestor_chain(tree, leaf_id)) ++k[tree.nodes[a].feature];
    return k;
}

enum class ConditionalWeightScheme { Unit, W1Plugin };

// Conditional MDI along the root-to-leaf path. The w1 plug-in weight is
// 1 / (Gbar^2 + decrease) with Gbar estimated by a k-nearest-responses fit of
// E[Y | X_j = threshold, X in node] minus the node mean; it is an estimate,
// and reports carry that flag.
inline std::vector<double> mdi_conditional(const Tree& tree, const Dataset& data, int leaf_id,
                                           ConditionalWeightScheme scheme) {
    if (leaf_id < 0 || leaf_id >= static_cast<int>(tree.nodes.size()) || !tree.is_leaf(leaf_id))
        throw SpecError("mdi_conditional: unknown leaf id");
    std::vector<double> out(tree.d, 0.0);
    const auto chain = ancestor_chain(tree, leaf_id);
    std::vector<std::vector<int>> rows;
    if (scheme == ConditionalWeightScheme::W1Plugin) rows = tree.node_rows(data);
    for (int a : chain) {
        const auto& nd = tree.nodes[a];
        double w = 1.0;
        if (scheme == ConditionalWeightScheme::W1Plugin) {
            const auto& node_rows = rows[a];
            const int n = static_cast<int>(node_rows.size());
            detail::Kahan mean;
            for (int r : node_rows) mean.add(data.response[r]);
            const double mu = mean.get() / n;
            const int k = std::min(n, std::max(5, static_cast<int>(std::lround(std::sqrt(n)))));
            std::vector<std::pair<double, int>> by_dist;
            by_dist.reserve(n);
            for (int r : node_rows)
                by_dist.emplace_back(std::fabs(data.x(r, nd.feature) - nd.threshold), r);
            std::nth_element(by_dist.begin(), by_dist.begin() + k - 1, by_dist.end());
            double local = 0.0;
            for (int i = 0; i < k; ++i) local += data.response[by_dist[i].second];
            local /= k;
            const double gbar = local - mu;
            w = 1.0 / (gbar * gbar + nd.decrease);
        }
        out[nd.feature] += w * nd.decrease;
    }
    return out;
}

// Edge-cut preference statistic of an empirical split.
inline double edge_cut_preference(const SplitEvaluation& split, int node_count) {
    if (node_count < 2) throw SpecError("edge_cut_preference: need N >= 2");
    const double pl = split.left_fraction;
    const double pr = 1.0 - pl;
    return (static_cast<double>(node_count) / (node_count - 1)) * std::fabs(pl - pr) / 2.0;
}

// Population analog at the optimal split: |P_L - P_R| / 2 = sqrt(1-lambda)/2.
inline double edge_cut_preference_population(double lambda) {
    return 0.5 * std::sqrt(std::max(0.0, 1.0 - lambda));
}

// ---------------------------------------------------------------------------
// Tree-walk partial dependence
// ---------------------------------------------------------------------------

// Evaluates (1/N) sum_i fhat(x_j, X_{i,-j}) over the rows of a base node,
// where fhat is the full tree predictor, by a counting walk from the root.
// One preprocessing pass stores, per node, how many base rows satisfy the
// non-j split constraints on its path; evaluations then never touch the data.
// Splits on j route by the query point, all other splits route both ways.
// With a single-row base node this is the individual conditional expectation
// of that observation.
class PartialDependenceWalker {
public:
    PartialDependenceWalker(const Tree& tree, const Dataset& data, int feature, int base_node = 0)
        : tree_(&tree), feature_(feature), base_(base_node) {
        counts_.assign(tree.nodes.size(), 0);
        auto rows = tree.node_rows(data);
        base_count_ = static_cast<double>(rows[base_node].size());
        descend(0, rows[base_node], data);
    }

    double operator()(double xj) const {
        if (base_count_ == 0) return tree_->nodes[base_].value;
        return walk(0, xj) / base_count_;
    }

private:
    void descend(int id, const std::vector<int>& rows, const Dataset& data) {
        counts_[id] = static_cast<int>(rows.size());
        if (tree_->is_leaf(id)) return;
        const auto& nd = tree_->nodes[id];
        if (nd.feature == feature_) {
            descend(nd.left, rows, data);
            descend(nd.right, rows, data);
            return;
        }
        std::vector<int> left, right;
        for (int r : rows)
            (data.x(r, nd.feature) <= nd.threshold ? left : right).push_back(r);
        descend(nd.left, left, data);
        descend(nd.right, right, data);
    }

    double walk(int id, double xj) const {
        const auto& nd = tree_->nodes[id];
        if (tree_->is_leaf(id)) return nd.value * counts_[id];
        if (nd.feature == feature_)
            return walk(xj <= nd.threshold ? nd.left : nd.right, xj);
        return walk(nd.left, xj) + walk(nd.right, xj);
    }

    const Tree* tree_;
    int feature_;
    int base_;
    double base_count_ = 0;
    std::vector<int> counts_;
};

// Reference implementation: full-tree prediction per row with coordinate j
// overridden.
inline double partial_dependence_naive(const Tree& tree, const Dataset& data, int feature,
                                       double xj, int base_node = 0) {
    auto rows = tree.node_rows(data);
    const auto& base_rows = rows[base_node];
    if (base_rows.empty()) return tree.nodes[base_node].value;
    std::vector<double> x(tree.d);
    double sum = 0.0;
    for (int r : base_rows) {
        for (int j = 0; j < tree.d; ++j) x[j] = data.x(r, j);
        x[feature] = xj;
        sum += tree.predict(x);
    }
    return sum / static_cast<double>(base_rows.size());
}

// ---------------------------------------------------------------------------
// Terminal subnode lengths and the barplot pipeline
// ---------------------------------------------------------------------------

inline double median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const size_t n = v.size();
    return (n % 2 == 1) ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Per feature, the median over leaves of the terminal subnode length b_j - a_j.
inline std::vector<double> median_subnode_lengths(const Tree& tree) {
    auto boxes = tree.node_boxes();
    std::vector<std::vector<double>> lengths(tree.d);
    for (int id : tree.leaf_ids())
        for (int j = 0; j < tree.d; ++j)
            lengths[j].push_back(boxes[id].hi[j] - boxes[id].lo[j]);
    std::vector<double> out(tree.d);
    for (int j = 0; j < tree.d; ++j) out[j] = median_of(lengths[j]);
    return out;
}

struct Figure1Stats {
    std::vector<double> mdi;     // bootstrap-averaged global MDI
    std::vector<double> sublen;  // bootstrap-averaged median subnode length
};

struct Figure1Row {
    int feature;
    std::string name;
    double mdi_scaled;
    double sublen_scaled;
};

// B bootstrap trees; averaged global MDI and median terminal subnode lengths.
inline Figure1Stats figure1_stats(const Dataset& data, int bootstrap_trees,
                                  const GrowthConfig& config, std::uint64_t seed) {
    if (bootstrap_trees < 1) throw SpecError("figure1: need B >= 1");
    Figure1Stats st;
    st.mdi.assign(data.d(), 0.0);
    st.sublen.assign(data.d(), 0.0);
    const int n = data.n();
    for (int b = 0; b < bootstrap_trees; ++b) {
        Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(b));
        std::vector<int> rows(n);
        for (int i = 0; i < n; ++i) rows[i] = static_cast<int>(rng.uniform_int(n));
        Tree tree = grow_tree(data, config, rng.next_u64(), &rows);
        auto m = mdi_tree(tree);
        auto l = median_subnode_lengths(tree);
        for (int j = 0; j < data.d(); ++j) {
            st.mdi[j] += m[j];
            st.sublen[j] += l[j];
        }
    }
    for (int j = 0; j < data.d(); ++j) {
        st.mdi[j] /= bootstrap_trees;
        st.sublen[j] /= bootstrap_trees;
    }
    return st;
}

// Both statistics rescaled so the largest is 100, ordered by increasing MDI.
inline std::vector<Figure1Row> figure1_report(const Figure1Stats& st,
                                              const std::vector<std::string>& names) {
    const int d = static_cast<int>(st.mdi.size());
    double mdi_max = 0.0, len_max = 0.0;
    for (int j = 0; j < d; ++j) {
        mdi_max = std::max(mdi_max, st.mdi[j]);
        len_max = std::max(len_max, st.sublen[j]);
    }
    std::vector<int> order(d);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return st.mdi[a] < st.mdi[b]; });
    std::vector<Figure1Row> rows;
    for (int j : order) {
        Figure1Row r;
        r.feature = j;
        r.name = (j < static_cast<int>(names.size())) ? names[j] : ("x" + std::to_string(j + 1));
        r.mdi_scaled = (mdi_max > 0.0) ? 100.0 * st.mdi[j] / mdi_max : 0.0;
        r.sublen_scaled = (len_max > 0.0) ? 100.0 * st.sublen[j] / len_max : 0.0;
        rows.push_back(r);
    }
    return rows;
}

// Tidy (feature, statistic, value) rows for external plotting.
inline std::string importance_tidy_csv(const Figure1Stats& st,
                                       const std::vector<std::string>& names) {
    std::string out = "feature,statistic,value\n";
    auto row = [&](int j, const char* stat, double v) {
        const std::string name =
            (j < static_cast<int>(names.size())) ? names[j] : ("x" + std::to_string(j + 1));
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        out += name;
        out += ",";
        out += stat;
        out += ",";
        out += buf;
        out += "\n";
    };
    for (size_t j = 0; j < st.mdi.size(); ++j) {
        row(static_cast<int>(j), "mdi", st.mdi[j]);
        row(static_cast<int>(j), "median_subnode_length", st.sublen[j]);
    }
    return out;
}

// Spearman rank correlation with average ranks on ties.
inline double spearman(const std::vector<double>& x, const std::vector<double>& y) {
    const int n = static_cast<int>(x.size());
    auto ranks = [&](const std::vector<double>& v) {
        std::vector<int> order(n);
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](int a, int b) { return v[a] < v[b]; });
        std::vector<double> r(n);
        int i = 0;
        while (i < n) {
            int k = i;
            while (k + 1 < n && v[order[k + 1]] == v[order[i]]) ++k;
            const double avg = 0.5 * (i + k) + 1.0;
            for (int t = i; t <= k; ++t) r[order[t]] = avg;
            i = k + 1;
        }
        return r;
    };
    auto rx = ranks(x), ry = ranks(y);
    double mx = 0.0, my = 0.0;
    for (int i = 0; i < n; ++i) {
        mx += rx[i];
        my += ry[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (int i = 0; i < n; ++i) {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0) return 0.0;
    return sxy / std::sqrt(sxx * syy);
}

} // namespace cartsplit
