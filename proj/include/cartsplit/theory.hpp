#pragma once
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "cartsplit/split_analysis.hpp"
#include "cartsplit/tree.hpp"

namespace cartsplit {

struct VerificationConfig {
    double eta = 1.0;       // independence constant; 1 for product measures
    int depth = 4;          // population tree depth K
    int grid_points = 512;  // split-search grid resolution
    int replications = 500;
    double delta_target = 0.01;
    std::uint64_t seed = 1;
};

enum class FeaturePolicy { Greedy, RoundRobin };

// ---------------------------------------------------------------------------
// Trees grown with population-optimal splits
// ---------------------------------------------------------------------------

struct PopSplitRecord {
    int feature = -1;
    double s_star = 0.0;
    double delta = 0.0;
    double gbar = 0.0;
    double prob_left = 0.0;
    double lambda = 0.0;
    double density = 0.0;
    double fbar_prime = 0.0;
    double median = 0.0;  // conditional median of the split coordinate
};

struct PopNode {
    Box box;
    int parent = -1;
    int left = -1, right = -1;
    int depth = 0;
    bool is_left_child = false;
    bool flat = false;  // no direction offered a positive decrease
    PopSplitRecord split;
};

struct PopulationTree {
    std::vector<PopNode> nodes;

    bool is_leaf(int id) const { return nodes[id].left < 0; }
    std::vector<int> leaf_ids() const {
        std::vector<int> out;
        for (int i = 0; i < static_cast<int>(nodes.size()); ++i)
            if (is_leaf(i)) out.push_back(i);
        return out;
    }
    std::vector<int> ancestors(int id) const {  // root first
        std::vector<int> out;
        for (int p = nodes[id].parent; p >= 0; p = nodes[p].parent) out.push_back(p);
        std::reverse(out.begin(), out.end());
        return out;
    }
};

// Grows a depth-K tree using population-optimal splits. Greedy picks the
// feature with the largest decrease (ties to the smallest index); round-robin
// cycles depth mod d and marks the branch flat when its turn's direction is
// degenerate.
inline PopulationTree grow_population_tree(const PopulationModel& model,
                                           const VerificationConfig& config,
                                           FeaturePolicy policy) {
    PopulationTree tree;
    tree.nodes.push_back(PopNode{Box::unit(model.dim()), -1, -1, -1, 0, false, false, {}});
    std::vector<int> frontier{0};
    for (int level = 0; level < config.depth; ++level) {
        std::vector<int> next;
        for (int id : frontier) {
            const Box node_box = tree.nodes[id].box;
            SplitAnalysisResult best;
            Slice* best_slice = nullptr;
            std::vector<std::unique_ptr<Slice>> keep;
            if (policy == FeaturePolicy::Greedy) {
                for (int j = 0; j < model.dim(); ++j) {
                    if (!model.depends_on(j)) continue;
                    keep.push_back(std::make_unique<Slice>(model, j, node_box));
                    auto a = optimal_split(*keep.back(), config.grid_points);
                    if (a.degenerate) continue;
                    if (best.feature < 0 || a.delta > best.delta) {
                        best = a;
                        best_slice = keep.back().get();
                    }
                }
            } else {
                const int j = level % model.dim();
                keep.push_back(std::make_unique<Slice>(model, j, node_box));
                auto a = optimal_split(*keep.back(), config.grid_points);
                if (!a.degenerate) {
                    best = a;
                    best_slice = keep.back().get();
                }
            }
            if (best.feature < 0) {
                tree.nodes[id].flat = true;
                continue;
            }
            PopSplitRecord rec;
            rec.feature = best.feature;
            rec.s_star = best.s_star;
            rec.delta = best.delta;
            rec.gbar = best.gbar;
            rec.prob_left = best.prob_left;
            rec.lambda = best.lambda;
            rec.density = best.density;
            rec.fbar_prime = best_slice->fbar_prime(best.s_star);
            rec.median = best_slice->quantile(0.5);
            Box lbox = node_box, rbox = node_box;
            lbox.hi[best.feature] = best.s_star;
            rbox.lo[best.feature] = best.s_star;
            const int li = static_cast<int>(tree.nodes.size());
            tree.nodes.push_back(
                PopNode{lbox, id, -1, -1, tree.nodes[id].depth + 1, true, false, {}});
            const int ri = static_cast<int>(tree.nodes.size());
            tree.nodes.push_back(
                PopNode{rbox, id, -1, -1, tree.nodes[id].depth + 1, false, false, {}});
            tree.nodes[id].split = rec;
            tree.nodes[id].left = li;
            tree.nodes[id].right = ri;
            next.push_back(li);
            next.push_back(ri);
        }
        frontier = std::move(next);
        if (frontier.empty()) break;
    }
    return tree;
}

// ---------------------------------------------------------------------------
// Subnode-probability bound checks
// ---------------------------------------------------------------------------

struct SubnodeBoundRecord {
    int leaf = -1;
    int feature = -1;
    double probability = 0.0;  // P_X[a_j <= X_j <= b_j]
    double mdi = 0.0;          // conditional importance with first-order weights
    double bound = 0.0;        // exp(-eta/4 * mdi)
    int selections = 0;        // K_j(t)
    bool flat_direction = false;
    bool ok = false;
};

struct WeightComparisonRecord {
    int node = -1;
    int feature = -1;
    double w1 = 0.0;
    double w2 = 0.0;
    bool ok = false;
};

struct Theorem1Report {
    PopulationTree tree;
    std::vector<SubnodeBoundRecord> bounds;
    std::vector<WeightComparisonRecord> weights;
    int violations = 0;
};

// Conditional importance of feature j for the leaf, using the first-order
// weights 1/(Gbar^2 + delta); each term then equals the ancestor's node
// balancedness.
inline double population_conditional_mdi(const PopulationTree& tree, int leaf, int feature) {
    double mdi = 0.0;
    for (int a : tree.ancestors(leaf)) {
        const auto& rec = tree.nodes[a].split;
        if (rec.feature != feature) continue;
        const double denom = rec.gbar * rec.gbar + rec.delta;
        if (denom > 0.0) mdi += rec.delta / denom;
    }
    return mdi;
}

inline Theorem1Report check_theorem1(const PopulationModel& model,
                                     const VerificationConfig& config,
                                     FeaturePolicy policy = FeaturePolicy::Greedy,
                                     double tol = 1e-9) {
    Theorem1Report report;
    report.tree = grow_population_tree(model, config, policy);
    const auto& tree = report.tree;
    for (int leaf : tree.leaf_ids()) {
        for (int j = 0; j < model.dim(); ++j) {
            SubnodeBoundRecord r;
            r.leaf = leaf;
            r.feature = j;
            const auto& box = tree.nodes[leaf].box;
            r.probability = model.marginal(j).cdf(box.hi[j]) - model.marginal(j).cdf(box.lo[j]);
            r.mdi = population_conditional_mdi(tree, leaf, j);
            for (int a : tree.ancestors(leaf))
                if (tree.nodes[a].split.feature == j) ++r.selections;
            r.flat_direction = tree.nodes[leaf].flat && r.mdi == 0.0;
            r.bound = std::exp(-config.eta / 4.0 * r.mdi);
            r.ok = r.probability <= r.bound + tol;
            if (!r.ok) ++report.violations;
            report.bounds.push_back(r);
        }
    }
    for (int i = 0; i < static_cast<int>(tree.nodes.size()); ++i) {
        if (tree.is_leaf(i)) continue;
        const auto& rec = tree.nodes[i].split;
        WeightComparisonRecord w;
        w.node = i;
        w.feature = rec.feature;
        w.w1 = 1.0 / (rec.gbar * rec.gbar + rec.delta);
        const double fp = std::fabs(rec.fbar_prime);
        w.w2 = (fp > 0.0) ? std::pow(2.0 * rec.density / (fp * rec.delta), 2.0 / 3.0)
                          : std::numeric_limits<double>::infinity();
        w.ok = w.w1 >= w.w2 - tol * std::max(1.0, w.w2);
        if (!w.ok) ++report.violations;
        report.weights.push_back(w);
    }
    return report;
}

// ---------------------------------------------------------------------------
// Terminal-node probability two ways (product formula)
// ---------------------------------------------------------------------------

struct ProductFormulaRecord {
    int leaf = -1;
    double direct = 0.0;    // product of marginal cdf increments
    double factored = 0.0;  // product of half-factors with signs
    double residual = 0.0;
};

inline std::vector<ProductFormulaRecord> check_product_formula(const PopulationModel& model,
                                                               const PopulationTree& tree) {
    std::vector<ProductFormulaRecord> out;
    for (int leaf : tree.leaf_ids()) {
        ProductFormulaRecord r;
        r.leaf = leaf;
        r.direct = 1.0;
        const auto& box = tree.nodes[leaf].box;
        for (int j = 0; j < model.dim(); ++j)
            r.direct *= model.marginal(j).cdf(box.hi[j]) - model.marginal(j).cdf(box.lo[j]);
        r.factored = 1.0;
        int child = leaf;
        for (int p = tree.nodes[leaf].parent; p >= 0; child = p, p = tree.nodes[p].parent) {
            const auto& rec = tree.nodes[p].split;
            const bool left = tree.nodes[child].is_left_child;
            const bool below_median = rec.s_star < rec.median;
            const double sign = (left == below_median) ? -1.0 : 1.0;
            const double g2 = rec.gbar * rec.gbar;
            const double root = std::sqrt(g2 / (g2 + rec.delta));
            r.factored *= 0.5 * (1.0 + sign * root);
        }
        r.residual = std::fabs(r.direct - r.factored);
        out.push_back(r);
    }
    return out;
}

// ---------------------------------------------------------------------------
// MDI >= balancedness * selection count
// ---------------------------------------------------------------------------

struct SelectionBoundRecord {
    int leaf = -1;
    int feature = -1;
    double mdi = 0.0;
    double lower = 0.0;  // lambda_lower[j] * K_j(t)
    bool ok = false;
};

// Consistency check (not proof-level): lambda_lower is a per-feature lower
// estimate of the global balancedness, e.g. a scan minimum or a published
// constant for the family.
inline std::vector<SelectionBoundRecord> check_mdi_selection_bound(
    const PopulationTree& tree, const std::vector<double>& lambda_lower, double tol = 1e-9) {
    std::vector<SelectionBoundRecord> out;
    const int d = static_cast<int>(lambda_lower.size());
    for (int leaf : tree.leaf_ids()) {
        for (int j = 0; j < d; ++j) {
            SelectionBoundRecord r;
            r.leaf = leaf;
            r.feature = j;
            r.mdi = population_conditional_mdi(tree, leaf, j);
            int k = 0;
            for (int a : tree.ancestors(leaf))
                if (tree.nodes[a].split.feature == j) ++k;
            r.lower = lambda_lower[j] * k;
            r.ok = r.mdi >= r.lower - tol;
            out.push_back(r);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Shrinking-diameter diagnostic
// ---------------------------------------------------------------------------

// Max Euclidean diameter over nodes of each depth, restricted to the strong
// coordinates. Non-increasing in depth by nestedness.
inline std::vector<double> diameter_diagnostic(const PopulationTree& tree,
                                               const std::vector<int>& strong_set) {
    int max_depth = 0;
    for (const auto& nd : tree.nodes) max_depth = std::max(max_depth, nd.depth);
    std::vector<double> out(max_depth + 1, 0.0);
    for (const auto& nd : tree.nodes) {
        double s = 0.0;
        for (int j : strong_set) {
            const double w = nd.box.hi[j] - nd.box.lo[j];
            s += w * w;
        }
        out[nd.depth] = std::max(out[nd.depth], std::sqrt(s));
    }
    // Depths reached only through leaves shallower than max_depth keep the
    // deepest ancestor's value so the sequence stays meaningful.
    for (int k = 1; k <= max_depth; ++k)
        if (out[k] == 0.0) out[k] = out[k - 1];
    return out;
}

// ---------------------------------------------------------------------------
// Finite-sample node counts (Monte Carlo)
// ---------------------------------------------------------------------------

struct FiniteSampleReport {
    bool skipped = false;
    std::string note;
    int n = 0;
    int replications = 0;
    double gamma = 0.0, p_left = 0.0, p_right = 0.0;
    double freq_hypothesis_fail = 0.0;  // dist(shat, S*) too large
    double freq_interval_fail = 0.0;    // shat outside the gamma^2/2 interval
    double freq_counts_fail = 0.0;      // a daughter held fewer than n*p/2 rows
    int implication_violations = 0;     // hypothesis held yet containment failed
    double counts_fail_bound = 0.0;     // hypothesis failures + 2 exp(-n p^2 / 2)
};

// Draws n points in the node, finds the empirical best split, and measures
// how often it lands in the envelope-predicted interval and how often the
// daughter counts clear n*p_L/2 and n*p_R/2. The closeness hypothesis is
// measured jointly with each conclusion rather than conditioned on.
inline FiniteSampleReport check_finite_sample_counts(const PopulationModel& model, int feature,
                                                     const Box& node, double balance_lower,
                                                     double noise_sd, int n, int replications,
                                                     std::uint64_t seed) {
    FiniteSampleReport rep;
    rep.n = n;
    rep.replications = replications;
    if (n < 30) {
        rep.skipped = true;
        rep.note = "insufficient n for the finite-sample check (need n >= 30)";
        return rep;
    }
    const auto env = quantile_envelope(model.marginal(feature).kind);
    const auto ep = envelope_params(env, balance_lower);
    rep.gamma = ep.gamma;
    rep.p_left = ep.p_left;
    rep.p_right = ep.p_right;

    Slice slice(model, feature, node);
    auto analysis = optimal_split(slice);
    if (analysis.degenerate) {
        rep.skipped = true;
        rep.note = "degenerate direction";
        return rep;
    }
    std::vector<double> optima;
    for (const auto& c : analysis.near_ties) optima.push_back(c.x);

    const double a = node.lo[feature], b = node.hi[feature];
    const double width = b - a;
    const double hyp_radius = 0.5 * width * ep.gamma * (1.0 - ep.gamma);
    const double int_lo = a + 0.5 * width * ep.gamma * ep.gamma;
    const double int_hi = b - 0.5 * width * ep.gamma * ep.gamma;

    std::vector<ConditionalMarginal> cms;
    for (int j = 0; j < model.dim(); ++j)
        cms.emplace_back(model.marginal(j), node.lo[j], node.hi[j]);

    int hyp_fail = 0, int_fail = 0, cnt_fail = 0;
    std::vector<double> x(model.dim());
    std::vector<std::pair<double, double>> pairs(n);
    for (int r = 0; r < replications; ++r) {
        Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(r));
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < model.dim(); ++j) x[j] = cms[j].quantile(rng.uniform01());
            double y = model.mean(x.data());
            if (noise_sd > 0.0) y += noise_sd * rng.normal();
            pairs[i] = {x[feature], y};
        }
        auto split = detail::scan_pairs(pairs, feature, 1, nullptr);
        if (!split) {
            ++hyp_fail;
            ++int_fail;
            ++cnt_fail;
            continue;
        }
        double dist = std::numeric_limits<double>::infinity();
        for (double s : optima) dist = std::min(dist, std::fabs(split->threshold - s));
        const bool hyp_ok = dist <= hyp_radius;
        const bool int_ok = split->threshold >= int_lo && split->threshold <= int_hi;
        const bool cnt_ok = split->left_count >= n * ep.p_left / 2.0 &&
                            split->right_count >= n * ep.p_right / 2.0;
        if (!hyp_ok) ++hyp_fail;
        if (!int_ok) ++int_fail;
        if (!cnt_ok) ++cnt_fail;
        if (hyp_ok && !int_ok) ++rep.implication_violations;
    }
    rep.freq_hypothesis_fail = static_cast<double>(hyp_fail) / replications;
    rep.freq_interval_fail = static_cast<double>(int_fail) / replications;
    rep.freq_counts_fail = static_cast<double>(cnt_fail) / replications;
    rep.counts_fail_bound =
        rep.freq_hypothesis_fail + 2.0 * std::exp(-n * ep.p * ep.p / 2.0);
    return rep;
}

} // namespace cartsplit
