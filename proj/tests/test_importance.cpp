#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "cartsplit/importance.hpp"
#include "cartsplit/synthetic.hpp"

using namespace cartsplit;

namespace {

Dataset make_1d(std::vector<double> x, std::vector<double> y) {
    Dataset d;
    d.columns = {std::move(x)};
    d.response = std::move(y);
    d.names = {"x1"};
    return d;
}

Tree stump_tree() {
    // Y = X on (0.1, 0.2, 0.9): split at 0.55 with decrease 0.125.
    auto d = make_1d({0.1, 0.2, 0.9}, {0.1, 0.2, 0.9});
    GrowthConfig cfg;
    cfg.max_depth = 1;
    cfg.min_relative_decrease = 0.0;
    return grow_tree(d, cfg, 1);
}

} // namespace

TEST(Mdi, StumpSingleTerm) {
    Tree t = stump_tree();
    auto mdi = mdi_tree(t);
    ASSERT_EQ(mdi.size(), 1u);
    EXPECT_NEAR(mdi[0], 0.125, 1e-12);
    auto avg = mdi_global({t, t, t});
    EXPECT_NEAR(avg[0], 0.125, 1e-12);
}

TEST(Mdi, UnselectedFeatureIsZero) {
    SyntheticModelSpec spec;
    spec.family = ModelFamily::Linear;
    spec.d = 3;
    spec.beta = {4.0, 0.0, 0.0};  // only x1 carries signal
    auto data = generate(spec, 400, 6);
    GrowthConfig cfg;
    cfg.max_depth = 4;
    Tree t = grow_tree(data, cfg, 1);
    auto mdi = mdi_tree(t);
    EXPECT_GT(mdi[0], 0.0);
    EXPECT_DOUBLE_EQ(mdi[1], 0.0);
    EXPECT_DOUBLE_EQ(mdi[2], 0.0);
}

TEST(Mdi, TelescopingAdditivity) {
    SyntheticModelSpec spec;
    spec.family = ModelFamily::Friedman1;
    spec.d = 6;
    spec.noise_sd = 0.7;
    auto data = generate(spec, 500, 12);
    GrowthConfig cfg;
    cfg.max_depth = 6;
    cfg.min_relative_decrease = 0.0;
    Tree t = grow_tree(data, cfg, 1);
    auto mdi = mdi_tree(t);
    double total = 0.0;
    for (double v : mdi) total += v;
    auto rows = t.node_rows(data);
    double leaf_impurity = 0.0;
    for (int leaf : t.leaf_ids()) {
        NodeRegion r;
        r.rows = rows[leaf];
        leaf_impurity += t.nodes[leaf].weight * node_impurity(r, data);
    }
    EXPECT_NEAR(total, t.root_impurity - leaf_impurity, 1e-10);
}

TEST(MdiConditional, UnitWeightsSumAncestors) {
    Tree t = stump_tree();
    auto d = make_1d({0.1, 0.2, 0.9}, {0.1, 0.2, 0.9});
    for (int leaf : t.leaf_ids()) {
        auto mdi = mdi_conditional(t, d, leaf, ConditionalWeightScheme::Unit);
        EXPECT_NEAR(mdi[0], 0.125, 1e-12);  // single ancestor chain
    }
    EXPECT_THROW(mdi_conditional(t, d, 0, ConditionalWeightScheme::Unit), SpecError);
}

TEST(MdiConditional, SelectionCounts) {
    SyntheticModelSpec spec;
    spec.family = ModelFamily::Linear;
    spec.d = 3;
    spec.beta = {3.0, 2.0, 1.0};
    auto data = generate(spec, 1000, 3);
    GrowthConfig cfg;
    cfg.max_depth = 5;
    cfg.min_relative_decrease = 0.0;
    Tree t = grow_tree(data, cfg, 1);
    for (int leaf : t.leaf_ids()) {
        auto k = selection_counts(t, leaf);
        int total = 0;
        for (int v : k) total += v;
        EXPECT_EQ(total, t.nodes[leaf].depth);  // sum of K_j equals the depth
    }
}

TEST(MdiConditional, PluginWeightsNearOneOnLinearData) {
    // Noiseless linear response: Gbar-hat at the split is near zero, so each
    // plugin term delta/(ghat^2 + delta) approaches one and the conditional
    // importance approaches the selection count.
    SyntheticModelSpec spec;
    spec.family = ModelFamily::Linear;
    spec.d = 1;
    spec.beta = {1.0};
    auto data = generate(spec, 10000, 5);
    GrowthConfig cfg;
    cfg.max_depth = 2;
    cfg.min_relative_decrease = 0.0;
    Tree t = grow_tree(data, cfg, 1);
    for (int leaf : t.leaf_ids()) {
        auto mdi = mdi_conditional(t, data, leaf, ConditionalWeightScheme::W1Plugin);
        auto k = selection_counts(t, leaf);
        EXPECT_NEAR(mdi[0], static_cast<double>(k[0]), 0.05 * k[0]);
    }
}

TEST(Ecp, Examples) {
    SplitEvaluation balanced;
    balanced.left_fraction = 0.5;
    EXPECT_DOUBLE_EQ(edge_cut_preference(balanced, 10), 0.0);
    SplitEvaluation skewed;
    skewed.left_fraction = 0.9;
    EXPECT_NEAR(edge_cut_preference(skewed, 10), (10.0 / 9.0) * 0.8 / 2.0, 1e-12);
    EXPECT_NEAR(edge_cut_preference(skewed, 10), 0.4444, 1e-4);
    EXPECT_THROW(edge_cut_preference(skewed, 1), SpecError);
    // Range: [0, N/(2(N-1))].
    SplitEvaluation extreme;
    extreme.left_fraction = 1.0;
    EXPECT_LE(edge_cut_preference(extreme, 10), 10.0 / 18.0 + 1e-12);
}

TEST(PartialDependence, ConstantWhenFeatureUnsplit) {
    SyntheticModelSpec spec;
    spec.family = ModelFamily::Linear;
    spec.d = 2;
    spec.beta = {4.0, 0.0};
    auto data = generate(spec, 300, 8);
    GrowthConfig cfg;
    cfg.max_depth = 3;
    Tree t = grow_tree(data, cfg, 1);
    PartialDependenceWalker walker(t, data, 1);  // feature 1 never split
    const double v0 = walker(0.1);
    for (double x : {0.3, 0.5, 0.9}) EXPECT_DOUBLE_EQ(walker(x), v0);
    // Equals the average prediction over the node rows.
    double avg = 0.0;
    for (int i = 0; i < data.n(); ++i) {
        std::vector<double> x{data.x(i, 0), data.x(i, 1)};
        avg += t.predict(x);
    }
    avg /= data.n();
    EXPECT_NEAR(v0, avg, 1e-12);
}

TEST(PartialDependence, DepthOneStep) {
    std::vector<double> x, y;
    for (int i = 1; i <= 8; ++i) {
        x.push_back(i / 10.0);
        y.push_back(i / 10.0 > 0.45 ? 1.0 : 0.0);
    }
    Dataset data = make_1d(x, y);
    GrowthConfig cfg;
    cfg.max_depth = 1;
    cfg.min_relative_decrease = 0.0;
    Tree t = grow_tree(data, cfg, 1);
    PartialDependenceWalker walker(t, data, 0);
    EXPECT_DOUBLE_EQ(walker(0.1), 0.0);
    EXPECT_DOUBLE_EQ(walker(0.9), 1.0);
}

TEST(PartialDependence, WalkerMatchesNaiveOracle) {
    SyntheticModelSpec spec;
    spec.family = ModelFamily::Friedman1;
    spec.d = 6;
    spec.noise_sd = 0.8;
    auto data = generate(spec, 350, 44);
    GrowthConfig cfg;
    cfg.max_depth = 6;
    cfg.min_relative_decrease = 0.0;
    Tree t = grow_tree(data, cfg, 2);
    for (int feature : {0, 2, 5}) {
        PartialDependenceWalker walker(t, data, feature);
        for (double xj : {0.05, 0.33, 0.5, 0.71, 0.97}) {
            EXPECT_NEAR(walker(xj), partial_dependence_naive(t, data, feature, xj), 1e-12)
                << "feature " << feature << " x " << xj;
        }
    }
    // Also from an interior base node (conditional partial dependence).
    int base = 0;
    for (int i = 0; i < static_cast<int>(t.nodes.size()); ++i)
        if (!t.is_leaf(i) && t.nodes[i].depth == 2) {
            base = i;
            break;
        }
    PartialDependenceWalker walker(t, data, 1, base);
    for (double xj : {0.2, 0.6}) {
        EXPECT_NEAR(walker(xj), partial_dependence_naive(t, data, 1, xj, base), 1e-12);
    }
    // Individual conditional expectation: a single-row base node traces one
    // observation's prediction as the coordinate sweeps.
    int leaf1 = -1;
    for (int id : t.leaf_ids())
        if (t.nodes[id].count == 1) leaf1 = id;
    if (leaf1 >= 0) {
        PartialDependenceWalker ice(t, data, 0, leaf1);
        for (double xj : {0.1, 0.5, 0.9})
            EXPECT_NEAR(ice(xj), partial_dependence_naive(t, data, 0, xj, leaf1), 1e-12);
    }
}

TEST(SubnodeLengths, SingleLeafIsOne) {
    auto data = make_1d({0.2, 0.8}, {1.0, 1.0});
    GrowthConfig cfg;
    Tree t = grow_tree(data, cfg, 1);
    ASSERT_EQ(t.leaf_count(), 1);
    auto len = median_subnode_lengths(t);
    EXPECT_DOUBLE_EQ(len[0], 1.0);
}

TEST(SubnodeLengths, DyadicDepthThree) {
    // Equally spaced linear data splits at dyadic midpoints; all eight leaves
    // have width 1/8.
    std::vector<double> x, y;
    for (int i = 0; i < 8; ++i) {
        x.push_back((2.0 * i + 1.0) / 16.0);
        y.push_back(x.back());
    }
    auto data = make_1d(x, y);
    GrowthConfig cfg;
    cfg.max_depth = 3;
    cfg.min_relative_decrease = 0.0;
    Tree t = grow_tree(data, cfg, 1);
    ASSERT_EQ(t.leaf_count(), 8);
    auto len = median_subnode_lengths(t);
    EXPECT_NEAR(len[0], 0.125, 1e-12);
}

TEST(SubnodeLengths, UnsplitFeatureIsOne) {
    SyntheticModelSpec spec;
    spec.family = ModelFamily::Linear;
    spec.d = 2;
    spec.beta = {5.0, 0.0};
    auto data = generate(spec, 300, 2);
    GrowthConfig cfg;
    cfg.max_depth = 4;
    Tree t = grow_tree(data, cfg, 1);
    auto len = median_subnode_lengths(t);
    EXPECT_DOUBLE_EQ(len[1], 1.0);
    EXPECT_LT(len[0], 1.0);
}

TEST(Figure1, SingleTreeEqualsB1) {
    SyntheticModelSpec spec;
    spec.family = ModelFamily::Friedman1;
    spec.d = 5;
    spec.noise_sd = 1.0;
    auto data = generate(spec, 300, 10);
    GrowthConfig cfg;
    auto st = figure1_stats(data, 1, cfg, 99);
    Rng rng = Rng::stream(99, 0);
    std::vector<int> rows(data.n());
    for (int i = 0; i < data.n(); ++i) rows[i] = static_cast<int>(rng.uniform_int(data.n()));
    Tree t = grow_tree(data, cfg, rng.next_u64(), &rows);
    auto mdi = mdi_tree(t);
    auto len = median_subnode_lengths(t);
    for (int j = 0; j < 5; ++j) {
        EXPECT_DOUBLE_EQ(st.mdi[j], mdi[j]);
        EXPECT_DOUBLE_EQ(st.sublen[j], len[j]);
    }
}

TEST(Figure1, SingleFeatureScalesToHundred) {
    SyntheticModelSpec spec;
    spec.family = ModelFamily::Linear;
    spec.d = 1;
    spec.beta = {2.0};
    spec.noise_sd = 0.1;
    auto data = generate(spec, 200, 4);
    GrowthConfig cfg;
    auto st = figure1_stats(data, 8, cfg, 5);
    auto rows = figure1_report(st, data.names);
    ASSERT_EQ(rows.size(), 1u);
    EXPECT_DOUBLE_EQ(rows[0].mdi_scaled, 100.0);
    EXPECT_DOUBLE_EQ(rows[0].sublen_scaled, 100.0);
}

TEST(Figure1, InverseRelationshipOnSparseFriedman) {
    SyntheticModelSpec spec;
    spec.family = ModelFamily::Friedman1;
    spec.d = 10;
    spec.noise_sd = 1.0;
    auto data = generate(spec, 600, 20);
    GrowthConfig cfg;  // cp = 0.001 default matches the barplot pipeline
    auto st = figure1_stats(data, 40, cfg, 7);
    const double rho = spearman(st.mdi, st.sublen);
    EXPECT_LE(rho, -0.7);
    // Report ordering: increasing MDI, max scaled to 100.
    auto rows = figure1_report(st, data.names);
    for (size_t i = 1; i < rows.size(); ++i)
        EXPECT_LE(st.mdi[rows[i - 1].feature], st.mdi[rows[i].feature]);
    double max_mdi = 0.0;
    for (const auto& r : rows) max_mdi = std::max(max_mdi, r.mdi_scaled);
    EXPECT_DOUBLE_EQ(max_mdi, 100.0);
}

TEST(Figure1, TidyCsvShape) {
    Figure1Stats st;
    st.mdi = {1.5, 0.25};
    st.sublen = {0.2, 0.9};
    const auto csv = importance_tidy_csv(st, {"a", "b"});
    EXPECT_NE(csv.find("feature,statistic,value"), std::string::npos);
    EXPECT_NE(csv.find("a,mdi,1.5"), std::string::npos);
    EXPECT_NE(csv.find("b,median_subnode_length,0.9"), std::string::npos);
}

TEST(Spearman, Basics) {
    EXPECT_DOUBLE_EQ(spearman({1, 2, 3, 4}, {10, 20, 30, 40}), 1.0);
    EXPECT_DOUBLE_EQ(spearman({1, 2, 3, 4}, {8, 6, 4, 2}), -1.0);
    // Ties get average ranks.
    const double r = spearman({1, 1, 2, 3}, {4, 4, 2, 1});
    EXPECT_LT(r, -0.9);
}
