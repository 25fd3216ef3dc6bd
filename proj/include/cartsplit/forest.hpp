#pragma once
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <future>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "cartsplit/dataset.hpp"
#include "cartsplit/rng.hpp"
#include "cartsplit/synthetic.hpp"
#include "cartsplit/tree.hpp"

namespace cartsplit {

struct ForestConfig {
    int ntree = 100;
    int mtry = 0;       // 0: floor(d/3) for regression, floor(sqrt(d)) for classification
    int nodesize = 5;   // minimum rows per leaf
    int maxnodes = -1;  // maximum number of leaves, -1 unlimited
    bool bootstrap = true;
    std::uint64_t seed = 0;

    int resolve_mtry(int d, ResponseKind kind) const {
        if (mtry > 0) return std::min(mtry, d);
        const int def = (kind == ResponseKind::Binary)
                            ? static_cast<int>(std::floor(std::sqrt(static_cast<double>(d))))
                            : d / 3;
        return std::max(1, std::min(def, d));
    }
};

struct Forest {
    std::vector<Tree> trees;
    ForestConfig config;
    ResponseKind kind = ResponseKind::Continuous;

    double predict(const double* x) const {
        double s = 0.0;
        for (const auto& t : trees) s += t.predict(x);
        s /= static_cast<double>(trees.size());
        if (kind == ResponseKind::Binary) return (s >= 0.0) ? 1.0 : -1.0;
        return s;
    }
    double predict(const std::vector<double>& x) const { return predict(x.data()); }

    // Mean vote before thresholding; useful for variance diagnostics.
    double predict_mean(const double* x) const {
        double s = 0.0;
        for (const auto& t : trees) s += t.predict(x);
        return s / static_cast<double>(trees.size());
    }
};

inline int worker_count() {
    if (const char* env = std::getenv("CARTSPLIT_THREADS")) {
        const int v = std::atoi(env);
        if (v > 0) return v;
    }
    const unsigned hc = std::thread::hardware_concurrency();
    return hc > 0 ? static_cast<int>(hc) : 1;
}

// Breiman-style forest: per-tree bootstrap plus per-node random feature
// subsets, ties among maximal decreases broken uniformly at random from the
// tree's own stream. Tree m draws everything from stream(seed, m), so the
// result is identical under any thread schedule.
inline Forest fit_forest(const Dataset& data, const ForestConfig& config) {
    data.validate();
    if (config.ntree < 1) throw SpecError("ntree must be >= 1");
    if (config.nodesize < 1) throw SpecError("nodesize must be >= 1");
    Forest forest;
    forest.config = config;
    forest.kind = data.kind;
    forest.trees.resize(config.ntree);

    GrowthConfig grow;
    grow.min_node_size = config.nodesize;
    grow.max_leaves = config.maxnodes;
    grow.mtry = config.resolve_mtry(data.d(), data.kind);
    grow.min_relative_decrease = 0.0;  // forests grow deep; no cp pruning
    grow.random_tie_break = true;

    const int n = data.n();
    auto fit_one = [&](int m) {
        Rng rng = Rng::stream(config.seed, static_cast<std::uint64_t>(m));
        std::vector<int> rows;
        if (config.bootstrap) {
            rows.resize(n);
            for (int i = 0; i < n; ++i) rows[i] = static_cast<int>(rng.uniform_int(n));
        } else {
            rows.resize(n);
            for (int i = 0; i < n; ++i) rows[i] = i;
        }
        forest.trees[m] = grow_tree(data, grow, rng.next_u64(), &rows);
    };

    const int workers = std::min(worker_count(), config.ntree);
    if (workers <= 1) {
        for (int m = 0; m < config.ntree; ++m) fit_one(m);
    } else {
        std::vector<std::future<void>> futs;
        for (int w = 0; w < workers; ++w) {
            futs.push_back(std::async(std::launch::async, [&, w]() {
                for (int m = w; m < config.ntree; m += workers) fit_one(m);
            }));
        }
        for (auto& f : futs) f.get();
    }
    return forest;
}

// Fraction of distinct rows per bootstrap sample, averaged over trees
// (expected 1 - 1/e).
inline double bootstrap_unique_fraction(const Dataset& data, const ForestConfig& config) {
    double total = 0.0;
    const int n = data.n();
    std::vector<char> seen(n);
    for (int m = 0; m < config.ntree; ++m) {
        Rng rng = Rng::stream(config.seed, static_cast<std::uint64_t>(m));
        std::fill(seen.begin(), seen.end(), 0);
        int uniq = 0;
        for (int i = 0; i < n; ++i) {
            const int r = static_cast<int>(rng.uniform_int(n));
            if (!seen[r]) {
                seen[r] = 1;
                ++uniq;
            }
        }
        total += static_cast<double>(uniq) / n;
    }
    return total / config.ntree;
}

// ---------------------------------------------------------------------------
// Empirical risk trend
// ---------------------------------------------------------------------------

struct RiskPoint {
    int n = 0;
    double risk = 0.0;  // mean over replications of the test-set L2 risk
};

// For each n: fit a forest on fresh draws and estimate the L2 distance to the
// noiseless surface on an independent test set. Unless the config pins
// maxnodes, the leaf budget grows like n^0.6 so that n/maxnodes diverges --
// fully grown trees keep a constant number of points per leaf and their
// averaged risk does not vanish.
inline std::vector<RiskPoint> risk_curve(const SyntheticModelSpec& spec,
                                         const std::vector<int>& n_list,
                                         const ForestConfig& config, int test_size,
                                         int replications, std::uint64_t seed) {
    SyntheticModelSpec clean = spec;
    clean.noise_sd = 0.0;
    const Dataset test = generate(clean, test_size, splitmix64_seed(seed, 0x7e57));
    std::vector<double> x(spec.d);
    std::vector<RiskPoint> out;
    for (size_t ni = 0; ni < n_list.size(); ++ni) {
        RiskPoint pt;
        pt.n = n_list[ni];
        double acc = 0.0;
        for (int r = 0; r < replications; ++r) {
            const std::uint64_t s = splitmix64_seed(seed, 1000 * ni + r);
            Dataset train = generate(spec, pt.n, s);
            ForestConfig cfg = config;
            cfg.seed = s ^ 0x5bf03635ULL;
            if (cfg.maxnodes <= 0)
                cfg.maxnodes = std::max(8L, std::lround(std::pow(pt.n, 0.6)));
            Forest forest = fit_forest(train, cfg);
            double sum = 0.0;
            for (int i = 0; i < test.n(); ++i) {
                for (int j = 0; j < spec.d; ++j) x[j] = test.x(i, j);
                const double err = test.response[i] - forest.predict_mean(x.data());
                sum += err * err;
            }
            acc += sum / test.n();
        }
        pt.risk = acc / replications;
        out.push_back(pt);
    }
    return out;
}

// ---------------------------------------------------------------------------
// JSON serialization
// ---------------------------------------------------------------------------

inline nlohmann::json forest_to_json(const Forest& forest) {
    nlohmann::json j;
    j["kind"] = (forest.kind == ResponseKind::Binary) ? "classification" : "regression";
    j["config"] = {{"ntree", forest.config.ntree},   {"mtry", forest.config.mtry},
                   {"nodesize", forest.config.nodesize}, {"maxnodes", forest.config.maxnodes},
                   {"bootstrap", forest.config.bootstrap}, {"seed", forest.config.seed}};
    nlohmann::json trees = nlohmann::json::array();
    for (const auto& t : forest.trees) trees.push_back(tree_to_json(t));
    j["trees"] = trees;
    return j;
}

inline Forest forest_from_json(const nlohmann::json& j) {
    Forest f;
    f.kind = (j.at("kind").get<std::string>() == "classification") ? ResponseKind::Binary
                                                                   : ResponseKind::Continuous;
    const auto& c = j.at("config");
    f.config.ntree = c.at("ntree").get<int>();
    f.config.mtry = c.at("mtry").get<int>();
    f.config.nodesize = c.at("nodesize").get<int>();
    f.config.maxnodes = c.at("maxnodes").get<int>();
    f.config.bootstrap = c.at("bootstrap").get<bool>();
    f.config.seed = c.at("seed").get<std::uint64_t>();
    for (const auto& tj : j.at("trees")) f.trees.push_back(tree_from_json(tj));
    return f;
}

} // namespace cartsplit
