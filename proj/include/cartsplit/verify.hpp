#pragma once
#include <cmath>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "json.hpp"

#include "cartsplit/forest.hpp"
#include "cartsplit/importance.hpp"
#include "cartsplit/theory.hpp"

namespace cartsplit {

struct ClaimResult {
    std::string id;
    std::string status;  // pass / fail / skip
    double value = 0.0;
    double threshold = 0.0;
    std::string detail;
};

struct SuiteReport {
    std::string suite;
    std::vector<ClaimResult> claims;

    int failures() const {
        int n = 0;
        for (const auto& c : claims)
            if (c.status == "fail") ++n;
        return n;
    }
    bool passed() const { return failures() == 0; }

    void add_bound(const std::string& id, double value, double threshold,
                   const std::string& detail = "") {
        // value must be >= threshold
        claims.push_back({id, value >= threshold ? "pass" : "fail", value, threshold, detail});
    }
    void add_residual(const std::string& id, double value, double threshold,
                      const std::string& detail = "") {
        // value must be <= threshold
        claims.push_back({id, value <= threshold ? "pass" : "fail", value, threshold, detail});
    }
    void add_flag(const std::string& id, bool ok, const std::string& detail = "") {
        claims.push_back({id, ok ? "pass" : "fail", ok ? 1.0 : 0.0, 1.0, detail});
    }
};

inline nlohmann::json suite_to_json(const SuiteReport& report) {
    nlohmann::json j;
    j["suite"] = report.suite;
    j["passed"] = report.passed();
    nlohmann::json claims = nlohmann::json::array();
    for (const auto& c : report.claims)
        claims.push_back({{"id", c.id},
                          {"status", c.status},
                          {"value", c.value},
                          {"threshold", c.threshold},
                          {"detail", c.detail}});
    j["claims"] = claims;
    return j;
}

// ---------------------------------------------------------------------------
// The model zoo used by every suite
// ---------------------------------------------------------------------------

struct NamedModel {
    std::string name;
    std::unique_ptr<PopulationModel> model;
    int feature = 0;
    double balance_lower = 0.0;  // published lower bound on the balancedness, 0 if none
};

inline std::vector<NamedModel> example_model_zoo(int poly_max_k = 6, int sine_max_m = 8,
                                                 std::vector<double> logistic_betas = {1.0, 5.0,
                                                                                       10.0}) {
    std::vector<NamedModel> zoo;
    {
        SyntheticModelSpec s;
        s.family = ModelFamily::Linear;
        s.d = 1;
        s.beta = {1.0};
        zoo.push_back({"linear", population_model(s), 0, 1.0});
    }
    for (int k = 1; k <= poly_max_k; ++k) {
        SyntheticModelSpec s;
        s.family = ModelFamily::Polynomial;
        s.d = 1;
        s.beta = {1.0};
        s.degree = {k};
        zoo.push_back({"poly_k" + std::to_string(k), population_model(s), 0,
                       std::pow(1.0 / (k * (k + 1.0)), 2.0 / 3.0)});
    }
    for (int m = 1; m <= sine_max_m; ++m) {
        SyntheticModelSpec s;
        s.family = ModelFamily::Sine;
        s.d = 1;
        s.beta = {1.0};
        s.freq = {m};
        zoo.push_back({"sine_m" + std::to_string(m), population_model(s), 0, 0.0});
    }
    {
        SyntheticModelSpec s;
        s.family = ModelFamily::Friedman1;
        s.d = 5;
        const double table2[5] = {1.0 / (2.0 * M_PI * M_PI), 1.0 / (2.0 * M_PI * M_PI),
                                  std::pow(1.0 / 12.0, 2.0 / 3.0), std::pow(0.25, 1.0 / 3.0),
                                  std::pow(0.25, 1.0 / 3.0)};
        for (int j = 0; j < 5; ++j)
            zoo.push_back({"friedman_x" + std::to_string(j + 1), population_model(s), j,
                           table2[j]});
    }
    for (double beta : logistic_betas) {
        SyntheticModelSpec s;
        s.family = ModelFamily::Logistic;
        s.d = 1;
        s.beta = {beta};
        s.beta0 = -beta / 2.0;
        zoo.push_back({"logistic_b" + std::to_string(static_cast<int>(beta)),
                       population_model(s), 0,
                       std::min(std::pow(std::fabs(beta), -4.0 / 3.0),
                                std::pow(0.125, 2.0 / 3.0))});
    }
    return zoo;
}

// ---------------------------------------------------------------------------
// identities: fixed point, criterion forms, derivatives, delta_R, Fourier,
// penalized criterion
// ---------------------------------------------------------------------------

inline SuiteReport suite_identities() {
    SuiteReport rep;
    rep.suite = "identities";
    const auto nodes = interval_grid(8);  // 36 subnode intervals
    auto zoo = example_model_zoo();
    for (const auto& nm : zoo) {
        double worst_fp = 0.0, worst_lambda = 0.0, worst_form = 0.0, worst_xi2 = 0.0;
        double worst_d1 = 0.0;
        int analyzed = 0, degenerate = 0;
        for (const auto& [a, b] : nodes) {
            Box node = Box::unit(nm.model->dim());
            node.lo[nm.feature] = a;
            node.hi[nm.feature] = b;
            Slice slice(*nm.model, nm.feature, node);
            auto analysis = optimal_split(slice);
            if (analysis.degenerate) {
                ++degenerate;
                continue;
            }
            ++analyzed;
            auto fp = verify_fixed_point(analysis);
            worst_fp = std::max(worst_fp, fp.fixed_point_residual);
            worst_lambda = std::max(worst_lambda, fp.lambda_residual);
            // Criterion forms and the Xi identity on a small grid.
            for (double s : uniform_grid(a, b, 17)) {
                const double d1 = slice.delta(s);
                const double d2 = slice.delta_decomposition(s);
                worst_form =
                    std::max(worst_form, std::fabs(d1 - d2) / std::max(1.0, std::fabs(d1)));
                const double p = slice.prob_left(s);
                const double xi = slice.xi(s);
                if (p > Slice::kEdgeGuard && p < 1.0 - Slice::kEdgeGuard)
                    worst_xi2 = std::max(worst_xi2, std::fabs(xi * xi - p * (1.0 - p) * d1));
            }
            // First derivative vanishes at the interior optimum.
            auto so = second_derivative_check(slice, analysis);
            worst_d1 = std::max(worst_d1, std::fabs(so.first_derivative_fd));
        }
        rep.add_residual("fixed-point/" + nm.name, worst_fp, 1e-6,
                         std::to_string(analyzed) + " nodes");
        rep.add_residual("balance-identity/" + nm.name, worst_lambda, 1e-6);
        rep.add_residual("criterion-forms-agree/" + nm.name, worst_form, 1e-8);
        rep.add_residual("xi-squared-identity/" + nm.name, worst_xi2, 1e-10);
        rep.add_residual("stationarity/" + nm.name, worst_d1, 1e-4);
    }
    // Closed-form second derivative (smooth families, root node).
    for (const char* which : {"linear", "poly_k2", "sine_m1", "logistic_b5"}) {
        for (const auto& nm : zoo) {
            if (nm.name != which) continue;
            Slice slice(*nm.model, 0, Box::unit(nm.model->dim()));
            auto analysis = optimal_split(slice);
            auto so = second_derivative_check(slice, analysis);
            rep.add_residual("second-derivative/" + nm.name, so.second_derivative_rel_err, 1e-4);
        }
    }
    {
        SyntheticModelSpec s;
        s.family = ModelFamily::Sine;
        s.d = 1;
        s.beta = {1.0};
        s.freq = {1};
        auto model = population_model(s);
        Slice slice(*model, 0, Box::unit(1));
        rep.add_residual("xi-derivative/sine_m1", xi_derivative_residual(slice, 0.3), 1e-6);
    }
    // Integrated decrease for centered powers.
    rep.add_residual("delta_R/closed-form-R1", std::fabs(delta_R(1) - 1.0 / 24.0), 1e-9);
    {
        Rng rng(424242);
        for (int R = 1; R <= 6; ++R) {
            const double v = delta_R(R);
            const bool positive = v > 0.0;
            // Stratified Monte Carlo oracle.
            const int strata = 200, per = 4000;
            double acc = 0.0;
            for (int i = 0; i < strata; ++i) {
                const double s = (i + 0.5) / strata;
                int nl = 0;
                double suml = 0.0, sumr = 0.0;
                for (int k = 0; k < per; ++k) {
                    const double x = rng.uniform01();
                    const double y = std::pow(x - 0.5, R);
                    if (x <= s) {
                        ++nl;
                        suml += y;
                    } else {
                        sumr += y;
                    }
                }
                if (nl == 0 || nl == per) continue;
                const double pl = static_cast<double>(nl) / per;
                const double diff = suml / nl - sumr / (per - nl);
                acc += pl * (1.0 - pl) * diff * diff;
            }
            acc /= strata;
            rep.add_flag("delta_R/positive-R" + std::to_string(R), positive);
            rep.add_residual("delta_R/monte-carlo-R" + std::to_string(R), std::fabs(v - acc),
                             1e-3);
        }
    }
    {
        SyntheticModelSpec s;
        s.family = ModelFamily::Sine;
        s.d = 1;
        s.beta = {1.0};
        s.freq = {1};
        auto model = population_model(s);
        Slice slice(*model, 0, Box::unit(1));
        auto analysis = optimal_split(slice);
        const double bound = fourier_lower_bound({0.25});
        rep.add_residual("fourier/sine-optimum-value",
                         std::fabs(analysis.delta - 4.0 / (M_PI * M_PI)), 1e-9);
        rep.add_bound("fourier/sine-lower-bound", analysis.delta, bound - 1e-9,
                      "bound=" + std::to_string(bound));
    }
    // Penalized criterion.
    {
        SyntheticModelSpec s;
        s.family = ModelFamily::Sine;
        s.d = 1;
        s.beta = {1.0};
        s.freq = {10};
        auto model = population_model(s);
        Slice s0(*model, 0, Box::unit(1));
        auto plain = optimal_split(s0);
        Slice s1(*model, 0, Box::unit(1));
        auto alpha0 = penalized_optimal_split(s1, 0.0);
        rep.add_flag("penalized/alpha0-bitwise",
                     plain.s_star == alpha0.s_star && plain.delta == alpha0.delta &&
                         plain.lambda == alpha0.lambda);
        Slice s2(*model, 0, Box::unit(1));
        auto pen = penalized_optimal_split(s2, 1.1);
        const double edge0 = std::min(plain.s_star, 1.0 - plain.s_star);
        const double edge1 = std::min(pen.s_star, 1.0 - pen.s_star);
        rep.add_bound("penalized/sine-m10-edge-distance", edge1, edge0 + 1e-12,
                      "alpha0=" + std::to_string(edge0) + " alpha1.1=" + std::to_string(edge1));
        auto pb = penalized_bounds(s2, pen);
        rep.add_bound("penalized/first-order-bound-alpha1.1", pen.lambda,
                      pb.first_order - 1e-9);
        for (double alpha : {0.3, 0.9}) {
            SyntheticModelSpec p3;
            p3.family = ModelFamily::Polynomial;
            p3.d = 1;
            p3.beta = {1.0};
            p3.degree = {3};
            auto pmodel = population_model(p3);
            Slice ps(*pmodel, 0, Box::unit(1));
            auto pa = penalized_optimal_split(ps, alpha);
            auto pbb = penalized_bounds(ps, pa);
            const std::string tag = "alpha" + std::to_string(alpha).substr(0, 3);
            rep.add_bound("penalized/first-order-bound-" + tag, pa.lambda,
                          pbb.first_order - 1e-9);
            rep.add_bound("penalized/second-order-bound-" + tag, pa.lambda,
                          pbb.second_order - 1e-9);
        }
    }
    return rep;
}

// ---------------------------------------------------------------------------
// bounds: oscillation / second-order balancedness bounds and weight ordering
// on every scanned node of the example families
// ---------------------------------------------------------------------------

struct ScanOutcome {
    std::string name;
    double balance_lower = 0.0;  // published bound (0 if none)
    ScanResult scan;
};

inline std::vector<NamedModel> scan_model_zoo() {
    return example_model_zoo(4, 0, {1.0, 5.0, 10.0});  // poly k<=4, sines added below
}

inline SuiteReport suite_bounds(std::vector<ScanOutcome>* scans_out = nullptr,
                                int grid_m = 32) {
    SuiteReport rep;
    rep.suite = "bounds";
    auto zoo = example_model_zoo(4, 0, {1.0, 5.0, 10.0});
    for (int m : {1, 2, 4, 8}) {
        SyntheticModelSpec s;
        s.family = ModelFamily::Sine;
        s.d = 1;
        s.beta = {1.0};
        s.freq = {m};
        zoo.push_back({"sine_m" + std::to_string(m), population_model(s), 0, 0.0});
    }
    const auto nodes = interval_grid(grid_m);
    for (const auto& nm : zoo) {
        double worst_osc = std::numeric_limits<double>::infinity();
        double worst_second = std::numeric_limits<double>::infinity();
        double worst_w = std::numeric_limits<double>::infinity();
        bool chain_ok = true;
        ScanResult scan;
        scan.lambda_min = 1.0;
        bool first = true;
        for (const auto& [a, b] : nodes) {
            Box node = Box::unit(nm.model->dim());
            node.lo[nm.feature] = a;
            node.hi[nm.feature] = b;
            Slice slice(*nm.model, nm.feature, node);
            auto analysis = optimal_split(slice);
            if (analysis.degenerate) {
                ++scan.skipped_degenerate;
                continue;
            }
            ScanEntry e{a, b, analysis.lambda, analysis.s_star, analysis.delta};
            scan.entries.push_back(e);
            if (first || e.lambda < scan.lambda_min) {
                scan.lambda_min = e.lambda;
                scan.argmin = e;
                first = false;
            }
            auto bb = balancedness_bounds(slice, analysis);
            worst_osc = std::min(worst_osc, analysis.lambda - bb.oscillation_bound);
            if (!bb.fbar_prime_vanishes)
                worst_second = std::min(worst_second, analysis.lambda - bb.second_order_bound);
            worst_w = std::min(worst_w, (bb.w1 - bb.w2) / std::max(1.0, bb.w2));
            const double g2d = analysis.gbar * analysis.gbar + analysis.delta;
            chain_ok = chain_ok && g2d <= bb.omega * bb.omega + 1e-9 &&
                       bb.omega * bb.omega <= bb.total_variation * bb.total_variation + 1e-9;
        }
        rep.add_bound("oscillation-bound/" + nm.name, worst_osc, -1e-9,
                      std::to_string(scan.entries.size()) + " nodes");
        rep.add_bound("second-order-bound/" + nm.name, worst_second, -1e-9);
        rep.add_bound("weight-order-w1-w2/" + nm.name, worst_w, -1e-9);
        rep.add_flag("oscillation-tv-chain/" + nm.name, chain_ok);
        if (scans_out) scans_out->push_back({nm.name, nm.balance_lower, std::move(scan)});
    }
    return rep;
}

// ---------------------------------------------------------------------------
// examples: scanned balancedness minima against the published constants
// ---------------------------------------------------------------------------

inline SuiteReport suite_examples(const std::vector<ScanOutcome>* precomputed = nullptr) {
    SuiteReport rep;
    rep.suite = "examples";
    std::vector<ScanOutcome> local;
    if (!precomputed) {
        suite_bounds(&local);
        precomputed = &local;
    }
    auto find = [&](const std::string& name) -> const ScanOutcome* {
        for (const auto& s : *precomputed)
            if (s.name == name) return &s;
        return nullptr;
    };
    for (int k = 1; k <= 4; ++k) {
        const auto* s = find("poly_k" + std::to_string(k));
        if (!s) continue;
        rep.add_bound("balance/poly_k" + std::to_string(k), s->scan.lambda_min,
                      s->balance_lower - 1e-6,
                      "bound=" + std::to_string(s->balance_lower));
    }
    {
        const auto* s1 = find("sine_m1");
        if (s1) {
            const double c = s1->scan.lambda_min;  // trend constant fitted at m = 1
            for (int m : {1, 2, 4, 8}) {
                const auto* sm = find("sine_m" + std::to_string(m));
                const double bound = 0.5 * c * std::pow(m, -4.0 / 3.0);
                rep.add_bound("balance/sine_m" + std::to_string(m), sm->scan.lambda_min, bound,
                              "fitted c=" + std::to_string(c));
            }
        }
    }
    for (int j = 1; j <= 5; ++j) {
        const auto* s = find("friedman_x" + std::to_string(j));
        if (!s) continue;
        rep.add_bound("balance/friedman_x" + std::to_string(j), s->scan.lambda_min,
                      s->balance_lower - 1e-6,
                      "bound=" + std::to_string(s->balance_lower));
    }
    for (int b : {1, 5, 10}) {
        const auto* s = find("logistic_b" + std::to_string(b));
        if (!s) continue;
        rep.add_bound("balance/logistic_b" + std::to_string(b), s->scan.lambda_min,
                      s->balance_lower - 1e-6,
                      "bound=" + std::to_string(s->balance_lower));
    }
    // The two quantile envelopes beyond uniform, verified on an (a,b) x p grid.
    for (auto kind : {MarginalKind::Uniform, MarginalKind::Beta21, MarginalKind::BetaHalf1}) {
        auto env = quantile_envelope(kind);
        rep.add_residual("quantile-envelope/" + marginal_name(kind), envelope_violation(env, 50),
                         1e-12);
    }
    return rep;
}

// ---------------------------------------------------------------------------
// theorem1: subnode probability bounds on population trees
// ---------------------------------------------------------------------------

inline SuiteReport suite_theorem1(int depth = 8) {
    SuiteReport rep;
    rep.suite = "theorem1";
    auto zoo = example_model_zoo(6, 8, {1.0, 5.0, 10.0});
    for (const auto& nm : zoo) {
        if (nm.feature != 0) continue;  // one tree per model (friedman handled once)
        VerificationConfig cfg;
        cfg.depth = (nm.model->dim() > 1) ? depth : std::min(depth, 8);
        for (auto policy : {FeaturePolicy::Greedy, FeaturePolicy::RoundRobin}) {
            auto report = check_theorem1(*nm.model, cfg, policy);
            const char* pname = (policy == FeaturePolicy::Greedy) ? "greedy" : "roundrobin";
            rep.add_flag("subnode-bound/" + nm.name + "/" + pname, report.violations == 0,
                         std::to_string(report.bounds.size()) + " leaf-feature checks");
            // Product formula on the same tree.
            double worst = 0.0;
            for (const auto& r : check_product_formula(*nm.model, report.tree))
                worst = std::max(worst, r.residual);
            rep.add_residual("product-formula/" + nm.name + "/" + pname, worst, 1e-8);
            // Diameters restricted to the strong set never grow.
            std::vector<int> strong;
            for (int j = 0; j < nm.model->dim(); ++j)
                if (nm.model->depends_on(j)) strong.push_back(j);
            auto diam = diameter_diagnostic(report.tree, strong);
            bool mono = true;
            for (size_t k = 1; k < diam.size(); ++k) mono = mono && diam[k] <= diam[k - 1] + 1e-12;
            rep.add_flag("diameter-monotone/" + nm.name + "/" + pname, mono);
            // Selection-count consistency with the published balance bound.
            if (nm.balance_lower > 0.0) {
                std::vector<double> lower(nm.model->dim(), 0.0);
                lower[nm.feature] = nm.balance_lower;
                bool ok = true;
                for (const auto& r : check_mdi_selection_bound(report.tree, lower))
                    ok = ok && r.ok;
                rep.add_flag("selection-bound/" + nm.name + "/" + pname, ok);
            }
        }
    }
    // Analytic chain for the linear model: probability 2^-K, importance K.
    {
        SyntheticModelSpec s;
        s.family = ModelFamily::Linear;
        s.d = 1;
        s.beta = {1.0};
        auto model = population_model(s);
        double worst_prob = 0.0, worst_mdi = 0.0;
        bool chain_ok = true;
        for (int K = 1; K <= 10; ++K) {
            VerificationConfig cfg;
            cfg.depth = K;
            auto report = check_theorem1(*model, cfg, FeaturePolicy::RoundRobin);
            for (const auto& r : report.bounds) {
                worst_prob = std::max(worst_prob, std::fabs(r.probability - std::pow(2.0, -K)));
                worst_mdi = std::max(worst_mdi, std::fabs(r.mdi - K));
                chain_ok = chain_ok && r.probability <= std::exp(-K / 4.0) + 1e-9;
            }
        }
        rep.add_residual("linear-chain/probability-2^-K", worst_prob, 1e-5);
        rep.add_residual("linear-chain/importance-equals-K", worst_mdi, 1e-6);
        rep.add_flag("linear-chain/exp-bound-K<=10", chain_ok);
    }
    // Friedman diameters shrink strictly through depth 8 under greedy splits.
    {
        SyntheticModelSpec s;
        s.family = ModelFamily::Friedman1;
        s.d = 5;
        auto model = population_model(s);
        VerificationConfig cfg;
        cfg.depth = 8;
        auto tree = grow_population_tree(*model, cfg, FeaturePolicy::Greedy);
        auto diam = diameter_diagnostic(tree, {0, 1, 2, 3, 4});
        bool strict = true;
        for (size_t k = 1; k < diam.size(); ++k) strict = strict && diam[k] < diam[k - 1];
        rep.add_flag("diameter-strict/friedman-greedy-depth8", strict);
    }
    return rep;
}

// ---------------------------------------------------------------------------
// finite-sample: Monte Carlo node-count checks
// ---------------------------------------------------------------------------

inline SuiteReport suite_finite_sample(int n = 2000, int replications = 500,
                                       std::uint64_t seed = 20240617) {
    SuiteReport rep;
    rep.suite = "finite-sample";
    {
        SyntheticModelSpec s;
        s.family = ModelFamily::Linear;
        s.d = 1;
        s.beta = {1.0};
        auto model = population_model(s);
        auto r = check_finite_sample_counts(*model, 0, Box::unit(1), 1.0, 1.0, n, replications,
                                            seed);
        rep.add_bound("counts/linear-held-fraction", 1.0 - r.freq_counts_fail, 0.99,
                      "n=" + std::to_string(n) + " reps=" + std::to_string(replications));
        rep.add_flag("interval/linear-implication", r.implication_violations == 0);
    }
    {
        SyntheticModelSpec s;
        s.family = ModelFamily::Sine;
        s.d = 1;
        s.beta = {1.0};
        s.freq = {1};
        auto model = population_model(s);
        auto scan = global_balancedness_scan(*model, 0, interval_grid(32));
        auto r = check_finite_sample_counts(*model, 0, Box::unit(1), scan.lambda_min, 1.0, n,
                                            replications, seed + 1);
        const double sigma3 =
            3.0 * std::sqrt(std::max(r.counts_fail_bound * (1.0 - r.counts_fail_bound), 1e-4) /
                            replications);
        rep.add_residual("counts/sine-m1-failure-rate", r.freq_counts_fail,
                         r.counts_fail_bound + sigma3,
                         "gamma=" + std::to_string(r.gamma));
        rep.add_flag("interval/sine-m1-implication", r.implication_violations == 0);
    }
    {
        SyntheticModelSpec s;
        s.family = ModelFamily::Linear;
        s.d = 1;
        s.beta = {1.0};
        auto model = population_model(s);
        auto r = check_finite_sample_counts(*model, 0, Box::unit(1), 1.0, 1.0, 10, 50, seed + 2);
        rep.add_flag("skip/tiny-n-notice", r.skipped && !r.note.empty(), r.note);
    }
    return rep;
}

inline std::vector<SuiteReport> run_suites(const std::string& which) {
    std::vector<SuiteReport> out;
    const bool all = which == "all";
    if (all || which == "identities") out.push_back(suite_identities());
    if (all || which == "bounds" || which == "examples") {
        std::vector<ScanOutcome> scans;
        auto bounds = suite_bounds(&scans);
        if (all || which == "bounds") out.push_back(std::move(bounds));
        if (all || which == "examples") out.push_back(suite_examples(&scans));
    }
    if (all || which == "theorem1") out.push_back(suite_theorem1());
    if (all || which == "finite-sample") out.push_back(suite_finite_sample());
    if (out.empty()) throw SpecError("unknown verification suite: " + which);
    return out;
}

} // namespace cartsplit
