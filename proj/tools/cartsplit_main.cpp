// cartsplit: CART trees and forests with an exact split oracle, importance
// reports, and the population-level verification suites.
//
// Subcommands: fit, predict, figure1, population, verify.
// Exit codes: 0 success, 1 usage, 2 data error, 3 verification failure.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "cartsplit/forest.hpp"
#include "cartsplit/importance.hpp"
#include "cartsplit/split_analysis.hpp"
#include "cartsplit/verify.hpp"

using nlohmann::json;
using namespace cartsplit;

namespace {

std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::string file_digest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return "missing";
    std::ostringstream ss;
    ss << in.rdbuf();
    return hex64(fnv1a64(ss.str()));
}

// Atomic write: temp file in the target directory, then rename.
void write_file_atomic(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw DataError("cannot write: " + tmp);
        out << content;
    }
    std::filesystem::rename(tmp, path);
}

struct ManifestWriter {
    json manifest;
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

    ManifestWriter(const std::string& command, const json& config, std::uint64_t seed) {
        manifest["command"] = command;
        manifest["config"] = config;
        manifest["config_digest"] = hex64(fnv1a64(config.dump()));
        manifest["seed"] = seed;
        manifest["inputs"] = json::array();
        manifest["outputs"] = json::array();
    }
    void add_input(const std::string& path) {
        manifest["inputs"].push_back({{"path", path}, {"digest", file_digest(path)}});
    }
    void add_output(const std::string& path) { manifest["outputs"].push_back(path); }
    void write(const std::string& out_base) {
        manifest["wall_ms"] =
            std::chrono::duration_cast<std::chrono::milliseconds>(
                std::chrono::steady_clock::now() - start)
                .count();
        write_file_atomic(out_base + ".manifest.json", manifest.dump(2) + "\n");
    }
};

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

json standardization_to_json(const Standardization& st) {
    return {{"mins", st.mins}, {"maxs", st.maxs}};
}

Standardization standardization_from_json(const json& j) {
    Standardization st;
    st.mins = j.at("mins").get<std::vector<double>>();
    st.maxs = j.at("maxs").get<std::vector<double>>();
    return st;
}

// ---------------------------------------------------------------------------

int cmd_fit(const std::string& data_path, const std::string& response, bool standardize,
            bool classify, bool forest_mode, ForestConfig fcfg, GrowthConfig gcfg,
            std::uint64_t seed, const std::string& out) {
    json cfg{{"data", data_path},         {"response", response},
             {"standardize", standardize}, {"classify", classify},
             {"forest", forest_mode},      {"ntree", fcfg.ntree},
             {"mtry", fcfg.mtry},          {"nodesize", fcfg.nodesize},
             {"maxnodes", fcfg.maxnodes},  {"bootstrap", fcfg.bootstrap},
             {"max_depth", gcfg.max_depth}, {"min_node_size", gcfg.min_node_size},
             {"min_decrease", gcfg.min_relative_decrease}};
    ManifestWriter manifest("fit", cfg, seed);
    manifest.add_input(data_path);
    auto loaded = load_csv(data_path, response, standardize,
                           classify ? ResponseKind::Binary : ResponseKind::Continuous,
                           !classify);
    json model;
    model["names"] = loaded.data.names;
    model["standardization"] = standardization_to_json(loaded.standardization);
    if (forest_mode) {
        fcfg.seed = seed;
        fcfg.maxnodes = gcfg.max_leaves;
        Forest forest = fit_forest(loaded.data, fcfg);
        model["type"] = "forest";
        model["forest"] = forest_to_json(forest);
    } else {
        Tree tree = grow_tree(loaded.data, gcfg, seed);
        model["type"] = "tree";
        model["tree"] = tree_to_json(tree);
    }
    write_file_atomic(out, model.dump(2) + "\n");
    manifest.add_output(out);
    manifest.write(out);
    std::cout << "wrote " << out << "\n";
    return 0;
}

int cmd_predict(const std::string& model_path, const std::string& data_path,
                const std::string& response, const std::string& out) {
    ManifestWriter manifest("predict", json{{"model", model_path}, {"data", data_path}}, 0);
    manifest.add_input(model_path);
    manifest.add_input(data_path);
    std::ifstream in(model_path);
    if (!in) throw DataError("cannot open model: " + model_path);
    json model = json::parse(in);
    const auto st = standardization_from_json(model.at("standardization"));

    // Raw-unit load; the stored fit-time affine map is applied per column.
    RawTable table = load_csv_table(data_path);
    if (!response.empty()) table.take_column(response);
    const int d = static_cast<int>(table.columns.size());
    const int n = table.n();
    if (static_cast<size_t>(d) != st.mins.size())
        throw DataError("feature count mismatch: model expects " +
                        std::to_string(st.mins.size()) + ", file has " + std::to_string(d));
    for (int j = 0; j < d; ++j)
        for (auto& v : table.columns[j]) v = st.apply(j, v);

    std::ostringstream csv;
    csv << "prediction\n";
    std::vector<double> x(d);
    if (model.at("type") == "forest") {
        Forest forest = forest_from_json(model.at("forest"));
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < d; ++j) x[j] = table.columns[j][i];
            csv << format_double(forest.predict(x)) << "\n";
        }
    } else {
        Tree tree = tree_from_json(model.at("tree"));
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < d; ++j) x[j] = table.columns[j][i];
            csv << format_double(tree.predict(x)) << "\n";
        }
    }
    write_file_atomic(out, csv.str());
    manifest.add_output(out);
    manifest.write(out);
    std::cout << "wrote " << out << "\n";
    return 0;
}

int cmd_figure1(const std::string& data_path, const std::string& response, int bootstrap,
                double min_decrease, std::uint64_t seed, const std::string& out) {
    json cfg{{"data", data_path},
             {"response", response},
             {"bootstrap", bootstrap},
             {"min_decrease", min_decrease}};
    ManifestWriter manifest("figure1", cfg, seed);
    manifest.add_input(data_path);
    auto loaded = load_csv(data_path, response);
    GrowthConfig gcfg;
    gcfg.min_relative_decrease = min_decrease;
    auto stats = figure1_stats(loaded.data, bootstrap, gcfg, seed);
    auto rows = figure1_report(stats, loaded.data.names);
    std::ostringstream csv;
    csv << "feature,mdi,sublen\n";
    for (const auto& r : rows)
        csv << r.name << "," << format_double(r.mdi_scaled) << ","
            << format_double(r.sublen_scaled) << "\n";
    write_file_atomic(out, csv.str());
    manifest.add_output(out);
    // Unscaled statistics in tidy form alongside the barplot data.
    const std::string tidy = out + ".tidy.csv";
    write_file_atomic(tidy, importance_tidy_csv(stats, loaded.data.names));
    manifest.add_output(tidy);
    manifest.write(out);
    std::cout << "wrote " << out << " and " << tidy << "\n";
    return 0;
}

int cmd_population(const std::string& spec_path, int feature_1based, double alpha,
                   int grid_points, std::vector<double> lower, std::vector<double> upper,
                   std::uint64_t seed, const std::string& out_base) {
    json cfg{{"model", spec_path}, {"feature", feature_1based}, {"alpha", alpha},
             {"grid", grid_points}};
    ManifestWriter manifest("population", cfg, seed);
    manifest.add_input(spec_path);
    std::ifstream in(spec_path);
    if (!in) throw DataError("cannot open model spec: " + spec_path);
    auto spec = spec_from_json(json::parse(in));
    auto model = population_model(spec);
    Box node = Box::unit(model->dim());
    if (!lower.empty()) {
        if (static_cast<int>(lower.size()) != model->dim() ||
            static_cast<int>(upper.size()) != model->dim())
            throw SpecError("--lower/--upper must list one bound per coordinate");
        node.lo = lower;
        node.hi = upper;
    }
    const int feature = feature_1based - 1;
    if (feature < 0 || feature >= model->dim()) throw SpecError("feature index out of range");

    Slice slice(*model, feature, node);
    auto analysis = penalized_optimal_split(slice, alpha, grid_points);

    json j;
    j["model"] = spec_to_json(spec);
    j["node"] = {{"lower", node.lo}, {"upper", node.hi}};
    j["feature"] = feature_1based;
    j["alpha"] = alpha;
    j["degenerate"] = analysis.degenerate;
    if (!analysis.degenerate) {
        j["s_star"] = analysis.s_star;
        j["delta"] = analysis.delta;
        j["fbar"] = analysis.fbar;
        j["gbar"] = analysis.gbar;
        j["xi"] = analysis.xi;
        j["density"] = analysis.density;
        j["prob_left"] = analysis.prob_left;
        j["lambda"] = analysis.lambda;
        json ties = json::array();
        for (const auto& c : analysis.near_ties) ties.push_back({{"s", c.x}, {"value", c.value}});
        j["near_ties"] = ties;
        auto fp = verify_fixed_point(analysis);
        j["residuals"] = {{"fixed_point", fp.fixed_point_residual},
                          {"balance_identity", fp.lambda_residual}};
        if (alpha == 0.0) {
            auto bb = balancedness_bounds(slice, analysis);
            j["bounds"] = {{"oscillation", bb.oscillation_bound},
                           {"second_order", bb.second_order_bound},
                           {"omega", bb.omega},
                           {"total_variation", bb.total_variation},
                           {"w1", bb.w1},
                           {"w2", bb.w2}};
        } else {
            auto pb = penalized_bounds(slice, analysis);
            j["bounds"] = {{"first_order", pb.first_order},
                           {"second_order", pb.second_order},
                           {"second_applicable", pb.second_applicable}};
        }
    }
    // Criterion curve, embedded in the JSON and emitted as plot-ready CSV.
    const double lo = node.lo[feature], hi = node.hi[feature];
    auto curve = delta_curve(slice, uniform_grid(lo, hi, grid_points));
    json curve_json = json::array();
    std::ostringstream csv;
    csv << "s,delta,delta_decomposition\n";
    for (const auto& pt : curve) {
        curve_json.push_back({{"s", pt.s}, {"delta", pt.delta}});
        csv << format_double(pt.s) << "," << format_double(pt.delta) << ","
            << format_double(pt.delta_decomposition) << "\n";
    }
    j["curve"] = curve_json;
    const std::string json_path = out_base + ".json";
    write_file_atomic(json_path, j.dump(2) + "\n");
    manifest.add_output(json_path);
    const std::string csv_path = out_base + "_curve.csv";
    write_file_atomic(csv_path, csv.str());
    manifest.add_output(csv_path);
    manifest.write(out_base);
    std::cout << "wrote " << json_path << " and " << csv_path << "\n";
    return analysis.degenerate ? 0 : 0;
}

int cmd_verify(const std::string& suite, const std::string& out) {
    ManifestWriter manifest("verify", json{{"suite", suite}}, 0);
    auto reports = run_suites(suite);
    json bundle;
    bundle["suites"] = json::array();
    int failures = 0;
    for (const auto& rep : reports) {
        bundle["suites"].push_back(suite_to_json(rep));
        failures += rep.failures();
        for (const auto& c : rep.claims) {
            std::cout << (c.status == "fail" ? "[FAIL] " : (c.status == "skip" ? "[SKIP] "
                                                                               : "[ok]   "))
                      << rep.suite << "/" << c.id;
            if (c.status == "fail")
                std::cout << "  value=" << c.value << " threshold=" << c.threshold;
            std::cout << "\n";
        }
        std::cout << "suite " << rep.suite << ": " << (rep.passed() ? "PASS" : "FAIL") << " ("
                  << rep.claims.size() << " claims)\n";
    }
    bundle["passed"] = failures == 0;
    if (!out.empty()) {
        write_file_atomic(out, bundle.dump(2) + "\n");
        manifest.add_output(out);
        manifest.write(out);
        std::cout << "wrote " << out << "\n";
    }
    if (failures > 0) {
        std::cout << failures << " failed claim(s)\n";
        return 3;
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"CART split analysis: trees, forests, importance, and the population oracle"};
    app.require_subcommand(1);

    std::string data_path, response, model_path, spec_path, out, suite = "all";
    std::uint64_t seed = 1;
    bool no_standardize = false, classify = false, forest_mode = false, no_bootstrap = false;
    ForestConfig fcfg;
    GrowthConfig gcfg;
    int bootstrap_trees = 1000;
    int feature = 1;
    double alpha = 0.0;
    int grid_points = 512;
    std::vector<double> lower, upper;

    auto* fit = app.add_subcommand("fit", "fit a tree or forest from a CSV dataset");
    fit->add_option("--data", data_path, "CSV file with a header row")->required();
    fit->add_option("--response", response, "response column name")->required();
    fit->add_flag("--no-standardize", no_standardize, "features are already in [0,1]");
    fit->add_flag("--classify", classify, "treat the response as +-1 labels");
    fit->add_flag("--forest", forest_mode, "fit a bootstrap forest instead of one tree");
    fit->add_option("--ntree", fcfg.ntree, "number of trees");
    fit->add_option("--mtry", fcfg.mtry, "features tried per node (0: default)");
    fit->add_option("--nodesize", fcfg.nodesize, "minimum rows per leaf (forest)");
    fit->add_option("--maxnodes", gcfg.max_leaves, "maximum number of leaves");
    fit->add_flag("--no-bootstrap", no_bootstrap, "grow forest trees on the full sample");
    fit->add_option("--max-depth", gcfg.max_depth, "maximum tree depth");
    fit->add_option("--min-node-size", gcfg.min_node_size, "minimum rows per leaf (tree)");
    fit->add_option("--min-decrease", gcfg.min_relative_decrease,
                    "cp threshold: weighted decrease / root impurity");
    fit->add_option("--seed", seed, "random seed");
    fit->add_option("--out", out, "output model file")->required();

    auto* predict = app.add_subcommand("predict", "predict with a fitted model");
    predict->add_option("--model", model_path, "model JSON from fit")->required();
    predict->add_option("--data", data_path, "CSV file of feature rows")->required();
    predict->add_option("--response", response,
                        "response column to ignore, when present in the file");
    predict->add_option("--out", out, "output CSV of predictions")->required();

    auto* fig = app.add_subcommand("figure1",
                                   "bootstrap barplot data: MDI vs median subnode length");
    fig->add_option("--data", data_path, "CSV file with a header row")->required();
    fig->add_option("--response", response, "response column name")->required();
    fig->add_option("--bootstrap", bootstrap_trees, "number of bootstrap trees");
    fig->add_option("--min-decrease", gcfg.min_relative_decrease, "cp threshold");
    fig->add_option("--seed", seed, "random seed");
    fig->add_option("--out", out, "output CSV (feature,mdi,sublen)")->required();

    auto* pop = app.add_subcommand("population", "analytic split analysis for a model spec");
    pop->add_option("--model", spec_path, "model spec JSON")->required();
    pop->add_option("--feature", feature, "coordinate to split (1-based)");
    pop->add_option("--alpha", alpha, "balancedness penalty exponent");
    pop->add_option("--grid", grid_points, "criterion grid resolution");
    pop->add_option("--lower", lower, "node lower bounds (one per coordinate)");
    pop->add_option("--upper", upper, "node upper bounds (one per coordinate)");
    pop->add_option("--seed", seed, "random seed (recorded in the manifest)");
    pop->add_option("--out", out, "output path base")->required();

    auto* verify = app.add_subcommand("verify", "run the verification suites");
    verify->add_option("--suite", suite,
                       "identities, bounds, theorem1, finite-sample, examples, or all");
    verify->add_option("--out", out, "output JSON report bundle");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*fit) {
            fcfg.bootstrap = !no_bootstrap;
            return cmd_fit(data_path, response, !no_standardize, classify, forest_mode, fcfg,
                           gcfg, seed, out);
        }
        if (*predict) return cmd_predict(model_path, data_path, response, out);
        if (*fig)
            return cmd_figure1(data_path, response, bootstrap_trees,
                               gcfg.min_relative_decrease, seed, out);
        if (*pop)
            return cmd_population(spec_path, feature, alpha, grid_points, lower, upper, seed,
                                  out);
        if (*verify) return cmd_verify(suite, out);
    } catch (const SpecError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return (*verify) ? 1 : 2;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
