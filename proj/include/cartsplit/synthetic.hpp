#pragma once
#include <cmath>
#include <string>
#include <vector>

#include "json.hpp"

#include "cartsplit/dataset.hpp"
#include "cartsplit/marginals.hpp"
#include "cartsplit/rng.hpp"

namespace cartsplit {

enum class ModelFamily { Linear, Polynomial, ShiftedPolynomial, Sine, Friedman1, Logistic };

inline std::string family_name(ModelFamily f) {
    switch (f) {
        case ModelFamily::Linear: return "linear";
        case ModelFamily::Polynomial: return "polynomial";
        case ModelFamily::ShiftedPolynomial: return "shifted_polynomial";
        case ModelFamily::Sine: return "sine";
        case ModelFamily::Friedman1: return "friedman1";
        case ModelFamily::Logistic: return "logistic";
    }
    return "?";
}

// Description of a synthetic data-generating process on [0,1]^d with
// independent coordinates.
struct SyntheticModelSpec {
    ModelFamily family = ModelFamily::Linear;
    int d = 1;
    std::vector<double> beta;   // per-coordinate coefficients
    std::vector<int> degree;    // polynomial k_j
    std::vector<double> shift;  // shifted polynomial alpha_j
    std::vector<int> freq;      // sine m_j
    double beta0 = 0.0;         // logistic intercept
    double noise_sd = 0.0;
    std::vector<MarginalKind> distribution;  // empty => all uniform

    bool is_classification() const { return family == ModelFamily::Logistic; }

    MarginalKind marginal_kind(int j) const {
        if (distribution.empty()) return MarginalKind::Uniform;
        if (distribution.size() == 1) return distribution[0];
        return distribution[static_cast<size_t>(j)];
    }

    void validate() const {
        if (d < 1) throw SpecError("d must be >= 1");
        if (noise_sd < 0.0) throw SpecError("noise_sd must be >= 0");
        auto need = [&](const std::vector<double>& v, const char* name) {
            if (static_cast<int>(v.size()) != d)
                throw SpecError(std::string(name) + " must have length d");
        };
        switch (family) {
            case ModelFamily::Linear:
            case ModelFamily::Logistic:
                need(beta, "beta");
                break;
            case ModelFamily::Polynomial:
                need(beta, "beta");
                if (static_cast<int>(degree.size()) != d) throw SpecError("k must have length d");
                for (int k : degree)
                    if (k < 0) throw SpecError("polynomial degree must be >= 0");
                break;
            case ModelFamily::ShiftedPolynomial:
                need(beta, "beta");
                need(shift, "shift");
                if (static_cast<int>(degree.size()) != d) throw SpecError("k must have length d");
                break;
            case ModelFamily::Sine:
                need(beta, "beta");
                if (static_cast<int>(freq.size()) != d) throw SpecError("m must have length d");
                break;
            case ModelFamily::Friedman1:
                if (d < 5) throw SpecError("friedman1 requires d >= 5");
                break;
        }
        if (!distribution.empty() && distribution.size() != 1 &&
            static_cast<int>(distribution.size()) != d)
            throw SpecError("distribution must be scalar or length d");
    }

    // Regression surface f(x); for logistic this is P[Y=+1|x] mapped to the
    // conditional mean of the +-1 label, 2p(x)-1.
    double f(const double* x) const {
        switch (family) {
            case ModelFamily::Linear: {
                double s = 0.0;
                for (int j = 0; j < d; ++j) s += beta[j] * x[j];
                return s;
            }
            case ModelFamily::Polynomial: {
                double s = 0.0;
                for (int j = 0; j < d; ++j) s += beta[j] * std::pow(x[j], degree[j]);
                return s;
            }
            case ModelFamily::ShiftedPolynomial: {
                double s = 0.0;
                for (int j = 0; j < d; ++j) s += beta[j] * std::pow(x[j] - shift[j], degree[j]);
                return s;
            }
            case ModelFamily::Sine: {
                double s = 0.0;
                for (int j = 0; j < d; ++j)
                    s += beta[j] * std::sin(2.0 * M_PI * freq[j] * x[j]);
                return s;
            }
            case ModelFamily::Friedman1:
                return 10.0 * std::sin(M_PI * x[0] * x[1]) + 20.0 * (x[2] - 0.5) * (x[2] - 0.5) +
                       10.0 * x[3] + 5.0 * x[4];
            case ModelFamily::Logistic:
                return std::tanh(0.5 * linear_index(x));
        }
        return 0.0;
    }

    double f(const std::vector<double>& x) const { return f(x.data()); }

    double linear_index(const double* x) const {
        double z = beta0;
        for (int j = 0; j < d; ++j) z += beta[j] * x[j];
        return z;
    }

    // P[Y=+1 | x] for the logistic family.
    double positive_probability(const double* x) const {
        return 1.0 / (1.0 + std::exp(-linear_index(x)));
    }

    // Indices of coordinates the surface actually depends on.
    std::vector<int> strong_set() const {
        std::vector<int> s;
        switch (family) {
            case ModelFamily::Friedman1:
                s = {0, 1, 2, 3, 4};
                break;
            case ModelFamily::Polynomial:
            case ModelFamily::ShiftedPolynomial:
                for (int j = 0; j < d; ++j)
                    if (beta[j] != 0.0 && degree[j] >= 1) s.push_back(j);
                break;
            case ModelFamily::Sine:
                for (int j = 0; j < d; ++j)
                    if (beta[j] != 0.0 && freq[j] >= 1) s.push_back(j);
                break;
            default:
                for (int j = 0; j < d; ++j)
                    if (beta[j] != 0.0) s.push_back(j);
        }
        return s;
    }
};

// Deterministic sampler: coordinates via inverse-cdf of uniforms, then noise
// (continuous) or a label draw (logistic), row by row.
inline Dataset generate(const SyntheticModelSpec& spec, int n, std::uint64_t seed) {
    spec.validate();
    if (n < 1) throw SpecError("n must be >= 1");
    Rng rng(seed);
    Dataset data;
    data.columns.assign(spec.d, std::vector<double>(n));
    data.response.resize(n);
    data.kind = spec.is_classification() ? ResponseKind::Binary : ResponseKind::Continuous;
    for (int j = 0; j < spec.d; ++j) data.names.push_back("x" + std::to_string(j + 1));
    std::vector<double> x(spec.d);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < spec.d; ++j) {
            Marginal m{spec.marginal_kind(j)};
            x[j] = m.quantile(rng.uniform01());
            data.columns[j][i] = x[j];
        }
        if (spec.is_classification()) {
            const double p = spec.positive_probability(x.data());
            data.response[i] = (rng.uniform01() < p) ? 1.0 : -1.0;
        } else {
            double y = spec.f(x.data());
            if (spec.noise_sd > 0.0) y += spec.noise_sd * rng.normal();
            data.response[i] = y;
        }
    }
    data.validate();
    return data;
}

// ---------------------------------------------------------------------------
// JSON round trip for model specs
// ---------------------------------------------------------------------------

inline nlohmann::json spec_to_json(const SyntheticModelSpec& spec) {
    nlohmann::json j;
    j["family"] = family_name(spec.family);
    j["d"] = spec.d;
    if (!spec.beta.empty()) j["beta"] = spec.beta;
    if (!spec.degree.empty()) j["k"] = spec.degree;
    if (!spec.shift.empty()) j["shift"] = spec.shift;
    if (!spec.freq.empty()) j["m"] = spec.freq;
    if (spec.family == ModelFamily::Logistic) j["beta0"] = spec.beta0;
    j["noise_sd"] = spec.noise_sd;
    std::vector<std::string> dist;
    for (int k = 0; k < spec.d; ++k) dist.push_back(marginal_name(spec.marginal_kind(k)));
    j["distribution"] = dist;
    return j;
}

inline SyntheticModelSpec spec_from_json(const nlohmann::json& j) {
    SyntheticModelSpec spec;
    const std::string fam = j.at("family").get<std::string>();
    if (fam == "linear") spec.family = ModelFamily::Linear;
    else if (fam == "polynomial") spec.family = ModelFamily::Polynomial;
    else if (fam == "shifted_polynomial") spec.family = ModelFamily::ShiftedPolynomial;
    else if (fam == "sine") spec.family = ModelFamily::Sine;
    else if (fam == "friedman1") spec.family = ModelFamily::Friedman1;
    else if (fam == "logistic") spec.family = ModelFamily::Logistic;
    else throw SpecError("unknown family: " + fam);

    auto get_doubles = [&](const char* key) {
        std::vector<double> v;
        if (!j.contains(key)) return v;
        if (j[key].is_number()) v.push_back(j[key].get<double>());
        else v = j[key].get<std::vector<double>>();
        return v;
    };
    auto get_ints = [&](const char* key) {
        std::vector<int> v;
        if (!j.contains(key)) return v;
        if (j[key].is_number()) v.push_back(j[key].get<int>());
        else v = j[key].get<std::vector<int>>();
        return v;
    };
    spec.beta = get_doubles("beta");
    spec.degree = get_ints("k");
    spec.shift = get_doubles("shift");
    spec.freq = get_ints("m");
    if (j.contains("beta0")) spec.beta0 = j["beta0"].get<double>();
    if (j.contains("noise_sd")) spec.noise_sd = j["noise_sd"].get<double>();
    if (j.contains("d")) spec.d = j["d"].get<int>();
    else {
        size_t n = std::max({spec.beta.size(), spec.degree.size(), spec.freq.size(),
                             spec.shift.size()});
        spec.d = (spec.family == ModelFamily::Friedman1) ? 5 : static_cast<int>(std::max<size_t>(n, 1));
    }
    // Scalar parameters broadcast across coordinates.
    auto broadcast_d = [&](std::vector<double>& v) {
        if (v.size() == 1 && spec.d > 1) v.assign(spec.d, v[0]);
    };
    auto broadcast_i = [&](std::vector<int>& v) {
        if (v.size() == 1 && spec.d > 1) v.assign(spec.d, v[0]);
    };
    broadcast_d(spec.beta);
    broadcast_d(spec.shift);
    broadcast_i(spec.degree);
    broadcast_i(spec.freq);
    if (j.contains("distribution")) {
        const auto& dj = j["distribution"];
        if (dj.is_string()) {
            spec.distribution = {marginal_from_name(dj.get<std::string>())};
        } else {
            for (const auto& e : dj)
                spec.distribution.push_back(marginal_from_name(e.get<std::string>()));
        }
    }
    spec.validate();
    return spec;
}

} // namespace cartsplit
