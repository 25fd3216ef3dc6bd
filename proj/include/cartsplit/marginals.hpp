#pragma once
#include <cmath>
#include <stdexcept>
#include <string>

namespace cartsplit {

struct SpecError : std::runtime_error {
    explicit SpecError(const std::string& what) : std::runtime_error(what) {}
};

// Supported per-coordinate input distributions on [0,1]. Closed-form cdf /
// pdf / quantile for each; coordinates are independent.
enum class MarginalKind { Uniform, Beta21, BetaHalf1 };

inline std::string marginal_name(MarginalKind k) {
    switch (k) {
        case MarginalKind::Uniform: return "uniform";
        case MarginalKind::Beta21: return "beta(2,1)";
        case MarginalKind::BetaHalf1: return "beta(1/2,1)";
    }
    return "?";
}

inline MarginalKind marginal_from_name(const std::string& s) {
    if (s == "uniform") return MarginalKind::Uniform;
    if (s == "beta(2,1)" || s == "beta21") return MarginalKind::Beta21;
    if (s == "beta(1/2,1)" || s == "beta12") return MarginalKind::BetaHalf1;
    throw SpecError("unsupported distribution: " + s);
}

struct Marginal {
    MarginalKind kind = MarginalKind::Uniform;

    double cdf(double x) const {
        switch (kind) {
            case MarginalKind::Uniform: return x;
            case MarginalKind::Beta21: return x * x;
            case MarginalKind::BetaHalf1: return std::sqrt(x);
        }
        return x;
    }
    double pdf(double x) const {
        switch (kind) {
            case MarginalKind::Uniform: return 1.0;
            case MarginalKind::Beta21: return 2.0 * x;
            case MarginalKind::BetaHalf1: return 0.5 / std::sqrt(x);
        }
        return 1.0;
    }
    double quantile(double p) const {
        switch (kind) {
            case MarginalKind::Uniform: return p;
            case MarginalKind::Beta21: return std::sqrt(p);
            case MarginalKind::BetaHalf1: return p * p;
        }
        return p;
    }
};

// Marginal restricted to a subnode [a,b]: the conditional law of X given
// X in [a,b].
struct ConditionalMarginal {
    Marginal base;
    double a = 0.0, b = 1.0;
    double ca = 0.0, mass = 1.0;

    ConditionalMarginal() = default;
    ConditionalMarginal(Marginal m, double lo, double hi) : base(m), a(lo), b(hi) {
        ca = base.cdf(a);
        mass = base.cdf(b) - ca;
    }
    double cdf(double s) const {
        if (s <= a) return 0.0;
        if (s >= b) return 1.0;
        return (base.cdf(s) - ca) / mass;
    }
    double pdf(double s) const { return base.pdf(s) / mass; }
    double quantile(double p) const { return base.quantile(ca + p * mass); }
};

} // namespace cartsplit
