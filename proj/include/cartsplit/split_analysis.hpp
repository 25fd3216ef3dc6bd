#pragma once
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "cartsplit/optimize.hpp"
#include "cartsplit/population.hpp"

namespace cartsplit {

struct DeltaSample {
    double s = 0.0;
    double delta = 0.0;                // product form
    double delta_decomposition = 0.0;  // weighted-variance form
};

// Population split analysis at one (model, node, feature). alpha = 0 is the
// plain criterion; alpha > 0 multiplies it by (4 P_L P_R)^alpha.
struct SplitAnalysisResult {
    int feature = -1;
    Box node;
    double alpha = 0.0;
    bool degenerate = false;
    double s_star = 0.0;
    double delta = 0.0;  // value of the (possibly penalized) objective at s_star
    double fbar = 0.0;
    double gbar = 0.0;
    double xi = 0.0;
    double density = 0.0;
    double prob_left = 0.0;
    double lambda = 0.0;  // 4 P_L P_R at s_star
    std::vector<MaximumCandidate> near_ties;
};

// Both criterion forms on a grid of split points.
inline std::vector<DeltaSample> delta_curve(Slice& slice, const std::vector<double>& grid) {
    std::vector<DeltaSample> out;
    out.reserve(grid.size());
    for (double s : grid) {
        DeltaSample d;
        d.s = s;
        d.delta = slice.delta(s);
        d.delta_decomposition = slice.delta_decomposition(s);
        out.push_back(d);
    }
    return out;
}

inline std::vector<double> uniform_grid(double lo, double hi, int n) {
    std::vector<double> g(n);
    for (int i = 0; i < n; ++i) g[i] = lo + (hi - lo) * (i + 0.5) / n;
    return g;
}

namespace detail {

// Sign-carrying first derivative of the (penalized) criterion, up to the
// positive factor (4 P_L P_R)^alpha:
//   S(s) = Delta'(s) + alpha p (1 - 2P) Delta(s) / (P (1-P))
// with Delta'(s) = Xi p [2 P (1-P) Gbar - Xi (1 - 2P)] / (P(1-P))^2.
inline double criterion_derivative_sign(Slice& slice, double s, double alpha) {
    const double p = slice.prob_left(s);
    const double q = 1.0 - p;
    const double dens = slice.density(s);
    const double xi = slice.xi(s);
    const double gbar = slice.gbar(s);
    const double pq = p * q;
    double v = xi * dens * (2.0 * pq * gbar - xi * (1.0 - 2.0 * p)) / (pq * pq);
    if (alpha != 0.0) {
        const double delta = xi * xi / pq;
        v += alpha * dens * (1.0 - 2.0 * p) * delta / pq;
    }
    return v;
}

// Refine a golden-section maximum by bisecting the closed-form derivative,
// which locates the stationary point far beyond the sqrt(eps) limit of
// value-only search. Falls back to the input when no sign change brackets it.
inline MaximumCandidate polish_maximum(Slice& slice, double alpha, MaximumCandidate cand,
                                       double lo, double hi,
                                       const std::function<double(double)>& objective) {
    const double width = hi - lo;
    double h = 1e-7 * width;
    double bl = cand.x, br = cand.x;
    double sl = 0.0, sr = 0.0;
    bool bracketed = false;
    for (int it = 0; it < 6 && !bracketed; ++it, h *= 8.0) {
        bl = std::max(lo, cand.x - h);
        br = std::min(hi, cand.x + h);
        sl = criterion_derivative_sign(slice, bl, alpha);
        sr = criterion_derivative_sign(slice, br, alpha);
        bracketed = (sl > 0.0 && sr < 0.0);
    }
    if (!bracketed) return cand;
    for (int it = 0; it < 90 && (br - bl) > 1e-16 * width; ++it) {
        const double mid = 0.5 * (bl + br);
        const double sm = criterion_derivative_sign(slice, mid, alpha);
        if (sm > 0.0)
            bl = mid;
        else
            br = mid;
    }
    MaximumCandidate out;
    out.x = 0.5 * (bl + br);
    out.value = objective(out.x);
    return out;
}

} // namespace detail

// Dense grid over the guarded probability range, golden-section refinement on
// every local-maximum bracket, first-order polish via the closed-form
// derivative, near-ties resolved to the smallest split.
inline SplitAnalysisResult penalized_optimal_split(Slice& slice, double alpha,
                                                   int grid_points = 512) {
    if (alpha < 0.0) throw SpecError("penalty exponent alpha must be >= 0");
    SplitAnalysisResult out;
    out.feature = slice.feature();
    out.node = slice.node();
    out.alpha = alpha;

    const double lo = std::max(slice.a(), slice.quantile(Slice::kEdgeGuard));
    const double hi = std::min(slice.b(), slice.quantile(1.0 - Slice::kEdgeGuard));

    // Flat-direction detection on the raw partial dependence scale.
    double sup_g = 0.0, sup_f = 0.0;
    {
        const int m = std::max(grid_points, 128);
        for (int i = 0; i <= m; ++i) {
            const double s = lo + (hi - lo) * i / m;
            sup_g = std::max(sup_g, std::fabs(slice.gbar(s)));
            sup_f = std::max(sup_f, std::fabs(slice.fbar(s)));
        }
    }
    if (sup_g <= 1e-10 * std::max(1.0, sup_f)) {
        out.degenerate = true;
        out.s_star = 0.5 * (slice.a() + slice.b());
        out.fbar = slice.fbar(out.s_star);
        out.gbar = 0.0;
        out.prob_left = slice.prob_left(out.s_star);
        out.lambda = 4.0 * out.prob_left * (1.0 - out.prob_left);
        return out;
    }

    std::function<double(double)> objective = [&](double s) {
        const double d = slice.delta(s);
        if (alpha == 0.0) return d;
        const double p = slice.prob_left(s);
        return std::pow(4.0 * p * (1.0 - p), alpha) * d;
    };
    auto res = grid_refine_max(objective, lo, hi, grid_points, 1e-9);
    for (auto& c : res.near_ties) c = detail::polish_maximum(slice, alpha, c, lo, hi, objective);
    std::sort(res.near_ties.begin(), res.near_ties.end(),
              [](const MaximumCandidate& x, const MaximumCandidate& y) { return x.x < y.x; });
    double vmax = res.best.value;
    for (const auto& c : res.near_ties) vmax = std::max(vmax, c.value);
    std::vector<MaximumCandidate> ties;
    for (const auto& c : res.near_ties)
        if (c.value >= vmax - 1e-9 * std::max(std::fabs(vmax), 1e-300)) ties.push_back(c);
    out.near_ties = std::move(ties);
    out.s_star = out.near_ties.front().x;
    out.delta = out.near_ties.front().value;
    if (!(out.delta > 0.0)) {
        out.degenerate = true;
        return out;
    }
    out.fbar = slice.fbar(out.s_star);
    out.gbar = slice.gbar(out.s_star);
    out.xi = slice.xi(out.s_star);
    out.density = slice.density(out.s_star);
    out.prob_left = slice.prob_left(out.s_star);
    out.lambda = 4.0 * out.prob_left * (1.0 - out.prob_left);
    return out;
}

inline SplitAnalysisResult optimal_split(Slice& slice, int grid_points = 512) {
    return penalized_optimal_split(slice, 0.0, grid_points);
}

// ---------------------------------------------------------------------------
// Identity and bound checks at the optimum
// ---------------------------------------------------------------------------

struct FixedPointReport {
    double fixed_point_residual = 0.0;  // |P_L - (1 +- sqrt(G^2/(G^2+D)))/2|, best sign
    double lambda_residual = 0.0;       // |lambda - D/(G^2+D)|
};

inline FixedPointReport verify_fixed_point(const SplitAnalysisResult& a) {
    if (a.degenerate) throw SpecError("verify_fixed_point: degenerate analysis");
    FixedPointReport r;
    const double g2 = a.gbar * a.gbar;
    const double root = std::sqrt(g2 / (g2 + a.delta));
    const double r_plus = std::fabs(a.prob_left - 0.5 * (1.0 + root));
    const double r_minus = std::fabs(a.prob_left - 0.5 * (1.0 - root));
    r.fixed_point_residual = std::min(r_plus, r_minus);
    r.lambda_residual = std::fabs(a.lambda - a.delta / (g2 + a.delta));
    return r;
}

struct BalancednessBounds {
    double oscillation_bound = 0.0;   // delta / omega^2
    double second_order_bound = 0.0;  // (4 p^2 delta / fbar'^2)^(1/3)
    double omega = 0.0;               // oscillation of fbar over the subnode
    double total_variation = 0.0;     // integral of |fbar'|
    double w1 = 0.0;                  // 1 / (gbar^2 + delta)
    double w2 = 0.0;                  // (2 p / (|fbar'| delta))^(2/3)
    bool fbar_prime_vanishes = false; // |fbar'| ~ 0 at the optimum with delta > 0
};

inline BalancednessBounds balancedness_bounds(Slice& slice, const SplitAnalysisResult& a,
                                              int omega_grid = 512) {
    if (a.degenerate) throw SpecError("balancedness_bounds: degenerate analysis");
    BalancednessBounds out;
    auto f = [&](double s) { return slice.fbar(s); };
    auto fmax = grid_refine_max(f, slice.a(), slice.b(), omega_grid, 1e-12);
    auto fmin = grid_refine_max([&](double s) { return -slice.fbar(s); }, slice.a(), slice.b(),
                                omega_grid, 1e-12);
    out.omega = fmax.best.value + fmin.best.value;  // max - min
    QuadOptions opt;
    opt.rel_tol = 1e-9;
    const double scale_fp = detail::sample_scale(
        [&](double s) { return slice.fbar_prime(s); }, slice.a(), slice.b());
    opt.abs_tol = 32.0 * slice.eval_noise() * scale_fp * (slice.b() - slice.a()) + 1e-300;
    out.total_variation =
        integrate([&](double s) { return std::fabs(slice.fbar_prime(s)); }, slice.a(), slice.b(),
                  opt)
            .value;
    const double fp = std::fabs(slice.fbar_prime(a.s_star));
    out.oscillation_bound = (out.omega > 0.0) ? a.delta / (out.omega * out.omega) : 0.0;
    out.fbar_prime_vanishes = fp <= 1e-8 * std::max(1.0, out.omega);
    out.second_order_bound =
        out.fbar_prime_vanishes
            ? std::numeric_limits<double>::infinity()
            : std::cbrt(4.0 * a.density * a.density * a.delta / (fp * fp));
    out.w1 = 1.0 / (a.gbar * a.gbar + a.delta);
    out.w2 = out.fbar_prime_vanishes
                 ? std::numeric_limits<double>::infinity()
                 : std::pow(2.0 * a.density / (fp * a.delta), 2.0 / 3.0);
    return out;
}

// Penalized-criterion analogs of the balancedness lower bounds.
struct PenalizedBounds {
    double first_order = 0.0;   // valid for every alpha >= 0
    double second_order = 0.0;  // valid for alpha in [0,1)
    bool second_applicable = false;
};

inline PenalizedBounds penalized_bounds(Slice& slice, const SplitAnalysisResult& a) {
    if (a.degenerate) throw SpecError("penalized_bounds: degenerate analysis");
    PenalizedBounds out;
    const double al = a.alpha;
    const double g2 = a.gbar * a.gbar;
    const double one_minus = (1.0 - al) * (1.0 - al);
    const double num = std::pow(2.0, -al) * one_minus * a.delta;
    const double den = g2 + one_minus * a.delta;
    out.first_order = (den > 0.0) ? std::pow(num / den, 1.0 / (1.0 + al)) : 0.0;
    if (al < 1.0) {
        out.second_applicable = true;
        const double fp = std::fabs(slice.fbar_prime(a.s_star));
        if (fp > 0.0) {
            const double v = std::pow(4.0, 1.0 - al) * one_minus * a.density * a.density *
                             a.delta / (fp * fp);
            out.second_order = std::pow(v, 1.0 / (3.0 + al));
        }
    }
    return out;
}

struct SecondOrderReport {
    double first_derivative_fd = 0.0;
    double second_derivative_fd = 0.0;
    double second_derivative_closed = 0.0;
    double second_derivative_rel_err = 0.0;
};

// Finite differences of the criterion at the optimum against the closed form
// for its second derivative, Richardson-extrapolated at two step sizes.
inline SecondOrderReport second_derivative_check(Slice& slice, const SplitAnalysisResult& a,
                                                 double h = 1e-4) {
    if (a.degenerate) throw SpecError("second_derivative_check: degenerate analysis");
    SecondOrderReport out;
    auto d = [&](double s) { return slice.delta(s); };
    const double s = a.s_star;
    auto d1 = [&](double step) { return (d(s + step) - d(s - step)) / (2.0 * step); };
    auto d2 = [&](double step) {
        return (d(s + step) - 2.0 * d(s) + d(s - step)) / (step * step);
    };
    out.first_derivative_fd = (4.0 * d1(h / 2.0) - d1(h)) / 3.0;
    out.second_derivative_fd = (4.0 * d2(h / 2.0) - d2(h)) / 3.0;
    const double p = a.prob_left;
    const double dens = a.density;
    out.second_derivative_closed =
        2.0 * dens * dens / (p * (1.0 - p)) *
        (a.gbar * a.gbar + a.delta + slice.fbar_prime(s) * a.xi / dens);
    const double scale = std::max(std::fabs(out.second_derivative_closed), 1e-12);
    out.second_derivative_rel_err =
        std::fabs(out.second_derivative_fd - out.second_derivative_closed) / scale;
    return out;
}

// Xi'(s) = p(s|t) * Gbar(s), checked by central differences.
inline double xi_derivative_residual(Slice& slice, double s, double h = 1e-6) {
    const double fd = (slice.xi(s + h) - slice.xi(s - h)) / (2.0 * h);
    const double closed = slice.density(s) * slice.gbar(s);
    return std::fabs(fd - closed);
}

// ---------------------------------------------------------------------------
// Quantile envelopes (probability-to-distance conversion)
// ---------------------------------------------------------------------------

struct QuantileEnvelope {
    MarginalKind kind = MarginalKind::Uniform;

    double q1(double p) const {
        switch (kind) {
            case MarginalKind::Uniform: return p;
            case MarginalKind::Beta21: return p;
            case MarginalKind::BetaHalf1: return p * p;
        }
        return p;
    }
    double q2(double p) const {
        switch (kind) {
            case MarginalKind::Uniform: return p;
            case MarginalKind::Beta21: return std::sqrt(p);
            case MarginalKind::BetaHalf1: return p;
        }
        return p;
    }
    double q1_inv(double y) const {
        switch (kind) {
            case MarginalKind::Uniform: return y;
            case MarginalKind::Beta21: return y;
            case MarginalKind::BetaHalf1: return std::sqrt(y);
        }
        return y;
    }
    double q2_inv(double y) const {
        switch (kind) {
            case MarginalKind::Uniform: return y;
            case MarginalKind::Beta21: return y * y;
            case MarginalKind::BetaHalf1: return y;
        }
        return y;
    }
};

inline QuantileEnvelope quantile_envelope(MarginalKind kind) {
    switch (kind) {
        case MarginalKind::Uniform:
        case MarginalKind::Beta21:
        case MarginalKind::BetaHalf1:
            return QuantileEnvelope{kind};
    }
    throw SpecError("quantile_envelope: unsupported distribution");
}

struct EnvelopeParams {
    double balance = 0.0;  // Lambda
    double psi = 0.0;      // 1 - sqrt(1 - Lambda)
    double gamma = 0.0;    // 2 min{q1(psi/2), 1 - q2(1 - psi/2)}
    double p_left = 0.0;   // q2^{-1}(gamma^2 / 2)
    double p_right = 0.0;  // 1 - q1^{-1}(1 - gamma^2 / 2)
    double p = 0.0;        // min(p_left, p_right)
};

inline EnvelopeParams envelope_params(const QuantileEnvelope& env, double balance) {
    if (balance < 0.0 || balance > 1.0) throw SpecError("balance must lie in [0,1]");
    EnvelopeParams ep;
    ep.balance = balance;
    ep.psi = 1.0 - std::sqrt(1.0 - balance);
    ep.gamma = 2.0 * std::min(env.q1(ep.psi / 2.0), 1.0 - env.q2(1.0 - ep.psi / 2.0));
    const double g2h = ep.gamma * ep.gamma / 2.0;
    ep.p_left = env.q2_inv(g2h);
    ep.p_right = 1.0 - env.q1_inv(1.0 - g2h);
    ep.p = std::min(ep.p_left, ep.p_right);
    return ep;
}

// Largest violation of q1(p) <= (Q(p)-a)/(b-a) <= q2(p) over an
// (a,b) x p grid; should be <= 0 up to rounding.
inline double envelope_violation(const QuantileEnvelope& env, int grid = 50) {
    Marginal base{env.kind};
    double worst = -1.0;
    for (int ia = 0; ia < grid; ++ia) {
        for (int ib = ia + 1; ib <= grid; ++ib) {
            const double a = static_cast<double>(ia) / grid;
            const double b = static_cast<double>(ib) / grid;
            ConditionalMarginal cm(base, a, b);
            for (int ip = 0; ip <= grid; ++ip) {
                const double p = static_cast<double>(ip) / grid;
                const double q = (cm.quantile(p) - a) / (b - a);
                worst = std::max(worst, env.q1(p) - q);
                worst = std::max(worst, q - env.q2(p));
            }
        }
    }
    return worst;
}

// ---------------------------------------------------------------------------
// Integrated decrease in impurity for f(x) = (x - 1/2)^R, uniform input
// ---------------------------------------------------------------------------

inline double delta_R(int R) {
    if (R < 1) throw SpecError("delta_R: R must be >= 1");
    auto model = make_centered_power_model(R);
    Slice slice(*model, 0, Box::unit(1));
    QuadOptions opt;
    opt.rel_tol = 1e-10;
    opt.abs_tol = 1e-14;
    return integrate([&](double s) { return slice.delta(s); }, 0.0, 1.0, opt).value;
}

// Lower bound on the optimal decrease from the Fourier coefficients of the
// partial dependence function (uniform input only): pi^{-2} sum_k |c_k|^2/k^2,
// with ck_squared[k-1] = |c_k|^2 for k >= 1 and real-symmetric spectra.
inline double fourier_lower_bound(const std::vector<double>& ck_squared) {
    double s = 0.0;
    for (size_t k = 1; k <= ck_squared.size(); ++k)
        s += 2.0 * ck_squared[k - 1] / static_cast<double>(k * k);
    return s / (M_PI * M_PI);
}

// ---------------------------------------------------------------------------
// Global balancedness scans
// ---------------------------------------------------------------------------

struct ScanEntry {
    double a = 0.0, b = 0.0;
    double lambda = 0.0;
    double s_star = 0.0;
    double delta = 0.0;
};

struct ScanResult {
    double lambda_min = 1.0;  // estimate of the global balancedness (from above)
    ScanEntry argmin;
    std::vector<ScanEntry> entries;
    int skipped_degenerate = 0;
};

inline std::vector<std::pair<double, double>> interval_grid(int m, double min_width_steps = 1.0) {
    std::vector<std::pair<double, double>> out;
    for (int i = 0; i < m; ++i)
        for (int k = i + static_cast<int>(min_width_steps); k <= m; ++k)
            out.emplace_back(static_cast<double>(i) / m, static_cast<double>(k) / m);
    return out;
}

// Minimum node balancedness over subnode intervals of one feature, with the
// other coordinates spanning [0,1]. A one-sided (over-)estimate of the true
// infimum; degenerate directions are excluded and counted.
inline ScanResult global_balancedness_scan(const PopulationModel& model, int feature,
                                           const std::vector<std::pair<double, double>>& intervals,
                                           int grid_points = 512) {
    ScanResult out;
    bool first = true;
    for (const auto& [a, b] : intervals) {
        Box node = Box::unit(model.dim());
        node.lo[feature] = a;
        node.hi[feature] = b;
        Slice slice(model, feature, node);
        auto analysis = optimal_split(slice, grid_points);
        if (analysis.degenerate) {
            ++out.skipped_degenerate;
            continue;
        }
        ScanEntry e{a, b, analysis.lambda, analysis.s_star, analysis.delta};
        out.entries.push_back(e);
        if (first || e.lambda < out.lambda_min) {
            out.lambda_min = e.lambda;
            out.argmin = e;
            first = false;
        }
    }
    if (first) throw SpecError("global_balancedness_scan: every node was degenerate");
    return out;
}

} // namespace cartsplit
