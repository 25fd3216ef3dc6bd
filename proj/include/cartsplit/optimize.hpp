#pragma once
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

namespace cartsplit {

struct MaximumCandidate {
    double x = 0.0;
    double value = 0.0;
};

// Golden-section maximization on [lo,hi]. Assumes a single interior maximum in
// the bracket; returns the best point seen.
template <class F>
MaximumCandidate golden_section_max(const F& f, double lo, double hi, double x_tol,
                                    int max_iter = 200) {
    constexpr double invphi = 0.6180339887498948482;
    double a = lo, b = hi;
    double c = b - invphi * (b - a);
    double d = a + invphi * (b - a);
    double fc = f(c), fd = f(d);
    for (int it = 0; it < max_iter && (b - a) > x_tol; ++it) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - invphi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + invphi * (b - a);
            fd = f(d);
        }
    }
    MaximumCandidate best;
    if (fc > fd) {
        best.x = c;
        best.value = fc;
    } else {
        best.x = d;
        best.value = fd;
    }
    return best;
}

struct GridMaxResult {
    MaximumCandidate best;
    std::vector<MaximumCandidate> near_ties;  // includes best, sorted by x
    std::vector<double> grid_x;
    std::vector<double> grid_value;
};

// Global 1-D maximization: dense grid, then golden-section refinement of every
// local-maximum bracket. Candidates within a relative tie_tol of the global
// maximum are all reported; the smallest x among them is the canonical
// maximizer.
template <class F>
GridMaxResult grid_refine_max(const F& f, double lo, double hi, int grid_points,
                              double tie_tol = 1e-9) {
    GridMaxResult out;
    const int n = std::max(grid_points, 8);
    out.grid_x.resize(n);
    out.grid_value.resize(n);
    for (int i = 0; i < n; ++i) {
        const double x = lo + (hi - lo) * (i + 0.5) / n;
        out.grid_x[i] = x;
        out.grid_value[i] = f(x);
    }
    const double x_tol = std::max(1e-13 * (hi - lo), 1e-15);
    std::vector<MaximumCandidate> candidates;
    for (int i = 0; i < n; ++i) {
        const double v = out.grid_value[i];
        const bool up = (i == 0) || out.grid_value[i - 1] <= v;
        const bool down = (i == n - 1) || out.grid_value[i + 1] < v;
        if (!(up && down)) continue;
        const double bl = (i == 0) ? lo : out.grid_x[i - 1];
        const double br = (i == n - 1) ? hi : out.grid_x[i + 1];
        MaximumCandidate c = golden_section_max(f, bl, br, x_tol);
        if (out.grid_value[i] > c.value) c = {out.grid_x[i], v};
        candidates.push_back(c);
    }
    double vmax = -std::numeric_limits<double>::infinity();
    for (const auto& c : candidates) vmax = std::max(vmax, c.value);
    const double cutoff = vmax - tie_tol * std::max(std::fabs(vmax), 1e-300);
    for (const auto& c : candidates)
        if (c.value >= cutoff) out.near_ties.push_back(c);
    std::sort(out.near_ties.begin(), out.near_ties.end(),
              [](const MaximumCandidate& a, const MaximumCandidate& b) { return a.x < b.x; });
    // Collapse refined duplicates of the same peak.
    std::vector<MaximumCandidate> dedup;
    for (const auto& c : out.near_ties) {
        if (!dedup.empty() && std::fabs(dedup.back().x - c.x) <= 4.0 * x_tol) {
            if (c.value > dedup.back().value) dedup.back() = c;
        } else {
            dedup.push_back(c);
        }
    }
    out.near_ties = std::move(dedup);
    out.best = out.near_ties.front();  // smallest x among near-ties
    return out;
}

} // namespace cartsplit
