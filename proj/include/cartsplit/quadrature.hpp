#pragma once
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <map>
#include <cstdio>
#include <queue>
#include <stdexcept>
#include <string>
#include <vector>

namespace cartsplit {

struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {

// Gauss-Kronrod 7-15 pair on [-1,1]: abscissae, Kronrod weights, Gauss weights
// (zero where the node is Kronrod-only).
inline constexpr double gk_x[8] = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000};
inline constexpr double gk_wk[8] = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714};
inline constexpr double gk_wg[8] = {
    0.0,
    0.129484966168869693270611432679082,
    0.0,
    0.279705391489276667901467771423780,
    0.0,
    0.381830050505118944950369775488975,
    0.0,
    0.417959183673469387755102040816327};

struct PanelResult {
    double value;   // K15 estimate
    double error;   // |K15 - G7| based estimate
    double resabs;  // K15 estimate of the integral of |f|
};

template <class F>
PanelResult gk15(const F& f, double a, double b) {
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double fc = f(mid);
    double k15 = gk_wk[7] * fc;
    double g7 = gk_wg[7] * fc;
    double resabs = gk_wk[7] * std::fabs(fc);
    for (int i = 0; i < 7; ++i) {
        const double dx = half * gk_x[i];
        const double f1 = f(mid - dx);
        const double f2 = f(mid + dx);
        k15 += gk_wk[i] * (f1 + f2);
        g7 += gk_wg[i] * (f1 + f2);
        resabs += gk_wk[i] * (std::fabs(f1) + std::fabs(f2));
    }
    PanelResult r;
    r.value = k15 * half;
    r.resabs = resabs * std::fabs(half);
    r.error = std::fabs(k15 - g7) * std::fabs(half);
    return r;
}

} // namespace detail

struct QuadOptions {
    double rel_tol = 1e-10;
    double abs_tol = 0.0;
    int max_intervals = 4000;
};

struct QuadResult {
    double value = 0.0;
    double error = 0.0;
    int intervals = 0;
};

// Globally adaptive Gauss-Kronrod integration. Splits the interval with the
// largest error estimate until max(abs_tol, rel_tol*|I|) is met; a round-off
// floor proportional to the integral of |f| keeps zero-valued integrals from
// spinning forever.
template <class F>
QuadResult integrate(const F& f, double a, double b, QuadOptions opt = {}) {
    QuadResult out;
    if (a == b) return out;
    struct Seg {
        double a, b, value, error;
        bool operator<(const Seg& o) const { return error < o.error; }
    };
    std::priority_queue<Seg> heap;
    auto first = detail::gk15(f, a, b);
    double total = first.value;
    double toterr = first.error;
    const double resabs_floor = 50.0 * std::numeric_limits<double>::epsilon() * first.resabs;
    heap.push({a, b, first.value, first.error});
    int n = 1;
    while (true) {
        const double bound = std::max({opt.abs_tol, opt.rel_tol * std::fabs(total), resabs_floor});
        if (toterr <= bound) break;
        if (n >= opt.max_intervals) {
            char buf[160];
            std::snprintf(buf, sizeof(buf),
                          "quadrature failed to converge on [%.17g,%.17g]: intervals=%d "
                          "value=%.6g err=%.6g bound=%.6g",
                          a, b, n, total, toterr, bound);
            throw NumericError(buf);
        }
        Seg worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        if (!(worst.a < mid && mid < worst.b)) {
            // Interval at machine resolution; accept its current estimate.
            toterr -= worst.error;
            heap.push({worst.a, worst.b, worst.value, 0.0});
            continue;
        }
        auto left = detail::gk15(f, worst.a, mid);
        auto right = detail::gk15(f, mid, worst.b);
        total += left.value + right.value - worst.value;
        toterr += left.error + right.error - worst.error;
        heap.push({worst.a, mid, left.value, left.error});
        heap.push({mid, worst.b, right.value, right.error});
        ++n;
    }
    out.value = total;
    out.error = toterr;
    out.intervals = n;
    return out;
}

inline QuadResult integrate_fn(const std::function<double(double)>& f, double a, double b,
                               QuadOptions opt = {}) {
    return integrate(f, a, b, opt);
}

// Prefix-integral cache over [a,b]: query(s) returns the integral from a to s,
// reusing previously integrated panels. Monotone query sequences cost one
// adaptive panel per step.
class PrefixIntegral {
public:
    PrefixIntegral(std::function<double(double)> f, double a, double b, QuadOptions opt = {})
        : f_(std::move(f)), a_(a), b_(b), opt_(opt) {
        knots_[a_] = 0.0;
    }

    double operator()(double s) {
        if (s <= a_) return 0.0;
        if (s > b_) s = b_;
        auto it = knots_.upper_bound(s);
        --it;  // greatest knot <= s; knots_ always holds a_
        if (it->first == s) return it->second;
        const double base = it->second;
        const double val = base + integrate(f_, it->first, s, opt_).value;
        knots_[s] = val;
        return val;
    }

    double full() { return (*this)(b_); }

private:
    std::function<double(double)> f_;
    double a_, b_;
    QuadOptions opt_;
    std::map<double, double> knots_;
};

} // namespace cartsplit
