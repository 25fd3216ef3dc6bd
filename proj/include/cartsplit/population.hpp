#pragma once
#include <cmath>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "cartsplit/marginals.hpp"
#include "cartsplit/quadrature.hpp"
#include "cartsplit/synthetic.hpp"
#include "cartsplit/tree.hpp"

namespace cartsplit {

// One-dimensional view of a model inside a node: the conditional mean of the
// response as a function of one coordinate, its derivative, and the
// conditional second moment. All already integrated over the other
// coordinates of the node.
struct SliceFunctions {
    std::function<double(double)> fbar;
    std::function<double(double)> fbar_prime;
    std::function<double(double)> sbar;  // second moment of the mean surface (regression)
    // Relative accuracy of one fbar evaluation: machine epsilon for closed
    // forms, the inner quadrature tolerance when fbar is itself integrated.
    double eval_noise = 2.3e-16;
};

class PopulationModel {
public:
    PopulationModel(int dim, std::vector<Marginal> marginals, bool classification,
                    std::string name)
        : dim_(dim), marginals_(std::move(marginals)), classification_(classification),
          name_(std::move(name)) {}
    virtual ~PopulationModel() = default;

    int dim() const { return dim_; }
    bool is_classification() const { return classification_; }
    const std::string& name() const { return name_; }
    const Marginal& marginal(int j) const { return marginals_[j]; }

    // Conditional mean E[Y|X=x]; for classification this is 2 P[Y=+1|x] - 1.
    virtual double mean(const double* x) const = 0;
    virtual double mean_partial(int j, const double* x) const = 0;
    virtual bool depends_on(int j) const = 0;

    // Default slice: nested adaptive quadrature over the other active
    // coordinates. Families with structure override this.
    virtual SliceFunctions slice_functions(int feature, const Box& node) const;

protected:
    ConditionalMarginal conditional(int j, const Box& node) const {
        return ConditionalMarginal(marginals_[j], node.lo[j], node.hi[j]);
    }

    int dim_;
    std::vector<Marginal> marginals_;
    bool classification_;
    std::string name_;
};

namespace detail {

// Magnitude estimate max |f| over a low-discrepancy sample. A regular grid
// would alias the zeros of periodic integrands (e.g. sin(2 pi m x) vanishes
// on every multiple of 1/(2m)), so golden-ratio offsets are used instead.
template <class F>
double sample_scale(const F& f, double a, double b, int n = 23) {
    double scale = std::max(std::fabs(f(a)), std::fabs(f(b)));
    scale = std::max(scale, std::fabs(f(0.5 * (a + b))));
    constexpr double phi = 0.6180339887498948482;
    double t = 0.0;
    for (int i = 0; i < n; ++i) {
        t += phi;
        t -= std::floor(t);
        scale = std::max(scale, std::fabs(f(a + (b - a) * t)));
    }
    return scale;
}

// Expectation of a multivariate kernel over the conditional product measure
// of the listed coordinates, by recursively nested adaptive quadrature.
inline double nested_expect(const std::function<double(const double*)>& kernel,
                            std::vector<double>& x, const std::vector<int>& dims,
                            const std::vector<ConditionalMarginal>& cms, size_t level,
                            const QuadOptions& opt) {
    if (level == dims.size()) return kernel(x.data());
    const auto& cm = cms[level];
    auto inner = [&](double s) {
        x[dims[level]] = s;
        return nested_expect(kernel, x, dims, cms, level + 1, opt) * cm.pdf(s);
    };
    return integrate(inner, cm.a, cm.b, opt).value;
}

} // namespace detail

inline SliceFunctions PopulationModel::slice_functions(int feature, const Box& node) const {
    std::vector<int> dims;
    std::vector<ConditionalMarginal> cms;
    for (int k = 0; k < dim_; ++k) {
        if (k == feature || !depends_on(k)) continue;
        dims.push_back(k);
        cms.push_back(conditional(k, node));
    }
    QuadOptions opt;
    opt.rel_tol = 1e-10;
    const int d = dim_;
    SliceFunctions out;
    if (!dims.empty()) out.eval_noise = 1e-9;
    out.fbar = [this, dims, cms, opt, d, feature](double v) {
        std::vector<double> x(d, 0.0);
        x[feature] = v;
        std::function<double(const double*)> kern = [this](const double* p) { return mean(p); };
        return detail::nested_expect(kern, x, dims, cms, 0, opt);
    };
    out.fbar_prime = [this, dims, cms, opt, d, feature](double v) {
        std::vector<double> x(d, 0.0);
        x[feature] = v;
        std::function<double(const double*)> kern = [this, feature](const double* p) {
            return mean_partial(feature, p);
        };
        return detail::nested_expect(kern, x, dims, cms, 0, opt);
    };
    out.sbar = [this, dims, cms, opt, d, feature](double v) {
        std::vector<double> x(d, 0.0);
        x[feature] = v;
        std::function<double(const double*)> kern = [this](const double* p) {
            const double m = mean(p);
            return m * m;
        };
        return detail::nested_expect(kern, x, dims, cms, 0, opt);
    };
    return out;
}

// ---------------------------------------------------------------------------
// Additive models: f(x) = sum_j f_j(x_j)
// ---------------------------------------------------------------------------

struct Term1D {
    std::function<double(double)> value;
    std::function<double(double)> deriv;
    bool active = false;  // false: identically zero term
};

class AdditiveModel : public PopulationModel {
public:
    AdditiveModel(std::vector<Term1D> terms, std::vector<Marginal> marginals, std::string name)
        : PopulationModel(static_cast<int>(terms.size()), std::move(marginals), false,
                          std::move(name)),
          terms_(std::move(terms)) {}

    double mean(const double* x) const override {
        double s = 0.0;
        for (int j = 0; j < dim_; ++j)
            if (terms_[j].active) s += terms_[j].value(x[j]);
        return s;
    }
    double mean_partial(int j, const double* x) const override {
        return terms_[j].active ? terms_[j].deriv(x[j]) : 0.0;
    }
    bool depends_on(int j) const override { return terms_[j].active; }

    SliceFunctions slice_functions(int feature, const Box& node) const override {
        QuadOptions opt;
        opt.rel_tol = 1e-11;
        // Conditional mean and variance of every other active term.
        double rest_mean = 0.0, rest_var = 0.0;
        for (int k = 0; k < dim_; ++k) {
            if (k == feature || !terms_[k].active) continue;
            const auto cm = conditional(k, node);
            const auto& fk = terms_[k].value;
            const double center = fk(0.5 * (cm.a + cm.b));
            const double m0 =
                integrate([&](double s) { return (fk(s) - center) * cm.pdf(s); }, cm.a, cm.b, opt)
                    .value;
            const double v =
                integrate([&](double s) {
                    const double g = fk(s) - center - m0;
                    return g * g * cm.pdf(s);
                }, cm.a, cm.b, opt)
                    .value;
            rest_mean += m0 + center;
            rest_var += v;
        }
        SliceFunctions out;
        const bool active = terms_[feature].active;
        auto fj = active ? terms_[feature].value : std::function<double(double)>();
        auto dj = active ? terms_[feature].deriv : std::function<double(double)>();
        out.fbar = [fj, rest_mean, active](double v) {
            return (active ? fj(v) : 0.0) + rest_mean;
        };
        out.fbar_prime = [dj, active](double v) { return active ? dj(v) : 0.0; };
        out.sbar = [fj, rest_mean, rest_var, active](double v) {
            const double m = (active ? fj(v) : 0.0) + rest_mean;
            return m * m + rest_var;
        };
        return out;
    }

private:
    std::vector<Term1D> terms_;
};

// ---------------------------------------------------------------------------
// Friedman #1: 10 sin(pi x1 x2) + 20 (x3 - 1/2)^2 + 10 x4 + 5 x5 (+ noise dims)
// ---------------------------------------------------------------------------

class Friedman1Model : public PopulationModel {
public:
    Friedman1Model(int dim, std::vector<Marginal> marginals)
        : PopulationModel(dim, std::move(marginals), false, "friedman1") {
        if (dim < 5) throw SpecError("friedman1 requires d >= 5");
    }

    double mean(const double* x) const override {
        return 10.0 * std::sin(M_PI * x[0] * x[1]) + 20.0 * (x[2] - 0.5) * (x[2] - 0.5) +
               10.0 * x[3] + 5.0 * x[4];
    }
    double mean_partial(int j, const double* x) const override {
        switch (j) {
            case 0: return 10.0 * M_PI * x[1] * std::cos(M_PI * x[0] * x[1]);
            case 1: return 10.0 * M_PI * x[0] * std::cos(M_PI * x[0] * x[1]);
            case 2: return 40.0 * (x[2] - 0.5);
            case 3: return 10.0;
            case 4: return 5.0;
            default: return 0.0;
        }
    }
    bool depends_on(int j) const override { return j < 5; }

    SliceFunctions slice_functions(int feature, const Box& node) const override {
        QuadOptions opt;
        opt.rel_tol = 1e-11;
        // Additive pieces f3, f4, f5: conditional means and variances.
        auto term = [](int k, double v) {
            if (k == 2) return 20.0 * (v - 0.5) * (v - 0.5);
            if (k == 3) return 10.0 * v;
            return 5.0 * v;  // k == 4
        };
        double add_mean[5] = {0, 0, 0, 0, 0}, add_var[5] = {0, 0, 0, 0, 0};
        for (int k = 2; k < 5; ++k) {
            const auto cm = conditional(k, node);
            add_mean[k] =
                integrate([&](double s) { return term(k, s) * cm.pdf(s); }, cm.a, cm.b, opt)
                    .value;
            add_var[k] = integrate([&](double s) {
                             const double g = term(k, s) - add_mean[k];
                             return g * g * cm.pdf(s);
                         }, cm.a, cm.b, opt)
                             .value;
        }
        const auto cm1 = conditional(0, node);
        const auto cm2 = conditional(1, node);

        SliceFunctions out;
        if (feature == 0 || feature == 1) {
            out.eval_noise = 1e-10;  // fbar goes through the inner quadrature
            const auto cmo = (feature == 0) ? cm2 : cm1;  // the coupled partner
            double cmean = 0.0, cvar_sum = 0.0;
            for (int k = 2; k < 5; ++k) {
                cmean += add_mean[k];
                cvar_sum += add_var[k];
            }
            out.fbar = [cmo, cmean, opt](double v) {
                return integrate([&](double u) {
                           return 10.0 * std::sin(M_PI * v * u) * cmo.pdf(u);
                       }, cmo.a, cmo.b, opt)
                           .value +
                       cmean;
            };
            out.fbar_prime = [cmo, opt](double v) {
                return integrate([&](double u) {
                           return 10.0 * M_PI * u * std::cos(M_PI * v * u) * cmo.pdf(u);
                       }, cmo.a, cmo.b, opt)
                           .value;
            };
            out.sbar = [cmo, cmean, cvar_sum, opt](double v) {
                const double q1 = integrate([&](double u) {
                                      return 10.0 * std::sin(M_PI * v * u) * cmo.pdf(u);
                                  }, cmo.a, cmo.b, opt)
                                      .value;
                const double q2 = integrate([&](double u) {
                                      const double q = 10.0 * std::sin(M_PI * v * u);
                                      return q * q * cmo.pdf(u);
                                  }, cmo.a, cmo.b, opt)
                                      .value;
                // E[(q + A)^2] with A independent of (x1,x2) given the node.
                return q2 + 2.0 * q1 * cmean + cvar_sum + cmean * cmean;
            };
            return out;
        }

        // Coupled term integrated over both x1 and x2.
        const double q1 = integrate([&](double u1) {
                              return cm1.pdf(u1) * integrate([&](double u2) {
                                                       return 10.0 * std::sin(M_PI * u1 * u2) *
                                                              cm2.pdf(u2);
                                                   }, cm2.a, cm2.b, opt)
                                                       .value;
                          }, cm1.a, cm1.b, opt)
                              .value;
        const double q2 = integrate([&](double u1) {
                              return cm1.pdf(u1) * integrate([&](double u2) {
                                                       const double q =
                                                           10.0 * std::sin(M_PI * u1 * u2);
                                                       return q * q * cm2.pdf(u2);
                                                   }, cm2.a, cm2.b, opt)
                                                       .value;
                          }, cm1.a, cm1.b, opt)
                              .value;

        if (feature >= 5) {
            double mu = q1, m2 = q2;
            double rest_mean = 0.0, rest_var = 0.0;
            for (int k = 2; k < 5; ++k) {
                rest_mean += add_mean[k];
                rest_var += add_var[k];
            }
            mu += rest_mean;
            m2 = q2 + 2.0 * q1 * rest_mean + rest_var + rest_mean * rest_mean;
            out.fbar = [mu](double) { return mu; };
            out.fbar_prime = [](double) { return 0.0; };
            out.sbar = [m2](double) { return m2; };
            return out;
        }

        // feature in {2,3,4}: additive in x_feature, everything else constant.
        double other_mean = 0.0, other_var = 0.0;
        for (int k = 2; k < 5; ++k) {
            if (k == feature) continue;
            other_mean += add_mean[k];
            other_var += add_var[k];
        }
        // B = q + (other additive terms); E[B] and E[B^2] by independence.
        const double bmean = q1 + other_mean;
        const double b2 = q2 + 2.0 * q1 * other_mean + other_var + other_mean * other_mean;
        const int k = feature;
        out.fbar = [term, k, bmean](double v) { return term(k, v) + bmean; };
        out.fbar_prime = [k](double v) {
            if (k == 2) return 40.0 * (v - 0.5);
            return (k == 3) ? 10.0 : 5.0;
        };
        out.sbar = [term, k, bmean, b2](double v) {
            const double f = term(k, v);
            return f * f + 2.0 * f * bmean + b2;
        };
        return out;
    }
};

// ---------------------------------------------------------------------------
// Logistic regression: P[Y=+1|x] = sigmoid(beta0 + <beta, x>)
// ---------------------------------------------------------------------------

class LogisticModel : public PopulationModel {
public:
    LogisticModel(double beta0, std::vector<double> beta, std::vector<Marginal> marginals)
        : PopulationModel(static_cast<int>(beta.size()), std::move(marginals), true, "logistic"),
          beta0_(beta0), beta_(std::move(beta)) {}

    double mean(const double* x) const override {
        double z = beta0_;
        for (int j = 0; j < dim_; ++j) z += beta_[j] * x[j];
        return std::tanh(0.5 * z);
    }
    double mean_partial(int j, const double* x) const override {
        const double m = mean(x);
        return 0.5 * beta_[j] * (1.0 - m * m);
    }
    bool depends_on(int j) const override { return beta_[j] != 0.0; }

private:
    double beta0_;
    std::vector<double> beta_;
};

// ---------------------------------------------------------------------------
// Free-form model (user-supplied closed forms)
// ---------------------------------------------------------------------------

class GenericModel : public PopulationModel {
public:
    GenericModel(int dim, std::function<double(const double*)> mean_fn,
                 std::vector<std::function<double(const double*)>> partials,
                 std::vector<bool> active, std::vector<Marginal> marginals, bool classification,
                 std::string name)
        : PopulationModel(dim, std::move(marginals), classification, std::move(name)),
          mean_fn_(std::move(mean_fn)), partials_(std::move(partials)),
          active_(std::move(active)) {}

    double mean(const double* x) const override { return mean_fn_(x); }
    double mean_partial(int j, const double* x) const override { return partials_[j](x); }
    bool depends_on(int j) const override { return active_[j]; }

private:
    std::function<double(const double*)> mean_fn_;
    std::vector<std::function<double(const double*)>> partials_;
    std::vector<bool> active_;
};

// f(x) = x1 + x2 - 2 x1 x2: every direction is flat at nodes whose partner
// coordinate has conditional mean 1/2.
inline std::unique_ptr<PopulationModel> make_bilinear_model(
    std::vector<Marginal> marginals = {Marginal{}, Marginal{}}) {
    return std::make_unique<GenericModel>(
        2, [](const double* x) { return x[0] + x[1] - 2.0 * x[0] * x[1]; },
        std::vector<std::function<double(const double*)>>{
            [](const double* x) { return 1.0 - 2.0 * x[1]; },
            [](const double* x) { return 1.0 - 2.0 * x[0]; }},
        std::vector<bool>{true, true}, std::move(marginals), false, "bilinear");
}

// ---------------------------------------------------------------------------
// Factories from synthetic model specs
// ---------------------------------------------------------------------------

inline std::unique_ptr<PopulationModel> population_model(const SyntheticModelSpec& spec) {
    spec.validate();
    std::vector<Marginal> marginals;
    for (int j = 0; j < spec.d; ++j) marginals.push_back(Marginal{spec.marginal_kind(j)});
    switch (spec.family) {
        case ModelFamily::Linear: {
            std::vector<Term1D> terms;
            for (int j = 0; j < spec.d; ++j) {
                const double b = spec.beta[j];
                terms.push_back({[b](double v) { return b * v; }, [b](double) { return b; },
                                 b != 0.0});
            }
            return std::make_unique<AdditiveModel>(std::move(terms), std::move(marginals),
                                                   "linear");
        }
        case ModelFamily::Polynomial:
        case ModelFamily::ShiftedPolynomial: {
            std::vector<Term1D> terms;
            for (int j = 0; j < spec.d; ++j) {
                const double b = spec.beta[j];
                const int k = spec.degree[j];
                const double a0 =
                    (spec.family == ModelFamily::ShiftedPolynomial) ? spec.shift[j] : 0.0;
                terms.push_back({[b, k, a0](double v) { return b * std::pow(v - a0, k); },
                                 [b, k, a0](double v) {
                                     return (k == 0) ? 0.0 : b * k * std::pow(v - a0, k - 1);
                                 },
                                 b != 0.0 && k >= 1});
            }
            return std::make_unique<AdditiveModel>(std::move(terms), std::move(marginals),
                                                   family_name(spec.family));
        }
        case ModelFamily::Sine: {
            std::vector<Term1D> terms;
            for (int j = 0; j < spec.d; ++j) {
                const double b = spec.beta[j];
                const double w = 2.0 * M_PI * spec.freq[j];
                terms.push_back({[b, w](double v) { return b * std::sin(w * v); },
                                 [b, w](double v) { return b * w * std::cos(w * v); },
                                 b != 0.0 && w > 0.0});
            }
            return std::make_unique<AdditiveModel>(std::move(terms), std::move(marginals),
                                                   "sine");
        }
        case ModelFamily::Friedman1:
            return std::make_unique<Friedman1Model>(spec.d, std::move(marginals));
        case ModelFamily::Logistic:
            return std::make_unique<LogisticModel>(spec.beta0, spec.beta, std::move(marginals));
    }
    throw SpecError("unsupported family");
}

// f(x) = (x - 1/2)^R on [0,1], uniform input.
inline std::unique_ptr<PopulationModel> make_centered_power_model(int R) {
    std::vector<Term1D> terms;
    terms.push_back({[R](double v) { return std::pow(v - 0.5, R); },
                     [R](double v) { return R * std::pow(v - 0.5, R - 1); }, true});
    return std::make_unique<AdditiveModel>(std::move(terms), std::vector<Marginal>{Marginal{}},
                                           "centered_power");
}

// ---------------------------------------------------------------------------
// Slice: all split-criterion quantities for (model, node, feature)
// ---------------------------------------------------------------------------

// Evaluations are cached as prefix integrals, so increasing query sequences
// (grids, golden-section refinements) cost one small panel each. Not
// thread-safe; build one slice per worker.
class Slice {
public:
    Slice(const PopulationModel& model, int feature, Box node)
        : model_(&model), feature_(feature), node_(std::move(node)),
          cm_(model.marginal(feature), node_.lo[feature], node_.hi[feature]),
          fns_(model.slice_functions(feature, node_)) {
        shift_ = fns_.fbar(0.5 * (cm_.a + cm_.b));
        // Absolute-error floors: one fbar value carries noise on the order of
        // eval_noise times its magnitude, and no integral of such values can
        // be resolved below noise * width. Without the floor, near-flat
        // integrands make the adaptive refinement spin on rounding dust.
        const double scale_f =
            std::max(std::fabs(shift_),
                     detail::sample_scale([this](double s) { return fns_.fbar(s); }, cm_.a, cm_.b));
        const double width = cm_.b - cm_.a;
        QuadOptions opt;
        opt.rel_tol = 1e-11;
        opt.abs_tol = 32.0 * fns_.eval_noise * scale_f * width + 1e-300;
        noise_scale_ = scale_f;
        auto g0 = [this](double s) { return (fns_.fbar(s) - shift_) * cm_.pdf(s); };
        mu0_ = integrate(g0, cm_.a, cm_.b, opt).value;
        prefix_g_ = std::make_unique<PrefixIntegral>(g0, cm_.a, cm_.b, opt);
        if (!model.is_classification()) {
            // E[(m - shift)^2 | node, X_j = s], shifted to tame cancellation.
            auto s0 = [this](double s) {
                const double q = fns_.sbar(s) - 2.0 * shift_ * fns_.fbar(s) + shift_ * shift_;
                return q * cm_.pdf(s);
            };
            const double scale_s = std::max(
                scale_f * scale_f,
                detail::sample_scale([this](double s) { return fns_.sbar(s); }, cm_.a, cm_.b));
            QuadOptions sopt;
            sopt.rel_tol = 1e-10;
            sopt.abs_tol = 32.0 * fns_.eval_noise * scale_s * width + 1e-300;
            m2c_ = integrate(s0, cm_.a, cm_.b, sopt).value;
            prefix_s_ = std::make_unique<PrefixIntegral>(s0, cm_.a, cm_.b, sopt);
        }
    }

    int feature() const { return feature_; }
    const Box& node() const { return node_; }
    const PopulationModel& model() const { return *model_; }
    bool classification() const { return model_->is_classification(); }
    double a() const { return cm_.a; }
    double b() const { return cm_.b; }
    const ConditionalMarginal& marginal() const { return cm_; }

    double fbar(double s) const { return fns_.fbar(s); }
    double fbar_prime(double s) const { return fns_.fbar_prime(s); }

    // Conditional partial dependence with the subnode contract enforced.
    double partial_dependence(double s) const {
        if (s < cm_.a || s > cm_.b)
            throw SpecError("partial dependence queried outside the subnode");
        return fns_.fbar(s);
    }
    double mu() const { return mu0_ + shift_; }
    double gbar(double s) const { return (fns_.fbar(s) - shift_) - mu0_; }
    double prob_left(double s) const { return cm_.cdf(s); }
    double density(double s) const { return cm_.pdf(s); }
    double quantile(double p) const { return cm_.quantile(p); }

    // Xi(s) = integral_a^s p(u|t) Gbar(u) du = P_L P_R (mean_L - mean_R).
    double xi(double s) { return (*prefix_g_)(s) - cm_.cdf(s) * mu0_; }

    // Decrease in impurity via the product form, guarded near the edges.
    double delta(double s) {
        const double p = cm_.cdf(s);
        if (p < kEdgeGuard || p > 1.0 - kEdgeGuard) return 0.0;
        const double z = xi(s);
        return z * z / (p * (1.0 - p));
    }

    // Same quantity via the weighted-variance decomposition.
    double delta_decomposition(double s) {
        const double p = cm_.cdf(s);
        if (p < kEdgeGuard || p > 1.0 - kEdgeGuard) return 0.0;
        const double phi = (*prefix_g_)(s);
        const double mean_l = phi / p;                    // centered means
        const double mean_r = (mu0_ - phi) / (1.0 - p);
        if (classification()) {
            const double ml = mean_l + shift_;
            const double mr = mean_r + shift_;
            const double m = mu();
            const double parent = 1.0 - m * m;
            const double left = 1.0 - ml * ml;
            const double right = 1.0 - mr * mr;
            return parent - p * left - (1.0 - p) * right;
        }
        const double psi = (*prefix_s_)(s);
        const double var_parent = m2c_ - mu0_ * mu0_;
        const double var_l = psi / p - mean_l * mean_l;
        const double var_r = (m2c_ - psi) / (1.0 - p) - mean_r * mean_r;
        return var_parent - p * var_l - (1.0 - p) * var_r;
    }

    // Node impurity: conditional variance of the mean surface (regression) or
    // the Gini index (classification). Noise enters both daughters equally and
    // cancels from every decrease.
    double node_impurity() {
        if (classification()) {
            const double m = mu();
            return 1.0 - m * m;
        }
        return m2c_ - mu0_ * mu0_;
    }

    // Magnitude of fbar over the node and the per-evaluation noise; used to
    // scale absolute tolerances in downstream integrals of slice values.
    double value_scale() const { return noise_scale_; }
    double eval_noise() const { return fns_.eval_noise; }

    static constexpr double kEdgeGuard = 1e-6;

private:
    const PopulationModel* model_;
    int feature_;
    Box node_;
    ConditionalMarginal cm_;
    SliceFunctions fns_;
    double shift_ = 0.0;
    double mu0_ = 0.0;
    double m2c_ = 0.0;  // E[(m - shift)^2 | node]
    double noise_scale_ = 1.0;
    std::unique_ptr<PrefixIntegral> prefix_g_, prefix_s_;
};

} // namespace cartsplit
