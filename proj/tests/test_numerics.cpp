#include <cmath>

#include <gtest/gtest.h>

#include "cartsplit/optimize.hpp"
#include "cartsplit/quadrature.hpp"
#include "cartsplit/rng.hpp"

using namespace cartsplit;

TEST(Quadrature, Polynomials) {
    auto r = integrate([](double x) { return x * x; }, 0.0, 1.0);
    EXPECT_NEAR(r.value, 1.0 / 3.0, 1e-14);
    r = integrate([](double x) { return std::pow(x, 7) - 3.0 * x; }, -1.0, 2.0);
    EXPECT_NEAR(r.value, (std::pow(2.0, 8) - 1.0) / 8.0 - 1.5 * 3.0, 1e-12);
}

TEST(Quadrature, Oscillatory) {
    auto r = integrate([](double x) { return std::sin(40.0 * M_PI * x); }, 0.0, 0.9);
    const double exact = (1.0 - std::cos(40.0 * M_PI * 0.9)) / (40.0 * M_PI);
    EXPECT_NEAR(r.value, exact, 1e-12);
}

TEST(Quadrature, EndpointSingularity) {
    // beta(1/2,1) density: integrable singularity at zero.
    QuadOptions opt;
    opt.rel_tol = 1e-10;
    auto r = integrate([](double x) { return 0.5 / std::sqrt(x); }, 0.0, 1.0, opt);
    EXPECT_NEAR(r.value, 1.0, 1e-9);
}

TEST(Quadrature, ZeroIntegralTerminates) {
    auto r = integrate([](double x) { return x - 0.5; }, 0.0, 1.0);
    EXPECT_NEAR(r.value, 0.0, 1e-15);
}

TEST(Quadrature, NonConvergenceThrows) {
    QuadOptions opt;
    opt.rel_tol = 1e-14;
    opt.max_intervals = 4;
    EXPECT_THROW(integrate([](double x) { return std::sin(500.0 * x * x); }, 0.0, 3.0, opt),
                 NumericError);
}

TEST(PrefixIntegral, MatchesDirect) {
    PrefixIntegral pre([](double x) { return std::cos(3.0 * x); }, 0.0, 2.0);
    for (double s : {0.1, 0.4, 0.45, 1.2, 1.9, 2.0}) {
        EXPECT_NEAR(pre(s), std::sin(3.0 * s) / 3.0, 1e-12) << "s=" << s;
    }
    // Out-of-order queries reuse cached panels.
    EXPECT_NEAR(pre(0.2), std::sin(0.6) / 3.0, 1e-12);
}

TEST(GoldenSection, FindsMaximum) {
    auto r = golden_section_max([](double x) { return -(x - 0.3) * (x - 0.3); }, 0.0, 1.0, 1e-12);
    EXPECT_NEAR(r.x, 0.3, 1e-9);
}

TEST(GridRefine, MultiModalNearTies) {
    // Two equal peaks; canonical maximizer is the smaller x.
    auto f = [](double x) { return std::sin(2.0 * M_PI * x) * std::sin(2.0 * M_PI * x); };
    auto r = grid_refine_max(f, 0.0, 1.0, 128, 1e-9);
    ASSERT_EQ(r.near_ties.size(), 2u);
    EXPECT_NEAR(r.best.x, 0.25, 1e-7);
    EXPECT_NEAR(r.near_ties[1].x, 0.75, 1e-7);
}

TEST(Rng, DeterministicStreams) {
    Rng a = Rng::stream(42, 7);
    Rng b = Rng::stream(42, 7);
    for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next_u64(), b.next_u64());
    Rng c = Rng::stream(42, 8);
    EXPECT_NE(Rng::stream(42, 7).next_u64(), c.next_u64());
}

TEST(Rng, UniformMoments) {
    Rng r(123);
    double sum = 0.0, sq = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double u = r.uniform01();
        sum += u;
        sq += u * u;
    }
    EXPECT_NEAR(sum / n, 0.5, 5e-3);
    EXPECT_NEAR(sq / n, 1.0 / 3.0, 5e-3);
}

TEST(Rng, NormalMoments) {
    Rng r(7);
    double sum = 0.0, sq = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double z = r.normal();
        sum += z;
        sq += z * z;
    }
    EXPECT_NEAR(sum / n, 0.0, 2e-2);
    EXPECT_NEAR(sq / n, 1.0, 2e-2);
}

TEST(Rng, SampleWithoutReplacement) {
    Rng r(5);
    auto s = r.sample_without_replacement(10, 4);
    ASSERT_EQ(s.size(), 4u);
    for (size_t i = 1; i < s.size(); ++i) EXPECT_LT(s[i - 1], s[i]);
    for (int v : s) EXPECT_TRUE(v >= 0 && v < 10);
}
