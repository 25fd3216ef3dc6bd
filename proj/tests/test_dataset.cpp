#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>

#include <gtest/gtest.h>

#include "cartsplit/dataset.hpp"
#include "cartsplit/synthetic.hpp"

using namespace cartsplit;

namespace {

std::string write_temp(const std::string& name, const std::string& content) {
    const std::string path = std::string(::testing::TempDir()) + name;
    std::ofstream out(path);
    out << content;
    return path;
}

} // namespace

TEST(Csv, StandardizationEndpoints) {
    const auto path = write_temp("std3.csv", "a,y\n2,0\n4,1\n6,2\n");
    auto res = load_csv(path, "y");
    ASSERT_EQ(res.data.n(), 3);
    ASSERT_EQ(res.data.d(), 1);
    EXPECT_DOUBLE_EQ(res.data.x(0, 0), 0.0);
    EXPECT_DOUBLE_EQ(res.data.x(1, 0), 0.5);
    EXPECT_DOUBLE_EQ(res.data.x(2, 0), 1.0);
    EXPECT_DOUBLE_EQ(res.data.response[2], 2.0);  // response left untouched
}

TEST(Csv, SingleRowConstantRule) {
    const auto path = write_temp("one.csv", "a,b,y\n7.5,-3,1\n");
    auto res = load_csv(path, "y");
    EXPECT_DOUBLE_EQ(res.data.x(0, 0), 0.0);
    EXPECT_DOUBLE_EQ(res.data.x(0, 1), 0.0);
}

TEST(Csv, StandardizationIdempotent) {
    const auto path = write_temp("idem.csv", "a,y\n2,0\n4,1\n6,2\n1,3\n");
    auto once = load_csv(path, "y");
    // Re-standardizing already-standardized columns changes nothing.
    auto cols = once.data.columns;
    auto st = fit_standardization(cols);
    apply_standardization(cols, st);
    for (int i = 0; i < once.data.n(); ++i) EXPECT_DOUBLE_EQ(cols[0][i], once.data.x(i, 0));
}

TEST(Csv, ErrorsCarryRowAndColumn) {
    const auto path = write_temp("bad.csv", "a,y\n1,2\nx,3\n");
    try {
        load_csv(path, "y");
        FAIL() << "expected DataError";
    } catch (const DataError& e) {
        EXPECT_NE(std::string(e.what()).find("row 2"), std::string::npos);
        EXPECT_NE(std::string(e.what()).find("column 1"), std::string::npos);
    }
    const auto path2 = write_temp("gap.csv", "a,y\n1,\n");
    EXPECT_THROW(load_csv(path2, "y"), DataError);
    EXPECT_THROW(load_csv(path, "nope"), DataError);
}

TEST(Csv, ConstantBinaryResponseRejected) {
    const auto path = write_temp("const.csv", "a,y\n1,1\n2,1\n3,1\n");
    EXPECT_THROW(load_csv(path, "y", true, ResponseKind::Binary, false), DataError);
    // Same file as regression is fine.
    EXPECT_NO_THROW(load_csv(path, "y"));
}

TEST(Csv, BinaryAutoDetect) {
    const auto path = write_temp("bin.csv", "a,y\n1,1\n2,-1\n3,1\n");
    auto res = load_csv(path, "y");
    EXPECT_EQ(res.data.kind, ResponseKind::Binary);
    const auto path2 = write_temp("notbin.csv", "a,y\n1,1\n2,-1\n3,0.5\n");
    EXPECT_EQ(load_csv(path2, "y").data.kind, ResponseKind::Continuous);
}

TEST(Generate, ZeroNoiseReproducesSurface) {
    for (auto family :
         {ModelFamily::Linear, ModelFamily::Polynomial, ModelFamily::ShiftedPolynomial,
          ModelFamily::Sine, ModelFamily::Friedman1}) {
        SyntheticModelSpec spec;
        spec.family = family;
        spec.d = (family == ModelFamily::Friedman1) ? 6 : 3;
        spec.beta.assign(spec.d, 1.5);
        spec.degree.assign(spec.d, 2);
        spec.shift.assign(spec.d, 0.3);
        spec.freq.assign(spec.d, 2);
        spec.noise_sd = 0.0;
        auto data = generate(spec, 50, 11);
        std::vector<double> x(spec.d);
        for (int i = 0; i < data.n(); ++i) {
            for (int j = 0; j < spec.d; ++j) x[j] = data.x(i, j);
            EXPECT_NEAR(data.response[i], spec.f(x), 1e-12);
        }
    }
}

TEST(Generate, LinearZeroNoiseIsIdentity) {
    SyntheticModelSpec spec;
    spec.family = ModelFamily::Linear;
    spec.d = 1;
    spec.beta = {1.0};
    auto data = generate(spec, 5, 3);
    for (int i = 0; i < 5; ++i) EXPECT_DOUBLE_EQ(data.response[i], data.x(i, 0));
}

TEST(Generate, Deterministic) {
    SyntheticModelSpec spec;
    spec.family = ModelFamily::Sine;
    spec.d = 1;
    spec.beta = {1.0};
    spec.freq = {1};
    spec.noise_sd = 1.0;
    auto a = generate(spec, 100, 77);
    auto b = generate(spec, 100, 77);
    for (int i = 0; i < 100; ++i) {
        EXPECT_DOUBLE_EQ(a.response[i], b.response[i]);
        EXPECT_DOUBLE_EQ(a.x(i, 0), b.x(i, 0));
    }
    auto c = generate(spec, 100, 78);
    bool differs = false;
    for (int i = 0; i < 100; ++i) differs |= (a.response[i] != c.response[i]);
    EXPECT_TRUE(differs);
}

TEST(Generate, FriedmanSpotValue) {
    SyntheticModelSpec spec;
    spec.family = ModelFamily::Friedman1;
    spec.d = 5;
    std::vector<double> x(5, 0.5);
    // 10 sin(pi/4) + 0 + 5 + 2.5
    EXPECT_NEAR(spec.f(x), 10.0 * std::sin(M_PI / 4.0) + 7.5, 1e-12);
    EXPECT_NEAR(spec.f(x), 14.5711, 1e-4);
}

TEST(Generate, InvalidSpecRejected) {
    SyntheticModelSpec spec;
    spec.family = ModelFamily::Friedman1;
    spec.d = 4;
    EXPECT_THROW(generate(spec, 10, 1), SpecError);
    SyntheticModelSpec lin;
    lin.family = ModelFamily::Linear;
    lin.d = 2;
    lin.beta = {1.0};  // wrong length
    EXPECT_THROW(generate(lin, 10, 1), SpecError);
}

TEST(Generate, LogisticLabelsAreBinary) {
    SyntheticModelSpec spec;
    spec.family = ModelFamily::Logistic;
    spec.d = 2;
    spec.beta = {3.0, -1.0};
    spec.beta0 = -1.0;
    auto data = generate(spec, 400, 5);
    EXPECT_EQ(data.kind, ResponseKind::Binary);
    int pos = 0;
    for (double y : data.response) {
        EXPECT_TRUE(y == 1.0 || y == -1.0);
        if (y > 0) ++pos;
    }
    EXPECT_GT(pos, 0);
    EXPECT_LT(pos, 400);
}

TEST(Generate, BetaMarginals) {
    SyntheticModelSpec spec;
    spec.family = ModelFamily::Linear;
    spec.d = 2;
    spec.beta = {1.0, 1.0};
    spec.distribution = {MarginalKind::Beta21, MarginalKind::BetaHalf1};
    auto data = generate(spec, 20000, 9);
    double m0 = 0.0, m1 = 0.0;
    for (int i = 0; i < data.n(); ++i) {
        m0 += data.x(i, 0);
        m1 += data.x(i, 1);
    }
    EXPECT_NEAR(m0 / data.n(), 2.0 / 3.0, 0.01);  // Beta(2,1) mean
    EXPECT_NEAR(m1 / data.n(), 1.0 / 3.0, 0.01);  // Beta(1/2,1) mean
}

TEST(NodeRegion, MembershipConsistency) {
    SyntheticModelSpec spec;
    spec.family = ModelFamily::Linear;
    spec.d = 3;
    spec.beta = {1.0, 0.5, -2.0};
    auto data = generate(spec, 300, 21);
    NodeRegion region;
    region.lower = {0.2, 0.0, 0.1};
    region.upper = {0.9, 0.5, 1.0};
    for (int i = 0; i < data.n(); ++i)
        if (region.contains(data, i)) region.rows.push_back(i);
    region.check_invariants(data);
    // Filtering the full dataset by bounds reproduces exactly the row list.
    std::vector<int> refiltered;
    for (int i = 0; i < data.n(); ++i) {
        bool in = true;
        for (int j = 0; j < 3; ++j)
            in = in && data.x(i, j) >= region.lower[j] && data.x(i, j) <= region.upper[j];
        if (in) refiltered.push_back(i);
    }
    EXPECT_EQ(region.rows, refiltered);
}

TEST(NodeRegion, DegenerateRejected) {
    SyntheticModelSpec spec;
    spec.family = ModelFamily::Linear;
    spec.d = 1;
    spec.beta = {1.0};
    auto data = generate(spec, 10, 2);
    NodeRegion region;
    region.lower = {0.5};
    region.upper = {0.5};
    EXPECT_THROW(region.check_invariants(data), DataError);
}

TEST(Csv, AirfoilShapedFile) {
    // 1503 rows, five feature columns plus the response.
    std::string content = "f1,f2,f3,f4,f5,y\n";
    unsigned state = 12345;
    auto next = [&]() {
        state = state * 1664525u + 1013904223u;
        return (state >> 8) % 10000 / 10000.0;
    };
    for (int i = 0; i < 1503; ++i) {
        for (int j = 0; j < 5; ++j) content += std::to_string(next() * 50.0) + ",";
        content += std::to_string(next() * 140.0) + "\n";
    }
    const auto path = write_temp("airfoil_like.csv", content);
    auto res = load_csv(path, "y");
    EXPECT_EQ(res.data.n(), 1503);
    EXPECT_EQ(res.data.d(), 5);
    res.data.validate();
}

TEST(SpecJson, RoundTrip) {
    SyntheticModelSpec spec;
    spec.family = ModelFamily::Sine;
    spec.d = 2;
    spec.beta = {1.0, 2.0};
    spec.freq = {3, 1};
    spec.noise_sd = 0.25;
    spec.distribution = {MarginalKind::Uniform, MarginalKind::Beta21};
    auto j = spec_to_json(spec);
    auto back = spec_from_json(j);
    EXPECT_EQ(back.family, ModelFamily::Sine);
    EXPECT_EQ(back.freq, spec.freq);
    EXPECT_EQ(back.beta, spec.beta);
    EXPECT_EQ(back.marginal_kind(1), MarginalKind::Beta21);
    // Scalar broadcast.
    auto j2 = nlohmann::json::parse(R"({"family":"polynomial","d":3,"beta":1.0,"k":2})");
    auto s2 = spec_from_json(j2);
    EXPECT_EQ(s2.beta.size(), 3u);
    EXPECT_EQ(s2.degree[2], 2);
}
