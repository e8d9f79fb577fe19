#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>

#include "parabolica/grid.hpp"

using namespace parabolica;

TEST(Grid, OneDimensionalNodesAndBoundary) {
    auto g = Grid::build(1, 1.0, 0.5);
    ASSERT_EQ(g.size(), 5u);
    std::vector<double> xs;
    for (std::size_t n = 0; n < g.size(); ++n) xs.push_back(g.point(static_cast<int>(n))[0]);
    EXPECT_EQ(xs, (std::vector<double>{-1.0, -0.5, 0.0, 0.5, 1.0}));
    EXPECT_EQ(g.boundary_count(), 2u);
    EXPECT_FALSE(g.is_interior(0));
    EXPECT_TRUE(g.is_interior(2));
}

TEST(Grid, MaskedDiscNodeCount) {
    // brute-force count of lattice points with |x| <= 1 at h = 0.5
    auto g = Grid::build(2, 1.0, 0.5);
    int count = 0;
    for (int i = -2; i <= 2; ++i)
        for (int j = -2; j <= 2; ++j)
            if (i * i + j * j <= 4) ++count;
    EXPECT_EQ(count, 13);
    EXPECT_EQ(g.size(), 13u);
}

TEST(Grid, InteriorNeedsAllFaceNeighbors) {
    auto g = Grid::build(2, 1.0, 0.25);
    for (std::size_t n = 0; n < g.size(); ++n) {
        bool all = true;
        for (int i = 0; i < 2; ++i)
            all = all && g.neighbor(static_cast<int>(n), i, +1) >= 0 &&
                  g.neighbor(static_cast<int>(n), i, -1) >= 0;
        EXPECT_EQ(all, g.is_interior(static_cast<int>(n)));
    }
}

TEST(Grid, RejectsBadParameters) {
    EXPECT_THROW(Grid::build(4, 1.0, 0.1), GridError);
    EXPECT_THROW(Grid::build(1, 1.0, 0.0), GridError);
    EXPECT_THROW(Grid::build(1, 0.05, 0.1), GridError);  // radius < h
    EXPECT_THROW(Grid::build(2, 10.0, 1e-4, 1000), GridError);  // budget
}

TEST(Norms, SingleNodeIndicator) {
    auto g = Grid::build(1, 1.0, 0.25);
    Field f(g, 1);
    f.at(4, 0) = 1.0;  // one node
    for (double p : {1.0, 1.5, 2.0, 4.0})
        EXPECT_NEAR(lp_norm(f, p), std::pow(0.25, 1.0 / p), 1e-14);
    EXPECT_NEAR(lp_norm(f, std::numeric_limits<double>::infinity()), sup_norm(f), 0.0);
    EXPECT_THROW(lp_norm(f, 0.5), std::invalid_argument);
}

TEST(Norms, GaussianMatchesClosedFormIntegral) {
    // integral of exp(-p x^2) over R is sqrt(pi/p); lattice sums on a wide
    // ball converge at second order
    const double h = 0.01;
    auto g = Grid::build(1, 8.0, h);
    Field f(g, 1);
    for (std::size_t n = 0; n < g.size(); ++n)
        f.at(static_cast<int>(n), 0) = std::exp(-g.point(static_cast<int>(n))[0] *
                                                g.point(static_cast<int>(n))[0]);
    for (double p : {1.0, 2.0}) {
        const double exact = std::pow(std::sqrt(M_PI / p), 1.0 / p);
        EXPECT_NEAR(lp_norm(f, p), exact, 1e-6);
    }
}

TEST(Gradient, ExactForAffineFields) {
    auto g = Grid::build(2, 2.0, 0.25);
    Field f(g, 1);
    for (std::size_t n = 0; n < g.size(); ++n) {
        const Vec x = g.point(static_cast<int>(n));
        f.at(static_cast<int>(n), 0) = 2.0 * x[0] - 3.0 * x[1] + 1.0;
    }
    Field df = discrete_gradient(f);
    for (std::size_t n = 0; n < g.size(); ++n) {
        if (!g.is_interior(static_cast<int>(n))) continue;
        EXPECT_NEAR(df.at(static_cast<int>(n), 0), 2.0, 1e-12);
        EXPECT_NEAR(df.at(static_cast<int>(n), 1), -3.0, 1e-12);
    }
}

TEST(Gradient, ConstantFieldsVanishEverywhere) {
    auto g = Grid::build(2, 2.0, 0.5);
    Field f(g, 2);
    for (std::size_t n = 0; n < g.size(); ++n) {
        f.at(static_cast<int>(n), 0) = 3.0;
        f.at(static_cast<int>(n), 1) = -1.0;
    }
    Field df = discrete_gradient(f);
    for (double v : df.v) EXPECT_NEAR(v, 0.0, 1e-14);
}

TEST(Gradient, SecondOrderInteriorConvergence) {
    // quadratic-plus-cubic field: interior error is O(h^2)
    auto err_at = [](double h) {
        auto g = Grid::build(1, 2.0, h);
        Field f(g, 1);
        for (std::size_t n = 0; n < g.size(); ++n) {
            const double x = g.point(static_cast<int>(n))[0];
            f.at(static_cast<int>(n), 0) = std::sin(x);
        }
        Field df = discrete_gradient(f);
        double worst = 0.0;
        for (std::size_t n = 0; n < g.size(); ++n) {
            if (!g.is_interior(static_cast<int>(n))) continue;
            const double x = g.point(static_cast<int>(n))[0];
            worst = std::max(worst, std::abs(df.at(static_cast<int>(n), 0) - std::cos(x)));
        }
        return worst;
    };
    const double e1 = err_at(0.05), e2 = err_at(0.025);
    EXPECT_GE(std::log2(e1 / e2), 1.9);
}

TEST(FieldIO, BinaryRoundTripAndMismatends) {
    namespace fs = std::filesystem;
    auto g = Grid::build(2, 1.0, 0.25);
    Field f(g, 2);
    for (std::size_t i = 0; i < f.v.size(); ++i) f.v[i] = std::sin(0.1 * i);
    const std::string path = (fs::temp_directory_path() / "parabolica_field.bin").string();
    write_field_binary(f, path);
    Field back = read_field_binary(g, path);
    EXPECT_EQ(back.m, 2);
    for (std::size_t i = 0; i < f.v.size(); ++i) EXPECT_DOUBLE_EQ(back.v[i], f.v[i]);

    auto g2 = Grid::build(2, 1.0, 0.5);
    EXPECT_THROW(read_field_binary(g2, path), GridError);
    std::remove(path.c_str());

    const std::string csv = (fs::temp_directory_path() / "parabolica_field.csv").string();
    write_field_csv(f, csv);
    std::ifstream is(csv);
    std::string header;
    std::getline(is, header);
    EXPECT_NE(header.find("d=2"), std::string::npos);
    std::size_t rows = 0;
    std::string line;
    while (std::getline(is, line)) ++rows;
    EXPECT_EQ(rows, g.size());
    std::remove(csv.c_str());
}

TEST(Bump, SmoothCompactSupport) {
    auto g = Grid::build(1, 4.0, 0.125);
    Field f = bump_field(g, 1, Vec{0.0}, 1.0, {2.0});
    EXPECT_TRUE(f.vanishes_on_boundary());
    double maxv = 0.0;
    for (std::size_t n = 0; n < g.size(); ++n) {
        const double x = g.point(static_cast<int>(n))[0];
        if (std::abs(x) >= 1.0) EXPECT_EQ(f.at(static_cast<int>(n), 0), 0.0);
        maxv = std::max(maxv, f.at(static_cast<int>(n), 0));
    }
    EXPECT_NEAR(maxv, 2.0, 1e-12);
}
