#include <gtest/gtest.h>

#include "parabolica/estimates.hpp"
#include "parabolica/families.hpp"

using namespace parabolica;

namespace {

OperatorSpec heat_spec(int d, double potential = 0.0) {
    OperatorSpec s;
    s.d = d;
    s.m = 1;
    s.Q = [d](double, const Vec&) { return Mat::identity(d); };
    s.dQ = [d](double, const Vec&, int) { return Mat(d, d); };
    s.d2Q = [d](double, const Vec&, int, int) { return Mat(d, d); };
    for (int i = 0; i < d; ++i) s.B.push_back([](double, const Vec&) { return Mat(1, 1); });
    s.dB = [](double, const Vec&, int, int) { return Mat(1, 1); };
    s.C = [potential](double, const Vec&) {
        Mat c(1, 1);
        c(0, 0) = potential;
        return c;
    };
    s.dC = [](double, const Vec&, int) { return Mat(1, 1); };
    s.has_decomposition = true;
    for (int i = 0; i < d; ++i) {
        s.b.push_back([](double, const Vec&) { return 0.0; });
        s.Btilde.push_back([](double, const Vec&) { return Mat(1, 1); });
    }
    s.db = [d](double, const Vec&) { return Mat(d, d); };
    s.dBtilde = [](double, const Vec&, int, int) { return Mat(1, 1); };
    s.growth.Lambda_C = {0.0, potential == 0.0 ? 0 : (potential < 0 ? -1 : +1)};
    s.beta = 0.5;
    s.gamma = 0.25;
    return s;
}

VerifyContext heat_context(double radius = 4.0, double h = 0.0625, double potential = 0.0) {
    OperatorSpec s = heat_spec(1, potential);
    VerifyContext ctx{s,
                      Grid::build(1, radius, h),
                      SamplePlan{SampleBox{radius, 17}, TimeWindow{0.0, 1.0, 2}},
                      SphereSample::standard(1),
                      EvolutionConfig{},
                      BC::dirichlet,
                      {}};
    ctx.evo.dt = 5e-3;
    ctx.evo.solver_tol = 1e-12;
    return ctx;
}

}  // namespace

TEST(Pointwise, ScalarHeatIsDiscreteJensen) {
    auto ctx = heat_context();
    Field f = bump_field(ctx.grid, 1, Vec{0.0}, 1.0, {1.0});
    auto rep = check_pointwise(ctx, f, 2.0, 0.0, 0.1);
    EXPECT_TRUE(rep.pass);
    EXPECT_GE(rep.worst_margin, -1e-8);
    EXPECT_NEAR(rep.metadata.at("K_J"), 0.0, 1e-12);
}

TEST(Pointwise, ConstantDataUnderNeumannGivesZeroMargin) {
    auto ctx = heat_context();
    ctx.bc = BC::neumann;
    Field f(ctx.grid, 1);
    for (auto& v : f.v) v = 1.0;
    auto rep = check_pointwise(ctx, f, 2.0, 0.0, 0.1);
    EXPECT_TRUE(rep.pass);
    EXPECT_NEAR(rep.worst_margin, 0.0, 1e-12);
    EXPECT_NEAR(rep.lhs, 1.0, 1e-12);
    EXPECT_NEAR(rep.rhs, 1.0, 1e-12);
}

TEST(Pointwise, RejectsPBelowThreshold) {
    auto ctx = heat_context();
    Field f = bump_field(ctx.grid, 1, Vec{0.0}, 1.0, {1.0});
    EXPECT_THROW(check_pointwise(ctx, f, 1.1, 0.0, 0.1), SpecError);  // beta = 0.5 -> p >= 1.5
}

TEST(LpBound, HeatContractionAllRoutes) {
    auto ctx = heat_context();
    Field f = bump_field(ctx.grid, 1, Vec{0.0}, 1.0, {1.0});
    auto direct = check_lp_bound(ctx, f, 2.0, 0.0, 0.1, LpMode::thm33);
    EXPECT_TRUE(direct.pass);
    EXPECT_NEAR(direct.metadata.at("c_p"), 1.0, 1e-12);  // L_J = 0
    EXPECT_GE(direct.metadata.at("energy_rate_margin"), -1e-6);

    auto via_scalar = check_lp_bound(ctx, f, 2.0, 0.0, 0.1, LpMode::thm34);
    EXPECT_TRUE(via_scalar.pass);

    // dual route needs kappa
    EXPECT_THROW(check_lp_bound(ctx, f, 1.5, 0.0, 0.1, LpMode::thm33_dual), SpecError);
    ctx.kappa.f = [](double, const Vec&) { return -1.0; };
    ctx.kappa.growth = {0.0, -1};
    ctx.kappa.present = true;
    auto dual = check_lp_bound(ctx, f, 1.5, 0.0, 0.1, LpMode::thm33_dual);
    EXPECT_TRUE(dual.pass);
    EXPECT_THROW(check_lp_bound(ctx, f, 3.0, 0.0, 0.1, LpMode::thm33_dual), SpecError);
    EXPECT_THROW(check_lp_bound(ctx, f, 1.5, 0.0, 0.1, LpMode::thm33), SpecError);
}

TEST(Uniform, HeatGammaOne) {
    auto ctx = heat_context();
    Field f = bump_field(ctx.grid, 1, Vec{0.0}, 1.0, {1.0});
    auto rep = check_uniform(ctx, f, 0.0, 0.1, UniformMode::gamma_one);
    EXPECT_TRUE(rep.pass);
    EXPECT_DOUBLE_EQ(rep.metadata.at("gamma"), 1.0);
    EXPECT_EQ(rep.metadata.at("K_nonneg_ok"), 1.0);
}

TEST(Uniform, AppendixShiftNearEqualityOnGrowingMode) {
    // C = c I with c > 0, h = c: u = e^{c(t-s)} f exactly for constant data.
    // theta = 0 keeps the discrete growth below the exponential.
    const double c = 0.8;
    auto ctx = heat_context(4.0, 0.0625, c);
    ctx.bc = BC::neumann;
    ctx.evo.theta = 0.0;
    ctx.evo.dt = 1e-3;
    Field f(ctx.grid, 1);
    for (auto& v : f.v) v = 1.0;
    ScalarFieldDecl h_shift;
    h_shift.f = [c](double, const Vec&) { return c; };
    h_shift.growth = {0.0, +1};
    h_shift.present = true;
    auto rep = check_uniform(ctx, f, 0.0, 0.1, UniformMode::appendixA, h_shift);
    EXPECT_TRUE(rep.pass);
    EXPECT_NEAR(rep.metadata.at("h_0"), c, 1e-12);
    EXPECT_NEAR(rep.lhs, rep.rhs, 1e-4 * rep.rhs);  // near-equality
    EXPECT_GE(rep.worst_margin, 0.0);

    EXPECT_THROW(check_uniform(ctx, f, 0.0, 0.1, UniformMode::appendixA, {}), SpecError);
}

TEST(Hyper, EqualExponentsReduceToLpBound) {
    auto ctx = heat_context();
    std::vector<Field> family{bump_field(ctx.grid, 1, Vec{0.0}, 1.0, {1.0})};
    auto rep = check_hyper(ctx, family, 2.0, 2.0, 0.0, 0.1);
    EXPECT_EQ(rep.estimate_id, "hyper");
    EXPECT_EQ(rep.metadata.at("reduced_to_lp"), 1.0);
    EXPECT_TRUE(rep.pass);
    EXPECT_THROW(check_hyper(ctx, family, 4.0, 2.0, 0.0, 0.1), SpecError);
}

TEST(Hyper, HeatSmoothingBoundedWithSplitConsistency) {
    auto ctx = heat_context(6.0, 0.03125);
    std::vector<Field> family;
    for (double w : {0.4, 0.2, 0.1})
        family.push_back(bump_field(ctx.grid, 1, Vec{0.0}, w, {1.0}));
    const double inf = std::numeric_limits<double>::infinity();
    auto rep = check_hyper(ctx, family, 1.0, inf, 0.0, 0.5);
    EXPECT_TRUE(rep.pass);
    EXPECT_EQ(rep.metadata.at("split_ok"), 1.0);
    EXPECT_EQ(rep.metadata.at("bounded_ok"), 1.0);
    // the limiting ratio is the Gaussian kernel sup (4 pi (t-s))^(-1/2)
    const double gauss = 1.0 / std::sqrt(4.0 * M_PI * 0.5);
    EXPECT_NEAR(rep.metadata.at("ratio_2"), gauss, 0.05 * gauss);

    auto rep2 = check_hyper(ctx, family, 2.0, 4.0, 0.0, 0.5);
    EXPECT_TRUE(rep2.pass);
    EXPECT_EQ(rep2.metadata.at("interp_ok"), 1.0);
}

TEST(Grad1, HeatBumpCommutingCase) {
    auto ctx = heat_context(6.0, 0.03125);
    Field f = bump_field(ctx.grid, 1, Vec{0.0}, 1.0, {1.0});
    auto rep = check_grad1(ctx, f, 2.0, 0.0, 0.1);
    EXPECT_TRUE(rep.pass);
    EXPECT_GE(rep.worst_margin, -1e-8);
    EXPECT_DOUBLE_EQ(rep.metadata.at("c_p"), 1.0);  // 2^{(p/2-1) v 0} at p = 2
}

TEST(Grad1, ConstantOnSupportInteriorTrivially) {
    auto ctx = heat_context();
    ctx.bc = BC::neumann;
    Field f(ctx.grid, 1);
    for (auto& v : f.v) v = 2.0;
    auto rep = check_grad1(ctx, f, 2.0, 0.0, 0.1);
    EXPECT_TRUE(rep.pass);
    EXPECT_NEAR(rep.lhs, 0.0, 1e-18);

    EXPECT_THROW(check_grad1(ctx, f, 1.2, 0.0, 0.1), SpecError);  // below threshold
    auto bad = ctx;
    bad.spec.sigma = 0.5;
    EXPECT_THROW(check_grad1(bad, f, 2.0, 0.0, 0.1), SpecError);
}

TEST(Grad2, HeatWithNegativePotentialSmoothing) {
    auto ctx = heat_context(6.0, 0.03125, -1.0);
    ctx.spec.xi = [](double) { return 1e-3; };
    Field f = bump_field(ctx.grid, 1, Vec{0.0}, 0.5, {1.0});
    auto rep = check_grad2(ctx, f, 2.0, 0.0, 1.0, {0.1, 0.25, 0.5, 1.0});
    EXPECT_TRUE(rep.pass);
    EXPECT_GE(rep.metadata.at("weighted_sup_slope"), -0.05);
    EXPECT_NEAR(rep.metadata.at("k_p"), 1.0, 1e-12);  // 2/(p(p-1) nu_0) at p = 2

    EXPECT_THROW(check_grad2(ctx, f, 2.0, 0.0, 0.02, {0.02}), SpecError);  // below 10 dt
}

TEST(Grad2, RefusesWhenSignConditionViolated) {
    auto ctx = heat_context(4.0, 0.0625, +1.0);  // Lambda_C = +1 > 0
    Field f = bump_field(ctx.grid, 1, Vec{0.0}, 1.0, {1.0});
    try {
        check_grad2(ctx, f, 2.0, 0.0, 0.5, {0.5});
        FAIL() << "expected refusal";
    } catch (const SpecError& e) {
        EXPECT_NE(std::string(e.what()).find("violated"), std::string::npos);
    }
}

TEST(W1p, HeatEndpointsContract) {
    auto ctx = heat_context(6.0, 0.03125, -1.0);
    ctx.spec.xi = [](double) { return 1e-3; };
    Field f = bump_field(ctx.grid, 1, Vec{0.0}, 1.0, {1.0});
    auto rep = check_w1p(ctx, f, 2.0, 0.0, 0.5);
    EXPECT_TRUE(rep.pass);
    EXPECT_GT(rep.metadata.at("c_p^1"), 0.0);
    EXPECT_GT(rep.metadata.at("c_p^2"), 0.0);
}

TEST(DomainConvergence, HeatInnerDifferencesShrink) {
    auto spec = heat_spec(1);
    EvolutionConfig evo;
    evo.dt = 5e-3;
    evo.solver_tol = 1e-12;
    auto f_fn = [](const Vec& x) {
        Vec out(1);
        const double q = x.norm2();
        if (q < 1.0) out[0] = std::exp(1.0 - 1.0 / (1.0 - q));
        return out;
    };
    auto rep = domain_convergence(spec, 0.125, {4.0, 6.0, 8.0}, 2.0, f_fn, 0.0, 0.1, evo);
    EXPECT_TRUE(rep.pass);
    EXPECT_EQ(rep.metadata.at("monotone"), 1.0);
    EXPECT_EQ(rep.metadata.at("gap_monotone"), 1.0);
    EXPECT_THROW(domain_convergence(spec, 0.125, {4.0, 6.0}, 5.0, f_fn, 0.0, 0.1, evo),
                 SpecError);
}
