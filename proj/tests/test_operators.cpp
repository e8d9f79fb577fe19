#include <gtest/gtest.h>

#include <random>

#include "parabolica/families.hpp"
#include "parabolica/operators.hpp"

using namespace parabolica;

namespace {

OperatorSpec heat_spec(int d) {
    OperatorSpec s;
    s.d = d;
    s.m = 1;
    s.Q = [d](double, const Vec&) { return Mat::identity(d); };
    s.dQ = [d](double, const Vec&, int) { return Mat(d, d); };
    for (int i = 0; i < d; ++i) s.B.push_back([](double, const Vec&) { return Mat(1, 1); });
    s.dB = [](double, const Vec&, int, int) { return Mat(1, 1); };
    s.C = [](double, const Vec&) { return Mat(1, 1); };
    s.dC = [](double, const Vec&, int) { return Mat(1, 1); };
    s.has_decomposition = true;
    for (int i = 0; i < d; ++i) {
        s.b.push_back([](double, const Vec&) { return 0.0; });
        s.Btilde.push_back([](double, const Vec&) { return Mat(1, 1); });
    }
    return s;
}

OperatorSpec anisotropic_spec() {
    // smooth full Q(x), plus drift and potential, m = 2
    OperatorSpec s;
    s.d = 2;
    s.m = 2;
    s.Q = [](double, const Vec& x) {
        Mat q(2, 2);
        q(0, 0) = 2.0 + std::sin(x[0]);
        q(1, 1) = 3.0 + std::cos(x[1]);
        q(0, 1) = q(1, 0) = 0.5 * std::sin(x[0] + x[1]);
        return q;
    };
    for (int i = 0; i < 2; ++i)
        s.B.push_back([i](double, const Vec& x) {
            Mat b(2, 2);
            b(0, 0) = 0.3 * x[i];
            b(1, 1) = -0.2 * x[1 - i];
            b(0, 1) = b(1, 0) = 0.1;
            return b;
        });
    s.C = [](double, const Vec& x) {
        Mat c(2, 2);
        c(0, 0) = -1.0 - x.norm2();
        c(1, 1) = -2.0;
        c(0, 1) = c(1, 0) = 0.2;
        return c;
    };
    return s;
}

double max_matrix_asymmetry(const Eigen::SparseMatrix<double, Eigen::RowMajor>& m) {
    Eigen::SparseMatrix<double, Eigen::RowMajor> diff = m;
    Eigen::SparseMatrix<double, Eigen::RowMajor> tr = m.transpose();
    diff -= tr;
    double worst = 0.0;
    for (int k = 0; k < diff.outerSize(); ++k)
        for (decltype(diff)::InnerIterator it(diff, k); it; ++it)
            worst = std::max(worst, std::abs(it.value()));
    return worst;
}

}  // namespace

TEST(Assemble, OneDimensionalHeatRow) {
    auto s = heat_spec(1);
    auto g = Grid::build(1, 1.0, 0.25);
    auto op = assemble(s, 0.0, g, BC::dirichlet, Flavor::vector_A);
    // interior row: (1, -2, 1)/h^2
    const double inv_h2 = 16.0;
    const int mid = static_cast<int>(g.size() / 2);
    Field e(g, 1);
    e.at(mid, 0) = 1.0;
    Field r = op.apply(e);
    EXPECT_NEAR(r.at(mid, 0), -2.0 * inv_h2, 1e-12);
    EXPECT_NEAR(r.at(mid - 1, 0), inv_h2, 1e-12);
    EXPECT_NEAR(r.at(mid + 1, 0), inv_h2, 1e-12);
    EXPECT_TRUE(op.symmetric_hint);
    EXPECT_FALSE(op.peclet_warning);
}

TEST(Assemble, DiffusionOnlyDirichletIsSymmetricNegative) {
    auto s = anisotropic_spec();
    for (int i = 0; i < 2; ++i) s.B[i] = [](double, const Vec&) { return Mat(2, 2); };
    s.C = [](double, const Vec&) { return Mat(2, 2); };
    auto g = Grid::build(2, 1.5, 0.25);
    auto op = assemble(s, 0.0, g, BC::dirichlet, Flavor::vector_A);
    EXPECT_LE(max_matrix_asymmetry(op.mat), 1e-12);

    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        Field f(g, 2);
        for (std::size_t i = 0; i < f.v.size(); ++i) f.v[i] = u(rng);
        f.zero_boundary();
        const Field af = op.apply(f);
        EXPECT_LE(l2_inner(af, f), 1e-10);
    }
}

TEST(Assemble, NeumannDiffusionAnnihilatesConstants) {
    auto s = anisotropic_spec();
    for (int i = 0; i < 2; ++i) s.B[i] = [](double, const Vec&) { return Mat(2, 2); };
    s.C = [](double, const Vec&) { return Mat(2, 2); };
    auto g = Grid::build(2, 1.5, 0.25);
    auto op = assemble(s, 0.0, g, BC::neumann, Flavor::vector_A);
    Field ones(g, 2);
    for (auto& v : ones.v) v = 1.0;
    const Field r = op.apply(ones);
    EXPECT_LE(sup_norm(r), 1e-10);
}

TEST(Assemble, AdjointOfConstantDriftFlipsSign) {
    // vector_A_star with B constant, C = 0 equals vector_A with B -> -B
    OperatorSpec s = heat_spec(2);
    s.m = 2;
    s.Q = [](double, const Vec&) { return Mat::identity(2); };
    Mat B0(2, 2);
    B0(0, 0) = 0.4;
    B0(1, 1) = -0.3;
    B0(0, 1) = B0(1, 0) = 0.2;
    s.B.clear();
    for (int i = 0; i < 2; ++i) s.B.push_back([B0](double, const Vec&) { return B0; });
    s.C = [](double, const Vec&) { return Mat(2, 2); };
    auto g = Grid::build(2, 1.5, 0.25);
    auto star = assemble(s, 0.0, g, BC::dirichlet, Flavor::vector_A_star);

    OperatorSpec neg = s;
    neg.B.clear();
    Mat mB0 = B0;
    mB0 *= -1.0;
    for (int i = 0; i < 2; ++i) neg.B.push_back([mB0](double, const Vec&) { return mB0; });
    auto flipped = assemble(neg, 0.0, g, BC::dirichlet, Flavor::vector_A);

    Eigen::SparseMatrix<double, Eigen::RowMajor> diff = star.mat;
    diff -= flipped.mat;
    double worst = 0.0;
    for (int k = 0; k < diff.outerSize(); ++k)
        for (decltype(diff)::InnerIterator it(diff, k); it; ++it)
            worst = std::max(worst, std::abs(it.value()));
    EXPECT_LE(worst, 1e-12);
}

TEST(Assemble, TaylorConsistencyOnQuadratic) {
    // applied to u = (x1 x2, x1 x2): the stencil matches the analytic value
    // of A u at second order under refinement
    auto spec = anisotropic_spec();
    auto exact = [&](const Vec& x) {
        // A u = sum_ij D_i(q_ij D_j u_k) + sum_i B_i D_i u + C u (per component)
        // with u_k = x1 x2: D u = (x2, x1), D^2 u = [[0,1],[1,0]]
        // div(Q D u)_k = sum_ij [D_i q_ij D_j u + q_ij D_ij u]
        const double h = 1e-6;
        double divq = 0.0;
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) {
                Vec xp = x, xm = x;
                xp[i] += h;
                xm[i] -= h;
                const double dqi = (spec.Q(0.0, xp)(i, j) - spec.Q(0.0, xm)(i, j)) / (2 * h);
                const double du_j = j == 0 ? x[1] : x[0];
                const double dij = i == j ? 0.0 : 1.0;
                divq += dqi * du_j + spec.Q(0.0, x)(i, j) * dij;
            }
        Vec u{x[0] * x[1], x[0] * x[1]};
        Vec out{divq, divq};
        for (int i = 0; i < 2; ++i) {
            const double du_i = i == 0 ? x[1] : x[0];
            Vec grad_comp{du_i, du_i};
            Vec bi = spec.B[i](0.0, x).apply(grad_comp);
            out += bi;
        }
        out += spec.C(0.0, x).apply(u);
        return out;
    };
    auto worst_err = [&](double h) {
        auto g = Grid::build(2, 1.0, h);
        auto op = assemble(spec, 0.0, g, BC::dirichlet, Flavor::vector_A);
        Field f(g, 2);
        for (std::size_t n = 0; n < g.size(); ++n) {
            const Vec x = g.point(static_cast<int>(n));
            f.at(static_cast<int>(n), 0) = x[0] * x[1];
            f.at(static_cast<int>(n), 1) = x[0] * x[1];
        }
        const Field r = op.apply(f);
        double worst = 0.0;
        for (std::size_t n = 0; n < g.size(); ++n) {
            const Vec x = g.point(static_cast<int>(n));
            if (x.norm() > 0.5) continue;  // well inside: pure Taylor error
            const Vec ex = exact(x);
            worst = std::max(worst, std::abs(r.at(static_cast<int>(n), 0) - ex[0]));
            worst = std::max(worst, std::abs(r.at(static_cast<int>(n), 1) - ex[1]));
        }
        return worst;
    };
    const double e1 = worst_err(0.05), e2 = worst_err(0.025);
    EXPECT_GE(std::log2(e1 / e2), 1.9);
}

TEST(Assemble, ScalarFlavorUsesDecompositionDrift) {
    FamilyParams p;
    p.a = 1.0;
    p.b = 3.0;
    auto s = example1(p);
    auto g = Grid::build(2, 2.0, 0.25);
    auto op = assemble(s, 0.0, g, BC::dirichlet, Flavor::scalar_A);
    EXPECT_EQ(op.m, 1);
    EXPECT_FALSE(op.symmetric_hint);  // drift present

    OperatorSpec no_decomp = s;
    no_decomp.has_decomposition = false;
    EXPECT_THROW(assemble(no_decomp, 0.0, g, BC::dirichlet, Flavor::scalar_A), SpecError);
}

TEST(Assemble, PecletWarningFiresForStiffDrift) {
    FamilyParams p;
    p.a = 1.0;
    p.b = 3.0;
    auto s = example1(p);
    auto coarse = Grid::build(2, 4.0, 0.5);
    auto op = assemble(s, 0.0, coarse, BC::dirichlet, Flavor::scalar_A);
    EXPECT_TRUE(op.peclet_warning);  // |b| h / (2 lambda_Q) = 34 * 0.25 >> 1
    auto fine = Grid::build(2, 1.0, 0.0625);
    auto op2 = assemble(s, 0.0, fine, BC::dirichlet, Flavor::scalar_A);
    EXPECT_FALSE(op2.peclet_warning);
}
