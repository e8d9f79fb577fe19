#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "parabolica/families.hpp"
#include "parabolica/lagrange.hpp"

using namespace parabolica;

namespace {

LagrangeInput random_instance(std::mt19937_64& rng, int d, int m) {
    std::uniform_real_distribution<double> u(-1.5, 1.5);
    LagrangeInput in;
    // Q = A A^T + I: symmetric positive definite
    Mat A(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) A(i, j) = u(rng);
    in.Q = Mat::identity(d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            double s = 0.0;
            for (int k = 0; k < d; ++k) s += A(i, k) * A(j, k);
            in.Q(i, j) += s;
        }
    for (int i = 0; i < d; ++i) {
        Mat B(m, m);
        for (int r = 0; r < m; ++r)
            for (int c = r; c < m; ++c) B(r, c) = B(c, r) = u(rng);
        in.B.push_back(B);
    }
    in.C = Mat(m, m);
    for (int r = 0; r < m; ++r)
        for (int c = r; c < m; ++c) in.C(r, c) = in.C(c, r) = u(rng);
    in.h = u(rng);
    in.zeta = Vec(static_cast<std::size_t>(m));
    double nz = 0.0;
    while (nz < 0.3) {
        for (int r = 0; r < m; ++r) in.zeta[r] = u(rng);
        nz = in.zeta.norm();
    }
    in.grad_phi = Vec(static_cast<std::size_t>(d));
    for (int i = 0; i < d; ++i) in.grad_phi[i] = u(rng);
    in.n = 1 + static_cast<int>(std::abs(u(rng)) * 3);
    in.a0_term = u(rng);
    return in;
}

}  // namespace

TEST(Lagrange, PotentialOnlyClosedForm) {
    // B = 0, C = -I, h = 0, grad_phi = 0: xi0 = 0, V = |zeta|^2,
    // F = a0/n - 2 |zeta|^2
    LagrangeInput in;
    const int d = 2, m = 3;
    in.Q = Mat::identity(d);
    for (int i = 0; i < d; ++i) in.B.push_back(Mat(m, m));
    in.C = Mat::identity(m);
    in.C *= -1.0;
    in.zeta = Vec{0.3, -0.4, 1.2};
    in.grad_phi = Vec(d, 0.0);
    in.n = 3;
    in.a0_term = 1.7;
    auto res = lagrange_maximizer(in);
    for (const auto& xi : res.xi0)
        for (std::size_t k = 0; k < xi.size(); ++k) EXPECT_NEAR(xi[k], 0.0, 1e-14);
    EXPECT_NEAR(res.Vmax, in.zeta.norm2(), 1e-13);
    EXPECT_NEAR(res.Fmax, in.a0_term / in.n - 2.0 * in.zeta.norm2(), 1e-13);
}

TEST(Lagrange, MaximizerSatisfiesConstraintAndStationarity) {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 40; ++trial) {
        const int d = 1 + static_cast<int>(rng() % 3);
        const int m = 1 + static_cast<int>(rng() % 3);
        const auto in = random_instance(rng, d, m);
        const auto res = lagrange_maximizer(in);
        const double z2 = in.zeta.norm2();
        for (int j = 0; j < d; ++j) {
            // <xi0^j, zeta> = grad_phi_j / (2n)
            EXPECT_NEAR(res.xi0[j].dot(in.zeta), in.grad_phi[j] / (2.0 * in.n),
                        1e-12 * std::max(1.0, std::abs(in.grad_phi[j])));
            // Lagrangian stationarity: 2 sum_k q_jk xi0^k - B_j zeta is parallel to zeta
            Vec g(static_cast<std::size_t>(m));
            for (int k = 0; k < d; ++k) {
                Vec t = res.xi0[static_cast<std::size_t>(k)];
                t *= 2.0 * in.Q(j, k);
                g += t;
            }
            g -= in.B[static_cast<std::size_t>(j)].apply(in.zeta);
            const double proj = g.dot(in.zeta) / z2;
            Vec perp = g;
            Vec par = in.zeta;
            par *= proj;
            perp -= par;
            EXPECT_LE(perp.norm(), 1e-10 * std::max(1.0, g.norm()));
        }
        // the direct evaluation agrees with the displayed expansion
        EXPECT_NEAR(res.Fmax, res.Fmax_closed, 1e-11 * std::max(1.0, std::abs(res.Fmax)));
    }
}

TEST(Lagrange, BruteForceOracleAgreesOnRandomInstances) {
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 12; ++trial) {
        const int d = 1 + static_cast<int>(rng() % 3);
        const int m = 1 + static_cast<int>(rng() % 3);
        const auto in = random_instance(rng, d, m);
        const auto res = lagrange_maximizer(in);
        const double brute = oracles::lagrange_bruteforce(in, 5, 50);
        EXPECT_LE(brute, res.Fmax + 1e-6);
        EXPECT_NEAR(brute, res.Fmax, 1e-6 * std::max(1.0, std::abs(res.Fmax)));
    }
}

TEST(Lagrange, RejectsDegenerateInput) {
    LagrangeInput in;
    in.Q = Mat::identity(2);
    in.B = {Mat(2, 2), Mat(2, 2)};
    in.C = Mat(2, 2);
    in.zeta = Vec{0.0, 0.0};
    in.grad_phi = Vec{0.0, 0.0};
    EXPECT_THROW(lagrange_maximizer(in), std::invalid_argument);

    in.zeta = Vec{1.0, 0.0};
    in.Q(1, 1) = -1.0;  // not positive definite
    EXPECT_THROW(lagrange_maximizer(in), SingularMatrixError);
}

TEST(Lagrange, Example1ContradictionStep) {
    // At |x0| = 1 with phi = 1 + |x|^2 and lambda > 2d the appendix requires
    // max F <= 0; this is the contradiction the uniform bound rests on.
    FamilyParams p;
    p.a = 1.0;
    p.b = 3.0;
    auto s = example1(p);
    const Vec x0{1.0, 0.0};
    const double lambda = 2.0 * s.d + 1.0;
    const double phi = 1.0 + x0.norm2();
    LagrangeInput in;
    in.Q = s.eval_Q(0.0, x0);
    for (int i = 0; i < s.d; ++i) in.B.push_back(s.eval_B(0.0, x0, i));
    in.C = s.eval_C(0.0, x0);
    in.h = 0.0;
    in.grad_phi = Vec{2.0 * x0[0], 2.0 * x0[1]};
    in.a0_term = 2.0 * s.d - lambda * phi;  // (A_0 - lambda) phi at x0, h = 0
    for (int n : {1, 2, 5, 20}) {
        in.n = n;
        for (const Vec& zeta : {Vec{1.0, 0.0}, Vec{0.3, -0.8}, Vec{-2.0, 1.0}}) {
            in.zeta = zeta;
            const auto res = lagrange_maximizer(in);
            EXPECT_LE(res.Fmax, 1e-12);
        }
    }
}
