// Test-only oracles, independent of the library's implementation paths.
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <random>
#include <unsupported/Eigen/MatrixFunctions>
#include <vector>

#include "parabolica/dense.hpp"
#include "parabolica/lagrange.hpp"

namespace oracles {

/// Eigenvalues of a symmetric 3x3 by characteristic-polynomial bisection.
inline std::vector<double> charpoly_eigenvalues_3x3(const parabolica::Mat& m) {
    auto det = [&](double lambda) {
        const double a = m(0, 0) - lambda, b = m(0, 1), c = m(0, 2);
        const double d = m(1, 1) - lambda, e = m(1, 2), f = m(2, 2) - lambda;
        return a * (d * f - e * e) - b * (b * f - e * c) + c * (b * e - d * c);
    };
    // Gershgorin interval
    double lo = 1e300, hi = -1e300;
    for (int i = 0; i < 3; ++i) {
        double r = 0.0;
        for (int j = 0; j < 3; ++j)
            if (i != j) r += std::abs(m(i, j));
        lo = std::min(lo, m(i, i) - r);
        hi = std::max(hi, m(i, i) + r);
    }
    lo -= 1.0;
    hi += 1.0;
    // cubic in -lambda^3: sample sign changes on a fine grid, then bisect
    std::vector<double> roots;
    const int N = 20000;
    double prev_x = lo, prev_f = det(lo);
    for (int k = 1; k <= N && roots.size() < 3; ++k) {
        const double x = lo + (hi - lo) * k / N;
        const double fx = det(x);
        if (prev_f == 0.0) roots.push_back(prev_x);
        else if (prev_f * fx < 0.0) {
            double a = prev_x, b = x, fa = prev_f;
            for (int it = 0; it < 200; ++it) {
                const double mid = 0.5 * (a + b);
                const double fm = det(mid);
                if (fa * fm <= 0.0) b = mid;
                else {
                    a = mid;
                    fa = fm;
                }
            }
            roots.push_back(0.5 * (a + b));
        }
        prev_x = x;
        prev_f = fx;
    }
    std::sort(roots.begin(), roots.end());
    return roots;
}

/// Dense matrix exponential propagator (scaling-and-squaring via Eigen).
inline Eigen::VectorXd expm_apply(const Eigen::MatrixXd& A, double time,
                                  const Eigen::VectorXd& f) {
    const Eigen::MatrixXd E = (time * A).exp();
    return E * f;
}

/// Brute-force maximization of the appendix functional F over the affine
/// constraint set, by dense grid search with iterative shrinking around the
/// best point.  Coordinates: xi^j = c_j zeta/|zeta|^2 + sum_k y_{jk} e_k
/// with {e_k} an orthonormal basis of zeta-perp.
inline double lagrange_bruteforce(const parabolica::LagrangeInput& in, int grid_pts = 7,
                                  int rounds = 60) {
    using parabolica::Vec;
    const int d = static_cast<int>(in.Q.rows);
    const int m = static_cast<int>(in.C.rows);
    const double z2 = in.zeta.norm2();

    // orthonormal basis of the orthogonal complement of zeta (Gram-Schmidt)
    std::vector<Vec> basis;
    for (int k = 0; k < m && static_cast<int>(basis.size()) < m - 1; ++k) {
        Vec v(static_cast<std::size_t>(m));
        v[k] = 1.0;
        double proj = v.dot(in.zeta) / z2;
        for (int i = 0; i < m; ++i) v[i] -= proj * in.zeta[i];
        for (const auto& b : basis) {
            const double pb = v.dot(b);
            for (int i = 0; i < m; ++i) v[i] -= pb * b[i];
        }
        if (v.norm() > 1e-10) {
            v *= 1.0 / v.norm();
            basis.push_back(v);
        }
    }
    const int free_per_j = static_cast<int>(basis.size());
    const int dof = d * free_per_j;

    auto assemble = [&](const std::vector<double>& y) {
        std::vector<Vec> xi(static_cast<std::size_t>(d));
        for (int j = 0; j < d; ++j) {
            Vec v = in.zeta;
            v *= in.grad_phi[j] / (2.0 * in.n * z2);
            for (int k = 0; k < free_per_j; ++k) {
                Vec w = basis[static_cast<std::size_t>(k)];
                w *= y[static_cast<std::size_t>(j * free_per_j + k)];
                v += w;
            }
            xi[static_cast<std::size_t>(j)] = v;
        }
        return xi;
    };

    std::vector<double> center(static_cast<std::size_t>(dof), 0.0);
    double width = 8.0;
    double best = lagrange_F(in, assemble(center));
    if (dof == 0) return best;

    std::vector<int> idx(static_cast<std::size_t>(dof), 0);
    for (int round = 0; round < rounds; ++round) {
        std::vector<double> best_y = center;
        std::fill(idx.begin(), idx.end(), 0);
        while (true) {
            std::vector<double> y(static_cast<std::size_t>(dof));
            for (int k = 0; k < dof; ++k)
                y[k] = center[k] + width * (2.0 * idx[k] / (grid_pts - 1) - 1.0);
            const double val = parabolica::lagrange_F(in, assemble(y));
            if (val > best) {
                best = val;
                best_y = y;
            }
            int k = 0;
            while (k < dof && ++idx[k] == grid_pts) idx[k++] = 0;
            if (k == dof) break;
        }
        center = best_y;
        width *= 0.55;
    }
    return best;
}

/// Observed convergence order from errors at steps (v, v/2).
inline double observed_order(double err_coarse, double err_fine) {
    return std::log2(err_coarse / err_fine);
}

}  // namespace oracles
