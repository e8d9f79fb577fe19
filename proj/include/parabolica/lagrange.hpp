#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "dense.hpp"

namespace parabolica {

/// Inputs of the constrained maximization behind the uniform bound:
/// maximize F(xi^1..xi^d) = a0_term/n - 2 V(xi, zeta) over the affine set
///   Sigma = { <xi^j, zeta> = grad_phi_j / (2n) },
/// where V(xi, zeta) = sum_ij q_ij <xi^i, xi^j> - sum_j <B_j xi^j, zeta>
///                     - <(C - h) zeta, zeta>
/// and a0_term = (A_0 phi~)(x0) + (2h - lambda) phi~(x0).
struct LagrangeInput {
    Mat Q;                  // d x d, positive definite
    std::vector<Mat> B;     // d matrices, m x m, symmetric
    Mat C;                  // m x m, symmetric
    double h = 0.0;
    Vec zeta;               // m-vector, nonzero
    Vec grad_phi;           // d-vector: D phi~(x0)
    int n = 1;
    double a0_term = 0.0;   // (A_0 + 2h - lambda) phi~ at x0
};

struct LagrangeResult {
    std::vector<Vec> xi0;   // the maximizer, d vectors in R^m
    double Vmax;            // V at the maximizer
    double Fmax;            // F at the maximizer (direct route)
    double Fmax_closed;     // the displayed closed form, for cross-checking
};

inline double lagrange_V(const LagrangeInput& in, const std::vector<Vec>& xi) {
    const int d = static_cast<int>(in.Q.rows);
    double v = 0.0;
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) v += in.Q(i, j) * xi[i].dot(xi[j]);
    for (int j = 0; j < d; ++j) v -= in.B[static_cast<std::size_t>(j)].apply(xi[j]).dot(in.zeta);
    Mat Ch = in.C;
    Ch -= in.h * Mat::identity(in.C.rows);
    v -= Ch.apply(in.zeta).dot(in.zeta);
    return v;
}

inline double lagrange_F(const LagrangeInput& in, const std::vector<Vec>& xi) {
    return in.a0_term / in.n - 2.0 * lagrange_V(in, xi);
}

/// Closed-form maximizer of F over Sigma:
///   xi0^j = (2n)^-1 |zeta|^-2 zeta D_j phi~
///           + 1/2 sum_k (Q^-1)_jk [B_k zeta - |zeta|^-2 <B_k zeta,zeta> zeta].
inline LagrangeResult lagrange_maximizer(const LagrangeInput& in) {
    const int d = static_cast<int>(in.Q.rows);
    const int m = static_cast<int>(in.C.rows);
    if (in.zeta.norm() == 0.0) throw std::invalid_argument("lagrange_maximizer: zeta must be nonzero");
    if (in.n < 1) throw std::invalid_argument("lagrange_maximizer: n must be >= 1");
    const Mat Qinv = invert_spd(in.Q);  // throws on non-positive-definite Q
    const double z2 = in.zeta.norm2();

    std::vector<Vec> Bz(static_cast<std::size_t>(d));
    std::vector<double> bz(static_cast<std::size_t>(d));
    for (int k = 0; k < d; ++k) {
        Bz[k] = in.B[static_cast<std::size_t>(k)].apply(in.zeta);
        bz[k] = Bz[k].dot(in.zeta);
    }

    LagrangeResult out;
    out.xi0.assign(static_cast<std::size_t>(d), Vec(static_cast<std::size_t>(m)));
    for (int j = 0; j < d; ++j) {
        Vec v = in.zeta;
        v *= in.grad_phi[j] / (2.0 * in.n * z2);
        for (int k = 0; k < d; ++k) {
            Vec w = Bz[k];
            Vec corr = in.zeta;
            corr *= bz[k] / z2;
            w -= corr;
            w *= 0.5 * Qinv(j, k);
            v += w;
        }
        out.xi0[static_cast<std::size_t>(j)] = v;
    }

    out.Vmax = lagrange_V(in, out.xi0);
    out.Fmax = lagrange_F(in, out.xi0);

    // Displayed expansion of max F: the eta = zeta/|zeta| drift term plus the
    // Q^{1/2} gradient term and the (K_eta + 4h) quadratic form.
    double drift = 0.0;
    for (int j = 0; j < d; ++j) drift += in.grad_phi[j] * bz[j] / z2;
    double qgrad = 0.0;
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) qgrad += in.Q(i, j) * in.grad_phi[i] * in.grad_phi[j];
    double bracket = 0.0;  // |zeta|^2 K_{zeta/|zeta|}, expanded in zeta
    for (int i = 0; i < d; ++i)
        for (int k = 0; k < d; ++k)
            bracket += Qinv(i, k) * (bz[i] * bz[k] / z2 - Bz[i].dot(Bz[k]));
    const double Czz = in.C.apply(in.zeta).dot(in.zeta);
    const double K_shifted = bracket - 4.0 * Czz + 4.0 * in.h * z2;  // |zeta|^2 (K_eta + 4h)
    out.Fmax_closed = (in.a0_term + drift) / in.n - qgrad / (2.0 * in.n * in.n * z2) -
                      0.5 * K_shifted;
    return out;
}

}  // namespace parabolica
