#pragma once

#include <cmath>
#include <vector>

#include "spec.hpp"

namespace parabolica {

/// A symmetric matrix value paired with its extreme eigenvalues.
struct MatrixEval {
    Mat value;
    double lambda_min = 0.0;
    double lambda_max = 0.0;

    static MatrixEval of(const Mat& m, double tau_sym = 1e-12) {
        auto ext = lambda_extremes(m, tau_sym);
        return {m, ext.min, ext.max};
    }
};

struct UnitVectorError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline void require_unit(const Vec& eta, double tau_unit) {
    if (std::abs(eta.norm() - 1.0) > tau_unit)
        throw UnitVectorError("eta is not a unit vector, |eta| = " + std::to_string(eta.norm()));
}

/// K_eta = sum_ij (Q^-1)_ij [<B_i eta,eta><B_j eta,eta> - <B_i eta,B_j eta>]
///         - 4 <C eta, eta>.
inline double K_eta(const OperatorSpec& spec, double t, const Vec& x, const Vec& eta) {
    require_unit(eta, spec.tol.unit);
    const Mat Q = spec.eval_Q(t, x);
    const Mat Qinv = invert_spd(Q, spec.tol.sym);  // throws with lambda_min if singular
    std::vector<Vec> Beta(static_cast<std::size_t>(spec.d));
    std::vector<double> bq(static_cast<std::size_t>(spec.d));
    for (int i = 0; i < spec.d; ++i) {
        Beta[i] = spec.eval_B(t, x, i).apply(eta);
        bq[i] = Beta[i].dot(eta);
    }
    double bracket = 0.0;
    for (int i = 0; i < spec.d; ++i)
        for (int j = 0; j < spec.d; ++j)
            bracket += Qinv(i, j) * (bq[i] * bq[j] - Beta[i].dot(Beta[j]));
    const Vec Ceta = spec.eval_C(t, x).apply(eta);
    return bracket - 4.0 * Ceta.dot(eta);
}

/// tilde K_eta = K_eta + 4 sum_k <(D_k B_k) eta, eta> + 4 kappa.
inline double tilde_K_eta(const OperatorSpec& spec, const ScalarFieldDecl& kappa, double t,
                          const Vec& x, const Vec& eta, bool* used_fd = nullptr) {
    double value = K_eta(spec, t, x, eta);
    for (int k = 0; k < spec.d; ++k) {
        const Mat dBk = spec.dB_at(t, x, k, k, used_fd);
        value += 4.0 * dBk.apply(eta).dot(eta);
    }
    if (kappa.present) value += 4.0 * kappa(t, x);
    return value;
}

/// Integrand of H_{beta,J}: Lambda_C + beta d m^2 xi^2 lambda_Q^(2 sigma - 1).
inline double H_beta_integrand(const OperatorSpec& spec, double beta, double t, const Vec& x) {
    const double lC = lambda_max(spec.eval_C(t, x), spec.tol.sym);
    const double lQ = lambda_min(spec.eval_Q(t, x), spec.tol.sym);
    const double xi = spec.xi(t);
    return lC + beta * spec.d * spec.m * spec.m * xi * xi *
                    std::pow(lQ, 2.0 * spec.sigma - 1.0);
}

/// Integrand of the L^2 dissipation bound: Lambda of (2C - sum_i D_i B_i).
inline double dissipation_integrand(const OperatorSpec& spec, double t, const Vec& x,
                                    bool* used_fd = nullptr) {
    Mat M = spec.eval_C(t, x);
    M *= 2.0;
    for (int i = 0; i < spec.d; ++i) M -= spec.dB_at(t, x, i, i, used_fd);
    // symmetrize: only the symmetric part enters the quadratic form
    Mat S = M;
    S += M.transposed();
    S *= 0.5;
    return lambda_max(S, spec.tol.sym);
}

struct GradientFunctionals {
    double fin1;     // integrand of (5.1)
    double fin2;     // integrand of (5.2)
    double M_gamma;  // gamma (sqrt(d) m xi + d k)^2 + sqrt(d) m xi / 2 + 1/(4 gamma)
    bool used_fd = false;
};

/// The two gradient-hypothesis integrands and the constant M_gamma at (t,x).
/// Stated for sigma = 1 only.
inline GradientFunctionals gradient_functionals(const OperatorSpec& spec, double t, const Vec& x) {
    if (spec.sigma != 1.0) throw SpecError("gradient hypotheses stated for sigma=1 only");
    spec.require_decomposition();
    GradientFunctionals g{};
    bool fd = false;

    const double xi = spec.xi(t);
    const double k = spec.k_bound(t, x);
    const double sqd = std::sqrt(static_cast<double>(spec.d));
    const double lQ = lambda_min(spec.eval_Q(t, x), spec.tol.sym);
    const double LC = lambda_max(spec.eval_C(t, x), spec.tol.sym);

    double sum_dC2 = 0.0;
    for (int i = 0; i < spec.d; ++i) {
        const double f = spec.dC_at(t, x, i, &fd).frobenius_norm();
        sum_dC2 += f * f;
    }
    const double dC_norm = std::sqrt(sum_dC2);

    g.fin1 = sqd * spec.m * xi * lQ + dC_norm + 2.0 * LC;

    double sum_d2Q = 0.0;
    for (int i = 0; i < spec.d; ++i)
        for (int l = 0; l < spec.d; ++l) {
            const Mat dd = spec.d2Q_at(t, x, i, l, &fd);
            // sum over j of |D_{il} q_{ij}|^2: row i of the matrix D_i D_l Q
            for (int j = 0; j < spec.d; ++j) sum_d2Q += dd(i, j) * dd(i, j);
        }
    double sum_dBt = 0.0;
    for (int i = 0; i < spec.d; ++i)
        for (int j = 0; j < spec.d; ++j) {
            const double f = spec.dBtilde_at(t, x, i, j, &fd).frobenius_norm();
            sum_dBt += f * f;
        }
    Mat Db = spec.db_at(t, x, &fd);
    Mat Dbs = Db;
    Dbs += Db.transposed();
    Dbs *= 0.5;
    const double L_Db = lambda_max(Dbs, spec.tol.sym);

    g.M_gamma = spec.gamma * (sqd * spec.m * xi + spec.d * k) * (sqd * spec.m * xi + spec.d * k) +
                0.5 * sqd * spec.m * xi + 1.0 / (4.0 * spec.gamma);

    g.fin2 = sqd * std::sqrt(sum_d2Q) + std::sqrt(sum_dBt) + L_Db + LC + g.M_gamma * lQ +
             0.5 * dC_norm;
    g.used_fd = fd;
    return g;
}

// --- leading-term calculus ---------------------------------------------------

enum class Asymptotic { bounded, unbounded, unknown };

/// Decide whether a sum of declared power laws is bounded above as
/// |x| -> infinity.  Ties between the leading positive and negative
/// exponents cannot be resolved without coefficients: unknown.
inline Asymptotic bounded_above(const std::vector<PowerLaw>& terms) {
    double pos = -std::numeric_limits<double>::infinity();
    double neg = -std::numeric_limits<double>::infinity();
    for (const auto& t : terms) {
        if (t.sign > 0) pos = std::max(pos, t.exponent);
        if (t.sign < 0) neg = std::max(neg, t.exponent);
    }
    if (pos == -std::numeric_limits<double>::infinity()) return Asymptotic::bounded;
    if (pos <= 0.0) return Asymptotic::bounded;
    if (neg > pos) return Asymptotic::bounded;
    if (neg == pos) return Asymptotic::unknown;
    return Asymptotic::unbounded;
}

inline Asymptotic bounded_below(std::vector<PowerLaw> terms) {
    for (auto& t : terms) t.sign = -t.sign;
    return bounded_above(terms);
}

inline PowerLaw negate(PowerLaw p) {
    p.sign = -p.sign;
    return p;
}

/// Asymptotics of Lambda_C + beta d m^2 xi^2 lambda_Q^{2 sigma - 1}.
inline Asymptotic H_beta_asymptotic(const OperatorSpec& spec) {
    std::vector<PowerLaw> terms{spec.growth.Lambda_C};
    terms.push_back(PowerLaw{(2.0 * spec.sigma - 1.0) * spec.growth.lambda_Q.exponent, +1});
    return bounded_above(terms);
}

/// Asymptotics of K_eta from the declared exponents: the Q^-1 bracket is
/// nonpositive of order |Btilde|^2 / lambda_Q (|B|^2 without a
/// decomposition), against -4 Lambda_C.
inline Asymptotic K_eta_asymptotic_bounded_below(const OperatorSpec& spec) {
    std::vector<PowerLaw> terms;
    const PowerLaw Bt = spec.has_decomposition ? spec.growth.Btilde_norm : spec.growth.B_norm;
    if (!Bt.absent())
        terms.push_back(PowerLaw{2.0 * Bt.exponent - spec.growth.lambda_Q.exponent, -1});
    if (!spec.growth.Lambda_C.absent())
        terms.push_back(PowerLaw{spec.growth.Lambda_C.exponent, -spec.growth.Lambda_C.sign});
    return bounded_below(terms);
}

}  // namespace parabolica
