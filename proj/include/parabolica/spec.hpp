#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dense.hpp"

namespace parabolica {

/// Declared leading behavior sign * |x|^exponent as |x| -> infinity.
/// sign = 0 means the quantity is absent or identically negligible.
struct PowerLaw {
    double exponent = 0.0;
    int sign = 0;
    bool absent() const { return sign == 0; }
};

/// User-declared asymptotic exponents, mirroring how Section-6-style
/// leading-term arguments decide boundedness.  Never inferred from samples.
struct GrowthDecl {
    PowerLaw lambda_Q{0.0, +1};
    PowerLaw Lambda_Q{0.0, +1};
    PowerLaw Lambda_C{0.0, 0};
    PowerLaw B_norm{0.0, 0};        // max_i |B_i|
    PowerLaw b_norm{0.0, 0};        // |b| of the decomposition
    PowerLaw Btilde_norm{0.0, 0};   // max_i |Btilde_i|
    PowerLaw drift_radial{0.0, 0};  // <b(x), x/|x|>, also used for b_eta
    PowerLaw k_growth{0.0, 0};      // the k of |D_x q_ij| <= k lambda_Q
};

struct Tolerances {
    double sym = 1e-12;      // matrix symmetry
    double eig = 1e-10;      // eigenvalue residuals
    double unit = 1e-12;     // |eta| = 1
    double margin = 1e-9;    // hypothesis margins, scaled by local magnitude
    double est = 1e-7;       // estimate margins, scaled
    double fd_step = 1e-5;   // finite-difference fallback base step
    bool allow_fd = true;
};

using ScalarField = std::function<double(double, const Vec&)>;
using MatrixField = std::function<Mat(double, const Vec&)>;
using TimeFn = std::function<double(double)>;

struct SpecError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A scalar auxiliary field (kappa, h, ...) together with its declared
/// asymptotic behavior.
struct ScalarFieldDecl {
    ScalarField f;
    PowerLaw growth{0.0, 0};
    bool present = false;

    double operator()(double t, const Vec& x) const { return f(t, x); }
};

/// Lyapunov candidate: positive phi blowing up at infinity, with analytic
/// gradient and Hessian.
struct LyapunovSpec {
    std::function<double(const Vec&)> phi;
    std::function<Vec(const Vec&)> grad;
    std::function<Mat(const Vec&)> hess;
    double lambda_J = 1.0;
    double growth = 2.0;  // exponent of phi in |x|

    /// phi(x) = 1 + |x|^2, the workhorse of the examples.
    static LyapunovSpec quadratic(int d, double lambda = 1.0) {
        LyapunovSpec l;
        l.phi = [](const Vec& x) { return 1.0 + x.norm2(); };
        l.grad = [](const Vec& x) {
            Vec g(x.size());
            for (std::size_t i = 0; i < x.size(); ++i) g[i] = 2.0 * x[i];
            return g;
        };
        l.hess = [d](const Vec&) {
            Mat h(static_cast<std::size_t>(d), static_cast<std::size_t>(d));
            for (int i = 0; i < d; ++i) h(i, i) = 2.0;
            return h;
        };
        l.lambda_J = lambda;
        l.growth = 2.0;
        return l;
    }
};

/// The coefficient family of A(t) = div(Q D) + sum_i B_i D_i + C, with the
/// optional decomposition B_i = b_i I_m + Btilde_i and the parameters the
/// hypothesis functionals need.  Immutable after construction; every
/// evaluation is a pure function of (t, x).
struct OperatorSpec {
    int d = 1;
    int m = 1;
    double t_lo = -std::numeric_limits<double>::infinity();
    double t_hi = std::numeric_limits<double>::infinity();

    MatrixField Q;               // d x d
    std::vector<MatrixField> B;  // d entries, each m x m
    MatrixField C;               // m x m

    // Analytic spatial derivatives; empty std::function means the centered
    // finite-difference fallback is used and flagged.
    std::function<Mat(double, const Vec&, int)> dQ;        // l -> D_l Q
    std::function<Mat(double, const Vec&, int, int)> d2Q;  // (i,l) -> D_i D_l Q
    std::function<Mat(double, const Vec&, int, int)> dB;   // (l,i) -> D_l B_i
    std::function<Mat(double, const Vec&, int)> dC;        // l -> D_l C

    bool has_decomposition = false;
    std::vector<ScalarField> b;           // d scalar fields
    std::vector<MatrixField> Btilde;      // d matrix fields, m x m
    std::function<Mat(double, const Vec&)> db;             // (i,j) -> D_j b_i, d x d
    std::function<Mat(double, const Vec&, int, int)> dBtilde;  // (i,l) -> D_l Btilde_i

    double sigma = 1.0;
    double beta = 0.25;
    double gamma = 0.25;
    TimeFn xi = [](double) { return 0.0; };
    ScalarField k_bound = [](double, const Vec&) { return 0.0; };
    double holder_alpha = 0.5;  // declared regularity, metadata only

    GrowthDecl growth;
    Tolerances tol;
    bool time_dependent = false;
    bool constraints_violated = false;
    std::string constraint_note;
    std::string family_id = "custom";

    // --- checked evaluation -------------------------------------------------

    Mat eval_Q(double t, const Vec& x) const { return checked(Q(t, x), "Q"); }
    Mat eval_B(double t, const Vec& x, int i) const {
        return checked(B[static_cast<std::size_t>(i)](t, x), "B");
    }
    Mat eval_C(double t, const Vec& x) const { return checked(C(t, x), "C"); }
    Mat eval_Btilde(double t, const Vec& x, int i) const {
        return checked(Btilde[static_cast<std::size_t>(i)](t, x), "Btilde");
    }

    // --- derivatives with finite-difference fallback ------------------------

    double fd_h(const Vec& x) const { return tol.fd_step * (1.0 + x.norm()); }

    /// D_l Q; sets *used_fd when the fallback fired.
    Mat dQ_at(double t, const Vec& x, int l, bool* used_fd = nullptr) const {
        if (dQ) return dQ(t, x, l);
        return fd_matrix(Q, t, x, l, used_fd);
    }
    Mat d2Q_at(double t, const Vec& x, int i, int l, bool* used_fd = nullptr) const {
        if (d2Q) return d2Q(t, x, i, l);
        if (dQ) {
            auto f = [this, l](double tt, const Vec& xx) { return dQ(tt, xx, l); };
            return fd_matrix(f, t, x, i, used_fd);
        }
        // second difference of Q itself
        require_fd("d2Q");
        if (used_fd) *used_fd = true;
        const double h = fd_h(x);
        Vec xp = x, xm = x;
        if (i == l) {
            xp[static_cast<std::size_t>(i)] += h;
            xm[static_cast<std::size_t>(i)] -= h;
            Mat r = Q(t, xp);
            r += Q(t, xm);
            r -= 2.0 * Q(t, x);
            r *= 1.0 / (h * h);
            return r;
        }
        Vec xpp = x, xpm = x, xmp = x, xmm = x;
        xpp[i] += h; xpp[l] += h;
        xpm[i] += h; xpm[l] -= h;
        xmp[i] -= h; xmp[l] += h;
        xmm[i] -= h; xmm[l] -= h;
        Mat r = Q(t, xpp);
        r -= Q(t, xpm);
        r -= Q(t, xmp);
        r += Q(t, xmm);
        r *= 1.0 / (4.0 * h * h);
        return r;
    }
    Mat dB_at(double t, const Vec& x, int l, int i, bool* used_fd = nullptr) const {
        if (dB) return dB(t, x, l, i);
        return fd_matrix(B[static_cast<std::size_t>(i)], t, x, l, used_fd);
    }
    Mat dC_at(double t, const Vec& x, int l, bool* used_fd = nullptr) const {
        if (dC) return dC(t, x, l);
        return fd_matrix(C, t, x, l, used_fd);
    }
    /// (i,j) -> D_j b_i for the decomposition scalars.
    Mat db_at(double t, const Vec& x, bool* used_fd = nullptr) const {
        require_decomposition();
        if (db) return db(t, x);
        require_fd("db");
        if (used_fd) *used_fd = true;
        const double h = fd_h(x);
        Mat r(static_cast<std::size_t>(d), static_cast<std::size_t>(d));
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) {
                Vec xp = x, xm = x;
                xp[static_cast<std::size_t>(j)] += h;
                xm[static_cast<std::size_t>(j)] -= h;
                r(i, j) = (b[static_cast<std::size_t>(i)](t, xp) -
                           b[static_cast<std::size_t>(i)](t, xm)) / (2.0 * h);
            }
        return r;
    }
    Mat dBtilde_at(double t, const Vec& x, int i, int l, bool* used_fd = nullptr) const {
        require_decomposition();
        if (dBtilde) return dBtilde(t, x, i, l);
        return fd_matrix(Btilde[static_cast<std::size_t>(i)], t, x, l, used_fd);
    }

    void require_decomposition() const {
        if (!has_decomposition)
            throw SpecError("operation requires the decomposition B_i = b_i I + Btilde_i; "
                            "supply the fields b_i and Btilde_i");
    }

  private:
    Mat checked(Mat m, const char* name) const {
        const double asym = max_asymmetry(m);
        if (asym > tol.sym * std::max(1.0, m.max_abs()))
            throw SpecError(std::string(name) + " is not symmetric at an evaluated point, "
                            "max asymmetry = " + std::to_string(asym));
        return m;
    }

    void require_fd(const char* what) const {
        if (!tol.allow_fd)
            throw SpecError(std::string("analytic derivative ") + what +
                            " missing and finite-difference fallback is disabled");
    }

    template <typename F>
    Mat fd_matrix(const F& f, double t, const Vec& x, int l, bool* used_fd) const {
        require_fd("first derivative");
        if (used_fd) *used_fd = true;
        const double h = fd_h(x);
        Vec xp = x, xm = x;
        xp[static_cast<std::size_t>(l)] += h;
        xm[static_cast<std::size_t>(l)] -= h;
        Mat r = f(t, xp);
        r -= f(t, xm);
        r *= 1.0 / (2.0 * h);
        return r;
    }
};

}  // namespace parabolica
