#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "spec.hpp"

namespace parabolica {

/// Parameters of the built-in coefficient families.
///   ex1: Q = I_d, B_i = -x_i (1+|x|^2)^a Bhat_i, C = -|x|^2 (1+|x|^2)^b Chat,
///        constraint b > 2a >= 0.
///   ex2: Q = (1+|x|^2)^delta I_d,
///        B_i = -x_i (1+|x|^2)^a I_m + (1+|x|^2)^b Bhat_i,
///        C = -(1+|x|^2)^c Chat, constraints 2b <= delta < a+1, c >= 2a, c > a+1.
struct FamilyParams {
    int d = 2;
    int m = 2;
    double a = 1.0;
    double b = 3.0;
    double c = 3.0;      // ex2 only
    double delta = 1.0;  // ex2 only
    std::vector<Mat> Bhat;  // d matrices, m x m, symmetric positive definite
    Mat Chat;               // m x m, symmetric positive definite
    double sigma = 1.0;
    double beta = 0.5;
    double gamma = 0.25;
    std::optional<double> xi;  // default depends on the family
};

namespace detail {

inline void require_spd(const Mat& m, const char* name, double tau_sym) {
    const double asym = max_asymmetry(m);
    if (asym > tau_sym * std::max(1.0, m.max_abs()))
        throw SpecError(std::string(name) + " must be symmetric, max asymmetry = " +
                        std::to_string(asym));
    if (lambda_min(m, tau_sym) <= 0.0)
        throw SpecError(std::string(name) + " must be positive definite");
}

inline std::vector<Mat> default_hats(int count, int m, const std::vector<Mat>& given,
                                     const char* name, double tau_sym) {
    std::vector<Mat> hats = given;
    if (hats.empty()) hats.assign(static_cast<std::size_t>(count), Mat::identity(m));
    if (static_cast<int>(hats.size()) != count)
        throw SpecError(std::string(name) + ": expected " + std::to_string(count) + " matrices");
    for (const auto& h : hats) {
        if (static_cast<int>(h.rows) != m || static_cast<int>(h.cols) != m)
            throw SpecError(std::string(name) + ": wrong size");
        require_spd(h, name, tau_sym);
    }
    return hats;
}

}  // namespace detail

/// Section-6 Example 1.
inline OperatorSpec example1(FamilyParams p) {
    OperatorSpec s;
    s.family_id = "ex1";
    s.d = p.d;
    s.m = p.m;
    const auto Bhat = detail::default_hats(p.d, p.m, p.Bhat, "Bhat", s.tol.sym);
    Mat Chat = p.Chat.a.empty() ? Mat::identity(p.m) : p.Chat;
    detail::require_spd(Chat, "Chat", s.tol.sym);

    if (!(p.b > 2.0 * p.a && p.a >= 0.0)) {
        s.constraints_violated = true;
        s.constraint_note = "requires b > 2a >= 0";
    }

    const double a = p.a, b = p.b;
    const int d = p.d, m = p.m;

    s.Q = [d](double, const Vec&) { return Mat::identity(d); };
    s.dQ = [d](double, const Vec&, int) { return Mat(d, d); };
    s.d2Q = [d](double, const Vec&, int, int) { return Mat(d, d); };

    for (int i = 0; i < d; ++i) {
        const Mat Bi = Bhat[static_cast<std::size_t>(i)];
        s.B.push_back([Bi, a, i](double, const Vec& x) {
            const double w = std::pow(1.0 + x.norm2(), a);
            Mat r = Bi;
            r *= -x[static_cast<std::size_t>(i)] * w;
            return r;
        });
    }
    s.dB = [Bhat, a](double, const Vec& x, int l, int i) {
        const double r2 = x.norm2();
        const double w = std::pow(1.0 + r2, a);
        const double wp = a * std::pow(1.0 + r2, a - 1.0);
        Mat r = Bhat[static_cast<std::size_t>(i)];
        r *= -((l == i ? w : 0.0) + 2.0 * x[i] * x[l] * wp);
        return r;
    };

    s.C = [Chat, b](double, const Vec& x) {
        const double r2 = x.norm2();
        Mat r = Chat;
        r *= -r2 * std::pow(1.0 + r2, b);
        return r;
    };
    s.dC = [Chat, b](double, const Vec& x, int l) {
        const double r2 = x.norm2();
        Mat r = Chat;
        r *= -2.0 * x[static_cast<std::size_t>(l)] *
             (std::pow(1.0 + r2, b) + b * r2 * std::pow(1.0 + r2, b - 1.0));
        return r;
    };

    // decomposition through the trace part of each Bhat_i
    s.has_decomposition = true;
    std::vector<double> tr(static_cast<std::size_t>(d));
    bool tilde_zero = true;
    for (int i = 0; i < d; ++i) {
        tr[i] = Bhat[static_cast<std::size_t>(i)].trace() / m;
        Mat dev = Bhat[static_cast<std::size_t>(i)];
        dev -= tr[i] * Mat::identity(m);
        if (dev.max_abs() > 1e-14) tilde_zero = false;
    }
    for (int i = 0; i < d; ++i) {
        const double si = tr[static_cast<std::size_t>(i)];
        s.b.push_back([si, a, i](double, const Vec& x) {
            return -x[static_cast<std::size_t>(i)] * si * std::pow(1.0 + x.norm2(), a);
        });
        Mat dev = Bhat[static_cast<std::size_t>(i)];
        dev -= si * Mat::identity(m);
        s.Btilde.push_back([dev, a, i](double, const Vec& x) {
            Mat r = dev;
            r *= -x[static_cast<std::size_t>(i)] * std::pow(1.0 + x.norm2(), a);
            return r;
        });
    }
    s.db = [tr, a, d](double, const Vec& x) {
        const double r2 = x.norm2();
        const double w = std::pow(1.0 + r2, a);
        const double wp = a * std::pow(1.0 + r2, a - 1.0);
        Mat r(d, d);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j)
                r(i, j) = -tr[static_cast<std::size_t>(i)] *
                          ((i == j ? w : 0.0) + 2.0 * x[i] * x[j] * wp);
        return r;
    };
    s.dBtilde = [Bhat, tr, a](double, const Vec& x, int i, int l) {
        const double r2 = x.norm2();
        const double w = std::pow(1.0 + r2, a);
        const double wp = a * std::pow(1.0 + r2, a - 1.0);
        Mat dev = Bhat[static_cast<std::size_t>(i)];
        dev -= tr[static_cast<std::size_t>(i)] * Mat::identity(dev.rows);
        dev *= -((l == i ? w : 0.0) + 2.0 * x[i] * x[l] * wp);
        return dev;
    };

    s.sigma = p.sigma;
    s.beta = p.beta;
    s.gamma = p.gamma;
    const double xi0 = p.xi.value_or(tilde_zero ? 1e-3 : 1.0);
    s.xi = [xi0](double) { return xi0; };
    s.k_bound = [](double, const Vec&) { return 0.0; };  // Q constant

    s.growth.lambda_Q = {0.0, +1};
    s.growth.Lambda_Q = {0.0, +1};
    s.growth.Lambda_C = {2.0 * b + 2.0, -1};
    s.growth.B_norm = {2.0 * a + 1.0, +1};
    s.growth.b_norm = {2.0 * a + 1.0, +1};
    s.growth.Btilde_norm = tilde_zero ? PowerLaw{0.0, 0} : PowerLaw{2.0 * a + 1.0, +1};
    s.growth.drift_radial = {2.0 * a + 1.0, -1};
    s.growth.k_growth = {0.0, 0};
    s.time_dependent = false;
    return s;
}

/// Section-6 Example 2.
inline OperatorSpec example2(FamilyParams p) {
    OperatorSpec s;
    s.family_id = "ex2";
    s.d = p.d;
    s.m = p.m;
    const auto Bhat = detail::default_hats(p.d, p.m, p.Bhat, "Bhat", s.tol.sym);
    Mat Chat = p.Chat.a.empty() ? Mat::identity(p.m) : p.Chat;
    detail::require_spd(Chat, "Chat", s.tol.sym);

    // 2b <= delta < a+1 and c above 2a and a+1; the shipped parameter set
    // sits exactly on c = 2a, so that comparison is non-strict.
    if (!(2.0 * p.b <= p.delta && p.delta < p.a + 1.0 && p.c >= 2.0 * p.a && p.c > p.a + 1.0)) {
        s.constraints_violated = true;
        s.constraint_note = "requires 2b <= delta < a+1, c >= 2a, c > a+1";
    }

    const double a = p.a, b = p.b, c = p.c, dl = p.delta;
    const int d = p.d, m = p.m;

    s.Q = [d, dl](double, const Vec& x) {
        Mat r = Mat::identity(d);
        r *= std::pow(1.0 + x.norm2(), dl);
        return r;
    };
    s.dQ = [d, dl](double, const Vec& x, int l) {
        Mat r = Mat::identity(d);
        r *= 2.0 * dl * x[static_cast<std::size_t>(l)] * std::pow(1.0 + x.norm2(), dl - 1.0);
        return r;
    };
    s.d2Q = [d, dl](double, const Vec& x, int i, int l) {
        const double r2 = x.norm2();
        Mat r = Mat::identity(d);
        r *= 2.0 * dl *
             ((i == l ? std::pow(1.0 + r2, dl - 1.0) : 0.0) +
              2.0 * (dl - 1.0) * x[i] * x[l] * std::pow(1.0 + r2, dl - 2.0));
        return r;
    };

    for (int i = 0; i < d; ++i) {
        const Mat Bi = Bhat[static_cast<std::size_t>(i)];
        s.B.push_back([Bi, a, b, m, i](double, const Vec& x) {
            const double r2 = x.norm2();
            Mat r = Mat::identity(m);
            r *= -x[static_cast<std::size_t>(i)] * std::pow(1.0 + r2, a);
            Mat t = Bi;
            t *= std::pow(1.0 + r2, b);
            r += t;
            return r;
        });
    }
    s.dB = [Bhat, a, b, m](double, const Vec& x, int l, int i) {
        const double r2 = x.norm2();
        const double wa = std::pow(1.0 + r2, a);
        const double wap = a * std::pow(1.0 + r2, a - 1.0);
        Mat r = Mat::identity(m);
        r *= -((l == i ? wa : 0.0) + 2.0 * x[i] * x[l] * wap);
        Mat t = Bhat[static_cast<std::size_t>(i)];
        t *= 2.0 * b * x[static_cast<std::size_t>(l)] * std::pow(1.0 + r2, b - 1.0);
        r += t;
        return r;
    };

    s.C = [Chat, c](double, const Vec& x) {
        Mat r = Chat;
        r *= -std::pow(1.0 + x.norm2(), c);
        return r;
    };
    s.dC = [Chat, c](double, const Vec& x, int l) {
        Mat r = Chat;
        r *= -2.0 * c * x[static_cast<std::size_t>(l)] * std::pow(1.0 + x.norm2(), c - 1.0);
        return r;
    };

    s.has_decomposition = true;
    for (int i = 0; i < d; ++i) {
        s.b.push_back([a, i](double, const Vec& x) {
            return -x[static_cast<std::size_t>(i)] * std::pow(1.0 + x.norm2(), a);
        });
        const Mat Bi = Bhat[static_cast<std::size_t>(i)];
        s.Btilde.push_back([Bi, b](double, const Vec& x) {
            Mat r = Bi;
            r *= std::pow(1.0 + x.norm2(), b);
            return r;
        });
    }
    s.db = [a, d](double, const Vec& x) {
        const double r2 = x.norm2();
        const double wa = std::pow(1.0 + r2, a);
        const double wap = a * std::pow(1.0 + r2, a - 1.0);
        Mat r(d, d);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j)
                r(i, j) = -((i == j ? wa : 0.0) + 2.0 * x[i] * x[j] * wap);
        return r;
    };
    s.dBtilde = [Bhat, b](double, const Vec& x, int i, int l) {
        Mat r = Bhat[static_cast<std::size_t>(i)];
        r *= 2.0 * b * x[static_cast<std::size_t>(l)] * std::pow(1.0 + x.norm2(), b - 1.0);
        return r;
    };

    s.sigma = p.sigma;
    s.beta = p.beta;
    s.gamma = p.gamma;
    double xi_def = 0.0;
    for (const auto& h : Bhat) xi_def = std::max(xi_def, lambda_max(h, s.tol.sym));
    const double xi0 = p.xi.value_or(xi_def);
    s.xi = [xi0](double) { return xi0; };
    s.k_bound = [dl](double, const Vec& x) {
        const double r = x.norm();
        return 2.0 * dl * r / (1.0 + r * r);
    };

    s.growth.lambda_Q = {2.0 * dl, +1};
    s.growth.Lambda_Q = {2.0 * dl, +1};
    s.growth.Lambda_C = {2.0 * c, -1};
    s.growth.B_norm = {std::max(2.0 * a + 1.0, 2.0 * b), +1};
    s.growth.b_norm = {2.0 * a + 1.0, +1};
    s.growth.Btilde_norm = {2.0 * b, +1};
    s.growth.drift_radial = {2.0 * a + 1.0, -1};
    s.growth.k_growth = {-1.0, +1};
    s.time_dependent = false;
    return s;
}

struct FamilyInfo {
    std::string id;
    std::string description;
    std::string constraints;
};

inline std::vector<FamilyInfo> family_catalogue() {
    return {
        {"ex1",
         "Q = I, B_i = -x_i (1+|x|^2)^a Bhat_i, C = -|x|^2 (1+|x|^2)^b Chat",
         "Bhat_i, Chat symmetric positive definite; b > 2a >= 0; "
         "kappa = -(|x|^2)^(c/2) admissible for c in (2+2a, 2+2b)"},
        {"ex2",
         "Q = (1+|x|^2)^delta I, B_i = -x_i (1+|x|^2)^a I + (1+|x|^2)^b Bhat_i, "
         "C = -(1+|x|^2)^c Chat",
         "Bhat_i, Chat symmetric positive definite; 2b <= delta < a+1; c >= 2a, c > a+1"},
    };
}

/// Build a built-in family by id.
inline OperatorSpec example_family(const std::string& id, const FamilyParams& p) {
    if (id == "ex1") return example1(p);
    if (id == "ex2") return example2(p);
    throw SpecError("unknown built-in family '" + id + "' (available: ex1, ex2)");
}

}  // namespace parabolica
