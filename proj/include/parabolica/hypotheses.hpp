#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "functionals.hpp"
#include "sampling.hpp"
#include "spec.hpp"

namespace parabolica {

enum class Verdict { satisfied_on_samples, violated, inconclusive };

inline const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::satisfied_on_samples: return "satisfied_on_samples";
        case Verdict::violated: return "violated";
        case Verdict::inconclusive: return "inconclusive";
    }
    return "?";
}

inline const char* to_string(Asymptotic a) {
    switch (a) {
        case Asymptotic::bounded: return "bounded";
        case Asymptotic::unbounded: return "unbounded";
        case Asymptotic::unknown: return "unknown";
    }
    return "?";
}

struct Witness {
    double t = 0.0;
    Vec x;
    std::optional<Vec> eta;
};

/// Verdict + worst witness + margin for one hypothesis on a sampled
/// space-time box.  margin < 0 always accompanies a violated verdict and
/// re-evaluating the recorded witness reproduces it.
struct HypothesisReport {
    std::string hypothesis_id;
    Verdict verdict = Verdict::inconclusive;
    std::optional<Witness> witness;
    double margin = 0.0;
    long samples_used = 0;
    Asymptotic asymptotic = Asymptotic::unknown;
    bool fd_used = false;
    std::map<std::string, double> extras;  // named scalars: c_J, L_J_est, nu0_est, ...
    std::string note;
};

namespace detail {

/// Track the minimum of a sampled expression together with its witness.
struct MinTracker {
    double value = std::numeric_limits<double>::infinity();
    Witness at;
    long count = 0;

    void update(double v, double t, const Vec& x, const Vec* eta = nullptr) {
        ++count;
        if (v < value) {
            value = v;
            at.t = t;
            at.x = x;
            if (eta) at.eta = *eta;
            else at.eta.reset();
        }
    }
};

struct MaxTracker {
    double value = -std::numeric_limits<double>::infinity();
    Witness at;
    long count = 0;

    void update(double v, double t, const Vec& x, const Vec* eta = nullptr) {
        ++count;
        if (v > value) {
            value = v;
            at.t = t;
            at.x = x;
            if (eta) at.eta = *eta;
            else at.eta.reset();
        }
    }
};

}  // namespace detail

/// Hyp 2.1(ii): Q uniformly elliptic.  Satisfied needs a positive sampled
/// minimum of lambda_Q and a nonnegative declared exponent.
inline HypothesisReport check_ellipticity(const OperatorSpec& spec, const SamplePlan& plan) {
    HypothesisReport rep;
    rep.hypothesis_id = "ellipticity";
    detail::MinTracker min;
    for (double t : plan.times.points())
        for (const Vec& x : plan.box.points(spec.d))
            min.update(lambda_min(spec.eval_Q(t, x), spec.tol.sym), t, x);
    rep.samples_used = min.count;
    rep.margin = min.value;
    rep.witness = min.at;
    rep.extras["nu0_est"] = min.value;
    const bool decays = spec.growth.lambda_Q.exponent < 0.0 || spec.growth.lambda_Q.sign <= 0;
    rep.asymptotic = decays ? Asymptotic::unbounded : Asymptotic::bounded;
    if (min.value <= 0.0) rep.verdict = Verdict::violated;
    else if (decays) rep.verdict = Verdict::inconclusive;
    else rep.verdict = Verdict::satisfied_on_samples;
    return rep;
}

/// Hyp 2.2(i) (strict) or Remark 2.2 (weak): sign of K_eta over samples and
/// directions.  Weak mode records c_J = -(sampled inf) for rescaling.
inline HypothesisReport check_K_nonneg(const OperatorSpec& spec, const SamplePlan& plan,
                                       const SphereSample& sphere, bool weak = false) {
    if (sphere.directions.empty()) throw SpecError("check_K_nonneg: empty sphere sample");
    HypothesisReport rep;
    rep.hypothesis_id = weak ? "K_nonneg_weak" : "K_nonneg";
    detail::MinTracker min;
    double scale = 1.0;
    for (double t : plan.times.points())
        for (const Vec& x : plan.box.points(spec.d))
            for (const Vec& eta : sphere.directions) {
                const double v = K_eta(spec, t, x, eta);
                scale = std::max(scale, std::abs(v));
                min.update(v, t, x, &eta);
            }
    if (sphere.scheme == SphereScheme::random_refined && min.at.eta) {
        for (const Vec& eta : SphereSample::refine_around(*min.at.eta, 1234)) {
            const double v = K_eta(spec, min.at.t, min.at.x, eta);
            min.update(v, min.at.t, min.at.x, &eta);
        }
    }
    rep.samples_used = min.count;
    rep.margin = min.value;
    rep.witness = min.at;
    const Asymptotic below = K_eta_asymptotic_bounded_below(spec);
    rep.asymptotic = below;
    const double tau = spec.tol.margin * scale;
    if (weak) {
        rep.extras["c_J"] = -min.value;
        if (below == Asymptotic::bounded && std::isfinite(min.value))
            rep.verdict = Verdict::satisfied_on_samples;
        else if (below == Asymptotic::unbounded && min.value < -tau)
            rep.verdict = Verdict::violated;
        else
            rep.verdict = Verdict::inconclusive;
    } else {
        if (min.value >= -tau)
            rep.verdict = below == Asymptotic::unbounded ? Verdict::inconclusive
                                                         : Verdict::satisfied_on_samples;
        else
            rep.verdict = Verdict::violated;
    }
    return rep;
}

/// Hyp 3.1(i) analogue for tilde K_eta = K_eta + 4 sum <D_k B_k eta,eta> + 4 kappa.
inline HypothesisReport check_tilde_K_nonneg(const OperatorSpec& spec, const ScalarFieldDecl& kappa,
                                             const SamplePlan& plan, const SphereSample& sphere,
                                             bool weak = true) {
    if (sphere.directions.empty()) throw SpecError("check_tilde_K_nonneg: empty sphere sample");
    HypothesisReport rep;
    rep.hypothesis_id = weak ? "tilde_K_nonneg_weak" : "tilde_K_nonneg";
    detail::MinTracker min;
    double scale = 1.0;
    bool fd = false;
    for (double t : plan.times.points())
        for (const Vec& x : plan.box.points(spec.d))
            for (const Vec& eta : sphere.directions) {
                const double v = tilde_K_eta(spec, kappa, t, x, eta, &fd);
                scale = std::max(scale, std::abs(v));
                min.update(v, t, x, &eta);
            }
    rep.fd_used = fd;
    rep.samples_used = min.count;
    rep.margin = min.value;
    rep.witness = min.at;
    // divergence terms differentiate B: exponent drops by one
    std::vector<PowerLaw> terms;
    const PowerLaw Bt = spec.has_decomposition ? spec.growth.Btilde_norm : spec.growth.B_norm;
    if (!Bt.absent())
        terms.push_back({2.0 * Bt.exponent - spec.growth.lambda_Q.exponent, -1});
    if (!spec.growth.Lambda_C.absent())
        terms.push_back({spec.growth.Lambda_C.exponent, -spec.growth.Lambda_C.sign});
    if (!spec.growth.B_norm.absent()) terms.push_back({spec.growth.B_norm.exponent - 1.0, -1});
    if (kappa.present && !kappa.growth.absent())
        terms.push_back({kappa.growth.exponent, kappa.growth.sign});
    rep.asymptotic = bounded_below(terms);
    const double tau = spec.tol.margin * scale;
    if (weak) {
        rep.extras["c_J"] = -min.value;
        if (rep.asymptotic == Asymptotic::bounded && std::isfinite(min.value))
            rep.verdict = Verdict::satisfied_on_samples;
        else if (rep.asymptotic == Asymptotic::unbounded && min.value < -tau)
            rep.verdict = Verdict::violated;
        else
            rep.verdict = Verdict::inconclusive;
    } else {
        if (min.value >= -tau)
            rep.verdict = rep.asymptotic == Asymptotic::unbounded ? Verdict::inconclusive
                                                                  : Verdict::satisfied_on_samples;
        else
            rep.verdict = Verdict::violated;
    }
    return rep;
}

enum class LyapunovVariant { A_eta_family, A_scalar, A_eta_tilde_family, A_tilde_scalar };

inline const char* lyapunov_id(LyapunovVariant v) {
    switch (v) {
        case LyapunovVariant::A_eta_family: return "lyapunov_eta";
        case LyapunovVariant::A_scalar: return "lyapunov_scalar";
        case LyapunovVariant::A_eta_tilde_family: return "lyapunov_tilde_eta";
        case LyapunovVariant::A_tilde_scalar: return "lyapunov_tilde_scalar";
    }
    return "?";
}

/// (A phi)(x) for the drift-only comparison operators:
///   A_eta      = div(Q D) + <b_eta, D>,        (b_eta)_i = <B_i eta, eta>
///   A          = div(Q D) + <b, D>
///   tilde A_eta = div(Q D) - <b_eta, D> + 2 kappa
///   tilde A     = div(Q D) - <b, D>   + 2 kappa
inline double lyapunov_operator_value(const OperatorSpec& spec, const LyapunovSpec& lyap,
                                      LyapunovVariant which, const ScalarFieldDecl& kappa,
                                      double t, const Vec& x, const Vec* eta,
                                      bool* used_fd = nullptr) {
    const Mat Q = spec.eval_Q(t, x);
    const Vec g = lyap.grad(x);
    const Mat H = lyap.hess(x);
    double val = 0.0;
    // div(Q D phi) = sum_ij (D_i q_ij) (D_j phi) + q_ij (D_ij phi)
    for (int i = 0; i < spec.d; ++i) {
        const Mat dQi = spec.dQ_at(t, x, i, used_fd);
        for (int j = 0; j < spec.d; ++j) val += dQi(i, j) * g[j] + Q(i, j) * H(i, j);
    }
    const bool tilde = which == LyapunovVariant::A_eta_tilde_family ||
                       which == LyapunovVariant::A_tilde_scalar;
    const bool family = which == LyapunovVariant::A_eta_family ||
                        which == LyapunovVariant::A_eta_tilde_family;
    double drift = 0.0;
    if (family) {
        for (int i = 0; i < spec.d; ++i)
            drift += spec.eval_B(t, x, i).apply(*eta).dot(*eta) * g[i];
    } else {
        spec.require_decomposition();
        for (int i = 0; i < spec.d; ++i) drift += spec.b[static_cast<std::size_t>(i)](t, x) * g[i];
    }
    val += tilde ? -drift : drift;
    if (tilde) {
        if (!kappa.present) throw SpecError("tilde Lyapunov variants require kappa");
        val += 2.0 * kappa(t, x) * lyap.phi(x);
    }
    return val;
}

/// Hyp 2.2(ii) / 2.3(iii) / 3.1(ii) / Thm 4.2: sup of (A phi - lambda phi)
/// over the sampled box (and directions, for the eta families).
inline HypothesisReport check_lyapunov(const OperatorSpec& spec, const LyapunovSpec& lyap,
                                       LyapunovVariant which, const ScalarFieldDecl& kappa,
                                       const SamplePlan& plan, const SphereSample& sphere) {
    HypothesisReport rep;
    rep.hypothesis_id = lyapunov_id(which);
    const bool family = which == LyapunovVariant::A_eta_family ||
                        which == LyapunovVariant::A_eta_tilde_family;
    const bool tilde = which == LyapunovVariant::A_eta_tilde_family ||
                       which == LyapunovVariant::A_tilde_scalar;
    if (family && sphere.directions.empty())
        throw SpecError("check_lyapunov: eta family requires a sphere sample");
    bool fd = false;
    detail::MaxTracker max;
    for (double t : plan.times.points())
        for (const Vec& x : plan.box.points(spec.d)) {
            const double lphi = lyap.lambda_J * lyap.phi(x);
            if (family) {
                for (const Vec& eta : sphere.directions) {
                    const double v =
                        lyapunov_operator_value(spec, lyap, which, kappa, t, x, &eta, &fd) - lphi;
                    max.update(v, t, x, &eta);
                }
            } else {
                const double v =
                    lyapunov_operator_value(spec, lyap, which, kappa, t, x, nullptr, &fd) - lphi;
                max.update(v, t, x);
            }
        }
    rep.fd_used = fd;
    rep.samples_used = max.count;
    rep.margin = -max.value;  // negative when the sampled sup is positive
    rep.witness = max.at;
    rep.extras["sampled_sup"] = max.value;

    std::vector<PowerLaw> terms;
    terms.push_back({spec.growth.Lambda_Q.exponent + lyap.growth - 2.0, +1});  // diffusion
    if (!spec.growth.drift_radial.absent()) {
        PowerLaw dr{spec.growth.drift_radial.exponent + lyap.growth - 1.0,
                    spec.growth.drift_radial.sign};
        if (tilde) dr.sign = -dr.sign;
        terms.push_back(dr);
    }
    if (tilde && kappa.present && !kappa.growth.absent())
        terms.push_back({kappa.growth.exponent + lyap.growth, kappa.growth.sign});
    if (lyap.lambda_J > 0.0) terms.push_back({lyap.growth, -1});
    else if (lyap.lambda_J < 0.0) terms.push_back({lyap.growth, +1});
    rep.asymptotic = bounded_above(terms);

    if (rep.asymptotic == Asymptotic::bounded && std::isfinite(max.value))
        rep.verdict = Verdict::satisfied_on_samples;
    else if (rep.asymptotic == Asymptotic::unbounded && max.value > 0.0)
        rep.verdict = Verdict::violated;
    else
        rep.verdict = Verdict::inconclusive;
    return rep;
}

/// Hyp 2.3(i): |(Btilde_i)_{jk}| <= xi(t) lambda_Q^sigma entrywise.
inline HypothesisReport check_decomposition(const OperatorSpec& spec, const SamplePlan& plan) {
    spec.require_decomposition();
    HypothesisReport rep;
    rep.hypothesis_id = "decomposition";
    detail::MinTracker min;  // slack xi lambda_Q^sigma - |entry|
    double scale = 1.0;
    for (double t : plan.times.points())
        for (const Vec& x : plan.box.points(spec.d)) {
            const double bound =
                spec.xi(t) * std::pow(lambda_min(spec.eval_Q(t, x), spec.tol.sym), spec.sigma);
            double worst = std::numeric_limits<double>::infinity();
            for (int i = 0; i < spec.d; ++i) {
                const Mat Bt = spec.eval_Btilde(t, x, i);
                worst = std::min(worst, bound - Bt.max_abs());
            }
            scale = std::max(scale, std::abs(bound));
            min.update(worst, t, x);
        }
    rep.samples_used = min.count;
    rep.margin = min.value;
    rep.witness = min.at;
    std::vector<PowerLaw> terms;
    if (!spec.growth.Btilde_norm.absent())
        terms.push_back({spec.growth.Btilde_norm.exponent, +1});
    terms.push_back({spec.sigma * spec.growth.lambda_Q.exponent, -1});
    rep.asymptotic = bounded_above(terms);
    const double tau = spec.tol.margin * scale;
    if (min.value < -tau) rep.verdict = Verdict::violated;
    else if (rep.asymptotic == Asymptotic::bounded) rep.verdict = Verdict::satisfied_on_samples;
    else rep.verdict = Verdict::inconclusive;
    return rep;
}

/// Condition (3.2): Lambda_{2C - sum_i D_i B_i} <= L_J; reports the sampled
/// sup as L_J_est.
inline HypothesisReport check_L2_dissipativity(const OperatorSpec& spec, const SamplePlan& plan) {
    HypothesisReport rep;
    rep.hypothesis_id = "L2_dissipativity";
    bool fd = false;
    detail::MaxTracker max;
    for (double t : plan.times.points())
        for (const Vec& x : plan.box.points(spec.d))
            max.update(dissipation_integrand(spec, t, x, &fd), t, x);
    rep.fd_used = fd;
    rep.samples_used = max.count;
    rep.margin = -max.value;
    rep.witness = max.at;
    rep.extras["L_J_est"] = max.value;
    std::vector<PowerLaw> terms;
    if (!spec.growth.Lambda_C.absent())
        terms.push_back({spec.growth.Lambda_C.exponent, spec.growth.Lambda_C.sign});
    if (!spec.growth.B_norm.absent())
        terms.push_back({spec.growth.B_norm.exponent - 1.0, +1});  // derivative, sign unknown
    rep.asymptotic = bounded_above(terms);
    if (rep.asymptotic == Asymptotic::bounded && std::isfinite(max.value))
        rep.verdict = Verdict::satisfied_on_samples;
    else if (rep.asymptotic == Asymptotic::unbounded && max.value > 0.0)
        rep.verdict = Verdict::violated;
    else
        rep.verdict = Verdict::inconclusive;
    return rep;
}

struct GradientHypsReport {
    HypothesisReport dq;    // |D_x q_ij| <= k lambda_Q
    HypothesisReport fin;   // (5.1) and (5.2) bounded above
    HypothesisReport sign;  // Lambda_C <= -2 gamma d m^2 xi^2 lambda_Q

    bool all_satisfied() const {
        return dq.verdict == Verdict::satisfied_on_samples &&
               fin.verdict == Verdict::satisfied_on_samples &&
               sign.verdict == Verdict::satisfied_on_samples;
    }
};

/// Hyp 5.1 plus the Theorem 5.3 sign condition; three sub-verdicts.
inline GradientHypsReport check_gradient_hyps(const OperatorSpec& spec, const SamplePlan& plan) {
    if (spec.sigma != 1.0) throw SpecError("gradient hypotheses stated for sigma=1 only");
    spec.require_decomposition();
    GradientHypsReport out;
    out.dq.hypothesis_id = "gradient_dq";
    out.fin.hypothesis_id = "gradient_fin";
    out.sign.hypothesis_id = "gradient_sign";

    bool fd = false;
    detail::MinTracker dq_min;
    detail::MaxTracker fin1_max, fin2_max;
    detail::MinTracker sign_min;
    double dq_scale = 1.0, sign_scale = 1.0;
    for (double t : plan.times.points())
        for (const Vec& x : plan.box.points(spec.d)) {
            const double lQ = lambda_min(spec.eval_Q(t, x), spec.tol.sym);
            const double bound = spec.k_bound(t, x) * lQ;
            double worst = std::numeric_limits<double>::infinity();
            for (int i = 0; i < spec.d; ++i) {
                std::vector<Mat> dql;
                for (int l = 0; l < spec.d; ++l) dql.push_back(spec.dQ_at(t, x, l, &fd));
                for (int j = 0; j < spec.d; ++j) {
                    double g2 = 0.0;
                    for (int l = 0; l < spec.d; ++l) g2 += dql[l](i, j) * dql[l](i, j);
                    worst = std::min(worst, bound - std::sqrt(g2));
                }
            }
            dq_scale = std::max(dq_scale, std::abs(bound));
            dq_min.update(worst, t, x);

            const GradientFunctionals g = gradient_functionals(spec, t, x);
            fd = fd || g.used_fd;
            fin1_max.update(g.fin1, t, x);
            fin2_max.update(g.fin2, t, x);

            const double xi = spec.xi(t);
            const double LC = lambda_max(spec.eval_C(t, x), spec.tol.sym);
            const double sgn =
                -(LC + 2.0 * spec.gamma * spec.d * spec.m * spec.m * xi * xi * lQ);
            sign_scale = std::max(sign_scale, std::abs(LC));
            sign_min.update(sgn, t, x);
        }

    out.dq.fd_used = fd;
    out.dq.samples_used = dq_min.count;
    out.dq.margin = dq_min.value;
    out.dq.witness = dq_min.at;
    {
        std::vector<PowerLaw> terms;
        terms.push_back({spec.growth.Lambda_Q.exponent - 1.0, +1});
        terms.push_back(
            {spec.growth.k_growth.exponent + spec.growth.lambda_Q.exponent, -1});
        const Asymptotic a = bounded_above(terms);
        out.dq.asymptotic = a;
        if (dq_min.value < -spec.tol.margin * dq_scale) out.dq.verdict = Verdict::violated;
        else if (a == Asymptotic::unbounded) out.dq.verdict = Verdict::inconclusive;
        else out.dq.verdict = Verdict::satisfied_on_samples;
    }

    out.fin.fd_used = fd;
    out.fin.samples_used = fin1_max.count;
    const double sup12 = std::max(fin1_max.value, fin2_max.value);
    out.fin.margin = -sup12;
    out.fin.witness = fin1_max.value >= fin2_max.value ? fin1_max.at : fin2_max.at;
    out.fin.extras["fin1_sup"] = fin1_max.value;
    out.fin.extras["fin2_sup"] = fin2_max.value;
    {
        const double gLQ = spec.growth.lambda_Q.exponent;
        const double gLC = spec.growth.Lambda_C.absent() ? 0.0 : spec.growth.Lambda_C.exponent;
        const int sLC = spec.growth.Lambda_C.absent() ? 0 : spec.growth.Lambda_C.sign;
        std::vector<PowerLaw> t1;
        t1.push_back({gLQ, +1});                       // xi lambda_Q
        if (sLC != 0) t1.push_back({gLC - 1.0, +1});   // |D C|
        if (sLC != 0) t1.push_back({gLC, sLC});        // 2 Lambda_C
        std::vector<PowerLaw> t2;
        t2.push_back({spec.growth.Lambda_Q.exponent - 2.0, +1});  // |D^2 Q|
        if (!spec.growth.Btilde_norm.absent())
            t2.push_back({spec.growth.Btilde_norm.exponent - 1.0, +1});
        if (!spec.growth.drift_radial.absent())
            t2.push_back({spec.growth.drift_radial.exponent - 1.0,
                          spec.growth.drift_radial.sign});  // Lambda_{D_x b}
        if (sLC != 0) {
            t2.push_back({gLC, sLC});
            t2.push_back({gLC - 1.0, +1});
        }
        t2.push_back({gLQ + 2.0 * std::max(0.0, spec.growth.k_growth.exponent), +1});  // M_gamma lambda_Q
        const Asymptotic a1 = bounded_above(t1);
        const Asymptotic a2 = bounded_above(t2);
        out.fin.asymptotic =
            (a1 == Asymptotic::bounded && a2 == Asymptotic::bounded) ? Asymptotic::bounded
            : (a1 == Asymptotic::unbounded || a2 == Asymptotic::unbounded) ? Asymptotic::unbounded
                                                                           : Asymptotic::unknown;
        if (out.fin.asymptotic == Asymptotic::bounded && std::isfinite(sup12))
            out.fin.verdict = Verdict::satisfied_on_samples;
        else if (out.fin.asymptotic == Asymptotic::unbounded && sup12 > 0.0)
            out.fin.verdict = Verdict::violated;
        else
            out.fin.verdict = Verdict::inconclusive;
    }

    out.sign.samples_used = sign_min.count;
    out.sign.margin = sign_min.value;
    out.sign.witness = sign_min.at;
    {
        std::vector<PowerLaw> terms;
        if (!spec.growth.Lambda_C.absent())
            terms.push_back({spec.growth.Lambda_C.exponent, spec.growth.Lambda_C.sign});
        terms.push_back({spec.growth.lambda_Q.exponent, +1});
        out.sign.asymptotic = bounded_above(terms);
        if (sign_min.value < -spec.tol.margin * sign_scale) out.sign.verdict = Verdict::violated;
        else if (out.sign.asymptotic == Asymptotic::unbounded)
            out.sign.verdict = Verdict::inconclusive;
        else out.sign.verdict = Verdict::satisfied_on_samples;
    }
    return out;
}

}  // namespace parabolica
