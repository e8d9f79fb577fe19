#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "evolve.hpp"
#include "hypotheses.hpp"

namespace parabolica {

/// LHS/RHS/margin record for one inequality at given (p, q, s, t, grid).
struct EstimateReport {
    std::string estimate_id;
    std::map<std::string, double> params;
    double lhs = 0.0;
    double rhs = 0.0;
    double worst_margin = 0.0;  // rhs - lhs; most negative over nodes when pointwise
    double scale = 1.0;
    double tol_used = 0.0;
    bool pass = false;
    std::map<std::string, double> metadata;

    void finish(double tol_est) {
        scale = std::max({std::abs(lhs), std::abs(rhs), 1.0});
        tol_used = tol_est * scale;
        pass = worst_margin >= -tol_used;
    }
};

/// Every constant used by an estimate, recomputable from spec + hypothesis
/// reports.
struct ConstantLedger {
    struct Entry {
        double value = 0.0;
        std::string formula;
        std::map<std::string, double> inputs;
    };
    std::map<std::string, Entry> entries;

    void set(const std::string& name, double value, const std::string& formula,
             std::map<std::string, double> inputs = {}) {
        entries[name] = Entry{value, formula, std::move(inputs)};
    }
    bool has(const std::string& name) const { return entries.count(name) != 0; }
    double get(const std::string& name) const {
        auto it = entries.find(name);
        if (it == entries.end()) throw SpecError("constant ledger is missing '" + name + "'");
        return it->second.value;
    }
};

/// Shared state of a verification run: one spec, one grid, one sampling plan,
/// the evolution configuration and the accumulated constants/hypotheses.
struct VerifyContext {
    OperatorSpec spec;
    Grid grid;
    SamplePlan plan;
    SphereSample sphere;
    EvolutionConfig evo;
    BC bc = BC::dirichlet;
    ScalarFieldDecl kappa;  // for the dual route and the tilde hypotheses
    double tol_est = 1e-7;
    ConstantLedger ledger;
    std::map<std::string, HypothesisReport> hyps;

    SamplePlan window_plan(double s, double t) const {
        SamplePlan p = plan;
        p.times = TimeWindow{s, t, plan.times.count};
        return p;
    }

    double sampled_sup_H(double beta, double s, double t) {
        double sup = -std::numeric_limits<double>::infinity();
        const SamplePlan p = window_plan(s, t);
        for (double tt : p.times.points())
            for (const Vec& x : p.box.points(spec.d))
                sup = std::max(sup, H_beta_integrand(spec, beta, tt, x));
        return sup;
    }

    /// K_J of the pointwise estimate: H_{1/4,J} for p >= 2, H_{beta,J} below.
    double constant_K(double p, double s, double t) {
        spec.require_decomposition();
        const double threshold = 1.0 + 1.0 / (4.0 * spec.beta);
        if (p < threshold)
            throw SpecError("p = " + std::to_string(p) +
                            " is below the admissible threshold 1 + 1/(4 beta) = " +
                            std::to_string(threshold));
        const double beta_used = p >= 2.0 ? 0.25 : spec.beta;
        const double K = sampled_sup_H(beta_used, s, t);
        ledger.set("K_J", K, p >= 2.0 ? "H_{1/4,J}" : "H_{beta,J}",
                   {{"beta", beta_used}, {"p", p}});
        return K;
    }

    double constant_L(double s, double t) {
        auto rep = check_L2_dissipativity(spec, window_plan(s, t));
        hyps[rep.hypothesis_id] = rep;
        const double L = rep.extras.at("L_J_est");
        ledger.set("L_J", L, "sup Lambda_{2C - sum_i D_i B_i}");
        return L;
    }

    double constant_kappa0(double s, double t) {
        if (!kappa.present) throw SpecError("this route requires the auxiliary function kappa");
        double sup = -std::numeric_limits<double>::infinity();
        const SamplePlan p = window_plan(s, t);
        for (double tt : p.times.points())
            for (const Vec& x : p.box.points(spec.d)) sup = std::max(sup, kappa(tt, x));
        ledger.set("kappa_0", sup, "sup kappa");
        return sup;
    }

    double constant_nu0(double s, double t) {
        auto rep = check_ellipticity(spec, window_plan(s, t));
        hyps[rep.hypothesis_id] = rep;
        const double nu0 = rep.extras.at("nu0_est");
        ledger.set("nu_0", nu0, "inf lambda_Q");
        return nu0;
    }
};

namespace detail {

inline Field power_field(const Field& f, double p) {
    Field g(*f.grid, 1);
    for (std::size_t n = 0; n < f.grid->size(); ++n)
        g.at(static_cast<int>(n), 0) = std::pow(f.node_norm(static_cast<int>(n)), p);
    return g;
}

inline void pointwise_margin(EstimateReport& rep, const std::vector<double>& lhs,
                             const std::vector<double>& rhs) {
    double worst = std::numeric_limits<double>::infinity();
    double lmax = 0.0, rmax = 0.0;
    std::size_t worst_at = 0;
    for (std::size_t i = 0; i < lhs.size(); ++i) {
        const double m = rhs[i] - lhs[i];
        if (m < worst) {
            worst = m;
            worst_at = i;
        }
        lmax = std::max(lmax, std::abs(lhs[i]));
        rmax = std::max(rmax, std::abs(rhs[i]));
    }
    rep.worst_margin = worst;
    rep.lhs = lhs[worst_at];
    rep.rhs = rhs[worst_at];
    rep.scale = std::max({lmax, rmax, 1.0});
    rep.metadata["worst_node"] = static_cast<double>(worst_at);
    rep.metadata["lhs_max"] = lmax;
    rep.metadata["rhs_max"] = rmax;
}

inline void finish_pointwise(EstimateReport& rep, double tol_est) {
    rep.tol_used = tol_est * rep.scale;
    rep.pass = rep.worst_margin >= -rep.tol_used;
}

}  // namespace detail

/// |G(t,s)f|^p <= e^{p K_J (t-s)} G(t,s)|f|^p, nodewise.
inline EstimateReport check_pointwise(VerifyContext& ctx, const Field& f, double p, double s,
                                      double t) {
    EstimateReport rep;
    rep.estimate_id = "pointwise";
    rep.params = {{"p", p}, {"s", s}, {"t", t}, {"radius", ctx.grid.radius},
                  {"h", ctx.grid.h}, {"dt", ctx.evo.dt}};
    const double K = ctx.constant_K(p, s, t);
    {
        auto dec = check_decomposition(ctx.spec, ctx.window_plan(s, t));
        ctx.hyps[dec.hypothesis_id] = dec;
        rep.metadata["decomposition_ok"] =
            dec.verdict == Verdict::satisfied_on_samples ? 1.0 : 0.0;
    }

    const auto u = evolve(ctx.spec, ctx.grid, ctx.bc, Flavor::vector_A, f, s, t, ctx.evo);
    const Field g0 = detail::power_field(f, p);
    const auto w = evolve(ctx.spec, ctx.grid, ctx.bc, Flavor::scalar_A, g0, s, t, ctx.evo);

    const double amp = std::exp(p * K * (t - s));
    const std::size_t nodes = ctx.grid.size();
    std::vector<double> lhs(nodes), rhs(nodes);
    for (std::size_t n = 0; n < nodes; ++n) {
        lhs[n] = std::pow(u.final_field().node_norm(static_cast<int>(n)), p);
        rhs[n] = amp * w.final_field().at(static_cast<int>(n), 0);
    }
    detail::pointwise_margin(rep, lhs, rhs);
    rep.metadata["K_J"] = K;
    detail::finish_pointwise(rep, ctx.tol_est);
    return rep;
}

enum class LpMode { thm33, thm33_dual, thm34 };

inline const char* to_string(LpMode m) {
    switch (m) {
        case LpMode::thm33: return "lp_thm33";
        case LpMode::thm33_dual: return "lp_thm33_dual";
        case LpMode::thm34: return "lp_thm34";
    }
    return "?";
}

inline void ledger_cp(VerifyContext& ctx, double p, double r, double L) {
    ctx.ledger.set("c_p", std::exp(r * L / p), "exp(r L_J / p)",
                   {{"p", p}, {"L_J", L}, {"r", r}});
}

/// ||G(t,s)f||_p <= c_p(t-s) ||f||_p with the ledger constant of the chosen
/// route.  For p = 2 the per-step energy rate against L_J is also recorded.
inline EstimateReport check_lp_bound(VerifyContext& ctx, const Field& f, double p, double s,
                                     double t, LpMode mode) {
    EstimateReport rep;
    rep.estimate_id = to_string(mode);
    rep.params = {{"p", p}, {"s", s}, {"t", t}, {"radius", ctx.grid.radius},
                  {"h", ctx.grid.h}, {"dt", ctx.evo.dt}};
    const double r = t - s;
    double c = 1.0;
    if (mode == LpMode::thm33) {
        if (p < 2.0) throw SpecError("thm33 route requires p >= 2");
        const double L = ctx.constant_L(s, t);
        c = std::exp(r * L / p);
        ledger_cp(ctx, p, r, L);
        rep.metadata["L_J"] = L;
    } else if (mode == LpMode::thm33_dual) {
        if (!(p >= 1.0 && p < 2.0)) throw SpecError("dual route requires p in [1,2)");
        const double L = ctx.constant_L(s, t);
        const double k0 = ctx.constant_kappa0(s, t);
        auto tk = check_tilde_K_nonneg(ctx.spec, ctx.kappa, ctx.window_plan(s, t), ctx.sphere,
                                       /*weak=*/true);
        ctx.hyps[tk.hypothesis_id] = tk;
        rep.metadata["tilde_K_ok"] = tk.verdict == Verdict::satisfied_on_samples ? 1.0 : 0.0;
        const double pprime = p / (p - 1.0);
        c = std::exp(r * (L + k0 * (pprime - 2.0)) / pprime);
        ctx.ledger.set("c_p_dual", c, "exp(r (L_J + kappa_0 (p'-2))/p')",
                       {{"p", p}, {"L_J", L}, {"kappa_0", k0}, {"r", r}});
        rep.metadata["L_J"] = L;
        rep.metadata["kappa_0"] = k0;
    } else {
        const double K = ctx.constant_K(p, s, t);
        const Field g0 = detail::power_field(f, p);
        const double g_mass = lp_norm(g0, 1.0);
        double c1 = 1.0;
        if (g_mass > 0.0) {
            const auto w = evolve(ctx.spec, ctx.grid, ctx.bc, Flavor::scalar_A, g0, s, t, ctx.evo);
            c1 = lp_norm(w.final_field(), 1.0) / g_mass;
        }
        c = std::exp(K * r) * c1;
        ctx.ledger.set("c_tilde_1", c1, "measured scalar L1 growth on |f|^p");
        ctx.ledger.set("c_p_thm34", c, "exp(K_J r) c_tilde_1(r)",
                       {{"p", p}, {"K_J", K}, {"r", r}});
        rep.metadata["K_J"] = K;
        rep.metadata["c_tilde_1"] = c1;
    }

    const auto u = evolve(ctx.spec, ctx.grid, ctx.bc, Flavor::vector_A, f, s, t, ctx.evo);
    rep.lhs = lp_norm(u.final_field(), p);
    rep.rhs = c * lp_norm(f, p);
    rep.worst_margin = rep.rhs - rep.lhs;
    rep.metadata["c_p"] = c;

    if (p == 2.0 && ctx.ledger.has("L_J")) {
        // Thm 3.3 proof: D_t ||u||_2^2 <= L_J ||u||_2^2, checked per step
        const double L = ctx.ledger.get("L_J");
        double worst = std::numeric_limits<double>::infinity();
        for (std::size_t k = 1; k < u.times.size(); ++k) {
            const double dt = u.times[k] - u.times[k - 1];
            const double nk0 = u.l2_norms[k - 1] * u.l2_norms[k - 1];
            const double nk1 = u.l2_norms[k] * u.l2_norms[k];
            const double rate = (nk1 - nk0) / dt;
            worst = std::min(worst, L * std::max(nk0, nk1) - rate);
        }
        rep.metadata["energy_rate_margin"] = worst;
    }
    rep.finish(ctx.tol_est);
    return rep;
}

enum class UniformMode { gamma_one, gamma_H, appendixA };

/// ||G(t,s)f||_inf <= gamma(t-s) ||f||_inf with gamma from the chosen route.
inline EstimateReport check_uniform(VerifyContext& ctx, const Field& f, double s, double t,
                                    UniformMode mode, const ScalarFieldDecl& h_shift = {}) {
    EstimateReport rep;
    rep.params = {{"s", s}, {"t", t}, {"radius", ctx.grid.radius}, {"h", ctx.grid.h},
                  {"dt", ctx.evo.dt}};
    double gamma = 1.0;
    if (mode == UniformMode::gamma_one) {
        rep.estimate_id = "uniform_gamma1";
        auto k = check_K_nonneg(ctx.spec, ctx.window_plan(s, t), ctx.sphere, false);
        ctx.hyps[k.hypothesis_id] = k;
        rep.metadata["K_nonneg_ok"] = k.verdict == Verdict::satisfied_on_samples ? 1.0 : 0.0;
        ctx.ledger.set("gamma_r", 1.0, "gamma(r) = 1 under Hyp 2.2");
    } else if (mode == UniformMode::gamma_H) {
        rep.estimate_id = "uniform_gammaH";
        const double H = ctx.sampled_sup_H(0.25, s, t);
        gamma = std::exp(H * (t - s));
        ctx.ledger.set("gamma_r", gamma, "exp(H_{1/4,[s,T]} r)", {{"H", H}});
        rep.metadata["H_quarter"] = H;
    } else {
        rep.estimate_id = "uniform_appendixA";
        if (!h_shift.present) throw SpecError("appendixA route requires the shift function h");
        double h0 = -std::numeric_limits<double>::infinity();
        const SamplePlan p = ctx.window_plan(s, t);
        for (double tt : p.times.points())
            for (const Vec& x : p.box.points(ctx.spec.d)) h0 = std::max(h0, h_shift(tt, x));
        gamma = std::exp(h0 * (t - s));
        ctx.ledger.set("h_0", h0, "sup h");
        ctx.ledger.set("gamma_r", gamma, "exp(h_0 r)", {{"h_0", h0}});
        rep.metadata["h_0"] = h0;
    }
    const auto u = evolve(ctx.spec, ctx.grid, ctx.bc, Flavor::vector_A, f, s, t, ctx.evo);
    rep.lhs = sup_norm(u.final_field());
    rep.rhs = gamma * sup_norm(f);
    rep.worst_margin = rep.rhs - rep.lhs;
    rep.metadata["gamma"] = gamma;
    rep.finish(ctx.tol_est);
    return rep;
}

/// Hypercontractivity ||G(t,s)f||_q <= c_{p,q}(t-s) ||f||_p.  The Nash
/// constants are not computable from the text, so the check is (a)
/// boundedness of the ratio over a family of shrinking-support data and (b)
/// consistency of the split c_{p,q}(r) = c_{p,2}(r/2) c_{2,q}(r/2) (and, for
/// p = 2, of the interpolation formula) against measured ratios.
inline EstimateReport check_hyper(VerifyContext& ctx, const std::vector<Field>& family, double p,
                                  double q, double s, double t) {
    if (p > q) throw SpecError("check_hyper requires p <= q");
    if (family.empty()) throw SpecError("check_hyper requires a nonempty family of data");
    EstimateReport rep;
    rep.estimate_id = "hyper";
    rep.params = {{"p", p}, {"q", q}, {"s", s}, {"t", t}, {"radius", ctx.grid.radius},
                  {"h", ctx.grid.h}, {"dt", ctx.evo.dt}};
    if (p == q) {
        EstimateReport inner = check_lp_bound(ctx, family.back(), p, s, t,
                                              p >= 2.0 ? LpMode::thm33 : LpMode::thm34);
        inner.estimate_id = "hyper";
        inner.params["q"] = q;
        inner.metadata["reduced_to_lp"] = 1.0;
        return inner;
    }

    const double mid = 0.5 * (s + t);
    double ratio_prev = 0.0, ratio_last = 0.0;
    double c_p2 = 0.0, c_2q = 0.0, c_pq = 0.0;
    double c_p_meas = 0.0, c_2inf = 0.0, c_q_ratio_at2 = 0.0;
    int idx = 0;
    for (const Field& f : family) {
        const double fp = lp_norm(f, p);
        const auto u_mid = evolve(ctx.spec, ctx.grid, ctx.bc, Flavor::vector_A, f, s, mid, ctx.evo);
        const Field& g = u_mid.final_field();
        const auto u = evolve(ctx.spec, ctx.grid, ctx.bc, Flavor::vector_A, g, mid, t, ctx.evo);
        const double g2 = lp_norm(g, 2.0);
        const double uq = lp_norm(u.final_field(), q);
        const double ratio = fp > 0.0 ? uq / fp : 0.0;
        c_pq = std::max(c_pq, ratio);
        if (fp > 0.0) c_p2 = std::max(c_p2, g2 / fp);
        if (g2 > 0.0) c_2q = std::max(c_2q, uq / g2);
        const auto u_full = u.final_field();
        const double up = lp_norm(u_full, p);
        if (fp > 0.0) c_p_meas = std::max(c_p_meas, up / fp);
        const double f2 = lp_norm(f, 2.0);
        if (f2 > 0.0) {
            c_2inf = std::max(c_2inf, sup_norm(u_full) / f2);
            c_q_ratio_at2 = std::max(c_q_ratio_at2, lp_norm(u_full, q) / f2);
        }
        rep.metadata["ratio_" + std::to_string(idx)] = ratio;
        ratio_prev = ratio_last;
        ratio_last = ratio;
        ++idx;
    }
    rep.lhs = ratio_last;
    rep.rhs = c_p2 * c_2q;
    rep.metadata["c_pq_measured"] = c_pq;
    rep.metadata["c_p2_half"] = c_p2;
    rep.metadata["c_2q_half"] = c_2q;
    const bool converged =
        family.size() < 2 || std::abs(ratio_last - ratio_prev) <= 0.15 * std::abs(ratio_last);
    rep.metadata["bounded_ok"] = converged ? 1.0 : 0.0;
    // split consistency: the end-to-end ratio cannot exceed the product of
    // the measured stage maxima
    const bool split_ok = c_pq <= c_p2 * c_2q * (1.0 + 1e-9);
    rep.metadata["split_ok"] = split_ok ? 1.0 : 0.0;
    bool interp_ok = true;
    if (p == 2.0) {
        // ||u||_q <= ||u||_2^{2/q} ||u||_inf^{1-2/q} makes this exact
        const double formula = std::pow(c_p_meas, p / q) *
                               std::pow(c_2inf, 2.0 * (q - p) / (p * q));
        interp_ok = c_q_ratio_at2 <= formula * (1.0 + 1e-9);
        rep.metadata["interp_formula"] = formula;
        rep.metadata["interp_measured"] = c_q_ratio_at2;
        ctx.ledger.set("c_2inf", c_2inf, "measured ||G f||_inf / ||f||_2 over family");
    }
    rep.metadata["interp_ok"] = interp_ok ? 1.0 : 0.0;
    rep.worst_margin = (converged && split_ok && interp_ok) ? 0.0 : -1.0;
    rep.scale = std::max({rep.lhs, rep.rhs, 1.0});
    rep.tol_used = 0.0;
    rep.pass = converged && split_ok && interp_ok;
    return rep;
}

namespace detail {

/// C_{p,J}: p times the sampled sup of the proof-side brackets multiplying
/// |D_x u|^2 and |u|^2.  For p > 2 the p = 2 bracket applies (Jensen lifts
/// the estimate).
inline double constant_CpJ(VerifyContext& ctx, double p, double s, double t) {
    const OperatorSpec& spec = ctx.spec;
    const double p_eff = std::min(p, 2.0);
    const double sqd = std::sqrt(static_cast<double>(spec.d));
    double sup_du = -std::numeric_limits<double>::infinity();
    double sup_u = -std::numeric_limits<double>::infinity();
    const SamplePlan plan = ctx.window_plan(s, t);
    for (double tt : plan.times.points())
        for (const Vec& x : plan.box.points(spec.d)) {
            const double xi = spec.xi(tt);
            const double k = spec.k_bound(tt, x);
            const double lQ = lambda_min(spec.eval_Q(tt, x), spec.tol.sym);
            const double LC = lambda_max(spec.eval_C(tt, x), spec.tol.sym);
            bool fd = false;
            double sum_dC2 = 0.0;
            for (int i = 0; i < spec.d; ++i) {
                const double fn = spec.dC_at(tt, x, i, &fd).frobenius_norm();
                sum_dC2 += fn * fn;
            }
            const double dC = std::sqrt(sum_dC2);
            double sum_d2Q = 0.0;
            for (int i = 0; i < spec.d; ++i)
                for (int l = 0; l < spec.d; ++l) {
                    const Mat dd = spec.d2Q_at(tt, x, i, l, &fd);
                    for (int j = 0; j < spec.d; ++j) sum_d2Q += dd(i, j) * dd(i, j);
                }
            double sum_dBt = 0.0;
            for (int i = 0; i < spec.d; ++i)
                for (int j = 0; j < spec.d; ++j) {
                    const double fn = spec.dBtilde_at(tt, x, i, j, &fd).frobenius_norm();
                    sum_dBt += fn * fn;
                }
            Mat Db = spec.db_at(tt, x, &fd);
            Mat Dbs = Db;
            Dbs += Db.transposed();
            Dbs *= 0.5;
            const double L_Db = lambda_max(Dbs, spec.tol.sym);

            const double sd = spec.d * k + sqd * spec.m * xi;
            const double young = sd > 0.0 ? sd * sd / (4.0 * (p_eff - 1.0)) : 0.0;
            const double coef_du = sqd * std::sqrt(sum_d2Q) + std::sqrt(sum_dBt) + L_Db + LC +
                                   (young + (p_eff - 1.0) + 0.5 * sqd * spec.m * xi) * lQ +
                                   0.5 * dC;
            const double coef_u = LC + 0.5 * (sqd * spec.m * xi * lQ + dC);
            sup_du = std::max(sup_du, coef_du);
            sup_u = std::max(sup_u, coef_u);
        }
    const double C = p * std::max({0.0, sup_du, sup_u});
    ctx.ledger.set("C_{p,J}", C, "p max(0, sup drift-side bracket, sup |u|^2 bracket)",
                   {{"p", p}, {"sup_du", sup_du}, {"sup_u", sup_u}});
    return C;
}

inline double grad_threshold(const OperatorSpec& spec) {
    return 1.0 + 1.0 / (4.0 * std::min(spec.beta, spec.gamma));
}

}  // namespace detail

/// |D_x G(t,s)f|^p <= c_p e^{C_{p,J}(t-s)} G(t,s)(|f|^p + |Df|^p) nodewise,
/// with c_p = 2^{(p/2-1) v 0}; Neumann approximations as in the proof.
inline EstimateReport check_grad1(VerifyContext& ctx, const Field& f, double p, double s,
                                  double t) {
    if (ctx.spec.sigma != 1.0) throw SpecError("gradient estimates require sigma = 1");
    const double thr = detail::grad_threshold(ctx.spec);
    if (p < thr)
        throw SpecError("p below the gradient threshold 1 + 1/(4 (beta ^ gamma)) = " +
                        std::to_string(thr));
    EstimateReport rep;
    rep.estimate_id = "grad1";
    rep.params = {{"p", p}, {"s", s}, {"t", t}, {"radius", ctx.grid.radius},
                  {"h", ctx.grid.h}, {"dt", ctx.evo.dt}};
    {
        auto gh = check_gradient_hyps(ctx.spec, ctx.window_plan(s, t));
        ctx.hyps[gh.dq.hypothesis_id] = gh.dq;
        ctx.hyps[gh.fin.hypothesis_id] = gh.fin;
        rep.metadata["hyp_dq_ok"] = gh.dq.verdict == Verdict::satisfied_on_samples ? 1.0 : 0.0;
        rep.metadata["hyp_fin_ok"] = gh.fin.verdict == Verdict::satisfied_on_samples ? 1.0 : 0.0;
    }
    const double C = detail::constant_CpJ(ctx, p, s, t);
    const double cp = std::pow(2.0, std::max(p / 2.0 - 1.0, 0.0));
    ctx.ledger.set("c_p_grad", cp, "2^{(p/2-1) v 0}", {{"p", p}});

    const auto u =
        evolve(ctx.spec, ctx.grid, BC::neumann, Flavor::vector_A, f, s, t, ctx.evo);
    const Field df = discrete_gradient(f);
    Field g0(ctx.grid, 1);
    for (std::size_t n = 0; n < ctx.grid.size(); ++n)
        g0.at(static_cast<int>(n), 0) = std::pow(f.node_norm(static_cast<int>(n)), p) +
                                        std::pow(df.node_norm(static_cast<int>(n)), p);
    const auto w = evolve(ctx.spec, ctx.grid, BC::neumann, Flavor::scalar_A, g0, s, t, ctx.evo);

    const Field du = discrete_gradient(u.final_field());
    const double amp = cp * std::exp(C * (t - s));
    const std::size_t nodes = ctx.grid.size();
    std::vector<double> lhs(nodes), rhs(nodes);
    for (std::size_t n = 0; n < nodes; ++n) {
        lhs[n] = std::pow(du.node_norm(static_cast<int>(n)), p);
        rhs[n] = amp * w.final_field().at(static_cast<int>(n), 0);
    }
    detail::pointwise_margin(rep, lhs, rhs);
    rep.metadata["C_pJ"] = C;
    rep.metadata["c_p"] = cp;
    detail::finish_pointwise(rep, ctx.tol_est);
    return rep;
}

/// |D_x G(t,s)f|^p <= k_p e^{h_p (t-s)} (t-s)^{-p/2} G(t,s)|f|^p with
/// k_p = 2 [p (p-1) nu_0]^{-1}; h_p is fitted over the (t-s) sweep and the
/// pass verdict asserts the (t-s)^{-p/2} smoothing rate.
inline EstimateReport check_grad2(VerifyContext& ctx, const Field& f, double p, double s,
                                  double t, std::vector<double> sweep = {}) {
    if (ctx.spec.sigma != 1.0) throw SpecError("gradient estimates require sigma = 1");
    const double thr = detail::grad_threshold(ctx.spec);
    if (p < thr)
        throw SpecError("p below the gradient threshold 1 + 1/(4 (beta ^ gamma)) = " +
                        std::to_string(thr));
    auto gh = check_gradient_hyps(ctx.spec, ctx.window_plan(s, t));
    ctx.hyps[gh.sign.hypothesis_id] = gh.sign;
    if (gh.sign.verdict == Verdict::violated) {
        std::string where = "t=" + std::to_string(gh.sign.witness->t) + " x=(";
        for (std::size_t i = 0; i < gh.sign.witness->x.size(); ++i)
            where += (i ? "," : "") + std::to_string(gh.sign.witness->x[i]);
        throw SpecError("Lambda_C <= -2 gamma d m^2 xi^2 lambda_Q is violated at " + where +
                        "); the smoothing estimate does not apply");
    }

    EstimateReport rep;
    rep.estimate_id = "grad2";
    rep.params = {{"p", p}, {"s", s}, {"t", t}, {"radius", ctx.grid.radius},
                  {"h", ctx.grid.h}, {"dt", ctx.evo.dt}};
    if (sweep.empty()) sweep = {t - s};
    std::sort(sweep.begin(), sweep.end());
    if (sweep.front() < 10.0 * ctx.evo.dt)
        throw SpecError("grad2: sweep must start at t-s >= 10 dt (singularity guard)");

    const double nu0 = ctx.constant_nu0(s, s + sweep.back());
    const double kp = 2.0 / (p * (p - 1.0) * nu0);
    ctx.ledger.set("k_p", kp, "2 [p (p-1) nu_0]^{-1}", {{"p", p}, {"nu_0", nu0}});
    const double K = ctx.constant_K(p, s, s + sweep.back());
    double lambda_rescale = 0.0;
    if (K >= 0.0) lambda_rescale = K + 1.0;  // rescaling u -> e^{-lambda (t-s)} u
    rep.metadata["lambda_rescale"] = lambda_rescale;

    const Field g0 = detail::power_field(f, p);
    double h_fit = 0.0;
    std::vector<double> log_r, log_q;
    int idx = 0;
    Field du_last, w_last;
    for (double r : sweep) {
        const auto u =
            evolve(ctx.spec, ctx.grid, BC::neumann, Flavor::vector_A, f, s, s + r, ctx.evo);
        const auto w =
            evolve(ctx.spec, ctx.grid, BC::neumann, Flavor::scalar_A, g0, s, s + r, ctx.evo);
        const Field du = discrete_gradient(u.final_field());
        double sup_du_p = 0.0;
        double ratio = 0.0;
        double wmax = 0.0;
        for (std::size_t n = 0; n < ctx.grid.size(); ++n)
            wmax = std::max(wmax, w.final_field().at(static_cast<int>(n), 0));
        const double floor = 1e-12 * std::max(wmax, 1e-300);
        const double damp = std::exp(-p * lambda_rescale * r);
        for (std::size_t n = 0; n < ctx.grid.size(); ++n) {
            const double l = std::pow(du.node_norm(static_cast<int>(n)), p);
            sup_du_p = std::max(sup_du_p, l);
            const double wv = w.final_field().at(static_cast<int>(n), 0);
            if (wv > floor)
                ratio = std::max(ratio, damp * l / (kp * std::pow(r, -p / 2.0) * wv));
        }
        if (ratio > 1.0) h_fit = std::max(h_fit, std::log(ratio) / r);
        const double qv = std::pow(r, p / 2.0) * sup_du_p;
        rep.metadata["sweep_r_" + std::to_string(idx)] = r;
        rep.metadata["sweep_weighted_sup_" + std::to_string(idx)] = qv;
        if (qv > 0.0) {
            log_r.push_back(std::log(r));
            log_q.push_back(std::log(qv));
        }
        if (r == sweep.back()) {
            du_last = du;
            w_last = w.final_field();
        }
        ++idx;
    }
    const double hp = h_fit + p * lambda_rescale;
    ctx.ledger.set("h_p", hp, "fitted over the (t-s) sweep (incl. rescaling)",
                   {{"p", p}, {"lambda", lambda_rescale}});
    rep.metadata["h_p"] = hp;
    rep.metadata["k_p"] = kp;

    // least-squares slope of log(weighted sup) against log(r)
    double slope = 0.0;
    if (log_r.size() >= 2) {
        double mx = 0.0, my = 0.0;
        for (std::size_t i = 0; i < log_r.size(); ++i) {
            mx += log_r[i];
            my += log_q[i];
        }
        mx /= log_r.size();
        my /= log_q.size();
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < log_r.size(); ++i) {
            num += (log_r[i] - mx) * (log_q[i] - my);
            den += (log_r[i] - mx) * (log_r[i] - mx);
        }
        slope = den > 0.0 ? num / den : 0.0;
    }
    rep.metadata["weighted_sup_slope"] = slope;

    // nodewise margin at the requested t - s with the fitted h_p
    const double r_last = sweep.back();
    const double amp = kp * std::exp(hp * r_last) * std::pow(r_last, -p / 2.0);
    const std::size_t nodes = ctx.grid.size();
    std::vector<double> lhs(nodes), rhs(nodes);
    for (std::size_t n = 0; n < nodes; ++n) {
        lhs[n] = std::pow(du_last.node_norm(static_cast<int>(n)), p);
        rhs[n] = amp * w_last.at(static_cast<int>(n), 0);
    }
    detail::pointwise_margin(rep, lhs, rhs);
    detail::finish_pointwise(rep, ctx.tol_est);
    rep.metadata["scaling_slope_ok"] = slope >= -0.05 ? 1.0 : 0.0;
    rep.pass = rep.pass && slope >= -0.05 && std::isfinite(hp);
    return rep;
}

/// Corollary endpoints: W^{1,p} -> W^{1,p} and L^p -> W^{1,p} with the
/// ledger-assembled constants.
inline EstimateReport check_w1p(VerifyContext& ctx, const Field& f, double p, double s, double t) {
    EstimateReport rep;
    rep.estimate_id = "w1p";
    rep.params = {{"p", p}, {"s", s}, {"t", t}, {"radius", ctx.grid.radius},
                  {"h", ctx.grid.h}, {"dt", ctx.evo.dt}};
    const double r = t - s;

    // ingredients from the two gradient estimates and the scalar L1 bound
    EstimateReport g1 = check_grad1(ctx, f, p, s, t);
    std::vector<double> sweep{r / 4.0, r / 2.0, r};
    EstimateReport g2 = check_grad2(ctx, f, p, s, t, sweep);
    const double K = ctx.constant_K(p, s, t);
    const Field g0 = detail::power_field(f, p);
    const double g_mass = lp_norm(g0, 1.0);
    double c1 = 1.0;
    if (g_mass > 0.0) {
        const auto w = evolve(ctx.spec, ctx.grid, BC::neumann, Flavor::scalar_A, g0, s, t, ctx.evo);
        c1 = lp_norm(w.final_field(), 1.0) / g_mass;
    }
    const double c_lp = std::exp(K * r) * c1;
    const double cp_grad = ctx.ledger.get("c_p_grad");
    const double CpJ = ctx.ledger.get("C_{p,J}");
    const double kp = ctx.ledger.get("k_p");
    const double hp = ctx.ledger.get("h_p");

    const double c1p = std::pow(std::pow(c_lp, p) + cp_grad * std::exp(CpJ * r) * c1, 1.0 / p);
    const double c2p =
        std::pow(std::pow(c_lp, p) + kp * std::exp(hp * r) * std::pow(r, -p / 2.0) * c1, 1.0 / p);
    ctx.ledger.set("c_p^1", c1p, "( c_p(r)^p + c_p e^{C_{p,J} r} c_tilde_1 )^{1/p}");
    ctx.ledger.set("c_p^2", c2p, "( c_p(r)^p + k_p e^{h_p r} r^{-p/2} c_tilde_1 )^{1/p}");

    const auto u = evolve(ctx.spec, ctx.grid, BC::neumann, Flavor::vector_A, f, s, t, ctx.evo);
    const Field du = discrete_gradient(u.final_field());
    const Field df = discrete_gradient(f);
    const double u_w1p =
        std::pow(std::pow(lp_norm(u.final_field(), p), p) + std::pow(lp_norm(du, p), p), 1.0 / p);
    const double f_w1p =
        std::pow(std::pow(lp_norm(f, p), p) + std::pow(lp_norm(df, p), p), 1.0 / p);

    rep.lhs = u_w1p;
    rep.rhs = c1p * f_w1p;
    const double margin1 = rep.rhs - rep.lhs;
    const double margin2 = c2p * lp_norm(f, p) - u_w1p;
    rep.worst_margin = std::min(margin1, margin2);
    rep.metadata["margin_w1p_w1p"] = margin1;
    rep.metadata["margin_lp_w1p"] = margin2;
    rep.metadata["c_p^1"] = c1p;
    rep.metadata["c_p^2"] = c2p;
    rep.metadata["grad1_pass"] = g1.pass ? 1.0 : 0.0;
    rep.metadata["grad2_pass"] = g2.pass ? 1.0 : 0.0;
    rep.finish(ctx.tol_est);
    rep.pass = rep.pass && g1.pass && g2.pass;
    return rep;
}

/// Expanding-ball study: successive inner-region differences of G_{n_i} f and
/// the Dirichlet-Neumann gap, all expected to shrink with the radius.
inline EstimateReport domain_convergence(const OperatorSpec& spec, double h,
                                         const std::vector<double>& radii, double inner_radius,
                                         const std::function<Vec(const Vec&)>& f_fn, double s,
                                         double t, const EvolutionConfig& evo,
                                         double tol_est = 1e-7) {
    if (radii.size() < 2) throw SpecError("domain_convergence needs at least two radii");
    for (double r : radii)
        if (inner_radius >= r) throw SpecError("inner_radius must be smaller than every radius");

    EstimateReport rep;
    rep.estimate_id = "domain_convergence";
    rep.params = {{"s", s}, {"t", t}, {"h", h}, {"inner_radius", inner_radius},
                  {"dt", evo.dt}};

    struct Run {
        Grid grid;
        Field uD, uN, duD;
    };
    std::vector<Run> runs;
    for (double radius : radii) {
        Run run{Grid::build(spec.d, radius, h), {}, {}, {}};
        Field f = Field::sample(run.grid, spec.m, f_fn);
        f.zero_boundary();
        run.uD = evolve(spec, run.grid, BC::dirichlet, Flavor::vector_A, f, s, t, evo).final_field();
        Field fN = Field::sample(run.grid, spec.m, f_fn);
        run.uN = evolve(spec, run.grid, BC::neumann, Flavor::vector_A, fN, s, t, evo).final_field();
        run.duD = discrete_gradient(run.uD);
        runs.push_back(std::move(run));
    }

    auto inner_sup_diff = [&](const Field& a, const Grid& ga, const Field& b, const Grid& gb) {
        double sup = 0.0;
        for (std::size_t n = 0; n < ga.size(); ++n) {
            const Vec x = ga.point(static_cast<int>(n));
            if (x.norm() > inner_radius) continue;
            const int nb = gb.node_at(ga.coords[n]);
            if (nb < 0) continue;
            double s2 = 0.0;
            for (int k = 0; k < a.m; ++k) {
                const double dv = a.at(static_cast<int>(n), k) - b.at(nb, k);
                s2 += dv * dv;
            }
            sup = std::max(sup, std::sqrt(s2));
        }
        return sup;
    };

    bool monotone = true, grad_monotone = true, gap_monotone = true;
    double prev = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < runs.size(); ++i) {
        const double diff =
            inner_sup_diff(runs[i].uD, runs[i].grid, runs[i + 1].uD, runs[i + 1].grid);
        rep.metadata["diff_" + std::to_string(i)] = diff;
        if (diff > prev) monotone = false;
        prev = diff;
    }
    prev = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < runs.size(); ++i) {
        const double diff =
            inner_sup_diff(runs[i].duD, runs[i].grid, runs[i + 1].duD, runs[i + 1].grid);
        rep.metadata["grad_diff_" + std::to_string(i)] = diff;
        if (diff > prev) grad_monotone = false;
        prev = diff;
    }
    prev = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < runs.size(); ++i) {
        const double gap = inner_sup_diff(runs[i].uD, runs[i].grid, runs[i].uN, runs[i].grid);
        rep.metadata["dn_gap_" + std::to_string(i)] = gap;
        if (gap > prev) gap_monotone = false;
        prev = gap;
    }
    rep.lhs = rep.metadata["diff_" + std::to_string(runs.size() - 2)];
    rep.rhs = rep.metadata["diff_0"];
    rep.worst_margin = rep.rhs - rep.lhs;
    rep.scale = std::max(1.0, rep.rhs);
    rep.tol_used = tol_est * rep.scale;
    rep.pass = monotone && grad_monotone && gap_monotone;
    rep.metadata["monotone"] = monotone ? 1.0 : 0.0;
    rep.metadata["grad_monotone"] = grad_monotone ? 1.0 : 0.0;
    rep.metadata["gap_monotone"] = gap_monotone ? 1.0 : 0.0;
    return rep;
}

}  // namespace parabolica
