#pragma once

#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "report.hpp"

namespace parabolica {

namespace detail {

inline Field initial_field(const RunConfig& cfg, const Grid& grid, int m) {
    Vec center = cfg.center;
    if (center.size() != static_cast<std::size_t>(grid.d))
        center = Vec(static_cast<std::size_t>(grid.d), 0.0);
    std::vector<double> amp = cfg.amplitude;
    amp.resize(static_cast<std::size_t>(m), amp.empty() ? 1.0 : amp.back());
    if (cfg.initial_type == "bump") return bump_field(grid, m, center, cfg.support, amp);
    if (cfg.initial_type == "constant") {
        Field f(grid, m);
        for (std::size_t n = 0; n < grid.size(); ++n)
            for (int k = 0; k < m; ++k) f.at(static_cast<int>(n), k) = amp[k];
        return f;
    }
    throw SpecError("unknown initial data type '" + cfg.initial_type + "' (bump, constant)");
}

inline VerifyContext make_context(const RunConfig& cfg, const OperatorSpec& spec) {
    VerifyContext ctx{spec,
                      Grid::build(spec.d, cfg.radius, cfg.h),
                      SamplePlan{SampleBox{cfg.box_radius, cfg.points_per_dim},
                                 TimeWindow{cfg.s, cfg.t, cfg.time_samples}},
                      SphereSample::standard(spec.m, cfg.seed),
                      EvolutionConfig{cfg.theta, cfg.dt, cfg.solver_tol, cfg.max_iters,
                                      cfg.snapshot_stride, cfg.upwind},
                      cfg.bc == "dirichlet" ? BC::dirichlet : BC::neumann,
                      build_kappa(cfg)};
    return ctx;
}

inline std::vector<std::string> default_hypotheses(const OperatorSpec& spec,
                                                   const ScalarFieldDecl& kappa) {
    std::vector<std::string> ids{"ellipticity", "K_nonneg", "lyapunov_eta", "L2_dissipativity"};
    if (spec.has_decomposition) {
        ids.push_back("decomposition");
        ids.push_back("lyapunov_scalar");
    }
    if (kappa.present) {
        ids.push_back("tilde_K_nonneg");
        ids.push_back("lyapunov_tilde_eta");
        if (spec.has_decomposition) ids.push_back("lyapunov_tilde_scalar");
    }
    if (spec.sigma == 1.0 && spec.has_decomposition) {
        ids.push_back("gradient_dq");
        ids.push_back("gradient_fin");
    }
    return ids;
}

inline void run_hypothesis(const std::string& id, const RunConfig& cfg, VerifyContext& ctx,
                           ReportBundle& bundle) {
    const SamplePlan plan = ctx.plan;
    const LyapunovSpec lyap = LyapunovSpec::quadratic(ctx.spec.d, cfg.lyapunov_lambda);
    auto push = [&](HypothesisReport rep) {
        ctx.hyps[rep.hypothesis_id] = rep;
        bundle.hypothesis_reports.push_back(std::move(rep));
    };
    if (id == "ellipticity") push(check_ellipticity(ctx.spec, plan));
    else if (id == "K_nonneg") push(check_K_nonneg(ctx.spec, plan, ctx.sphere, cfg.weak));
    else if (id == "tilde_K_nonneg")
        push(check_tilde_K_nonneg(ctx.spec, ctx.kappa, plan, ctx.sphere, /*weak=*/true));
    else if (id == "lyapunov_eta")
        push(check_lyapunov(ctx.spec, lyap, LyapunovVariant::A_eta_family, {}, plan, ctx.sphere));
    else if (id == "lyapunov_scalar")
        push(check_lyapunov(ctx.spec, lyap, LyapunovVariant::A_scalar, {}, plan, ctx.sphere));
    else if (id == "lyapunov_tilde_eta")
        push(check_lyapunov(ctx.spec, lyap, LyapunovVariant::A_eta_tilde_family, ctx.kappa, plan,
                            ctx.sphere));
    else if (id == "lyapunov_tilde_scalar")
        push(check_lyapunov(ctx.spec, lyap, LyapunovVariant::A_tilde_scalar, ctx.kappa, plan,
                            ctx.sphere));
    else if (id == "decomposition") push(check_decomposition(ctx.spec, plan));
    else if (id == "L2_dissipativity") push(check_L2_dissipativity(ctx.spec, plan));
    else if (id == "gradient_dq" || id == "gradient_fin" || id == "gradient_sign") {
        auto rep = check_gradient_hyps(ctx.spec, plan);
        if (id == "gradient_dq") push(rep.dq);
        if (id == "gradient_fin") push(rep.fin);
        if (id == "gradient_sign") push(rep.sign);
    } else {
        throw SpecError("unknown hypothesis id '" + id + "'");
    }
}

inline void run_estimate(const std::string& id, const RunConfig& cfg, VerifyContext& ctx,
                         ReportBundle& bundle) {
    const Field f = initial_field(cfg, ctx.grid, ctx.spec.m);
    auto sweep_for = [&](double r) {
        std::vector<double> sw;
        for (double frac : {0.25, 0.5, 1.0})
            if (r * frac >= 10.0 * ctx.evo.dt) sw.push_back(r * frac);
        if (sw.empty()) sw.push_back(r);
        return sw;
    };
    for (double p : cfg.p_list) {
        if (id == "pointwise") {
            bundle.estimate_reports.push_back(check_pointwise(ctx, f, p, cfg.s, cfg.t));
        } else if (id == "lp_thm33") {
            bundle.estimate_reports.push_back(
                check_lp_bound(ctx, f, p, cfg.s, cfg.t, LpMode::thm33));
        } else if (id == "lp_thm33_dual") {
            bundle.estimate_reports.push_back(
                check_lp_bound(ctx, f, p, cfg.s, cfg.t, LpMode::thm33_dual));
        } else if (id == "lp_thm34") {
            bundle.estimate_reports.push_back(
                check_lp_bound(ctx, f, p, cfg.s, cfg.t, LpMode::thm34));
        } else if (id == "lp_auto") {
            bundle.estimate_reports.push_back(check_lp_bound(
                ctx, f, p, cfg.s, cfg.t, p >= 2.0 ? LpMode::thm33 : LpMode::thm33_dual));
        } else if (id == "uniform_gamma1") {
            bundle.estimate_reports.push_back(
                check_uniform(ctx, f, cfg.s, cfg.t, UniformMode::gamma_one));
        } else if (id == "uniform_gammaH") {
            bundle.estimate_reports.push_back(
                check_uniform(ctx, f, cfg.s, cfg.t, UniformMode::gamma_H));
        } else if (id == "hyper") {
            std::vector<Field> family;
            Vec center = cfg.center;
            if (center.size() != static_cast<std::size_t>(ctx.grid.d))
                center = Vec(static_cast<std::size_t>(ctx.grid.d), 0.0);
            std::vector<double> amp = cfg.amplitude;
            amp.resize(static_cast<std::size_t>(ctx.spec.m), amp.empty() ? 1.0 : amp.back());
            for (double scale : {1.0, 0.5, 0.25})
                family.push_back(
                    bump_field(ctx.grid, ctx.spec.m, center, cfg.support * scale, amp));
            for (double q : cfg.q_list.empty() ? std::vector<double>{p} : cfg.q_list)
                bundle.estimate_reports.push_back(check_hyper(ctx, family, p, q, cfg.s, cfg.t));
        } else if (id == "grad1") {
            bundle.estimate_reports.push_back(check_grad1(ctx, f, p, cfg.s, cfg.t));
        } else if (id == "grad2") {
            bundle.estimate_reports.push_back(
                check_grad2(ctx, f, p, cfg.s, cfg.t, sweep_for(cfg.t - cfg.s)));
        } else if (id == "w1p") {
            bundle.estimate_reports.push_back(check_w1p(ctx, f, p, cfg.s, cfg.t));
        } else if (id == "domain_convergence") {
            std::vector<double> radii{cfg.radius, cfg.radius + 2.0, cfg.radius + 4.0};
            Vec center = cfg.center;
            if (center.size() != static_cast<std::size_t>(ctx.grid.d))
                center = Vec(static_cast<std::size_t>(ctx.grid.d), 0.0);
            std::vector<double> amp = cfg.amplitude;
            amp.resize(static_cast<std::size_t>(ctx.spec.m), amp.empty() ? 1.0 : amp.back());
            const double support = cfg.support;
            const int m = ctx.spec.m;
            auto f_fn = [center, support, amp, m](const Vec& x) {
                Vec dx = x;
                dx -= center;
                Vec out(static_cast<std::size_t>(m));
                const double q = dx.norm2() / (support * support);
                if (q < 1.0)
                    for (int k = 0; k < m; ++k)
                        out[k] = amp[static_cast<std::size_t>(k)] * std::exp(1.0 - 1.0 / (1.0 - q));
                return out;
            };
            bundle.estimate_reports.push_back(domain_convergence(ctx.spec, cfg.h, radii,
                                                                 cfg.inner_radius, f_fn, cfg.s,
                                                                 cfg.t, ctx.evo, ctx.tol_est));
            break;  // independent of p
        } else {
            throw SpecError("unknown estimate id '" + id + "'");
        }
    }
}

}  // namespace detail

/// Dispatch one CLI command against a parsed configuration.
inline ReportBundle run(const std::string& command, const RunConfig& cfg) {
    ReportBundle bundle;
    bundle.command = command;
    bundle.run_id = cfg.run_id();
    bundle.config = cfg;

    if (command == "examples") {
        for (const auto& fam : family_catalogue())
            bundle.notes.push_back(fam.id + ": " + fam.description + " | constraints: " +
                                   fam.constraints);
        return bundle;
    }

    OperatorSpec spec = build_spec(cfg);
    if (spec.constraints_violated)
        bundle.notes.push_back("constraints_violated: " + spec.constraint_note);

    if (command == "check") {
        VerifyContext ctx = detail::make_context(cfg, spec);
        std::vector<std::string> ids = cfg.hypotheses;
        if (ids.empty() || (ids.size() == 1 && ids[0] == "all"))
            ids = detail::default_hypotheses(spec, ctx.kappa);
        for (const auto& id : ids) detail::run_hypothesis(id, cfg, ctx, bundle);
        bundle.ledger = ctx.ledger;
        return bundle;
    }
    if (command == "verify") {
        VerifyContext ctx = detail::make_context(cfg, spec);
        for (const auto& id : cfg.estimates) detail::run_estimate(id, cfg, ctx, bundle);
        for (const auto& [hid, rep] : ctx.hyps) bundle.hypothesis_reports.push_back(rep);
        bundle.ledger = ctx.ledger;
        return bundle;
    }
    if (command == "evolve") {
        const Grid grid = Grid::build(spec.d, cfg.radius, cfg.h);
        const int m = cfg.flavor == "scalar_A" ? 1 : spec.m;
        Field f = detail::initial_field(cfg, grid, m);
        const BC bc = cfg.bc == "dirichlet" ? BC::dirichlet : BC::neumann;
        if (bc == BC::dirichlet) f.zero_boundary();
        const Flavor flavor = cfg.flavor == "vector_A" ? Flavor::vector_A
                              : cfg.flavor == "vector_A_star" ? Flavor::vector_A_star
                                                              : Flavor::scalar_A;
        EvolutionConfig evo{cfg.theta, cfg.dt, cfg.solver_tol, cfg.max_iters,
                            std::max(cfg.snapshot_stride, 0), cfg.upwind};
        const Trajectory traj = evolve(spec, grid, bc, flavor, f, cfg.s, cfg.t, evo);
        namespace fs = std::filesystem;
        fs::create_directories(cfg.out_dir);
        json manifest;
        manifest["schema_version"] = kSchemaVersion;
        manifest["provenance"] = traj.provenance;
        json snaps = json::array();
        for (std::size_t i = 0; i < traj.snapshots.size(); ++i) {
            const auto& snap = traj.snapshots[i];
            const std::string base = "snapshot_" + std::to_string(i);
            write_field_csv(snap.field, (fs::path(cfg.out_dir) / (base + ".csv")).string());
            write_field_binary(snap.field, (fs::path(cfg.out_dir) / (base + ".bin")).string());
            json s;
            s["time"] = snap.time;
            s["csv"] = base + ".csv";
            s["bin"] = base + ".bin";
            snaps.push_back(s);
        }
        manifest["snapshots"] = snaps;
        manifest["times"] = traj.times;
        manifest["l2_norms"] = traj.l2_norms;
        manifest["sup_norms"] = traj.sup_norms;
        detail::atomic_write(fs::path(cfg.out_dir) / "trajectory.json", manifest.dump(2) + "\n");
        bundle.notes.push_back("trajectory written to " + cfg.out_dir);
        return bundle;
    }
    if (command == "sweep") {
        if (cfg.sweep.empty()) throw SpecError("sweep command requires a [sweep] section");
        std::vector<std::string> keys;
        for (const auto& [k, v] : cfg.sweep) keys.push_back(k);
        std::vector<std::size_t> idx(keys.size(), 0);
        while (true) {
            RunConfig cell = cfg;
            std::string label;
            for (std::size_t k = 0; k < keys.size(); ++k) {
                const double v = cfg.sweep.at(keys[k])[idx[k]];
                label += (k ? " " : "") + keys[k] + "=" + std::to_string(v);
                if (keys[k] == "p") cell.p_list = {v};
                else if (keys[k] == "q") cell.q_list = {v};
                else if (keys[k] == "t") cell.t = v;
                else if (keys[k] == "dt") cell.dt = v;
                else if (keys[k] == "h") cell.h = v;
                else if (keys[k] == "radius") cell.radius = v;
                else throw SpecError("sweep parameter '" + keys[k] + "' is not sweepable");
            }
            try {
                VerifyContext ctx = detail::make_context(cell, spec);
                for (const auto& id : cell.estimates) detail::run_estimate(id, cell, ctx, bundle);
            } catch (const std::exception& e) {
                bundle.notes.push_back("cell [" + label + "] failed: " + e.what());
            }
            std::size_t k = 0;
            while (k < keys.size() && ++idx[k] == cfg.sweep.at(keys[k]).size()) idx[k++] = 0;
            if (k == keys.size()) break;
        }
        return bundle;
    }
    throw SpecError("unknown command '" + command + "'");
}

}  // namespace parabolica
