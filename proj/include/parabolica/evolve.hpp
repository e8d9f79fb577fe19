#pragma once

#include <Eigen/Sparse>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "operators.hpp"

namespace parabolica {

struct EvolutionConfig {
    double theta = 1.0;        // theta-scheme weight; 1 = implicit Euler
    double dt = 1e-2;
    double solver_tol = 1e-10;  // relative residual
    int max_iters = 4000;
    int snapshot_stride = 1;    // 0 = keep only first and last snapshot
    bool upwind_scalar = false;
};

struct SolverError : std::runtime_error {
    std::vector<double> residual_history;
    SolverError(const std::string& msg, std::vector<double> hist)
        : std::runtime_error(msg), residual_history(std::move(hist)) {}
};

namespace krylov {

using SpMat = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

/// Jacobi-preconditioned conjugate gradients.  Deterministic iteration
/// order; returns the relative-residual history.
inline std::vector<double> cg(const SpMat& A, const Vector& rhs, Vector& x, double tol,
                              int max_iters) {
    const double bnorm = rhs.norm();
    std::vector<double> hist;
    if (bnorm == 0.0) {
        x.setZero();
        hist.push_back(0.0);
        return hist;
    }
    Vector diag = A.diagonal();
    for (Eigen::Index i = 0; i < diag.size(); ++i)
        if (diag[i] == 0.0) diag[i] = 1.0;
    Vector r = rhs - A * x;
    Vector z = r.cwiseQuotient(diag);
    Vector p = z;
    double rz = r.dot(z);
    hist.push_back(r.norm() / bnorm);
    for (int it = 0; it < max_iters; ++it) {
        if (hist.back() <= tol) return hist;
        const Vector Ap = A * p;
        const double alpha = rz / p.dot(Ap);
        x += alpha * p;
        r -= alpha * Ap;
        hist.push_back(r.norm() / bnorm);
        z = r.cwiseQuotient(diag);
        const double rz_new = r.dot(z);
        p = z + (rz_new / rz) * p;
        rz = rz_new;
        if (!std::isfinite(hist.back())) break;
    }
    if (hist.back() > tol)
        throw SolverError("cg did not converge: relative residual " +
                              std::to_string(hist.back()),
                          hist);
    return hist;
}

/// Jacobi-preconditioned BiCGStab with the same contract.
inline std::vector<double> bicgstab(const SpMat& A, const Vector& rhs, Vector& x, double tol,
                                    int max_iters) {
    const double bnorm = rhs.norm();
    std::vector<double> hist;
    if (bnorm == 0.0) {
        x.setZero();
        hist.push_back(0.0);
        return hist;
    }
    Vector diag = A.diagonal();
    for (Eigen::Index i = 0; i < diag.size(); ++i)
        if (diag[i] == 0.0) diag[i] = 1.0;
    Vector r = rhs - A * x;
    const Vector r0 = r;
    double rho = 1.0, alpha = 1.0, omega = 1.0;
    Vector v = Vector::Zero(rhs.size());
    Vector p = Vector::Zero(rhs.size());
    hist.push_back(r.norm() / bnorm);
    for (int it = 0; it < max_iters; ++it) {
        if (hist.back() <= tol) return hist;
        const double rho_new = r0.dot(r);
        if (rho_new == 0.0) break;
        const double beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        p = r + beta * (p - omega * v);
        const Vector phat = p.cwiseQuotient(diag);
        v = A * phat;
        alpha = rho / r0.dot(v);
        const Vector s = r - alpha * v;
        if (s.norm() / bnorm <= tol) {
            x += alpha * phat;
            hist.push_back(s.norm() / bnorm);
            return hist;
        }
        const Vector shat = s.cwiseQuotient(diag);
        const Vector t = A * shat;
        const double tt = t.dot(t);
        omega = tt > 0.0 ? t.dot(s) / tt : 0.0;
        x += alpha * phat + omega * shat;
        r = s - omega * t;
        hist.push_back(r.norm() / bnorm);
        if (omega == 0.0 || !std::isfinite(hist.back())) break;
    }
    if (hist.back() > tol)
        throw SolverError("bicgstab did not converge: relative residual " +
                              std::to_string(hist.back()),
                          hist);
    return hist;
}

}  // namespace krylov

/// One theta-scheme step: solve (I - theta dt A1) u+ = (I + (1-theta) dt A0) u.
inline Field step(const DiscreteOperator& A0, const DiscreteOperator& A1, const Field& u,
                  double dt, double theta, const EvolutionConfig& cfg = {}) {
    if (A0.grid != A1.grid || A0.m != A1.m)
        throw std::invalid_argument("step: operators must share grid and size");
    const Eigen::Index n = static_cast<Eigen::Index>(u.v.size());
    Eigen::Map<const Eigen::VectorXd> uv(u.v.data(), n);

    Eigen::VectorXd rhs;
    if (theta < 1.0) rhs = uv + (1.0 - theta) * dt * (A0.mat * uv);
    else rhs = uv;

    Field out = u;
    Eigen::Map<Eigen::VectorXd> xv(out.v.data(), n);
    if (theta > 0.0) {
        krylov::SpMat lhs = A1.mat;
        lhs *= -theta * dt;
        krylov::SpMat id(n, n);
        id.setIdentity();
        lhs = id + lhs;
        Eigen::VectorXd x = uv;  // warm start from the previous step
        if (A1.symmetric_hint) krylov::cg(lhs, rhs, x, cfg.solver_tol, cfg.max_iters);
        else krylov::bicgstab(lhs, rhs, x, cfg.solver_tol, cfg.max_iters);
        xv = x;
    } else {
        xv = rhs;
    }
    return out;
}

struct Snapshot {
    double time;
    Field field;
};

struct Trajectory {
    std::vector<Snapshot> snapshots;   // per snapshot_stride; first and last always
    std::vector<double> times;         // every scheme time point
    std::vector<double> l2_norms;      // discrete L2 norm per time point
    std::vector<double> sup_norms;     // sup norm per time point
    std::map<std::string, std::string> provenance;

    const Field& final_field() const { return snapshots.back().field; }
    double final_time() const { return snapshots.back().time; }
};

namespace detail {

inline std::vector<double> step_times(double s, double t, double dt) {
    std::vector<double> ts{s};
    const double span = t - s;
    const long full = static_cast<long>(std::floor(span / dt + 1e-9));
    for (long k = 1; k <= full; ++k) ts.push_back(s + k * dt);
    if (ts.back() < t - 1e-12 * std::max(1.0, std::abs(t))) ts.push_back(t);
    else ts.back() = t;
    return ts;
}

/// Assembly cache keyed by quantized time; a single entry serves autonomous
/// specs.
struct OperatorCache {
    const OperatorSpec& spec;
    const Grid& grid;
    BC bc;
    Flavor flavor;
    AssembleOptions opt;
    std::map<long long, DiscreteOperator> cache;

    const DiscreteOperator& at(double t) {
        const long long key = spec.time_dependent
                                  ? static_cast<long long>(std::llround(t * 1e12))
                                  : 0;
        auto it = cache.find(key);
        if (it == cache.end())
            it = cache.emplace(key, assemble(spec, t, grid, bc, flavor, opt)).first;
        return it->second;
    }
};

}  // namespace detail

/// Trajectory of the theta-scheme from time s to t; the final snapshot is the
/// discrete G_n(t,s) f.  Dirichlet runs require data vanishing on the
/// boundary ring.
inline Trajectory evolve(const OperatorSpec& spec, const Grid& grid, BC bc, Flavor flavor,
                         const Field& f, double s, double t, const EvolutionConfig& cfg = {}) {
    if (t < s) throw std::invalid_argument("evolve: requires s <= t");
    if (bc == BC::dirichlet && !f.vanishes_on_boundary())
        throw std::invalid_argument("evolve: Dirichlet data must vanish on the boundary ring");
    Trajectory traj;
    traj.provenance["family"] = spec.family_id;
    traj.provenance["flavor"] = to_string(flavor);
    traj.provenance["bc"] = to_string(bc);
    traj.provenance["grid"] = "d=" + std::to_string(grid.d) + " radius=" +
                              std::to_string(grid.radius) + " h=" + std::to_string(grid.h);
    traj.provenance["dt"] = std::to_string(cfg.dt);
    traj.provenance["theta"] = std::to_string(cfg.theta);

    detail::OperatorCache ops{spec, grid, bc, flavor, AssembleOptions{cfg.upwind_scalar}, {}};
    const auto ts = t > s ? detail::step_times(s, t, cfg.dt) : std::vector<double>{s};

    Field u = f;
    traj.times = ts;
    traj.l2_norms.push_back(lp_norm(u, 2.0));
    traj.sup_norms.push_back(sup_norm(u));
    traj.snapshots.push_back({s, u});
    for (std::size_t k = 1; k < ts.size(); ++k) {
        const double dt = ts[k] - ts[k - 1];
        const DiscreteOperator& A0 = ops.at(ts[k - 1]);
        const DiscreteOperator& A1 = ops.at(ts[k]);
        u = step(A0, A1, u, dt, cfg.theta, cfg);
        traj.l2_norms.push_back(lp_norm(u, 2.0));
        traj.sup_norms.push_back(sup_norm(u));
        const bool keep = cfg.snapshot_stride > 0 && (k % cfg.snapshot_stride == 0);
        if (keep && k + 1 < ts.size()) traj.snapshots.push_back({ts[k], u});
    }
    if (ts.size() > 1) traj.snapshots.push_back({t, u});
    return traj;
}

/// Discrete adjoint trajectory: integrates the backward dual problem from the
/// final datum at time t down to s.  Each backward step applies the exact
/// transpose of the corresponding forward theta-step, so the duality pairing
/// <G(t,s) f, g> = <f, G*(t,s) g> holds to solver tolerance.
inline Trajectory evolve_adjoint(const OperatorSpec& spec, const Grid& grid, const Field& g,
                                 double t, double s, const EvolutionConfig& cfg = {}) {
    if (t < s) throw std::invalid_argument("evolve_adjoint: requires s <= t");
    if (!g.vanishes_on_boundary())
        throw std::invalid_argument("evolve_adjoint: Dirichlet data must vanish on the boundary");
    Trajectory traj;
    traj.provenance["family"] = spec.family_id;
    traj.provenance["flavor"] = "vector_A_star";
    traj.provenance["bc"] = "dirichlet";

    detail::OperatorCache ops{spec, grid, BC::dirichlet, Flavor::vector_A_star, {}, {}};
    const auto ts = t > s ? detail::step_times(s, t, cfg.dt) : std::vector<double>{t};

    Field v = g;
    traj.times.assign(ts.rbegin(), ts.rend());
    traj.l2_norms.push_back(lp_norm(v, 2.0));
    traj.sup_norms.push_back(sup_norm(v));
    traj.snapshots.push_back({t, v});
    for (std::size_t k = ts.size(); k-- > 1;) {
        const double dt = ts[k] - ts[k - 1];
        // transpose of the forward step:
        //   [(I - th dt A(t_k))^-1 (I + (1-th) dt A(t_{k-1}))]^T
        //   = (I + (1-th) dt A*(t_{k-1})) (I - th dt A*(t_k))^-1
        // where A* is the transposed assembly delivered by the flavor.
        const DiscreteOperator& A1 = ops.at(ts[k]);
        Field w = v;
        Eigen::Map<Eigen::VectorXd> wv(w.v.data(), static_cast<Eigen::Index>(w.v.size()));
        if (cfg.theta > 0.0) {
            const Eigen::Index n = wv.size();
            krylov::SpMat lhs = A1.mat;
            lhs *= -cfg.theta * dt;
            krylov::SpMat id(n, n);
            id.setIdentity();
            lhs = id + lhs;
            Eigen::VectorXd y = wv;
            Eigen::Map<const Eigen::VectorXd> rhs(v.v.data(), n);
            if (A1.symmetric_hint) krylov::cg(lhs, rhs, y, cfg.solver_tol, cfg.max_iters);
            else krylov::bicgstab(lhs, rhs, y, cfg.solver_tol, cfg.max_iters);
            wv = y;
        }
        if (cfg.theta < 1.0) {
            const DiscreteOperator& A0 = ops.at(ts[k - 1]);
            const Eigen::VectorXd y = wv;
            wv = y + (1.0 - cfg.theta) * dt * (A0.mat * y);
        }
        v = w;
        traj.l2_norms.push_back(lp_norm(v, 2.0));
        traj.sup_norms.push_back(sup_norm(v));
        const bool keep = cfg.snapshot_stride > 0;
        if (keep && k > 1) traj.snapshots.push_back({ts[k - 1], v});
    }
    if (ts.size() > 1) traj.snapshots.push_back({s, v});
    return traj;
}

/// || G(t,s)f - G(t,r) G(r,s) f ||_{L2}; aligned r reproduces the step
/// sequence exactly, misaligned r differs by O(dt).
inline double evolution_law_residual(const OperatorSpec& spec, const Grid& grid, BC bc,
                                     Flavor flavor, const Field& f, double s, double r, double t,
                                     const EvolutionConfig& cfg = {}) {
    if (!(s < r && r < t)) throw std::invalid_argument("evolution_law_residual: needs s < r < t");
    const Field direct = evolve(spec, grid, bc, flavor, f, s, t, cfg).final_field();
    const Field mid = evolve(spec, grid, bc, flavor, f, s, r, cfg).final_field();
    const Field composed = evolve(spec, grid, bc, flavor, mid, r, t, cfg).final_field();
    Field diff = direct;
    for (std::size_t i = 0; i < diff.v.size(); ++i) diff.v[i] -= composed.v[i];
    return lp_norm(diff, 2.0);
}

struct DuhamelResult {
    double residual = 0.0;
    bool support_warning = false;  // Dirichlet data not vanishing near the boundary
};

/// Defect of the variation-of-constants identity
///   G(t,s) f = f + int_s^t G(t,r) A(r) f dr
/// with the integral by composite trapezoid over the scheme's step times.
/// (The identity follows from d/dr G(t,r)f = -G(t,r) A(r) f.)  Expected
/// O(dt + h^2) on smooth data.
inline DuhamelResult duhamel_residual(const OperatorSpec& spec, const Grid& grid, BC bc,
                                      Flavor flavor, const Field& f, double s, double t,
                                      const EvolutionConfig& cfg = {}) {
    DuhamelResult out;
    if (t == s) return out;
    if (bc == BC::dirichlet) {
        // the formula assumes compactly supported data
        Field af = f;
        for (std::size_t n = 0; n < grid.size(); ++n) {
            const int node = static_cast<int>(n);
            bool near_boundary = !grid.is_interior(node);
            for (int i = 0; i < grid.d && !near_boundary; ++i)
                for (int dir = -1; dir <= 1 && !near_boundary; dir += 2) {
                    const int nb = grid.neighbor(node, i, dir);
                    if (nb >= 0 && !grid.is_interior(nb)) near_boundary = true;
                }
            if (near_boundary && af.node_norm(node) > 0.0) out.support_warning = true;
        }
    }
    detail::OperatorCache ops{spec, grid, bc, flavor, AssembleOptions{cfg.upwind_scalar}, {}};
    const auto ts = detail::step_times(s, t, cfg.dt);

    // Accumulate sum_k w_k G(t, r_k) A(r_k) f by propagating the partial sum:
    // acc(r_{k+1}) = G(r_{k+1}, r_k) acc(r_k) + w_{k+1} A(r_{k+1}) f.
    Field acc = ops.at(ts[0]).apply(f);
    {
        const double w0 = 0.5 * (ts[1] - ts[0]);
        for (auto& v : acc.v) v *= w0;
    }
    if (bc == BC::dirichlet) acc.zero_boundary();
    for (std::size_t k = 1; k < ts.size(); ++k) {
        const double dt = ts[k] - ts[k - 1];
        acc = step(ops.at(ts[k - 1]), ops.at(ts[k]), acc, dt, cfg.theta, cfg);
        const double wk = k + 1 < ts.size() ? 0.5 * (ts[k + 1] - ts[k - 1]) : 0.5 * dt;
        Field add = ops.at(ts[k]).apply(f);
        if (bc == BC::dirichlet) add.zero_boundary();
        for (std::size_t i = 0; i < acc.v.size(); ++i) acc.v[i] += wk * add.v[i];
    }

    const Field gf = evolve(spec, grid, bc, flavor, f, s, t, cfg).final_field();
    Field defect = gf;
    for (std::size_t i = 0; i < defect.v.size(); ++i) defect.v[i] -= f.v[i] + acc.v[i];
    out.residual = sup_norm(defect);
    return out;
}

}  // namespace parabolica
