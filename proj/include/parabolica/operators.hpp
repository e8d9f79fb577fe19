#pragma once

#include <Eigen/Sparse>
#include <cmath>
#include <vector>

#include "grid.hpp"
#include "spec.hpp"

namespace parabolica {

enum class BC { dirichlet, neumann };
enum class Flavor { vector_A, vector_A_star, scalar_A };

inline const char* to_string(BC bc) { return bc == BC::dirichlet ? "dirichlet" : "neumann"; }
inline const char* to_string(Flavor f) {
    switch (f) {
        case Flavor::vector_A: return "vector_A";
        case Flavor::vector_A_star: return "vector_A_star";
        case Flavor::scalar_A: return "scalar_A";
    }
    return "?";
}

struct AssembleOptions {
    bool upwind = false;  // first-order upwind drift for the scalar operator
};

/// Sparse action of A(t), A*(t) or the scalar comparison operator at a
/// fixed time, on the compact lattice stencil.
struct DiscreteOperator {
    const Grid* grid = nullptr;
    int m = 1;
    BC bc = BC::dirichlet;
    Flavor flavor = Flavor::vector_A;
    double time = 0.0;
    Eigen::SparseMatrix<double, Eigen::RowMajor> mat;
    bool symmetric_hint = false;
    double peclet = 0.0;
    bool peclet_warning = false;

    Field apply(const Field& f) const {
        Eigen::Map<const Eigen::VectorXd> x(f.v.data(), static_cast<Eigen::Index>(f.v.size()));
        Field out(*grid, m);
        Eigen::Map<Eigen::VectorXd> y(out.v.data(), static_cast<Eigen::Index>(out.v.size()));
        y = mat * x;
        return out;
    }
};

namespace detail {

/// Mirror a missing Neumann corner reference x + si e_i + sj e_j: reflect the
/// offending steps through the node, falling back to the node itself.
inline int mirror_corner(const Grid& g, int node, int i, int si, int j, int sj) {
    std::array<int, 3> c = g.coords[static_cast<std::size_t>(node)];
    std::array<int, 3> t = c;
    t[i] += si;
    t[j] -= sj;  // reflect j
    int n = g.node_at(t);
    if (n >= 0) return n;
    t = c;
    t[i] -= si;  // reflect i
    t[j] += sj;
    n = g.node_at(t);
    if (n >= 0) return n;
    return node;
}

struct BlockWriter {
    std::vector<Eigen::Triplet<double>>& trip;
    int m;
    BC bc;
    const Grid& g;

    /// Add coeff * M (m x m) coupling row-node -> col-node.  Dirichlet rows
    /// and columns touching the boundary ring are dropped: boundary values
    /// are pinned to zero, which keeps the diffusion block symmetric.
    void add(int row_node, int col_node, double coeff, const Mat* M) {
        if (col_node < 0) return;
        if (bc == BC::dirichlet && !g.is_interior(col_node)) return;
        if (M) {
            for (int r = 0; r < m; ++r)
                for (int c = 0; c < m; ++c) {
                    const double v = coeff * (*M)(r, c);
                    if (v != 0.0)
                        trip.emplace_back(row_node * m + r, col_node * m + c, v);
                }
        } else {
            for (int r = 0; r < m; ++r)
                trip.emplace_back(row_node * m + r, col_node * m + r, coeff);
        }
    }
};

}  // namespace detail

/// Second-order flux-form stencil for sum_ij D_i(q_ij D_j .), centered drift
/// (optionally upwinded for the scalar flavor), pointwise potential.
///
/// vector_A_star is assembled as the elementwise transpose of vector_A at the
/// same time, which is a consistent discretization of
///   A* v = div(Q D v) - sum_i B_i D_i v + (C - sum_k D_k B_k) v
/// and makes the discrete duality pairing exact up to solver tolerance.
inline DiscreteOperator assemble(const OperatorSpec& spec, double t, const Grid& grid, BC bc,
                                 Flavor flavor, const AssembleOptions& opt = {}) {
    if (flavor == Flavor::scalar_A) spec.require_decomposition();
    if (static_cast<int>(grid.d) != spec.d) throw GridError("assemble: grid dimension mismatch");

    DiscreteOperator op;
    op.grid = &grid;
    op.m = flavor == Flavor::scalar_A ? 1 : spec.m;
    op.bc = bc;
    op.flavor = flavor;
    op.time = t;

    const int m = op.m;
    const int d = spec.d;
    const double h = grid.h;
    const std::size_t nodes = grid.size();

    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(nodes * static_cast<std::size_t>((2 * d + 1 + 2 * d * (d - 1)) * m));
    detail::BlockWriter w{trip, m, bc, grid};

    bool has_drift = false;
    double peclet = 0.0;

    for (std::size_t ni = 0; ni < nodes; ++ni) {
        const int node = static_cast<int>(ni);
        if (bc == BC::dirichlet && !grid.is_interior(node)) continue;  // row stays zero
        const Vec x = grid.point(node);

        // -- diffusion, diagonal fluxes
        for (int i = 0; i < d; ++i) {
            for (int dir = -1; dir <= 1; dir += 2) {
                const int nb = grid.neighbor(node, i, dir);
                if (nb < 0) continue;  // Neumann: zero flux; Dirichlet rows are interior
                Vec xm = x;
                xm[static_cast<std::size_t>(i)] += dir * 0.5 * h;
                const double q = spec.eval_Q(t, xm)(i, i);
                const double c = q / (h * h);
                w.add(node, nb, c, nullptr);
                w.add(node, node, -c, nullptr);
            }
        }

        // -- diffusion, cross terms D_i(q_ij D_j .), i != j, corner stencil;
        //    the (i,j) and (j,i) contributions both appear, which keeps the
        //    assembled diffusion block symmetric
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) {
                if (i == j) continue;
                for (int si = -1; si <= 1; si += 2) {
                    Vec xi = x;
                    xi[static_cast<std::size_t>(i)] += si * h;
                    const double q = spec.eval_Q(t, xi)(i, j);
                    if (q == 0.0) continue;
                    for (int sj = -1; sj <= 1; sj += 2) {
                        auto c = grid.coords[ni];
                        c[i] += si;
                        c[j] += sj;
                        int corner = grid.node_at(c);
                        if (corner < 0) {
                            if (bc == BC::dirichlet) continue;  // value 0 outside the ball
                            corner = detail::mirror_corner(grid, node, i, si, j, sj);
                        }
                        w.add(node, corner, si * sj * q / (4.0 * h * h), nullptr);
                    }
                }
            }

        // -- drift
        const double lQ_here = lambda_min(spec.eval_Q(t, x), spec.tol.sym);
        for (int i = 0; i < d; ++i) {
            Mat Bi;
            double bscal = 0.0;
            double drift_mag = 0.0;
            if (flavor == Flavor::scalar_A) {
                bscal = spec.b[static_cast<std::size_t>(i)](t, x);
                drift_mag = std::abs(bscal);
                if (bscal != 0.0) has_drift = true;
            } else {
                Bi = spec.eval_B(t, x, i);
                drift_mag = std::abs(lambda_max(Bi, spec.tol.sym));
                drift_mag = std::max(drift_mag, std::abs(lambda_min(Bi, spec.tol.sym)));
                if (Bi.max_abs() != 0.0) has_drift = true;
            }
            peclet = std::max(peclet, drift_mag * h / (2.0 * lQ_here));
            if (drift_mag == 0.0) continue;

            int np = grid.neighbor(node, i, +1);
            int nm = grid.neighbor(node, i, -1);
            if (flavor == Flavor::scalar_A && opt.upwind) {
                // first-order upwind on the sign of b_i
                if (bscal > 0.0) {
                    if (np >= 0) {
                        w.add(node, np, bscal / h, nullptr);
                        w.add(node, node, -bscal / h, nullptr);
                    }
                } else if (bscal < 0.0) {
                    if (nm >= 0) {
                        w.add(node, node, bscal / h, nullptr);
                        w.add(node, nm, -bscal / h, nullptr);
                    }
                }
                continue;
            }
            // centered difference; Neumann mirrors the missing side through
            // the node (normal derivative zero), which cancels the term
            if (np < 0 && bc == BC::neumann) np = nm;
            if (nm < 0 && bc == BC::neumann) nm = np;
            if (np == nm) continue;
            const double c = 1.0 / (2.0 * h);
            if (flavor == Flavor::scalar_A) {
                if (np >= 0) w.add(node, np, bscal * c, nullptr);
                if (nm >= 0) w.add(node, nm, -bscal * c, nullptr);
            } else {
                if (np >= 0) w.add(node, np, c, &Bi);
                if (nm >= 0) w.add(node, nm, -c, &Bi);
            }
        }

        // -- potential (vector flavors only)
        if (flavor != Flavor::scalar_A) {
            const Mat C = spec.eval_C(t, x);
            if (C.max_abs() != 0.0) w.add(node, node, 1.0, &C);
        }
    }

    const Eigen::Index n = static_cast<Eigen::Index>(nodes) * m;
    op.mat.resize(n, n);
    op.mat.setFromTriplets(trip.begin(), trip.end());
    op.peclet = peclet;
    op.peclet_warning = peclet > 1.0;
    // Neumann corner mirrors (d > 1) are not symmetry-preserving
    op.symmetric_hint = !has_drift && (bc == BC::dirichlet || d == 1);

    if (flavor == Flavor::vector_A_star) {
        Eigen::SparseMatrix<double, Eigen::RowMajor> tr = op.mat.transpose();
        op.mat.swap(tr);
    }
    return op;
}

}  // namespace parabolica
