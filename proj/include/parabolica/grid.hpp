#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "dense.hpp"

namespace parabolica {

struct GridError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Masked-ball lattice: the points of h Z^d with |x| <= radius, in
/// deterministic lexicographic order.  A node is interior when all 2d
/// lattice neighbors are inside the ball.
struct Grid {
    int d = 1;
    double radius = 1.0;
    double h = 0.5;
    std::vector<std::array<int, 3>> coords;  // integer lattice coordinates
    std::vector<std::uint8_t> interior;
    std::vector<int> index_map;  // dense (2K+1)^d lookup, -1 outside
    int K = 0;                   // lattice extent per axis
    std::vector<int> stride;

    static Grid build(int d, double radius, double h, std::size_t max_nodes = 8'000'000) {
        if (d < 1 || d > 3) throw GridError("grid supports d in {1,2,3}");
        if (h <= 0.0) throw GridError("grid spacing h must be positive");
        if (radius < h) throw GridError("grid radius must be at least h");
        Grid g;
        g.d = d;
        g.radius = radius;
        g.h = h;
        g.K = static_cast<int>(std::floor(radius / h + 1e-12));
        const long side = 2L * g.K + 1;
        double approx = 1.0;
        for (int k = 0; k < d; ++k) approx *= static_cast<double>(side);
        if (approx > 64.0 * static_cast<double>(max_nodes)) {
            const double h_ok =
                2.0 * radius / std::pow(static_cast<double>(max_nodes), 1.0 / d);
            throw GridError("node count would exceed the memory budget; try h >= " +
                            std::to_string(h_ok));
        }
        g.stride.assign(3, 0);
        g.stride[0] = 1;
        if (d > 1) g.stride[1] = static_cast<int>(side);
        if (d > 2) g.stride[2] = static_cast<int>(side * side);
        long cells = 1;
        for (int k = 0; k < d; ++k) cells *= side;
        g.index_map.assign(static_cast<std::size_t>(cells), -1);

        const double r2max = (radius / h) * (radius / h) * (1.0 + 1e-14);
        std::array<int, 3> c{0, 0, 0};
        std::function<void(int)> rec = [&](int dim) {
            if (dim == d) {
                double r2 = 0.0;
                for (int k = 0; k < d; ++k) r2 += static_cast<double>(c[k]) * c[k];
                if (r2 <= r2max) {
                    g.index_map[g.cell_of(c)] = static_cast<int>(g.coords.size());
                    g.coords.push_back(c);
                }
                return;
            }
            for (int v = -g.K; v <= g.K; ++v) {
                c[dim] = v;
                rec(dim + 1);
            }
        };
        rec(0);
        if (g.coords.size() > max_nodes)
            throw GridError("node count " + std::to_string(g.coords.size()) +
                            " exceeds the memory budget; increase h");

        g.interior.assign(g.coords.size(), 1);
        for (std::size_t i = 0; i < g.coords.size(); ++i)
            for (int k = 0; k < d && g.interior[i]; ++k)
                if (g.neighbor(static_cast<int>(i), k, +1) < 0 ||
                    g.neighbor(static_cast<int>(i), k, -1) < 0)
                    g.interior[i] = 0;
        return g;
    }

    std::size_t size() const { return coords.size(); }
    double cell_volume() const { return std::pow(h, d); }

    std::size_t cell_of(const std::array<int, 3>& c) const {
        std::size_t idx = 0;
        for (int k = 0; k < d; ++k) idx += static_cast<std::size_t>(c[k] + K) * stride[k];
        return idx;
    }

    int node_at(const std::array<int, 3>& c) const {
        for (int k = 0; k < d; ++k)
            if (c[k] < -K || c[k] > K) return -1;
        return index_map[cell_of(c)];
    }

    int neighbor(int node, int dim, int dir) const {
        std::array<int, 3> c = coords[static_cast<std::size_t>(node)];
        c[dim] += dir;
        return node_at(c);
    }

    Vec point(int node) const {
        Vec x(static_cast<std::size_t>(d));
        for (int k = 0; k < d; ++k) x[k] = coords[static_cast<std::size_t>(node)][k] * h;
        return x;
    }

    bool is_interior(int node) const { return interior[static_cast<std::size_t>(node)] != 0; }

    std::size_t boundary_count() const {
        std::size_t n = 0;
        for (auto b : interior)
            if (!b) ++n;
        return n;
    }
};

/// m-component nodal function on a Grid.
struct Field {
    const Grid* grid = nullptr;
    int m = 1;
    std::vector<double> v;  // node-major: v[node*m + comp]

    Field() = default;
    Field(const Grid& g, int comps) : grid(&g), m(comps), v(g.size() * comps, 0.0) {}

    double& at(int node, int comp) { return v[static_cast<std::size_t>(node) * m + comp]; }
    double at(int node, int comp) const { return v[static_cast<std::size_t>(node) * m + comp]; }

    double node_norm(int node) const {
        double s = 0.0;
        for (int k = 0; k < m; ++k) s += at(node, k) * at(node, k);
        return std::sqrt(s);
    }

    /// Populate from an analytic map x -> m values.
    static Field sample(const Grid& g, int comps, const std::function<Vec(const Vec&)>& f) {
        Field out(g, comps);
        for (std::size_t n = 0; n < g.size(); ++n) {
            const Vec val = f(g.point(static_cast<int>(n)));
            for (int k = 0; k < comps; ++k) out.at(static_cast<int>(n), k) = val[k];
        }
        return out;
    }

    void zero_boundary() {
        for (std::size_t n = 0; n < grid->size(); ++n)
            if (!grid->is_interior(static_cast<int>(n)))
                for (int k = 0; k < m; ++k) at(static_cast<int>(n), k) = 0.0;
    }

    bool vanishes_on_boundary(double tol = 0.0) const {
        for (std::size_t n = 0; n < grid->size(); ++n)
            if (!grid->is_interior(static_cast<int>(n)))
                for (int k = 0; k < m; ++k)
                    if (std::abs(at(static_cast<int>(n), k)) > tol) return false;
        return true;
    }
};

/// Discrete L^p norm: (sum_nodes h^d |f(node)|^p)^(1/p), Euclidean on R^m.
inline double lp_norm(const Field& f, double p) {
    if (p < 1.0) throw std::invalid_argument("lp_norm: p must be >= 1");
    const double vol = f.grid->cell_volume();
    if (std::isinf(p)) {
        double s = 0.0;
        for (std::size_t n = 0; n < f.grid->size(); ++n)
            s = std::max(s, f.node_norm(static_cast<int>(n)));
        return s;
    }
    double s = 0.0;
    for (std::size_t n = 0; n < f.grid->size(); ++n)
        s += vol * std::pow(f.node_norm(static_cast<int>(n)), p);
    return std::pow(s, 1.0 / p);
}

inline double sup_norm(const Field& f) {
    return lp_norm(f, std::numeric_limits<double>::infinity());
}

inline double l2_inner(const Field& a, const Field& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.v.size(); ++i) s += a.v[i] * b.v[i];
    return s * a.grid->cell_volume();
}

/// Centered differences at interior nodes, one-sided at the boundary.
/// Output layout: component i*m + k holds D_i f_k.
inline Field discrete_gradient(const Field& f) {
    const Grid& g = *f.grid;
    Field out(g, g.d * f.m);
    for (std::size_t n = 0; n < g.size(); ++n) {
        const int node = static_cast<int>(n);
        for (int i = 0; i < g.d; ++i) {
            const int np = g.neighbor(node, i, +1);
            const int nm = g.neighbor(node, i, -1);
            for (int k = 0; k < f.m; ++k) {
                double val = 0.0;
                if (np >= 0 && nm >= 0) val = (f.at(np, k) - f.at(nm, k)) / (2.0 * g.h);
                else if (np >= 0) val = (f.at(np, k) - f.at(node, k)) / g.h;
                else if (nm >= 0) val = (f.at(node, k) - f.at(nm, k)) / g.h;
                out.at(node, i * f.m + k) = val;
            }
        }
    }
    return out;
}

// --- field import/export -----------------------------------------------------

inline void write_field_csv(const Field& f, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw GridError("cannot open " + path + " for writing");
    const Grid& g = *f.grid;
    os << "# d=" << g.d << " m=" << f.m << " radius=" << g.radius << " h=" << g.h << "\n";
    os.precision(17);
    for (std::size_t n = 0; n < g.size(); ++n) {
        const Vec x = g.point(static_cast<int>(n));
        for (int k = 0; k < g.d; ++k) os << x[k] << (k + 1 < g.d || f.m > 0 ? "," : "");
        for (int k = 0; k < f.m; ++k)
            os << f.at(static_cast<int>(n), k) << (k + 1 < f.m ? "," : "");
        os << "\n";
    }
}

constexpr std::uint32_t kFieldMagic = 0x50424644;  // "PBFD"

inline void write_field_binary(const Field& f, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw GridError("cannot open " + path + " for writing");
    const Grid& g = *f.grid;
    const std::uint32_t magic = kFieldMagic;
    const std::int32_t d = g.d, m = f.m;
    const double radius = g.radius, h = g.h;
    const std::uint64_t count = g.size();
    os.write(reinterpret_cast<const char*>(&magic), sizeof magic);
    os.write(reinterpret_cast<const char*>(&d), sizeof d);
    os.write(reinterpret_cast<const char*>(&m), sizeof m);
    os.write(reinterpret_cast<const char*>(&radius), sizeof radius);
    os.write(reinterpret_cast<const char*>(&h), sizeof h);
    os.write(reinterpret_cast<const char*>(&count), sizeof count);
    os.write(reinterpret_cast<const char*>(f.v.data()),
             static_cast<std::streamsize>(f.v.size() * sizeof(double)));
}

inline Field read_field_binary(const Grid& g, const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw GridError("cannot open " + path);
    std::uint32_t magic = 0;
    std::int32_t d = 0, m = 0;
    double radius = 0, h = 0;
    std::uint64_t count = 0;
    is.read(reinterpret_cast<char*>(&magic), sizeof magic);
    is.read(reinterpret_cast<char*>(&d), sizeof d);
    is.read(reinterpret_cast<char*>(&m), sizeof m);
    is.read(reinterpret_cast<char*>(&radius), sizeof radius);
    is.read(reinterpret_cast<char*>(&h), sizeof h);
    is.read(reinterpret_cast<char*>(&count), sizeof count);
    if (!is || magic != kFieldMagic) throw GridError(path + ": not a field dump");
    if (d != g.d || radius != g.radius || h != g.h || count != g.size())
        throw GridError(path + ": grid mismatch");
    Field f(g, m);
    is.read(reinterpret_cast<char*>(f.v.data()),
            static_cast<std::streamsize>(f.v.size() * sizeof(double)));
    if (!is) throw GridError(path + ": truncated payload");
    return f;
}

/// Smooth compactly supported bump: amp * exp(1 - 1/(1 - |x-c|^2/R^2)) inside
/// |x - c| < R, identically zero outside.
inline Field bump_field(const Grid& g, int m, const Vec& center, double support_radius,
                        const std::vector<double>& amplitudes) {
    Field f(g, m);
    for (std::size_t n = 0; n < g.size(); ++n) {
        Vec x = g.point(static_cast<int>(n));
        x -= center;
        const double q = x.norm2() / (support_radius * support_radius);
        if (q < 1.0) {
            const double w = std::exp(1.0 - 1.0 / (1.0 - q));
            for (int k = 0; k < m; ++k) f.at(static_cast<int>(n), k) = amplitudes[k] * w;
        }
    }
    return f;
}

}  // namespace parabolica
