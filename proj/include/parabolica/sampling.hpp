#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "dense.hpp"

namespace parabolica {

/// Cubic sample lattice [-radius, radius]^d with per_dim points per axis.
/// Enlarging the radius at fixed pitch keeps earlier points, so verdicts
/// are monotone under box growth.
struct SampleBox {
    double radius = 6.0;
    int per_dim = 21;  // odd, so the origin is sampled

    std::vector<Vec> points(int d) const {
        if (per_dim < 1) throw std::invalid_argument("SampleBox: per_dim must be >= 1");
        std::vector<Vec> pts;
        const int n = per_dim;
        std::vector<int> idx(static_cast<std::size_t>(d), 0);
        const double step = n > 1 ? 2.0 * radius / (n - 1) : 0.0;
        while (true) {
            Vec x(static_cast<std::size_t>(d));
            for (int k = 0; k < d; ++k) x[k] = n > 1 ? -radius + idx[k] * step : 0.0;
            pts.push_back(x);
            int k = 0;
            while (k < d && ++idx[k] == n) idx[k++] = 0;
            if (k == d) break;
        }
        return pts;
    }
};

struct TimeWindow {
    double lo = 0.0;
    double hi = 1.0;
    int count = 3;

    std::vector<double> points() const {
        std::vector<double> ts;
        if (count <= 1 || hi <= lo) {
            ts.push_back(lo);
            return ts;
        }
        for (int k = 0; k < count; ++k) ts.push_back(lo + (hi - lo) * k / (count - 1));
        return ts;
    }
};

struct SamplePlan {
    SampleBox box;
    TimeWindow times;
};

enum class SphereScheme { pm_one, full_circle, fibonacci, random_refined };

/// Discretization of the unit sphere of directions eta.  Antipodally closed:
/// eta in the set implies -eta in the set.
struct SphereSample {
    std::vector<Vec> directions;
    SphereScheme scheme = SphereScheme::full_circle;

    static SphereSample standard(int m, std::uint64_t seed = 42) {
        SphereSample s;
        if (m == 1) {
            s.scheme = SphereScheme::pm_one;
            s.directions = {Vec{1.0}, Vec{-1.0}};
        } else if (m == 2) {
            s.scheme = SphereScheme::full_circle;
            const int n = 720;
            for (int k = 0; k < n; ++k) {
                const double th = 2.0 * M_PI * k / n;
                s.directions.push_back(Vec{std::cos(th), std::sin(th)});
            }
        } else if (m == 3) {
            s.scheme = SphereScheme::fibonacci;
            // 500-point Fibonacci hemisphere construction plus antipodes
            const int n = 500;
            const double golden = (1.0 + std::sqrt(5.0)) / 2.0;
            for (int k = 0; k < n; ++k) {
                const double z = 1.0 - (k + 0.5) / n;  // (0, 1]: upper half
                const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
                const double th = 2.0 * M_PI * k / golden;
                Vec v{r * std::cos(th), r * std::sin(th), z};
                s.directions.push_back(v);
                s.directions.push_back(-1.0 * v);
            }
        } else {
            s.scheme = SphereScheme::random_refined;
            std::mt19937_64 rng(seed);
            std::normal_distribution<double> gauss(0.0, 1.0);
            const int n = 1000;
            for (int k = 0; k < n; ++k) {
                Vec v(static_cast<std::size_t>(m));
                double nrm = 0.0;
                do {
                    for (int j = 0; j < m; ++j) v[j] = gauss(rng);
                    nrm = v.norm();
                } while (nrm < 1e-8);
                v *= 1.0 / nrm;
                s.directions.push_back(v);
                s.directions.push_back(-1.0 * v);
            }
        }
        return s;
    }

    /// Antipodally closed cloud of perturbations around a worst direction,
    /// used to tighten the discretization gap for m > 3.
    static std::vector<Vec> refine_around(const Vec& eta, std::uint64_t seed, int count = 100,
                                          double sigma = 0.1) {
        std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ull);
        std::normal_distribution<double> gauss(0.0, sigma);
        std::vector<Vec> out;
        for (int k = 0; k < count; ++k) {
            Vec v = eta;
            for (std::size_t j = 0; j < v.size(); ++j) v[j] += gauss(rng);
            const double nrm = v.norm();
            if (nrm < 1e-8) continue;
            v *= 1.0 / nrm;
            out.push_back(v);
            out.push_back(-1.0 * v);
        }
        return out;
    }
};

}  // namespace parabolica
