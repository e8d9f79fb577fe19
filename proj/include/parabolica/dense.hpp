#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace parabolica {

/// Small dense vector used for points, directions and coefficient rows.
/// Sizes stay tiny (d, m <= 8), so everything lives in a std::vector.
struct Vec {
    std::vector<double> a;

    Vec() = default;
    explicit Vec(std::size_t n, double fill = 0.0) : a(n, fill) {}
    Vec(std::initializer_list<double> init) : a(init) {}

    std::size_t size() const { return a.size(); }
    double& operator[](std::size_t i) { return a[i]; }
    double operator[](std::size_t i) const { return a[i]; }

    double dot(const Vec& o) const {
        double s = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * o.a[i];
        return s;
    }
    double norm2() const { return dot(*this); }
    double norm() const { return std::sqrt(norm2()); }

    Vec& operator+=(const Vec& o) {
        for (std::size_t i = 0; i < a.size(); ++i) a[i] += o.a[i];
        return *this;
    }
    Vec& operator-=(const Vec& o) {
        for (std::size_t i = 0; i < a.size(); ++i) a[i] -= o.a[i];
        return *this;
    }
    Vec& operator*=(double c) {
        for (double& v : a) v *= c;
        return *this;
    }
    friend Vec operator+(Vec l, const Vec& r) { return l += r; }
    friend Vec operator-(Vec l, const Vec& r) { return l -= r; }
    friend Vec operator*(double c, Vec v) { return v *= c; }
};

/// Small dense row-major matrix.
struct Mat {
    std::size_t rows = 0, cols = 0;
    std::vector<double> a;

    Mat() = default;
    Mat(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), a(r * c, fill) {}

    static Mat identity(std::size_t n) {
        Mat m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    double& operator()(std::size_t i, std::size_t j) { return a[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return a[i * cols + j]; }

    bool square() const { return rows == cols; }

    Vec apply(const Vec& v) const {
        Vec r(rows);
        for (std::size_t i = 0; i < rows; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < cols; ++j) s += (*this)(i, j) * v[j];
            r[i] = s;
        }
        return r;
    }

    Mat transposed() const {
        Mat t(cols, rows);
        for (std::size_t i = 0; i < rows; ++i)
            for (std::size_t j = 0; j < cols; ++j) t(j, i) = (*this)(i, j);
        return t;
    }

    Mat& operator+=(const Mat& o) {
        for (std::size_t i = 0; i < a.size(); ++i) a[i] += o.a[i];
        return *this;
    }
    Mat& operator-=(const Mat& o) {
        for (std::size_t i = 0; i < a.size(); ++i) a[i] -= o.a[i];
        return *this;
    }
    Mat& operator*=(double c) {
        for (double& v : a) v *= c;
        return *this;
    }
    friend Mat operator+(Mat l, const Mat& r) { return l += r; }
    friend Mat operator-(Mat l, const Mat& r) { return l -= r; }
    friend Mat operator*(double c, Mat m) { return m *= c; }

    double frobenius_norm() const {
        double s = 0.0;
        for (double v : a) s += v * v;
        return std::sqrt(s);
    }

    double max_abs() const {
        double s = 0.0;
        for (double v : a) s = std::max(s, std::abs(v));
        return s;
    }

    double trace() const {
        double s = 0.0;
        for (std::size_t i = 0; i < rows; ++i) s += (*this)(i, i);
        return s;
    }
};

inline double max_asymmetry(const Mat& m) {
    double s = 0.0;
    for (std::size_t i = 0; i < m.rows; ++i)
        for (std::size_t j = i + 1; j < m.cols; ++j) s = std::max(s, std::abs(m(i, j) - m(j, i)));
    return s;
}

struct NonSymmetricError : std::runtime_error {
    double asymmetry;
    explicit NonSymmetricError(double asym)
        : std::runtime_error("matrix is not symmetric, max |M_ij - M_ji| = " + std::to_string(asym)),
          asymmetry(asym) {}
};

struct SingularMatrixError : std::runtime_error {
    double lambda_min;
    explicit SingularMatrixError(double lmin)
        : std::runtime_error("matrix is singular or indefinite, lambda_min = " + std::to_string(lmin)),
          lambda_min(lmin) {}
};

/// All eigenvalues of a small symmetric matrix by cyclic Jacobi rotations.
/// Deterministic sweep order; ascending result.
inline std::vector<double> sym_eigenvalues(Mat m, double tau_sym = 1e-12) {
    if (!m.square()) throw std::invalid_argument("sym_eigenvalues: matrix must be square");
    const double asym = max_asymmetry(m);
    const double scale = std::max(1.0, m.max_abs());
    if (asym > tau_sym * scale) throw NonSymmetricError(asym);
    const std::size_t n = m.rows;
    // symmetrize roundoff before rotating
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double v = 0.5 * (m(i, j) + m(j, i));
            m(i, j) = m(j, i) = v;
        }
    for (int sweep = 0; sweep < 64; ++sweep) {
        double off = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) off += m(i, j) * m(i, j);
        if (off <= 1e-300 || std::sqrt(off) < 1e-15 * scale) break;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                if (std::abs(m(p, q)) < 1e-18 * scale) continue;
                const double theta = (m(q, q) - m(p, p)) / (2.0 * m(p, q));
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double mkp = m(k, p), mkq = m(k, q);
                    m(k, p) = c * mkp - s * mkq;
                    m(k, q) = s * mkp + c * mkq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double mpk = m(p, k), mqk = m(q, k);
                    m(p, k) = c * mpk - s * mqk;
                    m(q, k) = s * mpk + c * mqk;
                }
            }
        }
    }
    std::vector<double> ev(n);
    for (std::size_t i = 0; i < n; ++i) ev[i] = m(i, i);
    std::sort(ev.begin(), ev.end());
    return ev;
}

struct EigenExtremes {
    double min, max;
};

/// Extreme eigenvalues of a symmetric matrix.  Rejects inputs whose
/// asymmetry exceeds tau_sym (relative to the matrix magnitude).
inline EigenExtremes lambda_extremes(const Mat& m, double tau_sym = 1e-12) {
    auto ev = sym_eigenvalues(m, tau_sym);
    return {ev.front(), ev.back()};
}

inline double lambda_min(const Mat& m, double tau_sym = 1e-12) { return lambda_extremes(m, tau_sym).min; }
inline double lambda_max(const Mat& m, double tau_sym = 1e-12) { return lambda_extremes(m, tau_sym).max; }

/// Solve M y = v for a small square M by Gaussian elimination with
/// partial pivoting.  Throws SingularMatrixError on rank loss.
inline Vec solve_dense(Mat m, Vec v) {
    if (!m.square() || m.rows != v.size()) throw std::invalid_argument("solve_dense: size mismatch");
    const std::size_t n = m.rows;
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        for (std::size_t i = k + 1; i < n; ++i)
            if (std::abs(m(i, k)) > std::abs(m(piv, k))) piv = i;
        if (std::abs(m(piv, k)) < 1e-300) throw SingularMatrixError(0.0);
        if (piv != k) {
            for (std::size_t j = 0; j < n; ++j) std::swap(m(k, j), m(piv, j));
            std::swap(v[k], v[piv]);
        }
        for (std::size_t i = k + 1; i < n; ++i) {
            const double f = m(i, k) / m(k, k);
            for (std::size_t j = k; j < n; ++j) m(i, j) -= f * m(k, j);
            v[i] -= f * v[k];
        }
    }
    Vec y(n);
    for (std::size_t i = n; i-- > 0;) {
        double s = v[i];
        for (std::size_t j = i + 1; j < n; ++j) s -= m(i, j) * y[j];
        y[i] = s / m(i, i);
    }
    return y;
}

/// Inverse of a symmetric positive definite matrix; throws with the
/// offending lambda_min when the matrix is not positive definite.
inline Mat invert_spd(const Mat& m, double tau_sym = 1e-12) {
    const double lmin = lambda_min(m, tau_sym);
    if (lmin <= 0.0) throw SingularMatrixError(lmin);
    const std::size_t n = m.rows;
    Mat inv(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        Vec e(n);
        e[j] = 1.0;
        Vec col = solve_dense(m, e);
        for (std::size_t i = 0; i < n; ++i) inv(i, j) = col[i];
    }
    // clean roundoff asymmetry
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double v = 0.5 * (inv(i, j) + inv(j, i));
            inv(i, j) = inv(j, i) = v;
        }
    return inv;
}

}  // namespace parabolica
