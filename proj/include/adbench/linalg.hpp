#pragma once

// Dense row-major matrix plus the few kernels the project needs: Cholesky,
// triangular solves, Gram products. No external BLAS; sizes here are desk
// scale (n up to a few thousand).

#include <cassert>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "adbench/errors.hpp"

namespace adbench {

struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;  // row-major

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0)
        : rows(r), cols(c), data(r * c, fill) {}

    double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

    std::span<const double> row(std::size_t i) const {
        return {data.data() + i * cols, cols};
    }
    std::span<double> row(std::size_t i) {
        return {data.data() + i * cols, cols};
    }

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    bool all_finite() const {
        for (double v : data)
            if (!std::isfinite(v)) return false;
        return true;
    }
};

inline double dot(std::span<const double> a, std::span<const double> b) {
    assert(a.size() == b.size());
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
    assert(a.size() == b.size());
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

inline double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

inline std::vector<double> matvec(const Matrix& a, std::span<const double> x) {
    assert(a.cols == x.size());
    std::vector<double> y(a.rows, 0.0);
    for (std::size_t i = 0; i < a.rows; ++i) y[i] = dot(a.row(i), x);
    return y;
}

// XᵀX, p×p symmetric
inline Matrix gram(const Matrix& x) {
    Matrix g(x.cols, x.cols);
    for (std::size_t r = 0; r < x.rows; ++r) {
        const double* row = x.data.data() + r * x.cols;
        for (std::size_t i = 0; i < x.cols; ++i) {
            const double xi = row[i];
            if (xi == 0.0) continue;
            double* grow = g.data.data() + i * x.cols;
            for (std::size_t j = i; j < x.cols; ++j) grow[j] += xi * row[j];
        }
    }
    for (std::size_t i = 0; i < x.cols; ++i)
        for (std::size_t j = 0; j < i; ++j) g(i, j) = g(j, i);
    return g;
}

// In-place lower Cholesky A = LLᵀ (upper triangle left untouched).
// Returns false on a non-positive pivot. Blocked right-looking form: the
// trailing update works on contiguous panel-width row segments, which keeps
// the O(n³) part in vectorizable dot products (the GPR grid search lives on
// this kernel).
inline bool cholesky_inplace(Matrix& a) {
    assert(a.rows == a.cols);
    const std::size_t n = a.rows;
    constexpr std::size_t kPanel = 64;
    double* d = a.data.data();
    for (std::size_t c0 = 0; c0 < n; c0 += kPanel) {
        const std::size_t cb = std::min(kPanel, n - c0);
        const std::size_t c1 = c0 + cb;
        // diagonal block, unblocked (earlier panels already applied)
        for (std::size_t j = c0; j < c1; ++j) {
            double* rj = d + j * n;
            double diag = rj[j];
            for (std::size_t k = c0; k < j; ++k) diag -= rj[k] * rj[k];
            if (!(diag > 0.0) || !std::isfinite(diag)) return false;
            const double ljj = std::sqrt(diag);
            rj[j] = ljj;
            const double inv = 1.0 / ljj;
            for (std::size_t i = j + 1; i < c1; ++i) {
                double* ri = d + i * n;
                double s = ri[j];
                for (std::size_t k = c0; k < j; ++k) s -= ri[k] * rj[k];
                ri[j] = s * inv;
            }
        }
        // panel solve for the rows below the block
        for (std::size_t i = c1; i < n; ++i) {
            double* ri = d + i * n;
            for (std::size_t j = c0; j < c1; ++j) {
                const double* rj = d + j * n;
                double s = ri[j];
                for (std::size_t k = c0; k < j; ++k) s -= ri[k] * rj[k];
                ri[j] = s / rj[j];
            }
        }
        // trailing update: A[i][j] −= Σ_panel L[i][k]·L[j][k] (lower half)
        for (std::size_t i = c1; i < n; ++i) {
            const double* ri = d + i * n + c0;
            double* rowi = d + i * n;
            for (std::size_t j = c1; j <= i; ++j) {
                const double* rj = d + j * n + c0;
                double s = 0.0;
                for (std::size_t k = 0; k < cb; ++k) s += ri[k] * rj[k];
                rowi[j] -= s;
            }
        }
    }
    return true;
}

// Solve L y = b (L lower from cholesky_inplace)
inline std::vector<double> forward_subst(const Matrix& l, std::span<const double> b) {
    const std::size_t n = l.rows;
    assert(b.size() == n);
    std::vector<double> y(n);
    const double* d = l.data.data();
    for (std::size_t i = 0; i < n; ++i) {
        const double* ri = d + i * n;
        double s = b[i];
        for (std::size_t k = 0; k < i; ++k) s -= ri[k] * y[k];
        y[i] = s / ri[i];
    }
    return y;
}

// Solve Lᵀ x = y
inline std::vector<double> back_subst_transposed(const Matrix& l, std::span<const double> y) {
    const std::size_t n = l.rows;
    assert(y.size() == n);
    std::vector<double> x(y.begin(), y.end());
    const double* d = l.data.data();
    for (std::size_t i = n; i-- > 0;) {
        double s = x[i];
        for (std::size_t k = i + 1; k < n; ++k) s -= d[k * n + i] * x[k];
        x[i] = s / d[i * n + i];
    }
    return x;
}

// Solve (LLᵀ) x = b
inline std::vector<double> cholesky_solve(const Matrix& l, std::span<const double> b) {
    return back_subst_transposed(l, forward_subst(l, b));
}

// Cholesky factor of a symmetric matrix, escalating a diagonal jitter from
// jitter0 by factors of 10 up to jitter_max when the plain factorization
// fails. Throws CholeskyFailureError past the cap. jitter_used reports the
// amount actually added (0 when none was needed).
inline Matrix cholesky_with_jitter(const Matrix& a, double& jitter_used,
                                   double jitter0 = 1e-10, double jitter_max = 1e-4) {
    Matrix l = a;
    if (cholesky_inplace(l)) {
        jitter_used = 0.0;
        return l;
    }
    for (double jitter = jitter0; jitter <= jitter_max * (1.0 + 1e-12); jitter *= 10.0) {
        l = a;
        for (std::size_t i = 0; i < l.rows; ++i) l(i, i) += jitter;
        if (cholesky_inplace(l)) {
            jitter_used = jitter;
            return l;
        }
    }
    throw CholeskyFailureError("Cholesky failed after jitter escalation to 1e-4");
}

}  // namespace adbench
