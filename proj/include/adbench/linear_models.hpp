#pragma once

// Linear family: ordinary least squares, ridge, and coordinate-descent lasso.
// All three center features and target, so the intercept is never penalized
// and comes back as ȳ − x̄ᵀβ.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "adbench/regressor.hpp"

namespace adbench {

namespace detail {

struct CenteredDesign {
    Matrix xc;                      // centered features
    std::vector<double> yc;         // centered target
    std::vector<double> x_mean;
    double y_mean = 0.0;
};

inline CenteredDesign center(const Dataset& train) {
    CenteredDesign d;
    const std::size_t n = train.n_rows(), p = train.n_features();
    d.x_mean.assign(p, 0.0);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < p; ++c) d.x_mean[c] += train.features(r, c);
    for (auto& m : d.x_mean) m /= static_cast<double>(n);
    d.y_mean = mean(train.target);
    d.xc = Matrix(n, p);
    d.yc.resize(n);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < p; ++c) d.xc(r, c) = train.features(r, c) - d.x_mean[c];
        d.yc[r] = train.target[r] - d.y_mean;
    }
    return d;
}

}  // namespace detail

// Shared predict for the linear family.
class LinearBase : public Regressor {
public:
    const std::vector<double>& coefficients() const { return coef_; }
    double intercept() const { return intercept_; }

protected:
    std::vector<double> do_predict(const Matrix& x) const override {
        std::vector<double> y(x.rows, intercept_);
        for (std::size_t r = 0; r < x.rows; ++r) y[r] += dot(x.row(r), coef_);
        return y;
    }

    std::vector<double> coef_;
    double intercept_ = 0.0;

    friend class ModelReader;
    friend class ModelWriter;
};

// OLS via the normal equations; a rank-deficient Gram matrix is an error
// rather than silently regularized.
class LinearRegression : public LinearBase {
public:
    std::string kind() const override { return "linear"; }

protected:
    void do_fit(const Dataset& train) override {
        const auto d = detail::center(train);
        Matrix g = gram(d.xc);
        if (!cholesky_inplace(g))
            throw SingularDesignError("linear: normal equations are singular; use ridge");
        std::vector<double> xty(train.n_features(), 0.0);
        for (std::size_t r = 0; r < d.xc.rows; ++r)
            for (std::size_t c = 0; c < d.xc.cols; ++c) xty[c] += d.xc(r, c) * d.yc[r];
        coef_ = cholesky_solve(g, xty);
        intercept_ = d.y_mean - dot(d.x_mean, coef_);
    }
};

// Ridge: minimizes ‖y − Xβ‖² + λ‖β‖² on centered data.
class RidgeRegression : public LinearBase {
public:
    explicit RidgeRegression(double lambda = 1.0) : lambda_(lambda) {}
    std::string kind() const override { return "ridge"; }
    double lambda() const { return lambda_; }

protected:
    void do_fit(const Dataset& train) override {
        const auto d = detail::center(train);
        Matrix g = gram(d.xc);
        for (std::size_t i = 0; i < g.rows; ++i) g(i, i) += lambda_;
        if (!cholesky_inplace(g))
            throw SingularDesignError("ridge: Gram + λI not positive definite");
        std::vector<double> xty(train.n_features(), 0.0);
        for (std::size_t r = 0; r < d.xc.rows; ++r)
            for (std::size_t c = 0; c < d.xc.cols; ++c) xty[c] += d.xc(r, c) * d.yc[r];
        coef_ = cholesky_solve(g, xty);
        intercept_ = d.y_mean - dot(d.x_mean, coef_);
    }

private:
    double lambda_;
    friend class ModelWriter;
    friend class ModelReader;
};

// Lasso: minimizes (1/2n)‖y − Xβ‖² + λ‖β‖₁ by cyclic coordinate descent with
// soft thresholding. All coefficients are exactly 0 once
// λ ≥ λ_max = max_j |xⱼᵀ(y − ȳ)| / n.
class LassoRegression : public LinearBase {
public:
    explicit LassoRegression(double lambda = 0.1, int max_sweeps = 1000, double tol = 1e-10)
        : lambda_(lambda), max_sweeps_(max_sweeps), tol_(tol) {}
    std::string kind() const override { return "lasso"; }
    double lambda() const { return lambda_; }
    const std::vector<double>& loss_trace() const override { return trace_; }

    double objective(const Matrix& xc, std::span<const double> yc,
                     std::span<const double> beta) const {
        const std::size_t n = xc.rows;
        double rss = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
            const double e = yc[r] - dot(xc.row(r), beta);
            rss += e * e;
        }
        double l1 = 0.0;
        for (double b : beta) l1 += std::abs(b);
        return rss / (2.0 * static_cast<double>(n)) + lambda_ * l1;
    }

protected:
    void do_fit(const Dataset& train) override {
        const auto d = detail::center(train);
        const std::size_t n = d.xc.rows, p = d.xc.cols;
        const auto nd = static_cast<double>(n);

        std::vector<double> col_sq(p, 0.0);  // (1/n)‖xⱼ‖²
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t c = 0; c < p; ++c) col_sq[c] += d.xc(r, c) * d.xc(r, c);
        for (auto& v : col_sq) v /= nd;

        std::vector<double> beta(p, 0.0);
        std::vector<double> resid = d.yc;  // y − Xβ, maintained incrementally
        trace_.clear();
        trace_.push_back(objective(d.xc, d.yc, beta));

        bool converged = false;
        for (int sweep = 0; sweep < max_sweeps_; ++sweep) {
            double max_delta = 0.0;
            for (std::size_t j = 0; j < p; ++j) {
                if (col_sq[j] == 0.0) continue;  // constant column stays at 0
                double rho = 0.0;
                for (std::size_t r = 0; r < n; ++r) rho += d.xc(r, j) * resid[r];
                rho = rho / nd + col_sq[j] * beta[j];
                const double soft = std::abs(rho) <= lambda_
                                        ? 0.0
                                        : (rho > 0 ? rho - lambda_ : rho + lambda_);
                const double bj = soft / col_sq[j];
                const double delta = bj - beta[j];
                if (delta != 0.0) {
                    for (std::size_t r = 0; r < n; ++r) resid[r] -= d.xc(r, j) * delta;
                    beta[j] = bj;
                    max_delta = std::max(max_delta, std::abs(delta));
                }
            }
            trace_.push_back(objective(d.xc, d.yc, beta));
            if (max_delta < tol_) {
                converged = true;
                break;
            }
        }
        if (!converged) warn("lasso: sweep cap reached before the coordinate updates settled");
        coef_ = beta;
        intercept_ = d.y_mean - dot(d.x_mean, coef_);
    }

private:
    double lambda_;
    int max_sweeps_;
    double tol_;
    std::vector<double> trace_;
    friend class ModelWriter;
    friend class ModelReader;
};

}  // namespace adbench
