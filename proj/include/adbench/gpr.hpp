#pragma once

// Gaussian process regression with a unit-signal RBF kernel
//     k(x, x') = exp(−‖x − x'‖² / (2γ²))
// and a zero prior mean. Hyperparameters (γ, α) come from a deterministic
// log-spaced grid search maximizing the log marginal likelihood
//     LML = −½ yᵀ(K+αI)⁻¹y − ½ log det(K+αI) − (n/2) log 2π
// with exact ties broken toward the larger α. The kernel matrix is built
// once per γ and refactored per α; failed factorizations escalate a diagonal
// jitter up to 1e-4 before the grid point is skipped.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "adbench/linalg.hpp"
#include "adbench/regressor.hpp"

namespace adbench {

struct GprParams {
    std::vector<double> gamma_grid;  // empty → 10^{−2..2}, 9 points
    std::vector<double> alpha_grid;  // empty → 10^{−6..0}, 7 points

    static std::vector<double> log_grid(double lo_exp, double hi_exp, int points) {
        std::vector<double> g(static_cast<std::size_t>(points));
        for (int i = 0; i < points; ++i)
            g[static_cast<std::size_t>(i)] =
                std::pow(10.0, lo_exp + (hi_exp - lo_exp) * i / (points - 1));
        return g;
    }
    std::vector<double> gammas() const {
        return gamma_grid.empty() ? log_grid(-2.0, 2.0, 9) : gamma_grid;
    }
    std::vector<double> alphas() const {
        return alpha_grid.empty() ? log_grid(-6.0, 0.0, 7) : alpha_grid;
    }
};

class Gpr : public Regressor {
public:
    explicit Gpr(GprParams params = {}) : params_(params) {}
    // fixed hyperparameters, no grid search (α = 0 allowed)
    Gpr(double gamma, double alpha) : fixed_(true), gamma_(gamma), alpha_(alpha) {}

    std::string kind() const override { return "gpr"; }
    double gamma() const { return gamma_; }
    double alpha() const { return alpha_; }
    double lml() const { return lml_; }

    static Matrix rbf_kernel(const Matrix& a, const Matrix& b, double gamma) {
        Matrix k(a.rows, b.rows);
        const double inv = 1.0 / (2.0 * gamma * gamma);
        for (std::size_t i = 0; i < a.rows; ++i)
            for (std::size_t j = 0; j < b.rows; ++j)
                k(i, j) = std::exp(-squared_distance(a.row(i), b.row(j)) * inv);
        return k;
    }

    // (mean, variance) at each query row; variance = k(x,x) − ‖L⁻¹k_*‖²,
    // clamped at 0 (warn when the negative excursion exceeds 1e-9)
    void predict_var(const Matrix& x, std::vector<double>& mean_out,
                     std::vector<double>& var_out) const {
        require_fitted();
        mean_out.assign(x.rows, 0.0);
        var_out.assign(x.rows, 0.0);
        std::vector<double> kstar(train_x_.rows);
        for (std::size_t r = 0; r < x.rows; ++r) {
            const double inv = 1.0 / (2.0 * gamma_ * gamma_);
            for (std::size_t i = 0; i < train_x_.rows; ++i)
                kstar[i] = std::exp(-squared_distance(x.row(r), train_x_.row(i)) * inv);
            mean_out[r] = dot(kstar, alpha_vector_);
            const auto v = forward_subst(chol_, kstar);
            double var = 1.0 - dot(v, v);
            if (var < -1e-9)
                warn("gpr: predictive variance clamped from " + std::to_string(var));
            var_out[r] = std::max(0.0, var);
        }
    }

    double var_one(std::span<const double> x) const {
        Matrix m(1, x.size());
        std::copy(x.begin(), x.end(), m.row(0).begin());
        std::vector<double> mu, var;
        predict_var(m, mu, var);
        return var[0];
    }

protected:
    void do_fit(const Dataset& train) override {
        train_x_ = train.features;
        const std::size_t n = train.n_rows();
        const double log2pi = std::log(2.0 * 3.14159265358979323846);

        struct Candidate {
            double lml = -std::numeric_limits<double>::infinity();
            double gamma = 0.0, alpha = 0.0, jitter = 0.0;
            Matrix chol;
            bool valid = false;
        } best;

        const auto gammas = fixed_ ? std::vector<double>{gamma_} : params_.gammas();
        const auto alphas = fixed_ ? std::vector<double>{alpha_} : params_.alphas();
        for (const double g : gammas)
            if (!(g > 0.0)) throw InvalidInputError("gpr: length scale must be positive");
        for (const double a : alphas)
            if (a < 0.0) throw InvalidInputError("gpr: noise level must be nonnegative");

        for (const double g : gammas) {
            const Matrix k = rbf_kernel(train_x_, train_x_, g);
            for (const double a : alphas) {
                Matrix ka = k;
                for (std::size_t i = 0; i < n; ++i) ka(i, i) += a;
                double jitter = 0.0;
                Matrix l;
                try {
                    l = cholesky_with_jitter(ka, jitter);
                } catch (const CholeskyFailureError&) {
                    continue;  // grid point unusable
                }
                const auto z = forward_subst(l, train.target);
                double logdet = 0.0;
                for (std::size_t i = 0; i < n; ++i) logdet += std::log(l(i, i));
                const double lml = -0.5 * dot(z, z) - logdet -
                                   0.5 * static_cast<double>(n) * log2pi;
                const bool better =
                    lml > best.lml || (lml == best.lml && a > best.alpha);
                if (better) {
                    best = {lml, g, a, jitter, std::move(l), true};
                }
            }
        }
        if (!best.valid)
            throw CholeskyFailureError("gpr: every (γ, α) grid point failed to factorize");

        gamma_ = best.gamma;
        alpha_ = best.alpha;
        jitter_ = best.jitter;
        lml_ = best.lml;
        chol_ = std::move(best.chol);
        alpha_vector_ = cholesky_solve(chol_, train.target);
    }

    std::vector<double> do_predict(const Matrix& x) const override {
        std::vector<double> mu, var;
        predict_var(x, mu, var);
        return mu;
    }

private:
    GprParams params_;
    bool fixed_ = false;
    double gamma_ = 1.0;
    double alpha_ = 0.0;
    double jitter_ = 0.0;
    double lml_ = 0.0;
    Matrix train_x_;
    Matrix chol_;                        // lower factor of K + (α+jitter)I
    std::vector<double> alpha_vector_;   // (K+αI)⁻¹ y

    friend class ModelWriter;
    friend class ModelReader;
};

// Grid LML fit over explicit grids (the spec's free-function form).
inline Gpr gpr_fit_lml(const Dataset& train, const std::vector<double>& gamma_grid,
                       const std::vector<double>& alpha_grid) {
    if (gamma_grid.empty() || alpha_grid.empty())
        throw InvalidInputError("gpr_fit_lml: empty hyperparameter grid");
    GprParams p;
    p.gamma_grid = gamma_grid;
    p.alpha_grid = alpha_grid;
    Gpr model(p);
    model.fit(train);
    return model;
}

}  // namespace adbench
