#pragma once

// Variational Bayesian neural network. Every weight and bias carries a
// Gaussian posterior N(μ, σ²) with σ = softplus(ρ); the prior is N(0, σ_p²).
// Training maximizes the ELBO
//     E_Q[log P(X|θ)] − KL[Q(θ|z) ‖ P(θ)]
// by minibatch stochastic gradient ascent with the reparameterization
// w = μ + softplus(ρ)·ε, ε ~ N(0,1) (one weight sample per minibatch).
// The KL term is closed form per weight:
//     KL = log(σ_p/σ) + (σ² + (μ−μ_p)²)/(2σ_p²) − ½
// and is weighted by |B|/n per minibatch so a full epoch applies it once.
// Gradient steps use Adam moment estimates on the per-example objective —
// plain constant-step descent either diverges (batch-summed likelihood with
// σ_n = 0.1) or stalls far above the achievable ELBO (norm-clipped).
// A fixed-noise ELBO estimate is recorded per epoch and the best state kept.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "adbench/nets.hpp"
#include "adbench/regressor.hpp"
#include "adbench/rng.hpp"
#include "adbench/stats.hpp"

namespace adbench {

inline double softplus(double x) {
    return x > 30.0 ? x : std::log1p(std::exp(x));
}
inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }
// inverse of softplus, for initializing ρ from a target σ
inline double softplus_inverse(double y) { return std::log(std::expm1(y)); }

// KL[N(μ,σ²) ‖ N(μ_p,σ_p²)], closed form; ≥ 0, = 0 iff the distributions match
inline double gaussian_kl(double mu, double sigma, double mu_p, double sigma_p) {
    return std::log(sigma_p / sigma) +
           (sigma * sigma + (mu - mu_p) * (mu - mu_p)) / (2.0 * sigma_p * sigma_p) - 0.5;
}

struct BnnParams {
    std::vector<int> hidden = {32, 16, 8};  // 4 weight layers with the output
    int epochs = 200;
    int batch = 64;
    double lr = 1e-2;
    double prior_sigma = 1.0;
    double noise_sigma = 0.1;  // fixed Gaussian likelihood scale
    int mc_samples = 1000;     // forward passes behind predict()
    double init_sigma = 0.05;
};

class Bnn : public Regressor {
public:
    // relu hidden units: weight-noise sensitivity must grow with the input
    // scale for the posterior SD to flag extrapolation (saturating units
    // mute it)
    static constexpr net::Activation kActivation = net::Activation::relu;

    explicit Bnn(BnnParams params = {}, std::uint64_t seed = 0)
        : params_(params), seed_(seed) {}

    std::string kind() const override { return "bnn"; }
    const std::vector<double>& loss_trace() const override { return trace_; }
    const net::Layout& layout() const { return layout_; }
    const BnnParams& params() const { return params_; }
    std::uint64_t seed() const { return seed_; }

    // flat parameters: [μ₀..μ_T, ρ₀..ρ_T]
    const std::vector<double>& flat_params() const { return theta_; }
    void set_flat_params(std::span<const double> v) { theta_.assign(v.begin(), v.end()); }

    double kl_total() const {
        const std::size_t t = layout_.total;
        double kl = 0.0;
        for (std::size_t i = 0; i < t; ++i)
            kl += gaussian_kl(theta_[i], softplus(theta_[t + i]), 0.0, params_.prior_sigma);
        return kl;
    }

    // Negative ELBO estimate for a batch with a FIXED noise vector ε (one ε
    // per weight). Deterministic in (θ, ε): the finite-difference gradient
    // check differentiates exactly this. kl_weight scales the KL term
    // (|B|/n during minibatch training, 1 for a full-data evaluation).
    double neg_elbo(std::span<const double> theta, const Matrix& x, std::span<const double> y,
                    std::span<const double> eps, double kl_weight) const {
        const std::size_t t = layout_.total;
        std::vector<double> w(t);
        for (std::size_t i = 0; i < t; ++i) w[i] = theta[i] + softplus(theta[t + i]) * eps[i];
        net::Workspace ws;
        const double s2 = params_.noise_sigma * params_.noise_sigma;
        const double log_norm = 0.5 * std::log(2.0 * 3.14159265358979323846 * s2);
        double nll = 0.0;
        for (std::size_t r = 0; r < x.rows; ++r) {
            const double f = net::forward(layout_, w, x.row(r), ws, kActivation);
            const double e = y[r] - f;
            nll += log_norm + e * e / (2.0 * s2);
        }
        double kl = 0.0;
        for (std::size_t i = 0; i < t; ++i)
            kl += gaussian_kl(theta[i], softplus(theta[t + i]), 0.0, params_.prior_sigma);
        return nll + kl_weight * kl;
    }

    // Reverse-mode gradient of neg_elbo w.r.t. θ = (μ, ρ), same ε convention.
    std::vector<double> neg_elbo_grad(std::span<const double> theta, const Matrix& x,
                                      std::span<const double> y, std::span<const double> eps,
                                      double kl_weight) const {
        const std::size_t t = layout_.total;
        std::vector<double> w(t), sig(t);
        for (std::size_t i = 0; i < t; ++i) {
            sig[i] = softplus(theta[t + i]);
            w[i] = theta[i] + sig[i] * eps[i];
        }
        std::vector<double> gw(t, 0.0);
        net::Workspace ws;
        const double s2 = params_.noise_sigma * params_.noise_sigma;
        for (std::size_t r = 0; r < x.rows; ++r) {
            const double f = net::forward(layout_, w, x.row(r), ws, kActivation);
            net::backward(layout_, w, (f - y[r]) / s2, ws, gw, kActivation);
        }
        const double sp2 = params_.prior_sigma * params_.prior_sigma;
        std::vector<double> grad(2 * t);
        for (std::size_t i = 0; i < t; ++i) {
            const double dkl_dmu = theta[i] / sp2;
            const double dkl_dsig = -1.0 / sig[i] + sig[i] / sp2;
            const double dsig_drho = sigmoid(theta[t + i]);
            grad[i] = gw[i] + kl_weight * dkl_dmu;
            grad[t + i] = gw[i] * eps[i] * dsig_drho + kl_weight * dkl_dsig * dsig_drho;
        }
        return grad;
    }

    // n_samples stochastic forward passes per row; per-row noise stream is
    // seeded with seed ⊕ (base_point_id + row), so batch scoring is
    // order-independent and a single-row call reproduces the batch value.
    void mc_predict(const Matrix& x, int n_samples, std::uint64_t seed,
                    std::vector<double>& mean_out, std::vector<double>& sd_out,
                    std::uint64_t base_point_id = 0) const {
        require_fitted();
        if (n_samples < 2) throw InvalidInputError("bnn: n_samples must be ≥ 2");
        const std::size_t t = layout_.total;
        mean_out.assign(x.rows, 0.0);
        sd_out.assign(x.rows, 0.0);
        net::Workspace ws;
        std::vector<double> w(t);
        std::vector<double> draws(static_cast<std::size_t>(n_samples));
        for (std::size_t r = 0; r < x.rows; ++r) {
            Rng rng(seed ^ (base_point_id + r));
            for (int s = 0; s < n_samples; ++s) {
                if (collapsed_) {
                    for (std::size_t i = 0; i < t; ++i) w[i] = theta_[i];
                } else {
                    for (std::size_t i = 0; i < t; ++i)
                        w[i] = theta_[i] + softplus(theta_[t + i]) * rng.next_normal();
                }
                draws[static_cast<std::size_t>(s)] = net::forward(layout_, w, x.row(r), ws, kActivation);
            }
            mean_out[r] = mean(draws);
            sd_out[r] = stddev_sample(draws);
        }
    }

    double mc_sd_one(std::span<const double> x, int n_samples, std::uint64_t seed,
                     std::uint64_t point_id) const {
        Matrix m(1, x.size());
        std::copy(x.begin(), x.end(), m.row(0).begin());
        std::vector<double> mu, sd;
        mc_predict(m, n_samples, seed, mu, sd, point_id);
        return sd[0];
    }

    // test hook: force σ = 0 so forward passes become deterministic at μ
    void set_posterior_collapsed(bool on) { collapsed_ = on; }

    double min_posterior_sigma() const {
        double lo = std::numeric_limits<double>::infinity();
        for (std::size_t i = layout_.total; i < theta_.size(); ++i)
            lo = std::min(lo, softplus(theta_[i]));
        return lo;
    }

    void init_for_input(std::size_t n_in) {
        std::vector<int> sizes;
        sizes.push_back(static_cast<int>(n_in));
        for (int h : params_.hidden) sizes.push_back(h);
        sizes.push_back(1);
        layout_ = net::Layout::make(sizes);
        const std::size_t t = layout_.total;
        theta_.assign(2 * t, 0.0);
        Rng rng(mix_seed(seed_, 0xB2B2));
        const double rho0 = softplus_inverse(params_.init_sigma);
        for (std::size_t k = 0; k < layout_.n_layers(); ++k) {
            const double scale = 1.0 / std::sqrt(static_cast<double>(layout_.sizes[k]));
            for (std::size_t i = layout_.w_off[k]; i < layout_.b_off[k]; ++i)
                theta_[i] = rng.normal(0.0, scale);
        }
        for (std::size_t i = 0; i < t; ++i) theta_[t + i] = rho0;
    }

protected:
    void do_fit(const Dataset& train) override {
        init_for_input(train.n_features());
        const std::size_t n = train.n_rows();
        const std::size_t t = layout_.total;
        const auto batch = static_cast<std::size_t>(std::max(1, params_.batch));

        Rng rng(mix_seed(seed_, 0xE1B0));
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::vector<double> eps(t);
        Matrix xb;
        std::vector<double> yb;

        // Adam state
        std::vector<double> m1(theta_.size(), 0.0), m2(theta_.size(), 0.0);
        const double beta1 = 0.9, beta2 = 0.999, adam_eps = 1e-8;
        long step = 0;

        // fixed-noise evaluation so epoch traces are comparable; this runs
        // over the full training set every epoch and dominates fit cost, so
        // the sample count stays small
        const int eval_samples = 4;
        std::vector<std::vector<double>> eval_eps(eval_samples, std::vector<double>(t));
        {
            Rng erng(mix_seed(seed_, 0xE7A1));
            for (auto& e : eval_eps)
                for (auto& v : e) v = erng.next_normal();
        }
        auto eval_neg_elbo = [&] {
            double s = 0.0;
            for (const auto& e : eval_eps)
                s += neg_elbo(theta_, train.features, train.target, e, 1.0);
            return s / eval_samples;
        };

        trace_.clear();
        double best_loss = eval_neg_elbo();
        std::vector<double> best = theta_;
        trace_.push_back(best_loss);

        for (int epoch = 0; epoch < params_.epochs; ++epoch) {
            rng.shuffle(order);
            for (std::size_t start = 0; start < n; start += batch) {
                const std::size_t stop = std::min(n, start + batch);
                const std::size_t m = stop - start;
                xb = Matrix(m, train.n_features());
                yb.resize(m);
                for (std::size_t k = 0; k < m; ++k) {
                    const auto r = order[start + k];
                    std::copy(train.features.row(r).begin(), train.features.row(r).end(),
                              xb.row(k).begin());
                    yb[k] = train.target[r];
                }
                for (auto& v : eps) v = rng.next_normal();
                const double kl_w = static_cast<double>(m) / static_cast<double>(n);
                auto grad = neg_elbo_grad(theta_, xb, yb, eps, kl_w);
                for (auto& g : grad) g /= static_cast<double>(m);  // per-example objective
                ++step;
                const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(step));
                const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(step));
                for (std::size_t i = 0; i < theta_.size(); ++i) {
                    m1[i] = beta1 * m1[i] + (1.0 - beta1) * grad[i];
                    m2[i] = beta2 * m2[i] + (1.0 - beta2) * grad[i] * grad[i];
                    theta_[i] -=
                        params_.lr * (m1[i] / bc1) / (std::sqrt(m2[i] / bc2) + adam_eps);
                }
            }
            const double epoch_loss = eval_neg_elbo();
            if (!std::isfinite(epoch_loss))
                throw DivergedTrainingError("bnn: non-finite ELBO at epoch " +
                                            std::to_string(epoch));
            trace_.push_back(epoch_loss);
            if (epoch_loss < best_loss) {
                best_loss = epoch_loss;
                best = theta_;
            }
        }
        theta_ = std::move(best);
    }

    std::vector<double> do_predict(const Matrix& x) const override {
        // point prediction = MC sample mean under the model's own seed
        std::vector<double> mu, sd;
        mc_predict(x, params_.mc_samples, mix_seed(seed_, 0x9D1C), mu, sd, 0);
        return mu;
    }

private:
    BnnParams params_;
    std::uint64_t seed_ = 0;
    net::Layout layout_;
    std::vector<double> theta_;  // [μ | ρ]
    std::vector<double> trace_;
    bool collapsed_ = false;

    friend class ModelWriter;
    friend class ModelReader;
};

}  // namespace adbench
