#pragma once

// Multilayer perceptron regressor: tanh hidden layers, linear output,
// minibatch SGD on half mean-squared error. The per-epoch training loss is
// recorded and the best-so-far weights are checkpointed, so the stored model
// is never worse than any epoch seen.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "adbench/nets.hpp"
#include "adbench/regressor.hpp"
#include "adbench/rng.hpp"

namespace adbench {

struct MlpParams {
    std::vector<int> hidden = {32, 16};
    int epochs = 200;
    int batch = 32;
    double lr = 1e-2;
    double momentum = 0.9;
};

class Mlp : public Regressor {
public:
    explicit Mlp(MlpParams params = {}, std::uint64_t seed = 0)
        : params_(params), seed_(seed) {}

    std::string kind() const override { return "mlp"; }
    const std::vector<double>& loss_trace() const override { return trace_; }

    // flat parameter access for finite-difference gradient verification
    const std::vector<double>& flat_params() const { return weights_; }
    void set_flat_params(std::span<const double> w) { weights_.assign(w.begin(), w.end()); }
    const net::Layout& layout() const { return layout_; }

    // L = (1/2m) Σ (f(x_r) − y_r)²
    double loss(const Matrix& x, std::span<const double> y) const {
        net::Workspace ws;
        double s = 0.0;
        for (std::size_t r = 0; r < x.rows; ++r) {
            const double e = net::forward(layout_, weights_, x.row(r), ws) - y[r];
            s += e * e;
        }
        return s / (2.0 * static_cast<double>(x.rows));
    }

    std::vector<double> loss_grad(const Matrix& x, std::span<const double> y) const {
        std::vector<double> grad(layout_.total, 0.0);
        net::Workspace ws;
        const auto m = static_cast<double>(x.rows);
        for (std::size_t r = 0; r < x.rows; ++r) {
            const double f = net::forward(layout_, weights_, x.row(r), ws);
            net::backward(layout_, weights_, (f - y[r]) / m, ws, grad);
        }
        return grad;
    }

    // test/bench hook: build an unfitted net of a given input width so the
    // gradient check can run on arbitrary random parameter vectors
    void init_for_input(std::size_t n_in) {
        std::vector<int> sizes;
        sizes.push_back(static_cast<int>(n_in));
        for (int h : params_.hidden) sizes.push_back(h);
        sizes.push_back(1);
        layout_ = net::Layout::make(sizes);
        weights_.assign(layout_.total, 0.0);
        Rng rng(mix_seed(seed_, 0x31337));
        for (std::size_t k = 0; k < layout_.n_layers(); ++k) {
            const double scale = 1.0 / std::sqrt(static_cast<double>(layout_.sizes[k]));
            const std::size_t w0 = layout_.w_off[k], b0 = layout_.b_off[k];
            for (std::size_t i = w0; i < b0; ++i) weights_[i] = rng.normal(0.0, scale);
        }
    }

protected:
    void do_fit(const Dataset& train) override {
        init_for_input(train.n_features());
        const std::size_t n = train.n_rows();
        const auto batch = static_cast<std::size_t>(std::max(1, params_.batch));

        trace_.clear();
        std::vector<double> best = weights_;
        double best_loss = loss(train.features, train.target);
        trace_.push_back(best_loss);

        Rng rng(mix_seed(seed_, 0x5D));
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), std::size_t{0});
        net::Workspace ws;
        std::vector<double> grad(layout_.total);
        std::vector<double> velocity(layout_.total, 0.0);

        for (int epoch = 0; epoch < params_.epochs; ++epoch) {
            rng.shuffle(order);
            for (std::size_t start = 0; start < n; start += batch) {
                const std::size_t stop = std::min(n, start + batch);
                const auto m = static_cast<double>(stop - start);
                std::fill(grad.begin(), grad.end(), 0.0);
                for (std::size_t k = start; k < stop; ++k) {
                    const auto r = order[k];
                    const double f = net::forward(layout_, weights_, train.features.row(r), ws);
                    net::backward(layout_, weights_, (f - train.target[r]) / m, ws, grad);
                }
                for (std::size_t i = 0; i < weights_.size(); ++i) {
                    velocity[i] = params_.momentum * velocity[i] - params_.lr * grad[i];
                    weights_[i] += velocity[i];
                }
            }
            const double epoch_loss = loss(train.features, train.target);
            if (!std::isfinite(epoch_loss))
                throw DivergedTrainingError("mlp: non-finite loss at epoch " +
                                            std::to_string(epoch));
            trace_.push_back(epoch_loss);
            if (epoch_loss < best_loss) {
                best_loss = epoch_loss;
                best = weights_;
            }
        }
        if (trace_.back() > best_loss * 1.01 + 1e-12)
            warn("mlp: loss oscillating at epoch cap; keeping best checkpoint");
        weights_ = std::move(best);
    }

    std::vector<double> do_predict(const Matrix& x) const override {
        std::vector<double> out(x.rows);
        net::Workspace ws;
        for (std::size_t r = 0; r < x.rows; ++r)
            out[r] = net::forward(layout_, weights_, x.row(r), ws);
        return out;
    }

private:
    MlpParams params_;
    std::uint64_t seed_;
    net::Layout layout_;
    std::vector<double> weights_;
    std::vector<double> trace_;

    friend class ModelWriter;
    friend class ModelReader;
};

}  // namespace adbench
