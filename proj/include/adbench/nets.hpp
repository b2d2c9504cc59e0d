#pragma once

// Shared feed-forward machinery for the MLP and the BNN: a flat parameter
// layout (weights then biases per layer) plus reverse-mode accumulation.
// Hidden activations are tanh or relu, the single output unit is linear.
// Keeping parameters in one flat vector makes finite-difference
// verification and the BNN's reparameterization chain rule straightforward.

#include <cassert>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace adbench::net {

enum class Activation { tanh, relu };

struct Layout {
    std::vector<int> sizes;            // [n_in, hidden..., 1]
    std::vector<std::size_t> w_off;    // per weight layer
    std::vector<std::size_t> b_off;
    std::size_t total = 0;

    static Layout make(std::vector<int> sizes) {
        Layout l;
        l.sizes = std::move(sizes);
        std::size_t off = 0;
        for (std::size_t k = 0; k + 1 < l.sizes.size(); ++k) {
            l.w_off.push_back(off);
            off += static_cast<std::size_t>(l.sizes[k]) * static_cast<std::size_t>(l.sizes[k + 1]);
            l.b_off.push_back(off);
            off += static_cast<std::size_t>(l.sizes[k + 1]);
        }
        l.total = off;
        return l;
    }

    std::size_t n_layers() const { return w_off.size(); }
    // weight (layer k, out unit i, in unit j) at w_off[k] + i*sizes[k] + j
};

// Per-row activations. acts[0] = input copy; acts[k+1] = layer-k output
// (tanh applied on hidden layers, linear on the last).
struct Workspace {
    std::vector<std::vector<double>> acts;
    std::vector<std::vector<double>> deltas;
};

inline double forward(const Layout& l, std::span<const double> params,
                      std::span<const double> x, Workspace& ws,
                      Activation act = Activation::tanh) {
    const std::size_t nl = l.n_layers();
    ws.acts.resize(nl + 1);
    ws.acts[0].assign(x.begin(), x.end());
    for (std::size_t k = 0; k < nl; ++k) {
        const auto n_in = static_cast<std::size_t>(l.sizes[k]);
        const auto n_out = static_cast<std::size_t>(l.sizes[k + 1]);
        auto& out = ws.acts[k + 1];
        out.assign(n_out, 0.0);
        const double* w = params.data() + l.w_off[k];
        const double* b = params.data() + l.b_off[k];
        const auto& in = ws.acts[k];
        for (std::size_t i = 0; i < n_out; ++i) {
            double s = b[i];
            const double* wi = w + i * n_in;
            for (std::size_t j = 0; j < n_in; ++j) s += wi[j] * in[j];
            if (k + 1 == nl) out[i] = s;
            else out[i] = act == Activation::tanh ? std::tanh(s) : std::max(0.0, s);
        }
    }
    return ws.acts[nl][0];
}

// Accumulates dL/dparams into grad given dL/doutput for the row last passed
// through forward() with this workspace.
inline void backward(const Layout& l, std::span<const double> params, double d_out,
                     Workspace& ws, std::span<double> grad,
                     Activation act = Activation::tanh) {
    const std::size_t nl = l.n_layers();
    ws.deltas.resize(nl + 1);
    ws.deltas[nl].assign(1, d_out);
    for (std::size_t k = nl; k-- > 0;) {
        const auto n_in = static_cast<std::size_t>(l.sizes[k]);
        const auto n_out = static_cast<std::size_t>(l.sizes[k + 1]);
        const double* w = params.data() + l.w_off[k];
        double* gw = grad.data() + l.w_off[k];
        double* gb = grad.data() + l.b_off[k];
        const auto& in = ws.acts[k];
        const auto& out = ws.acts[k + 1];
        auto& delta = ws.deltas[k + 1];
        // tanh'(s) = 1 − tanh(s)²; relu'(s) = [s > 0]; output layer is linear
        if (k + 1 != nl) {
            if (act == Activation::tanh)
                for (std::size_t i = 0; i < n_out; ++i) delta[i] *= 1.0 - out[i] * out[i];
            else
                for (std::size_t i = 0; i < n_out; ++i) delta[i] *= out[i] > 0.0 ? 1.0 : 0.0;
        }
        auto& prev = ws.deltas[k];
        prev.assign(n_in, 0.0);
        for (std::size_t i = 0; i < n_out; ++i) {
            const double di = delta[i];
            gb[i] += di;
            const double* wi = w + i * n_in;
            double* gwi = gw + i * n_in;
            for (std::size_t j = 0; j < n_in; ++j) {
                gwi[j] += di * in[j];
                prev[j] += di * wi[j];
            }
        }
    }
}

}  // namespace adbench::net
