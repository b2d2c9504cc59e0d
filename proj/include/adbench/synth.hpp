#pragma once

// Synthetic 1D datasets for smoke runs and the in/out-of-domain experiment:
// training inputs live in [−1, 1]; an extrapolating test set puts half its
// points in [2, 3] where no model has seen data.

#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>

#include "adbench/dataset.hpp"
#include "adbench/rng.hpp"

namespace adbench {

enum class SynthKind { sine, linear, step };

inline SynthKind synth_kind_from_string(const std::string& s) {
    if (s == "sine") return SynthKind::sine;
    if (s == "linear") return SynthKind::linear;
    if (s == "step") return SynthKind::step;
    throw ConfigError("unknown synth kind: " + s);
}

inline const char* to_string(SynthKind k) {
    switch (k) {
        case SynthKind::sine: return "sine";
        case SynthKind::linear: return "linear";
        case SynthKind::step: return "step";
    }
    return "?";
}

namespace detail {

inline double synth_f(SynthKind kind, double x) {
    switch (kind) {
        case SynthKind::sine: return std::sin(2.0 * 3.14159265358979323846 * x);
        case SynthKind::linear: return 2.0 * x + 0.5;
        case SynthKind::step: return x < 0.0 ? -1.0 : 1.0;
    }
    return 0.0;
}

inline Dataset synth_frame(const std::string& name, std::size_t n) {
    Dataset d;
    d.name = name;
    d.features = Matrix(n, 1);
    d.target.resize(n);
    d.feature_names = {"x"};
    d.target_name = "y";
    d.categorical = {false};
    d.levels = {{}};
    d.row_ids.resize(n);
    std::iota(d.row_ids.begin(), d.row_ids.end(), std::size_t{0});
    return d;
}

}  // namespace detail

// n points with x uniform in [x_lo, x_hi], y = f(x) + noise·N(0,1)
inline Dataset make_synth(SynthKind kind, std::size_t n, double noise, std::uint64_t seed,
                          double x_lo = -1.0, double x_hi = 1.0) {
    Dataset d = detail::synth_frame(std::string("synth_") + to_string(kind), n);
    Rng rng(seed);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = rng.uniform(x_lo, x_hi);
        d.features(i, 0) = x;
        d.target[i] = detail::synth_f(kind, x) + noise * rng.next_normal();
    }
    return d;
}

// Test set: all in-range, or (extrapolate) the first half in [−1, 1] and the
// second half in [2, 3].
inline Dataset make_synth_test(SynthKind kind, std::size_t n, double noise, std::uint64_t seed,
                               bool extrapolate) {
    Dataset d = detail::synth_frame(std::string("synth_") + to_string(kind) + "_test", n);
    Rng rng(seed);
    const std::size_t half = n / 2;
    for (std::size_t i = 0; i < n; ++i) {
        const bool out = extrapolate && i >= half;
        const double x = out ? rng.uniform(2.0, 3.0) : rng.uniform(-1.0, 1.0);
        d.features(i, 0) = x;
        d.target[i] = detail::synth_f(kind, x) + noise * rng.next_normal();
    }
    return d;
}

}  // namespace adbench
